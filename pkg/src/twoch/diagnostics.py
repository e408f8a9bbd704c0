"""Invariant residuals, energy, regularity monitoring and state comparison."""

from __future__ import annotations

import numpy as np

from twoch._numerics import kink_nodes
from twoch.dynamics import assemble_PQ
from twoch.errors import DomainError, GridMismatchError, UnsupportedParameterError
from twoch.state import TOL_G, EulerianState, LagrangianState, ResidualReport

JUMP_RATIO = 8.0


def _jump_nodes(f):
    """Both ends of isolated spikes in the first difference of ``f``."""
    n = len(f)
    mask = np.zeros(n, dtype=bool)
    d1 = np.abs(np.diff(f))
    floor = 1e-10 * (1.0 + np.max(np.abs(f)))
    left = np.concatenate(([0.0], d1[:-1]))
    right = np.concatenate((d1[1:], [0.0]))
    spike = (d1 > floor) & (d1 > JUMP_RATIO * np.maximum(left, right))
    mask[:-1] |= spike
    mask[1:] |= spike
    return mask


def rough_nodes(X: LagrangianState, width: int = 2) -> np.ndarray:
    """Nodes within ``width`` of a jump or kink in ``y_xi, U_xi, h, rbar``.

    Central differences of P and Q are only second-order where those fields
    are smooth across the three-point stencil.
    """
    mask = np.zeros(X.grid.n, dtype=bool)
    for f in (X.yxi, X.Uxi, X.h, X.rbar):
        mask |= _jump_nodes(f) | kink_nodes(f)
    out = mask.copy()
    for s in range(1, width + 1):
        out[s:] |= mask[:-s]
        out[:-s] |= mask[s:]
    return out


def pq_identity_defects(X: LagrangianState, exclude_rough: bool = True):
    """Nodewise defects of ``Q_xi = -h/2 - (U^2 + k^2/2 - P) y_xi - k rbar``
    and ``P_xi = Q y_xi`` using central differences.

    Returns ``(q_defect, p_defect, nodes)`` over interior nodes, skipping
    stencils that straddle a jump or kink when ``exclude_rough`` is set.
    """
    pq = assemble_PQ(X)
    P, Q = pq.P, pq.Q
    d = X.grid.spacing
    U = X.U
    a = U * U + 0.5 * X.k * X.k - P
    q_exact = -0.5 * X.h - a * X.yxi - X.k * X.rbar
    p_exact = Q * X.yxi
    dq = (Q[2:] - Q[:-2]) / (2.0 * d)
    dp = (P[2:] - P[:-2]) / (2.0 * d)
    nodes = np.arange(1, X.grid.n - 1)
    qd = np.abs(dq - q_exact[1:-1])
    pd = np.abs(dp - p_exact[1:-1])
    if exclude_rough:
        keep = ~rough_nodes(X)[1:-1]
        qd, pd, nodes = qd[keep], pd[keep], nodes[keep]
    return qd, pd, nodes


def invariant_residuals(X: LagrangianState, X0: LagrangianState,
                        tol: float = TOL_G, pq: bool = True) -> ResidualReport:
    """Constraint, sign, r-conservation, monotonicity and P/Q residuals.

    Flags cover the algebraic invariants only; the P/Q entries are
    discretisation errors of size O(dxi**2) and are reported unflagged.
    """
    if X.grid != X0.grid:
        raise GridMismatchError("state and reference live on different label grids")
    xi = X.xi
    rep = ResidualReport(t=X.t)
    rep.add("g_defect", np.abs(X.yxi * X.h - X.Uxi**2 - X.rbar**2), xi)
    rep.add("neg_yxi", np.maximum(0.0, -X.yxi), xi)
    rep.add("neg_h", np.maximum(0.0, -X.h), xi)
    rep.add("r_defect", np.abs(X.r - X0.r), xi)
    rep.add("monotonicity", np.maximum(0.0, -np.diff(X.y + X.H)), xi[1:])
    for name in ("g_defect", "neg_yxi", "neg_h", "r_defect", "monotonicity"):
        rep.flags[name] = rep[name] <= tol
    if pq:
        qd, pd, nodes = pq_identity_defects(X)
        rep.add("q_identity", qd, xi[nodes])
        rep.add("p_identity", pd, xi[nodes])
    return rep


def energy_lagrangian(X: LagrangianState) -> float:
    """Trapezoid of ``U**2 y_xi + h`` over the label grid (c = 0 only)."""
    if X.c != 0.0:
        raise UnsupportedParameterError(
            "energy integral diverges when the right asymptote c is nonzero", c=X.c)
    return float(np.trapezoid(X.U**2 * X.yxi + X.h, dx=X.grid.spacing))


def _strip(X0: LagrangianState, region):
    x0, x1 = region
    y = X0.y
    if not (y[0] <= x0 < x1 <= y[-1]):
        raise DomainError(f"region [{x0}, {x1}] is not inside the range of y(0) [{y[0]}, {y[-1]}]")
    # last label with y <= x0 and first label with y >= x1, by binary search
    i0 = int(np.searchsorted(y, x0, side="right")) - 1
    i1 = int(np.searchsorted(y, x1, side="left"))
    return i0, min(i1, X0.grid.n - 1)


def regularity_observer(X0: LagrangianState, region):
    """Observer giving min ``y_xi`` on the characteristic strip over ``region``.

    Along with it, ``bound`` is the lower bound for ``y_xi`` implied by
    ``r**2 <= y_xi (h + 2k|rbar| + k**2 y_xi)`` and ``r(t) = r(0)``:
    ``min r0**2 / max(h + 2k|rbar| + k**2 y_xi)`` on the strip.
    """
    i0, i1 = _strip(X0, region)
    r0sq = X0.r[i0:i1 + 1] ** 2
    c1sq = float(r0sq.min())

    def observe(X):
        s = slice(i0, i1 + 1)
        denom = X.h[s] + 2.0 * abs(X.k) * np.abs(X.rbar[s]) + X.k * X.k * X.yxi[s]
        top = float(denom.max())
        return {
            "strip_min_yxi": float(X.yxi[s].min()),
            "strip_min_r2": c1sq,
            "strip_bound": c1sq / top if top > 0.0 else float("inf"),
        }

    return observe


def regularity_monitor(trajectory, region):
    """Rows ``(t, min y_xi, min r0**2, bound)`` for each snapshot on the strip."""
    states = getattr(trajectory, "states", trajectory)
    if not states:
        raise ValueError("empty trajectory")
    obs = regularity_observer(states[0], region)
    rows = []
    for X in states:
        rec = obs(X)
        rows.append((X.t, rec["strip_min_yxi"], rec["strip_min_r2"], rec["strip_bound"]))
    return rows


def residual_observer(X0: LagrangianState, pq: bool = False):
    """Observer recording the constraint and r-conservation defects and min y_xi."""

    def observe(X):
        out = {
            "g_defect": float(np.max(np.abs(X.yxi * X.h - X.Uxi**2 - X.rbar**2))),
            "r_defect": float(np.max(np.abs(X.r - X0.r))),
            "min_yxi": float(X.yxi.min()),
        }
        if pq:
            qd, pd, _ = pq_identity_defects(X)
            out["pq_defect"] = float(max(qd.max(initial=0.0), pd.max(initial=0.0)))
        return out

    return observe


def energy_observer(X):
    return {"energy": energy_lagrangian(X)} if X.c == 0.0 else {}


def sup_distance(a: EulerianState, b: EulerianState) -> float:
    """Max nodal difference of the velocities."""
    if a.grid != b.grid:
        raise GridMismatchError("states live on different x-grids")
    return float(np.max(np.abs(a.u - b.u)))
