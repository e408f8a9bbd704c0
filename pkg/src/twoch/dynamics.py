"""Nonlocal terms, right-hand side and fixed-step RK4 for the Lagrangian system.

The evolved unknowns are stacked as a ``(6, m)`` array in the order
``zeta, Ubar, yxi, Uxi, h, rbar``; ``c`` and ``k`` ride along unchanged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from twoch.errors import BlowUpError, DegenerateStateError
from twoch.kernel import chi_eval, exp_scans, g_eval
from twoch.state import TOL_G, LagrangianState

# Monotonicity slack for y inside Runge-Kutta stages. Near wave breaking a
# stage can overshoot y_xi -> 0 by O(dt**4) and the scans tolerate that.
TOL_STAGE = 1e-6

__all__ = [
    "PQField", "Trajectory", "assemble_PQ", "chi_eval", "evolve", "g_eval",
    "rhs_eval", "rk4_step",
]


@dataclass(frozen=True)
class PQField:
    P: np.ndarray
    Q: np.ndarray


def _pq(y, Ubar, yxi, h, rbar, c, k, dxi, tol=TOL_G):
    dy = np.diff(y)
    if dy.size and dy.min() < -tol:
        i = int(np.argmin(dy))
        raise DegenerateStateError(f"y decreases by {-dy[i]:.3e} between nodes {i} and {i + 1}")
    if c != 0.0:
        chi, chi1, _ = chi_eval(y)
        w = (2.0 * Ubar * Ubar + 4.0 * c * Ubar * chi) * yxi + 2.0 * k * rbar + h
    else:
        chi = chi1 = None
        w = 2.0 * Ubar * Ubar * yxi + 2.0 * k * rbar + h
    left, right = exp_scans(np.ascontiguousarray(y), np.ascontiguousarray(w), dxi)
    P = 0.25 * (left + right) + 0.5 * k * k
    Q = 0.25 * (right - left)
    if c != 0.0:
        g, dg = g_eval(y)
        P = P + c * c * g
        Q = Q + c * c * dg
    return P, Q, chi1


def assemble_PQ(X: LagrangianState) -> PQField:
    """P and Q at every label by two exponential scans (trapezoid weights)."""
    P, Q, _ = _pq(X.y, X.Ubar, X.yxi, X.h, X.rbar, X.c, X.k, X.grid.spacing)
    return PQField(P, Q)


def _rhs(F, xi, c, k, dxi, tol=TOL_G):
    zeta, Ubar, yxi, Uxi, h, rbar = F
    y = zeta + xi
    P, Q, chi1 = _pq(y, Ubar, yxi, h, rbar, c, k, dxi, tol)
    U = Ubar + c * chi_eval(y)[0] if c != 0.0 else Ubar
    a = U * U + 0.5 * k * k - P
    out = np.empty_like(F)
    out[0] = U
    out[1] = -Q - c * chi1 * U if c != 0.0 else -Q
    out[2] = Uxi
    out[3] = 0.5 * h + a * yxi + k * rbar
    out[4] = 2.0 * a * Uxi
    out[5] = -k * Uxi
    return out


def rhs_eval(X: LagrangianState) -> np.ndarray:
    """Time derivatives of ``(zeta, Ubar, yxi, Uxi, h, rbar)`` as a (6, m) array."""
    return _rhs(X.fields(), X.xi, X.c, X.k, X.grid.spacing)


def _check_stage(arr, stage, t):
    if not np.all(np.isfinite(arr)):
        bad = np.argwhere(~np.isfinite(arr))[0]
        raise BlowUpError(
            f"non-finite value in stage {stage} at t = {t:.6g} "
            f"(field {LagrangianState.FIELDS[bad[0]]}, node {bad[1]})",
            stage=stage, t=t)


def _rk4(F, xi, c, k, dxi, dt, t, tol=TOL_STAGE):
    # overflow is reported through BlowUpError, not numpy warnings
    with np.errstate(over="ignore", invalid="ignore"):
        return _rk4_stages(F, xi, c, k, dxi, dt, t, tol)


def _rk4_stages(F, xi, c, k, dxi, dt, t, tol):
    k1 = _rhs(F, xi, c, k, dxi, tol)
    _check_stage(k1, 1, t)
    k2 = _rhs(F + 0.5 * dt * k1, xi, c, k, dxi, tol)
    _check_stage(k2, 2, t)
    k3 = _rhs(F + 0.5 * dt * k2, xi, c, k, dxi, tol)
    _check_stage(k3, 3, t)
    k4 = _rhs(F + dt * k3, xi, c, k, dxi, tol)
    _check_stage(k4, 4, t)
    new = F + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    _check_stage(new, "update", t)
    return new


def rk4_step(X: LagrangianState, dt: float) -> LagrangianState:
    """One classical Runge-Kutta step; no projection onto the constraint set."""
    if not dt > 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    F = _rk4(X.fields(), X.xi, X.c, X.k, X.grid.spacing, dt, X.t)
    return LagrangianState.from_fields(X.grid, F, X.c, X.k, X.t + dt)


@dataclass
class Trajectory:
    """States at the requested output times plus per-step observer records."""

    states: list = field(default_factory=list)
    records: list = field(default_factory=list)

    @property
    def times(self):
        return [s.t for s in self.states]

    @property
    def final(self):
        return self.states[-1]


def _observe(observers, X, traj):
    rec = {"t": X.t}
    for obs in observers:
        rec.update(obs(X))
    traj.records.append(rec)


def evolve(X0: LagrangianState, T: float, dt: float, observers=(),
           output_times=None) -> Trajectory:
    """Integrate from ``X0.t`` to ``X0.t + T`` with fixed steps of ``dt``.

    Steps are shortened so that each output time (measured from the start) is
    hit exactly; ``output_times`` defaults to ``(0, T)``. Observers are
    callables ``X -> dict`` sampled at the start and after every step.
    """
    if not dt > 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    if not T >= 0.0:
        raise ValueError(f"T must be nonnegative, got {T}")
    if output_times is None:
        output_times = (0.0, T)
    outs = sorted(set(float(s) for s in output_times))
    if outs and (outs[0] < 0.0 or outs[-1] > T):
        raise ValueError("output times must lie in [0, T]")
    traj = Trajectory()
    t0 = X0.t
    xi, c, k, dxi = X0.xi, X0.c, X0.k, X0.grid.spacing
    F = X0.fields()
    _observe(observers, X0, traj)
    if outs and outs[0] == 0.0:
        traj.states.append(X0)
    marks = [s for s in outs if s > 0.0]
    if not marks or marks[-1] < T:
        marks.append(T)
    keep = set(outs)
    seg_start = 0.0
    try:
        for mark in marks:
            length = mark - seg_start
            nsteps = max(1, math.ceil(length / dt - 1e-9)) if length > 0.0 else 0
            for j in range(nsteps):
                s_now = seg_start + j * dt
                step = dt if j < nsteps - 1 else mark - s_now
                F = _rk4(F, xi, c, k, dxi, step, t0 + s_now)
                t_new = t0 + (mark if j == nsteps - 1 else seg_start + (j + 1) * dt)
                if observers:
                    _observe(observers, LagrangianState.from_fields(X0.grid, F, c, k, t_new), traj)
            seg_start = mark
            if mark in keep:
                traj.states.append(LagrangianState.from_fields(X0.grid, F.copy(), c, k, t0 + mark))
    except BlowUpError as err:
        err.trajectory = traj
        raise
    return traj
