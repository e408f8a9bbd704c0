"""Transforms between Eulerian data and Lagrangian labels, and relabelings.

``to_lagrangian`` inverts ``x -> x + mu((-inf, x))``. The absolutely continuous
part of ``mu`` is taken as ``u_x**2 + rhobar**2`` of a C^1 reconstruction of
the samples: on each x-cell, ``u`` is the cubic Hermite interpolant of the
nodal values and slopes and ``rhobar`` is linear. The cumulative map is then
a quintic per cell and each label is located by a safeguarded Newton solve.
Atoms are exact jumps of that map, i.e. plateaus of ``y``. Because ``y_xi``,
``U_xi`` and ``rbar`` are the exact derivatives of the reconstruction at each
label, the output satisfies ``y_xi*h = U_xi**2 + rbar**2`` and ``y_xi + h = 1``
to roundoff.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from twoch._numerics import (
    cumtrapz,
    hermite_eval,
    linear_eval,
    nodal_slopes,
)
from twoch.errors import (
    CoverageError,
    DegenerateStateError,
    GridMismatchError,
    InvalidRelabelingError,
    MalformedStateError,
)
from twoch.kernel import chi_eval
from twoch.state import (
    TOL_G,
    EulerianState,
    GridSpec,
    LagrangianState,
    RadonMeasure,
    RelabelingMap,
)

EPS_PLATEAU = 1e-8
TOL_PLATEAU_U = 1e-6
COVER_REL = 1e-5


class _Reconstruction:
    """Per-cell polynomials of u, u_x, rhobar and the cumulative measure."""

    def __init__(self, state: EulerianState):
        g = state.grid
        dx = g.spacing
        self.grid = g
        self.dx = dx
        u = state.u
        rb = state.rhobar
        s_minus, s_plus = nodal_slopes(u, dx)
        u0, u1 = u[:-1], u[1:]
        m0, m1 = s_plus[:-1] * dx, s_minus[1:] * dx
        # u on a cell as a0 + a1 t + a2 t^2 + a3 t^3, t in [0, 1]
        self.a = np.stack([u0, m0, -3 * u0 - 2 * m0 + 3 * u1 - m1, 2 * u0 + m0 - 2 * u1 + m1])
        # u_x = q0 + q1 t + q2 t^2
        self.q = np.stack([self.a[1], 2 * self.a[2], 3 * self.a[3]]) / dx
        self.b = np.stack([rb[:-1], rb[1:] - rb[:-1]])
        q0, q1, q2 = self.q
        b0, b1 = self.b
        e = np.stack([
            q0 * q0 + b0 * b0,
            2 * q0 * q1 + 2 * b0 * b1,
            q1 * q1 + 2 * q0 * q2 + b1 * b1,
            2 * q1 * q2,
            q2 * q2,
        ])
        self.e = e
        # E(t) = int_0^t e, so the cell mass is dx * E(1)
        self.E = np.vstack([np.zeros(g.n - 1), e / np.arange(1, 6)[:, None]])
        cell_mass = dx * self.E.sum(axis=0)
        self.cum = np.concatenate(([0.0], np.cumsum(cell_mass)))
        self.x = g.nodes
        self.G_nodes = self.x + self.cum
        self.u = u

    def _locate(self, x):
        t = (np.asarray(x, dtype=float) - self.grid.lo) / self.dx
        i = np.clip(np.floor(t).astype(np.int64), 0, self.grid.n - 2)
        return i, np.clip(t - i, 0.0, 1.0)

    @staticmethod
    def _poly(coef, i, t):
        out = np.zeros_like(t)
        for row in coef[::-1]:
            out = out * t + row[i]
        return out

    def G(self, x):
        """Continuous part of ``x + mu((-inf, x))``."""
        i, t = self._locate(x)
        return self.G_nodes[i] + self.dx * (t + self._poly(self.E, i, t))

    def invert(self, target):
        """Solve ``G(x) = target`` for targets inside ``[lo, G(hi)]``."""
        G = self.G_nodes
        i = np.clip(np.searchsorted(G, target, side="right") - 1, 0, self.grid.n - 2)
        tau = (target - G[i]) / self.dx
        span = 1.0 + self.E[:, i].sum(axis=0)
        lo = np.zeros_like(tau)
        hi = np.ones_like(tau)
        t = np.clip(tau / span, 0.0, 1.0)
        for _ in range(60):
            F = t + self._poly(self.E, i, t) - tau
            dF = 1.0 + self._poly(self.e, i, t)
            lo = np.where(F < 0.0, t, lo)
            hi = np.where(F > 0.0, t, hi)
            t_new = t - F / dF
            bad = (t_new <= lo) | (t_new >= hi)
            t_new = np.where(bad, 0.5 * (lo + hi), t_new)
            done = np.all(np.abs(t_new - t) <= 4e-16)
            t = t_new
            if done:
                break
        return i, t

    def fields_at(self, i, t):
        u = self._poly(self.a, i, t)
        ux = self._poly(self.q, i, t)
        rb = self._poly(self.b, i, t)
        return u, ux, rb

    def u_at(self, x):
        i, t = self._locate(x)
        return self._poly(self.a, i, t)


def _atom_plateaus(rec, atoms):
    """Label intervals ``[start, end]`` occupied by each atom."""
    out = []
    before = 0.0
    for p, m in atoms:
        start = float(rec.G(np.array([p]))[0]) + before
        out.append((p, m, start, start + m))
        before += m
    return out


def label_grid(state: EulerianState, m: int | None = None) -> GridSpec:
    """Label grid ``[x_lo, x_hi + mu(R)]`` onto which ``to_lagrangian`` maps."""
    rec = _Reconstruction(state)
    total = rec.G_nodes[-1] + state.mu.atom_mass
    return GridSpec(state.grid.lo, float(total), m or state.grid.n)


def to_lagrangian(state: EulerianState, xi_grid: GridSpec | None = None) -> LagrangianState:
    """Lagrangian representative of ``(u, rho, mu)`` on the slice ``y + H = id``."""
    rec = _Reconstruction(state)
    g = state.grid
    if xi_grid is None:
        xi_grid = GridSpec(g.lo, float(rec.G_nodes[-1] + state.mu.atom_mass), g.n)
    for p, _ in state.mu.atoms:
        if not g.lo <= p <= g.hi:
            raise CoverageError(f"atom at {p} lies outside the x-grid [{g.lo}, {g.hi}]")
    G_end = rec.G_nodes[-1] + state.mu.atom_mass
    slack = 1e-9 * (1.0 + abs(g.lo) + abs(G_end))
    if xi_grid.lo > g.lo + slack or xi_grid.hi < G_end - slack:
        raise CoverageError(
            f"label grid [{xi_grid.lo}, {xi_grid.hi}] does not cover "
            f"[{g.lo}, {G_end}] (x-range plus total mass)")

    xi = xi_grid.nodes
    m = xi_grid.n
    y = np.empty(m)
    U = np.empty(m)
    yxi = np.ones(m)
    h = np.zeros(m)
    Uxi = np.zeros(m)
    rbar = np.zeros(m)

    reduced = xi.copy()
    on_atom = np.zeros(m, dtype=bool)
    for p, mass, start, end in _atom_plateaus(rec, state.mu.atoms):
        inside = (xi >= start) & (xi <= end)
        on_atom |= inside
        y[inside] = p
        U[inside] = rec.u_at(np.full(inside.sum(), p))
        yxi[inside] = 0.0
        h[inside] = 1.0
        reduced = np.where(xi > end, reduced - mass, reduced)

    G_hi = rec.G_nodes[-1]
    left = ~on_atom & (reduced < g.lo)
    right = ~on_atom & (reduced > G_hi)
    mid = ~on_atom & ~left & ~right
    y[left] = reduced[left]
    U[left] = state.u[0]
    y[right] = g.hi + (reduced[right] - G_hi)
    U[right] = state.u[-1]

    i, t = rec.invert(reduced[mid])
    u_m, ux_m, rb_m = rec.fields_at(i, t)
    e = ux_m * ux_m + rb_m * rb_m
    yx = 1.0 / (1.0 + e)
    y[mid] = rec.x[i] + t * rec.dx
    U[mid] = u_m
    yxi[mid] = yx
    h[mid] = e * yx
    Uxi[mid] = ux_m * yx
    rbar[mid] = rb_m * yx

    Ubar = U - state.c * chi_eval(y)[0] if state.c != 0.0 else U
    return LagrangianState(xi_grid, y - xi, Ubar, yxi, Uxi, h, rbar,
                           c=state.c, k=state.k, t=0.0)


def _plateau_runs(mask):
    """Start/stop index pairs of maximal runs of True in ``mask``."""
    if not mask.any():
        return []
    d = np.diff(np.concatenate(([0], mask.astype(np.int8), [0])))
    starts = np.flatnonzero(d == 1)
    stops = np.flatnonzero(d == -1)
    return list(zip(starts, stops))


def _plateau_mass(X, y, a, b, pos):
    """Integral of ``h`` over the label interval that ``y`` maps onto ``pos``.

    The interval ends are placed between the plateau nodes ``a..b-1`` and
    their regular neighbours by extrapolating ``y`` linearly from each
    neighbour, so the mass is not quantised to whole label cells.
    """
    d = X.grid.spacing
    h, yxi = X.h, X.yxi
    mass = float(np.trapezoid(h[a:b], dx=d)) if b - a > 1 else 0.0
    if a > 0 and yxi[a - 1] > 0.0:
        gap = np.clip((pos - y[a - 1]) / yxi[a - 1], 0.0, d)
        mass += h[a] * (d - gap)
    if b < X.grid.n and yxi[b] > 0.0:
        gap = np.clip((y[b] - pos) / yxi[b], 0.0, d)
        mass += h[b - 1] * (d - gap)
    return mass


def from_lagrangian(X: LagrangianState, x_grid: GridSpec, *,
                    eps_plateau: float = EPS_PLATEAU,
                    tol_plateau: float = TOL_PLATEAU_U,
                    cover_tol: float | None = None) -> EulerianState:
    """Eulerian image ``(u, rho, mu)`` of a Lagrangian state on ``x_grid``.

    Runs of labels with ``y_xi <= eps_plateau`` become atoms whose mass is the
    quadrature of ``h`` over the run; elsewhere ``mu`` and ``rhobar`` are the
    densities ``h/y_xi`` and ``rbar/y_xi`` pushed forward by ``y``. Gaps of up
    to ``cover_tol`` (default ``1e-5`` of the grid length) between the
    characteristics and the grid ends are filled with the end values.
    """
    if cover_tol is None:
        cover_tol = COVER_REL * (x_grid.hi - x_grid.lo)
    y = np.maximum.accumulate(X.y)
    U = X.U
    if y[0] > x_grid.lo + cover_tol or y[-1] < x_grid.hi - cover_tol:
        raise CoverageError(
            f"characteristics cover [{y[0]}, {y[-1]}], not the x-grid "
            f"[{x_grid.lo}, {x_grid.hi}]")
    plateau = X.yxi <= eps_plateau
    keep = ~plateau
    atoms = []
    for a, b in _plateau_runs(plateau):
        spread = float(np.ptp(U[a:b]))
        if spread > tol_plateau:
            raise DegenerateStateError(
                f"U varies by {spread:.3e} on the plateau at y = {y[a]:.6g}")
        pos = float(np.mean(y[a:b]))
        mass = _plateau_mass(X, y, a, b, pos)
        keep[a] = True
        if mass <= 0.0:
            continue
        if atoms and pos <= atoms[-1][0]:
            atoms[-1] = (atoms[-1][0], atoms[-1][1] + mass)
        else:
            atoms.append((pos, mass))
    x = x_grid.nodes
    u = np.interp(x, y[keep], U[keep])
    reg = ~plateau
    yr = y[reg]
    dens = np.interp(x, yr, X.h[reg] / X.yxi[reg])
    rb = np.interp(x, yr, X.rbar[reg] / X.yxi[reg])
    mu = RadonMeasure(x_grid, np.maximum(dens, 0.0), tuple(atoms))
    return EulerianState(x_grid, u, X.k + rb, mu, c=X.c, k=X.k)


def _compose(X: LagrangianState, s, jac) -> LagrangianState:
    """Sample ``X`` at labels ``s`` and weight densities by ``jac``.

    ``y`` and ``U`` use cubic Hermite interpolation with their derivative
    fields. The pointwise fields are interpolated linearly in the variables
    ``(yxi + h, (yxi - h)/2, Uxi, rbar)``; the last three form a vector whose
    length must equal half the first, and rescaling it to that length keeps
    ``y_xi*h = U_xi**2 + rbar**2`` exact after resampling.
    """
    g = X.grid
    lo, d = g.lo, g.spacing
    y_s, _ = hermite_eval(lo, d, X.y, X.yxi, s)
    U_s, _ = hermite_eval(lo, d, X.U, X.Uxi, s)
    S = linear_eval(lo, d, X.yxi + X.h, s)
    a = linear_eval(lo, d, 0.5 * (X.yxi - X.h), s)
    b = linear_eval(lo, d, X.Uxi, s)
    r = linear_eval(lo, d, X.rbar, s)
    norm = np.sqrt(a * a + b * b + r * r)
    half = 0.5 * S
    ok = norm > 0.0
    scale = np.where(ok, half / np.where(ok, norm, 1.0), 0.0)
    a = np.where(ok, a * scale, half)
    b = b * scale
    r = r * scale
    yxi = np.maximum((half + a) * jac, 0.0)
    h = np.maximum((half - a) * jac, 0.0)
    xi = g.nodes
    Ubar = U_s - X.c * chi_eval(y_s)[0] if X.c != 0.0 else U_s
    return LagrangianState(g, y_s - xi, Ubar, yxi, b * jac, h, r * jac,
                           c=X.c, k=X.k, t=X.t)


def gamma_relabel(X: LagrangianState, tol: float = TOL_G) -> LagrangianState:
    """Project onto the slice ``y + H = id`` by composing with ``(y + H)^-1``."""
    S = X.yxi + X.h
    if np.min(S) <= tol:
        raise DegenerateStateError(
            f"y + H is not strictly increasing (min y_xi + h = {np.min(S):.3e})")
    g = X.grid
    xi = g.nodes
    v = X.y[0] + cumtrapz(S, g.spacing)
    f = np.interp(xi, v, xi)
    below = xi < v[0]
    above = xi > v[-1]
    f[below] = xi[0] + (xi[below] - v[0]) / S[0]
    f[above] = xi[-1] + (xi[above] - v[-1]) / S[-1]
    jac = 1.0 / linear_eval(g.lo, g.spacing, S, f)
    return _compose(X, f, jac)


@dataclass
class RelabelingCheck:
    ok: bool
    kappa: float
    min_fxi: float
    reasons: list = field(default_factory=list)

    def __bool__(self):
        return self.ok


def check_relabeling(f: RelabelingMap, kappa: float | None = None,
                     tol: float = 1e-8) -> RelabelingCheck:
    """Membership test for the relabeling group on the sampled grid.

    The reported ``kappa`` is ``||f - id||_W1inf + ||f^-1 - id||_W1inf``
    measured at the nodes, using ``(f^-1)' = 1/f'(f^-1)``.
    """
    xi = f.grid.nodes
    reasons = []
    disp = f.f - xi
    min_fxi = float(np.min(f.fxi))
    if min_fxi <= 0.0:
        reasons.append(f"f_xi is not positive (min {min_fxi:.3g})")
    if np.any(np.diff(f.f) <= 0.0):
        reasons.append("f is not strictly increasing")
    end_defect = max(abs(f.fxi[0] - 1.0), abs(f.fxi[-1] - 1.0), abs(disp[0]), abs(disp[-1]))
    if end_defect > tol:
        reasons.append(f"f - id does not decay at the boundary ({end_defect:.3g})")
    if min_fxi > 0.0:
        inv_d = float(np.max(np.abs(1.0 / f.fxi - 1.0)))
    else:
        inv_d = float("inf")
    sup_disp = float(np.max(np.abs(disp)))
    measured = 2.0 * sup_disp + float(np.max(np.abs(f.fxi - 1.0))) + inv_d
    if kappa is not None and not measured <= kappa:
        reasons.append(f"measured kappa {measured:.4g} exceeds bound {kappa:.4g}")
    return RelabelingCheck(not reasons, measured, min_fxi, reasons)


def apply_relabeling(X: LagrangianState, f: RelabelingMap,
                     tol: float = TOL_G) -> LagrangianState:
    """``X o f``: fields composed with ``f``, densities weighted by ``f_xi``."""
    if f.grid != X.grid:
        raise GridMismatchError("relabeling grid differs from the state grid")
    check = check_relabeling(f)
    if not check.ok:
        raise InvalidRelabelingError("; ".join(check.reasons))
    out = _compose(X, f.f, f.fxi)
    defect = np.max(np.abs(out.yxi * out.h - out.Uxi**2 - out.rbar**2))
    scale = 1.0 + np.max(out.yxi + out.h) ** 2
    if defect > tol * scale:
        raise MalformedStateError(f"relabeled state left the constraint set ({defect:.3e})")
    return out


def _l2(v, dx):
    return float(np.sqrt(np.trapezoid(v * v, dx=dx)))


def d_distance(a: EulerianState, b: EulerianState,
               xi_grid: GridSpec | None = None) -> float:
    """Distance of the two states' Lagrangian representatives in the E-norm.

    Both states are mapped with :func:`to_lagrangian` onto one label grid
    (by default ``[x_lo, x_hi + max mass]`` with as many nodes as the x-grid).
    """
    if a.grid != b.grid:
        raise GridMismatchError("states live on different x-grids")
    if xi_grid is None:
        hi = max(label_grid(a).hi, label_grid(b).hi)
        xi_grid = GridSpec(a.grid.lo, hi, a.grid.n)
    Xa = to_lagrangian(a, xi_grid)
    Xb = to_lagrangian(b, xi_grid)
    dx = xi_grid.spacing

    def ubar_xi(X):
        if X.c == 0.0:
            return X.Uxi
        return X.Uxi - X.c * chi_eval(X.y)[1] * X.yxi

    return (float(np.max(np.abs(Xa.zeta - Xb.zeta)))
            + _l2(Xa.yxi - Xb.yxi, dx)
            + _l2(Xa.Ubar - Xb.Ubar, dx)
            + _l2(ubar_xi(Xa) - ubar_xi(Xb), dx)
            + abs(Xa.c - Xb.c)
            + _l2(Xa.h - Xb.h, dx)
            + _l2(Xa.rbar - Xb.rbar, dx)
            + abs(Xa.k - Xb.k))
