"""Eulerian and Lagrangian state containers, measures, and validation.

All containers are frozen dataclasses whose arrays are made read-only on
construction, so a state can be shared freely once built.

Eulerian data ``(u, rho, mu)`` live on a truncated x-grid. The velocity is
normalised so that its left asymptote is zero and its right asymptote is
``c``; the density tends to ``k`` at both ends. Lagrangian data live on a
uniform label grid and carry the evolved unknowns ``zeta, Ubar, yxi, Uxi, h,
rbar`` together with the constants ``c, k`` and the time ``t``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from twoch._numerics import cumtrapz, squared_gradient
from twoch.kernel import chi_eval
from twoch.errors import (
    DomainError,
    MalformedStateError,
    UnsupportedParameterError,
)

TOL_G = 1e-9
TOL_BC = 1e-6
TOL_COMPAT = 1e-2


def _frozen(a, name, n=None):
    arr = np.array(a, dtype=float)
    if arr.ndim != 1:
        raise MalformedStateError(f"{name} must be one-dimensional")
    if n is not None and arr.shape[0] != n:
        raise MalformedStateError(f"{name} has {arr.shape[0]} entries, grid has {n}")
    if not np.all(np.isfinite(arr)):
        raise MalformedStateError(f"{name} contains non-finite values")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid of ``n`` nodes on ``[lo, hi]``."""

    lo: float
    hi: float
    n: int

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise MalformedStateError("grid endpoints must be finite")
        if not self.lo < self.hi:
            raise MalformedStateError(f"grid needs lo < hi, got [{self.lo}, {self.hi}]")
        if int(self.n) != self.n or self.n < 3:
            raise MalformedStateError(f"grid needs n >= 3 nodes, got {self.n}")
        object.__setattr__(self, "n", int(self.n))

    @property
    def spacing(self) -> float:
        return (self.hi - self.lo) / (self.n - 1)

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.n)


@dataclass(frozen=True)
class RadonMeasure:
    """Finite positive measure: sampled density plus exact point masses."""

    grid: GridSpec
    density: np.ndarray
    atoms: tuple = ()

    def __post_init__(self):
        d = _frozen(self.density, "density", self.grid.n)
        if np.any(d < 0.0):
            raise MalformedStateError("measure density must be nonnegative")
        atoms = tuple((float(p), float(m)) for p, m in self.atoms)
        for p, m in atoms:
            if not (math.isfinite(p) and math.isfinite(m)):
                raise MalformedStateError("atom data must be finite")
            if m <= 0.0:
                raise MalformedStateError(f"atom mass must be positive, got {m}")
        pos = [p for p, _ in atoms]
        if any(b <= a for a, b in zip(pos, pos[1:])):
            raise MalformedStateError("atom positions must be strictly increasing")
        object.__setattr__(self, "density", d)
        object.__setattr__(self, "atoms", atoms)

    @classmethod
    def zero(cls, grid):
        return cls(grid, np.zeros(grid.n))

    @property
    def ac_mass(self) -> float:
        return float(np.trapezoid(self.density, dx=self.grid.spacing))

    @property
    def atom_mass(self) -> float:
        return float(sum(m for _, m in self.atoms))

    @property
    def total_mass(self) -> float:
        return self.ac_mass + self.atom_mass


@dataclass(frozen=True)
class EulerianState:
    grid: GridSpec
    u: np.ndarray
    rho: np.ndarray
    mu: RadonMeasure
    c: float = 0.0
    k: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "u", _frozen(self.u, "u", self.grid.n))
        object.__setattr__(self, "rho", _frozen(self.rho, "rho", self.grid.n))
        if self.mu.grid != self.grid:
            raise MalformedStateError("measure grid differs from state grid")
        for name in ("c", "k"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise MalformedStateError(f"{name} must be finite")
            object.__setattr__(self, name, v)

    @property
    def x(self) -> np.ndarray:
        return self.grid.nodes

    @property
    def rhobar(self) -> np.ndarray:
        return self.rho - self.k


@dataclass(frozen=True)
class LagrangianState:
    grid: GridSpec
    zeta: np.ndarray
    Ubar: np.ndarray
    yxi: np.ndarray
    Uxi: np.ndarray
    h: np.ndarray
    rbar: np.ndarray
    c: float = 0.0
    k: float = 0.0
    t: float = 0.0

    FIELDS = ("zeta", "Ubar", "yxi", "Uxi", "h", "rbar")

    def __post_init__(self):
        for name in self.FIELDS:
            object.__setattr__(self, name, _frozen(getattr(self, name), name, self.grid.n))
        for name in ("c", "k", "t"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise MalformedStateError(f"{name} must be finite")
            object.__setattr__(self, name, v)

    @property
    def xi(self) -> np.ndarray:
        return self.grid.nodes

    @property
    def y(self) -> np.ndarray:
        return self.zeta + self.xi

    @property
    def U(self) -> np.ndarray:
        if self.c == 0.0:
            return self.Ubar.copy()
        return self.Ubar + self.c * chi_eval(self.y)[0]

    @property
    def r(self) -> np.ndarray:
        return self.rbar + self.k * self.yxi

    @property
    def H(self) -> np.ndarray:
        return cumtrapz(self.h, self.grid.spacing)

    def fields(self) -> np.ndarray:
        """Evolved fields stacked as a ``(6, n)`` array (a fresh copy)."""
        return np.stack([getattr(self, f) for f in self.FIELDS])

    def replace(self, **changes) -> "LagrangianState":
        kw = {f: getattr(self, f) for f in self.FIELDS}
        kw.update(c=self.c, k=self.k, t=self.t)
        kw.update(changes)
        return LagrangianState(self.grid, **kw)

    @classmethod
    def from_fields(cls, grid, arr, c, k, t):
        return cls(grid, *arr, c=c, k=k, t=t)


@dataclass(frozen=True)
class RelabelingMap:
    """Nodal samples of a label change ``f`` and its derivative."""

    grid: GridSpec
    f: np.ndarray
    fxi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "f", _frozen(self.f, "f", self.grid.n))
        object.__setattr__(self, "fxi", _frozen(self.fxi, "fxi", self.grid.n))

    @classmethod
    def identity(cls, grid):
        return cls(grid, grid.nodes, np.ones(grid.n))

    @classmethod
    def from_displacement(cls, grid, b, db, scale=1.0):
        """``f = id + scale * b`` from callables ``b`` and ``b'``."""
        xi = grid.nodes
        return cls(grid, xi + scale * b(xi), 1.0 + scale * db(xi))


@dataclass
class ResidualReport:
    """Named residuals, each stored as ``(max value, location of max)``."""

    entries: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)
    t: float = 0.0

    def add(self, name, values, where=None):
        values = np.asarray(values, dtype=float)
        if values.size == 0:
            self.entries[name] = (0.0, float("nan"))
            return
        i = int(np.argmax(values))
        loc = float(where[i]) if where is not None else float(i)
        self.entries[name] = (float(values[i]), loc)

    def value(self, name) -> float:
        return self.entries[name][0]

    def __getitem__(self, name):
        return self.entries[name][0]

    @property
    def ok(self) -> bool:
        return all(self.flags.values())


def _check_finite_state(state):
    for name in ("u", "rho"):
        if not np.all(np.isfinite(getattr(state, name))):
            raise MalformedStateError(f"{name} has non-finite values")


def validate_eulerian(state: EulerianState, tol: float = TOL_BC,
                      compat_tol: float = TOL_COMPAT) -> ResidualReport:
    """Check boundary asymptotes, the ac-part compatibility, and finiteness.

    The compatibility defect ``|mu.density - (u_x**2 + (rho-k)**2)|`` is taken
    over nodes farther than one grid spacing from every atom and is compared
    with ``compat_tol``; boundary mismatches are compared with ``tol``.
    """
    _check_finite_state(state)
    g = state.grid
    x = g.nodes
    rep = ResidualReport()
    bc = np.array([
        abs(state.u[0]),
        abs(state.u[-1] - state.c),
        abs(state.rho[0] - state.k),
        abs(state.rho[-1] - state.k),
    ])
    rep.add("boundary", bc, where=np.array([g.lo, g.hi, g.lo, g.hi]))
    expected = squared_gradient(state.u, g.spacing) + state.rhobar**2
    defect = np.abs(state.mu.density - expected)
    away = np.ones(g.n, dtype=bool)
    for p, _ in state.mu.atoms:
        away &= np.abs(x - p) > g.spacing
    rep.add("compatibility", defect[away], where=x[away])
    total = state.mu.total_mass
    rep.entries["total_mass"] = (total, float("nan"))
    rep.flags["boundary"] = rep.value("boundary") <= tol
    rep.flags["compatibility"] = rep.value("compatibility") <= compat_tol
    rep.flags["finite_mass"] = math.isfinite(total)
    return rep


def canonicalize(u, rho, kappa, eta, u_minus_inf, grid, *, mu=None, k=None,
                 c=None, tol=1e-12):
    """Map data for general (kappa, eta) to the kappa = 0, eta = 1 normal form.

    The velocity is shifted by ``alpha = -u_minus_inf`` and the density scaled
    by ``sqrt(eta)``; the transformed equation carries ``kappa - 2*alpha``,
    which must vanish because only kappa = 0 is integrated. Returns the new
    state together with ``alpha`` and ``kappa_prime``.

    ``mu`` (a :class:`RadonMeasure`) is transformed exactly when given;
    otherwise its absolutely continuous part is rebuilt from the samples.
    ``k`` and ``c`` are the exact asymptotes of ``rho`` and ``u`` at the right
    end; when omitted they are read off the end samples.
    """
    if not eta > 0.0:
        raise DomainError(f"eta must be positive, got {eta}")
    alpha = 0.0 - float(u_minus_inf)
    kappa_prime = float(kappa) - 2.0 * alpha
    if abs(kappa_prime) > tol:
        raise UnsupportedParameterError(
            f"only kappa = 0 is supported; canonical kappa' = {kappa_prime}",
            kappa_prime=kappa_prime, alpha=alpha)
    scale = math.sqrt(eta)
    v = np.asarray(u, dtype=float) + alpha
    tau = scale * np.asarray(rho, dtype=float)
    if k is None:
        k_new = 0.5 * (tau[0] + tau[-1])
    else:
        k_new = scale * float(k)
    rho_bar = np.asarray(rho, dtype=float) - (k_new / scale)
    if mu is None:
        density = squared_gradient(v, grid.spacing) + (scale * rho_bar) ** 2
        atoms = ()
    else:
        density = mu.density + (eta - 1.0) * rho_bar**2
        atoms = mu.atoms
    measure = RadonMeasure(grid, np.maximum(density, 0.0), atoms)
    c_new = float(v[-1]) if c is None else float(c) + alpha
    state = EulerianState(grid, v, tau, measure, c=c_new, k=k_new)
    return state, alpha, kappa_prime


def total_energy_eulerian(state: EulerianState) -> float:
    """Trapezoid of ``u**2 + mu.density`` plus the atom masses (c = 0 only)."""
    if state.c != 0.0:
        raise UnsupportedParameterError(
            "energy integral diverges when the right asymptote c is nonzero", c=state.c)
    _check_finite_state(state)
    dx = state.grid.spacing
    return float(np.trapezoid(state.u**2 + state.mu.density, dx=dx)) + state.mu.atom_mass
