import numpy as np
import pytest

from conftest import peakon_state, smooth_state
from twoch.diagnostics import (
    energy_lagrangian,
    invariant_residuals,
    pq_identity_defects,
    regularity_monitor,
    regularity_observer,
    sup_distance,
)
from twoch.dynamics import evolve
from twoch.errors import DomainError, GridMismatchError, UnsupportedParameterError
from twoch.maps import to_lagrangian
from twoch.state import TOL_G, GridSpec, LagrangianState

ALGEBRAIC = ("g_defect", "neg_yxi", "neg_h", "r_defect", "monotonicity")


@pytest.mark.parametrize("make", [peakon_state, smooth_state])
def test_fresh_state_has_no_residual(make):
    X = to_lagrangian(make(2001))
    rep = invariant_residuals(X, X)
    assert rep.ok
    for name in ALGEBRAIC:
        assert rep[name] <= TOL_G
    # the P/Q entries are truncation errors, not invariants
    assert rep["q_identity"] < 10 * X.grid.spacing**2
    assert rep["p_identity"] < 10 * X.grid.spacing**2


def test_zero_state_residuals_vanish():
    g = GridSpec(-1.0, 1.0, 21)
    z = np.zeros(21)
    X = LagrangianState(g, z, z, np.ones(21), z, z, z)
    rep = invariant_residuals(X, X)
    assert all(v == 0.0 for v, _ in rep.entries.values())


def test_corrupted_h_is_located():
    X = to_lagrangian(peakon_state(401))
    i = int(np.argmax(X.h))
    h = X.h.copy()
    h[i] = -h[i]
    bad = X.replace(h=h)
    rep = invariant_residuals(bad, X, pq=False)
    assert rep["g_defect"] == pytest.approx(2 * X.yxi[i] * X.h[i], rel=1e-12)
    assert rep.entries["g_defect"][1] == X.xi[i]
    assert rep["neg_h"] == pytest.approx(X.h[i])
    assert not rep.ok


def test_residuals_need_matching_grids():
    X = to_lagrangian(peakon_state(401))
    Y = to_lagrangian(peakon_state(403))
    with pytest.raises(GridMismatchError):
        invariant_residuals(X, Y)


def test_peakon_energy_is_two():
    assert energy_lagrangian(to_lagrangian(peakon_state(4001))) == pytest.approx(2.0, abs=1e-4)


def test_energy_requires_zero_c():
    X = to_lagrangian(peakon_state(101))
    with pytest.raises(UnsupportedParameterError):
        energy_lagrangian(X.replace(c=1.0))


def test_energy_time_error_is_fourth_order():
    # the semi-discrete energy itself drifts at O(dxi^2); isolate the dt part
    X = to_lagrangian(smooth_state(401))
    e = [energy_lagrangian(evolve(X, 1.0, dt).final) for dt in (0.2, 0.1, 0.0125)]
    assert abs(e[1] - e[2]) < abs(e[0] - e[2]) / 10.0


def test_pq_defects_shrink_with_grid():
    d = [max(q.max(), p.max()) for q, p, _ in
         (pq_identity_defects(to_lagrangian(smooth_state(n))) for n in (501, 2001))]
    assert d[1] < d[0] / 10.0


def test_regularity_monitor_steady_state():
    g = GridSpec(-5.0, 5.0, 101)
    z = np.zeros(101)
    X = LagrangianState(g, z, z, np.ones(101), z, z, z, k=1.0)
    rows = regularity_monitor([X, X.replace(t=1.0)], (-2.0, 2.0))
    for t, m, r2, bound in rows:
        assert m == 1.0 and r2 == 1.0 and bound == 1.0


def test_regularity_bound_holds_along_run():
    X = to_lagrangian(smooth_state(801, k=1.0))
    traj = evolve(X, 1.0, 0.01, observers=[regularity_observer(X, (-3.0, 3.0))])
    for rec in traj.records:
        assert rec["strip_min_yxi"] >= rec["strip_bound"] - 1e-10
        assert rec["strip_bound"] > 0.0


def test_regularity_region_must_lie_in_range():
    X = to_lagrangian(peakon_state(101))
    with pytest.raises(DomainError):
        regularity_monitor([X], (-50.0, 0.0))


def test_sup_distance():
    a = peakon_state(2001)
    assert sup_distance(a, a) == 0.0
    d = a.grid.spacing
    shifted = peakon_state(2001, x0=d)
    assert 0.0 < sup_distance(a, shifted) <= d
    with pytest.raises(GridMismatchError):
        sup_distance(a, peakon_state(2003))
