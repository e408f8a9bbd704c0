import math

import numpy as np
import pytest

from conftest import peakon_state
from twoch.errors import DomainError, MalformedStateError, UnsupportedParameterError
from twoch.state import (
    EulerianState,
    GridSpec,
    RadonMeasure,
    ResidualReport,
    canonicalize,
    total_energy_eulerian,
    validate_eulerian,
)


def test_grid_spacing_and_nodes():
    g = GridSpec(-1.0, 1.0, 5)
    assert g.spacing == 0.5
    np.testing.assert_array_equal(g.nodes, [-1.0, -0.5, 0.0, 0.5, 1.0])


@pytest.mark.parametrize("lo,hi,n", [(1.0, 1.0, 5), (0.0, 1.0, 2), (0.0, math.inf, 5), (0.0, 1.0, 4.5)])
def test_grid_rejects_bad_input(lo, hi, n):
    with pytest.raises(MalformedStateError):
        GridSpec(lo, hi, n)


def test_measure_validation():
    g = GridSpec(0.0, 1.0, 3)
    with pytest.raises(MalformedStateError):
        RadonMeasure(g, [0.0, -1.0, 0.0])
    with pytest.raises(MalformedStateError):
        RadonMeasure(g, np.zeros(3), ((0.5, 0.0),))
    with pytest.raises(MalformedStateError):
        RadonMeasure(g, np.zeros(3), ((0.6, 1.0), (0.4, 1.0)))
    with pytest.raises(MalformedStateError):
        RadonMeasure(g, np.zeros(4))
    mu = RadonMeasure(g, [1.0, 1.0, 1.0], ((0.5, 2.0),))
    assert mu.total_mass == pytest.approx(3.0)


def test_state_arrays_are_read_only(peakon):
    with pytest.raises(ValueError):
        peakon.u[0] = 1.0


def test_state_rejects_nan():
    g = GridSpec(0.0, 1.0, 3)
    with pytest.raises(MalformedStateError):
        EulerianState(g, [0.0, np.nan, 0.0], np.zeros(3), RadonMeasure.zero(g))


def test_steady_background_validates_with_zero_defect():
    g = GridSpec(-5.0, 5.0, 101)
    s = EulerianState(g, np.zeros(101), np.ones(101), RadonMeasure.zero(g), k=1.0)
    rep = validate_eulerian(s)
    assert rep.ok
    assert rep["boundary"] == 0.0 and rep["compatibility"] == 0.0


def test_validate_flags_boundary_mismatch():
    g = GridSpec(-5.0, 5.0, 101)
    x = g.nodes
    u = np.exp(-np.abs(x - 4.0))
    s = EulerianState(g, u, np.zeros(101), RadonMeasure(g, u**2))
    rep = validate_eulerian(s)
    assert not rep.flags["boundary"]
    assert rep.entries["boundary"][1] == 5.0


def test_peakon_is_compatible(peakon):
    rep = validate_eulerian(peakon)
    assert rep.ok
    assert rep["compatibility"] < 1e-12


def test_total_energy_of_peakon(peakon):
    # int e^{-2|x|} (1 + 1) dx = 2
    assert total_energy_eulerian(peakon) == pytest.approx(2.0, abs=1e-3)


def test_energy_needs_zero_c():
    g = GridSpec(0.0, 1.0, 3)
    s = EulerianState(g, [0.0, 0.5, 1.0], np.zeros(3), RadonMeasure.zero(g), c=1.0)
    with pytest.raises(UnsupportedParameterError):
        total_energy_eulerian(s)


def test_canonicalize_shift_and_scale():
    g = GridSpec(-10.0, 10.0, 201)
    x = g.nodes
    u = -2.0 + np.exp(-x**2)
    rho = 2.0 + np.exp(-x**2)
    s, alpha, kp = canonicalize(u, rho, kappa=4.0, eta=4.0, u_minus_inf=-2.0, grid=g, k=2.0, c=-2.0)
    assert alpha == 2.0 and kp == 0.0
    np.testing.assert_allclose(s.u, np.exp(-x**2), atol=1e-15)
    np.testing.assert_allclose(s.rho, 2.0 * rho)
    assert s.k == 4.0 and s.c == 0.0


def test_canonicalize_rejects_nonzero_kappa_prime():
    g = GridSpec(-1.0, 1.0, 5)
    with pytest.raises(UnsupportedParameterError) as err:
        canonicalize(np.zeros(5), np.zeros(5), kappa=1.0, eta=1.0, u_minus_inf=0.0, grid=g)
    assert err.value.values["kappa_prime"] == 1.0


def test_canonicalize_rejects_nonpositive_eta():
    g = GridSpec(-1.0, 1.0, 5)
    with pytest.raises(DomainError):
        canonicalize(np.zeros(5), np.zeros(5), kappa=0.0, eta=0.0, u_minus_inf=0.0, grid=g)


def test_canonicalize_scales_measure_density():
    # mu = u_x^2 + rhobar^2 must become u_x^2 + eta * rhobar^2
    g = GridSpec(-10.0, 10.0, 401)
    x = g.nodes
    s0 = peakon_state(401, -10.0, 10.0)
    rho = 1.0 + np.exp(-x**2)
    mu = RadonMeasure(g, s0.mu.density + np.exp(-2 * x**2))
    s, _, _ = canonicalize(s0.u, rho, 0.0, 3.0, 0.0, g, mu=mu, k=1.0, c=0.0)
    np.testing.assert_allclose(s.mu.density, s0.mu.density + 3.0 * np.exp(-2 * x**2))


def test_residual_report_records_location():
    rep = ResidualReport()
    rep.add("a", [0.1, 0.5, 0.2], where=np.array([10.0, 20.0, 30.0]))
    assert rep.entries["a"] == (0.5, 20.0)
    rep.flags["a"] = True
    assert rep.ok
