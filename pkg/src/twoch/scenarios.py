"""Preset initial data. Each preset sets ``mu`` to ``(u_x**2 + rhobar**2) dx``
(plus explicit atoms), so the data are compatible by construction."""

from __future__ import annotations

import numpy as np

from twoch._numerics import squared_gradient
from twoch.config import ScenarioConfig, validate_config
from twoch.state import EulerianState, GridSpec, RadonMeasure


def _peak(x, a, x0):
    return a * np.exp(-np.abs(x - x0))


def initial_fields(cfg: ScenarioConfig, x):
    """``(u, rho, atoms)`` for the preset named in ``cfg``."""
    k = cfg.k
    rho = np.full_like(x, k)
    atoms = ()
    if cfg.scenario == "steady_background":
        u = np.zeros_like(x)
    elif cfg.scenario == "single_peakon":
        u = _peak(x, cfg.amplitude, cfg.x0)
    elif cfg.scenario == "peakon_antipeakon":
        s = cfg.separation
        u = _peak(x, cfg.amplitude, -s) - _peak(x, cfg.amplitude, s)
    elif cfg.scenario == "dambreak_2ch":
        u = np.zeros_like(x)
        w, d = cfg.width, cfg.delta
        rho = k + cfg.amplitude * 0.5 * (np.tanh((x + w) / d) - np.tanh((x - w) / d))
    elif cfg.scenario == "atom_test":
        u = np.zeros_like(x)
        atoms = ((cfg.atom_position, cfg.atom_mass),)
    else:  # validate_config rejects unknown names first
        raise AssertionError(cfg.scenario)
    return u, rho, atoms


def build_scenario(cfg: ScenarioConfig) -> EulerianState:
    """Initial Eulerian state with ``c = u(x_hi)`` and background density ``k``."""
    validate_config(cfg)
    grid = GridSpec(cfg.x_lo, cfg.x_hi, cfg.n)
    x = grid.nodes
    u, rho, atoms = initial_fields(cfg, x)
    density = squared_gradient(u, grid.spacing) + (rho - cfg.k) ** 2
    mu = RadonMeasure(grid, density, atoms)
    return EulerianState(grid, u, rho, mu, c=0.0, k=cfg.k)
