"""Container sanity: parameter validation, grid weights, wave-function norms."""

import math

import numpy as np
import pytest

from artifact.model import GridSpec, ModelParams, WaveFunction


def test_params_validation():
    ModelParams(a=1.0, alpha=10.0)
    ModelParams(a=2.0, alpha=-3.0, eta=-7.4)
    ModelParams(a=1.0, alpha=math.inf)
    with pytest.raises(ValueError):
        ModelParams(a=0.0, alpha=1.0)
    with pytest.raises(ValueError):
        ModelParams(a=1.0, alpha=0.0)
    with pytest.raises(ValueError):
        ModelParams(a=1.0, alpha=-math.inf)
    assert ModelParams(a=1.0, alpha=math.inf).hard_wall
    assert not ModelParams(a=1.0, alpha=5.0).hard_wall


def test_grid_construction():
    g = GridSpec.for_shell(1.0)
    assert g.L == 8.0
    assert g.n_split == 400
    assert g.n_nodes == 3201
    x = g.x()
    assert x[0] == 0.0
    assert abs(x[g.n_split] - 1.0) < 1e-12
    assert abs(x[-1] - 8.0) < 1e-12
    with pytest.raises(ValueError):
        GridSpec(L=8.0, h=1.0 / 401, split=1.0)  # 401 intervals: odd
    with pytest.raises(ValueError):
        GridSpec(L=8.0, h=0.003, split=1.0)  # does not divide [0, 1]


def test_simpson_weights_exact_for_cubics():
    g = GridSpec(L=2.0, h=0.05, split=0.5)
    w = g.simpson_weights()
    x = g.x()
    assert abs(np.sum(w) - 2.0) < 1e-13
    # composite Simpson integrates cubics exactly on each panel
    assert abs(w @ x**3 - 2.0**4 / 4.0) < 1e-12
    # and smooth integrands to O(h^4): (h^4/180) L max|f''''| ~ 7e-8 here
    ref = 1.0 - math.cos(2.0)
    assert abs(w @ np.sin(x) - ref) < 1e-7


def test_wavefunction_norm_and_inner():
    g = GridSpec.for_shell(1.0, L=4.0, h=1.0 / 100)
    x = g.x()
    psi = WaveFunction(g, np.where(x < 1.0, math.sqrt(2.0) * np.sin(math.pi * x), 0.0))
    assert abs(psi.norm() - 1.0) < 1e-8
    phi = WaveFunction(g, np.where(x < 1.0, math.sqrt(2.0) * np.sin(2 * math.pi * x), 0.0))
    # distinct box modes are orthogonal
    assert abs(psi.inner(phi)) < 1e-8
    assert abs(psi.inner(psi) - psi.norm_sq()) < 1e-14
    scaled = WaveFunction(g, 3.0j * psi.values)
    assert abs(scaled.normalized().norm() - 1.0) < 1e-12
    with pytest.raises(ValueError):
        WaveFunction(g, np.ones(7))
