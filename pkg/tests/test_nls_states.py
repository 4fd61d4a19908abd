"""Checks for the stationary nonlinear states.

The elliptic mass integral is validated against direct quadrature of the
profile (the defining property) and against the quasi-period expansion of
the Jacobi epsilon function; full states are validated by an independent
Runge-Kutta shooting integration of the stationary equation.  Frozen
reference numbers are outputs of those oracles recorded at higher
precision than the tolerances used here.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad, solve_ivp

from artifact import nls_states as ns
from artifact.linmodel import bound_state
from artifact.model import GridSpec, ModelParams, WaveFunction
from artifact.nls_states import (BifurcationDiagram, StationaryState,
                                 bifurcation_scan, mass_integral_G,
                                 matching_violation, phase_reality_check,
                                 rescale_to_gamma, stationary_finite,
                                 stationary_infinite_defocusing,
                                 stationary_infinite_focusing)
from artifact.specfun import elliptic_E, elliptic_K, jacobi_epsilon, jacobi_sn_cn_dn


# ---------------------------------------------------------------- oracles

def _quad_G(u, p):
    """The mass integral by direct quadrature of cn^2(q + K)."""
    K = elliptic_K(p)
    val, _ = quad(lambda q: jacobi_sn_cn_dn(q + K, p)[1] ** 2, 0.0, u,
                  epsabs=1e-12, epsrel=1e-12, limit=400)
    return val


def _shoot(state, x_end, n_probe=5):
    """Integrate -psi'' + eta psi^3 = Omega psi from the origin data.

    Independent of the elliptic construction: only the origin slope and
    (Omega, eta) enter.  Returns the profile mismatch against the state
    at n_probe points and the endpoint (psi, psi').
    """
    def rhs(x, y):
        return [y[1], state.eta * y[0] ** 3 - state.Omega * y[0]]

    xs = np.linspace(1e-3, x_end, n_probe)
    sol = solve_ivp(rhs, (0.0, x_end), [0.0, state.derivative(0.0)],
                    t_eval=xs, rtol=1e-12, atol=1e-13, method="DOP853")
    mism = max(abs(sol.y[0][i] - state.evaluate(float(x))) for i, x in enumerate(xs))
    return mism, sol.y[0][-1], sol.y[1][-1]


def _norm_total(state, L=8.0, n=3200):
    """Simpson mass on [0, L] plus the analytic sech tail beyond."""
    grid = GridSpec(L=L, h=L / n, split=state.a)
    vals = state.evaluate(grid.x())
    inner = float(np.sum(grid.simpson_weights() * vals ** 2))
    w = state.lam_prime * (L - state.x0_prime)
    tail = (state.C_prime ** 2 / state.lam_prime) * (1.0 - math.tanh(w))
    return inner + tail


# ---------------------------------------------------- mass integral G

def test_mass_integral_at_zero_vanishes():
    assert mass_integral_G(0.0, 0.3) == 0.0
    assert mass_integral_G(0.0, 0.97) == 0.0


def test_mass_integral_against_quadrature_moderate():
    for u, p in [(1.3, 0.8), (0.7, 0.3), (2.9, 0.55), (7.0, 0.99)]:
        assert abs(mass_integral_G(u, p) - _quad_G(u, p)) < 1e-9


def test_mass_integral_frozen_values():
    # quadrature / series cross-checks recorded at full precision
    assert abs(mass_integral_G(1.3, 0.8) - 0.2733151544779952) < 1e-12
    assert abs(mass_integral_G(2.0 * elliptic_K(0.8), 0.8)
               - 1.7438779475331367) < 1e-12


def test_mass_integral_small_modulus_closed_form():
    # p -> 0 turns cn(q + K) into -sin q, so G is (u - sin u cos u)/2
    p = 1e-8
    for u in (0.4, 1.0, 2.2):
        exact = 0.5 * (u - math.sin(u) * math.cos(u))
        assert abs(mass_integral_G(u, p) - exact) < 1e-12
    assert abs(mass_integral_G(2.0 * elliptic_K(p), p) - math.pi / 2.0) < 1e-12


def test_mass_integral_full_period_identity():
    # over one half period the integral is 2 (E - p'^2 K) / p^2; the
    # difference form loses digits only near p = 1, not at 0.8
    p = 0.8
    K, E = elliptic_K(p), elliptic_E(p)
    pp2 = (1.0 - p) * (1.0 + p)
    assert abs(mass_integral_G(2.0 * K, p) - 2.0 * (E - pp2 * K) / p ** 2) < 1e-12


def test_mass_integral_epsilon_cross_check():
    # int cn^2 = (epsilon - p'^2 u)/p^2 shifted to the quarter period
    for u, p in [(1.3, 0.8), (0.9, 0.5)]:
        K = elliptic_K(p)
        pp2 = (1.0 - p) * (1.0 + p)
        via_eps = (jacobi_epsilon(u + K, p) - jacobi_epsilon(K, p) - pp2 * u) / p ** 2
        assert abs(mass_integral_G(u, p) - via_eps) < 1e-11


def test_mass_integral_near_degenerate_modulus_keeps_digits():
    # the nodeless branch needs relative precision at p'^2 ~ 1e-8, where
    # cn(q + K) = -p' sn/dn -> -p' sinh q and so G -> p'^2 (shc - u)/2
    pp2 = 1e-8
    p = math.sqrt(1.0 - pp2)
    limit = pp2 * 0.5 * (math.sinh(1.0) * math.cosh(1.0) - 1.0)
    got = mass_integral_G(1.0, p, pp2)
    assert abs(got - limit) / limit < 1e-6
    # keyed on the complement, the value moves smoothly with p'^2 even
    # when the change is far below the spacing of the float p grid
    got2 = mass_integral_G(1.0, p, pp2 * (1.0 + 1e-6))
    assert abs(got2 / got - (1.0 + 1e-6)) < 1e-9


def test_mass_integral_rejects_bad_modulus():
    with pytest.raises(ValueError):
        mass_integral_G(1.0, 1.5)
    with pytest.raises(ValueError):
        mass_integral_G(1.0, -0.1)


@settings(max_examples=60, deadline=None)
@given(u=st.floats(-2.5, 2.5), p=st.floats(0.05, 0.95))
def test_mass_integral_quasi_period_additivity(u, p):
    K = elliptic_K(p)
    lhs = mass_integral_G(u + 2.0 * K, p)
    rhs = mass_integral_G(u, p) + mass_integral_G(2.0 * K, p)
    assert abs(lhs - rhs) < 1e-11 * max(1.0, abs(rhs))


@settings(max_examples=40, deadline=None)
@given(u=st.floats(0.0, 3.0), p=st.floats(0.05, 0.95))
def test_mass_integral_odd(u, p):
    assert abs(mass_integral_G(-u, p) + mass_integral_G(u, p)) < 1e-13


# --------------------------------------------- hard-wall moduli equations

def test_modulus_equations_strictly_increasing():
    ps = np.linspace(1e-4, 1.0 - 1e-6, 1000)
    gp = np.array([ns._g_plus(p) for p in ps])
    gm = np.array([ns._g_minus(p) for p in ps])
    assert np.all(np.diff(gp) > 0.0)
    assert np.all(np.diff(gm) > 0.0)


# ------------------------------------------------------ hard-wall states

def test_infinite_defocusing_frozen_point():
    s = stationary_infinite_defocusing(1.0, 9.0, 1)
    assert abs(s.p - 0.74858893726) < 1e-9
    assert abs(s.lam - 3.81784520624) < 1e-9
    assert abs(s.Omega - 22.7440870735) < 1e-8
    # the modulus equation itself: K(K - E) = a eta / 8 m^2
    K, E = elliptic_K(s.p), elliptic_E(s.p)
    assert abs(K * (K - E) - 9.0 / 8.0) < 1e-12
    assert s.branch == "infinite_defocusing_1"
    assert s.I == 1.0


def test_infinite_focusing_frozen_point():
    s = stationary_infinite_focusing(1.0, -7.4, 1)
    assert abs(s.p - 0.750900801163) < 1e-9
    assert abs(s.lam - 3.82463436184) < 1e-9
    assert abs(s.C - 1.4930406366) < 1e-9
    assert abs(s.Omega - (-1.86803253294)) < 1e-8
    assert matching_violation(s) < 1e-10


def test_infinite_states_satisfy_dirichlet_and_norm():
    for s in (stationary_infinite_defocusing(1.0, 9.0, 1),
              stationary_infinite_defocusing(1.0, 4.0, 2),
              stationary_infinite_focusing(1.0, -7.4, 1),
              stationary_infinite_focusing(1.0, -2.0, 2)):
        assert abs(s.evaluate(0.0)) < 1e-10
        assert abs(s.evaluate(s.a)) < 1e-10
        grid = GridSpec(L=s.a, h=s.a / 2000, split=s.a / 2.0)
        vals = s.evaluate(grid.x())
        assert abs(np.sum(grid.simpson_weights() * vals ** 2) - 1.0) < 1e-8


def test_infinite_linear_limit_recovers_box_levels():
    for m in (1, 2):
        s = stationary_infinite_defocusing(1.0, 1e-6, m)
        assert abs(s.Omega - (m * math.pi) ** 2) < 1e-3
        f = stationary_infinite_focusing(1.0, -1e-6, m)
        assert abs(f.Omega - (m * math.pi) ** 2) < 1e-3


def test_infinite_states_reject_wrong_coupling_sign():
    with pytest.raises(ValueError):
        stationary_infinite_defocusing(1.0, -1.0, 1)
    with pytest.raises(ValueError):
        stationary_infinite_focusing(1.0, 2.0, 1)
    with pytest.raises(ValueError):
        stationary_infinite_focusing(1.0, -1.0, 0)


def test_stationary_equation_residual_second_order_hard_wall():
    # central-difference residual of -psi'' + eta psi^3 - Omega psi must
    # shrink by 4 when h halves (the profile solves the equation)
    for s in (stationary_infinite_defocusing(1.0, 9.0, 1),
              stationary_infinite_focusing(1.0, -7.4, 1)):
        res = {}
        for h in (1e-3, 5e-4):
            x = np.arange(h, s.a - h / 2, h)
            v = s.evaluate(x)
            vpp = (s.evaluate(x + h) - 2.0 * v + s.evaluate(x - h)) / h ** 2
            res[h] = np.max(np.abs(-vpp + s.eta * v ** 3 - s.Omega * v))
        ratio = res[1e-3] / res[5e-4]
        assert 3.5 < ratio < 4.5


# ----------------------------------------------------- phase reality check

def test_phase_reality_of_real_and_rotated_profiles():
    grid = GridSpec(L=1.0, h=1.0 / 400, split=0.5)
    x = grid.x()
    real_vals = np.sin(math.pi * x) * math.sqrt(2.0)
    psi = WaveFunction(grid, real_vals.astype(complex))
    assert phase_reality_check(psi) < 1e-14
    rot = WaveFunction(grid, real_vals * np.exp(1j * math.pi / 3.0))
    assert phase_reality_check(rot) < 1e-12
    mixed = WaveFunction(grid, real_vals + 1j * np.cos(math.pi * x))
    assert phase_reality_check(mixed) > 1e-2


def test_phase_reality_of_solver_states():
    s = stationary_infinite_focusing(1.0, -7.4, 1)
    grid = GridSpec(L=1.0, h=1.0 / 500, split=0.5)
    assert phase_reality_check(s.sample(grid)) < 1e-12


# --------------------------------------------------- finite-alpha pairs

@pytest.fixture(scope="module")
def pair_states():
    return stationary_finite(ModelParams(a=1.0, alpha=10.0, eta=-7.4))


def test_pair_count_and_labels(pair_states):
    assert [s.branch for s in pair_states] == ["finite_plus_1", "finite_minus_1"]


def test_pair_frozen_parameters(pair_states):
    plus, minus = pair_states
    assert abs(plus.Omega - (-0.35950253)) < 1e-6
    assert abs(plus.p - 0.718074) < 1e-5
    assert abs(plus.lam - 3.391210) < 1e-5
    assert abs(plus.C - 1.265969) < 1e-5
    assert abs(plus.x0 - 0.550703) < 1e-5
    assert abs(plus.x0_prime - 1.397313) < 1e-5
    assert abs(plus.I - 0.800060) < 1e-5
    assert abs(minus.Omega - (-2.21096315)) < 1e-6
    assert abs(minus.p - 0.766369) < 1e-5
    assert abs(minus.lam - 3.558065) < 1e-5
    assert abs(minus.C - 1.417592) < 1e-5
    assert abs(minus.x0 - 0.544144) < 1e-5
    assert abs(minus.x0_prime - (-0.108477)) < 1e-5
    assert abs(minus.I - 0.971312) < 1e-5
    # the cap sits outside the well for the plus state, inside-shifted
    # (negative center) for the minus one; both keep C' > 0
    assert plus.x0_prime > 1.0 and minus.x0_prime < 0.0
    assert plus.C_prime > 0.0 and minus.C_prime > 0.0


def test_pair_matching_conditions_close(pair_states):
    for s in pair_states:
        assert matching_violation(s) < 1e-10


def test_pair_states_against_shooting_oracle(pair_states):
    plus, minus = pair_states
    assert abs(plus.derivative(0.0) - 2.98790178) < 1e-6
    assert abs(minus.derivative(0.0) - 3.24019244) < 1e-6
    for s in pair_states:
        mism, va, da = _shoot(s, s.a)
        assert mism < 1e-8
        # continue across the shell: slope jumps by alpha psi(a)
        def rhs(x, y):
            return [y[1], s.eta * y[0] ** 3 - s.Omega * y[0]]
        sol = solve_ivp(rhs, (s.a, 3.0), [va, da + s.alpha * va],
                        t_eval=[1.5, 2.0, 3.0], rtol=1e-12, atol=1e-13,
                        method="DOP853")
        for i, x in enumerate([1.5, 2.0, 3.0]):
            assert abs(sol.y[0][i] - s.evaluate(x)) < 1e-7


def test_pair_norm_with_tail(pair_states):
    for s in pair_states:
        assert abs(_norm_total(s) - 1.0) < 1e-8


def test_pair_wronskian_vanishes(pair_states):
    x = np.linspace(0.0, 4.0, 600)
    for s in pair_states:
        psi = s.evaluate(x).astype(complex) * np.exp(0.7j)
        dpsi = s.derivative(x).astype(complex) * np.exp(0.7j)
        w = dpsi * np.conj(psi) - psi * np.conj(dpsi)
        assert np.max(np.abs(w)) < 1e-10


def test_stationary_equation_residual_second_order_finite(pair_states):
    s = pair_states[1]
    res = {}
    for h in (1e-3, 5e-4):
        x = np.arange(h, 3.0, h)
        x = x[np.abs(x - s.a) > 2.5 * h]  # the shell point carries the jump
        v = s.evaluate(x)
        vpp = (s.evaluate(x + h) - 2.0 * v + s.evaluate(x - h)) / h ** 2
        res[h] = np.max(np.abs(-vpp + s.eta * v ** 3 - s.Omega * v))
    assert 3.5 < res[1e-3] / res[5e-4] < 4.5


def test_no_pair_states_above_threshold():
    assert stationary_finite(ModelParams(a=1.0, alpha=10.0, eta=-6.49)) == []


def test_seed_reuse_tracks_branch(pair_states):
    minus = pair_states[1]
    got = stationary_finite(ModelParams(a=1.0, alpha=10.0, eta=-7.5), seed=minus)
    assert len(got) == 1
    assert abs(got[0].Omega - (-2.3778)) < 1e-3
    assert matching_violation(got[0]) < 1e-10


def test_finite_rejects_bad_parameters():
    with pytest.raises(ValueError):
        stationary_finite(ModelParams(a=1.0, alpha=math.inf, eta=-1.0))
    with pytest.raises(ValueError):
        stationary_finite(ModelParams(a=1.0, alpha=10.0, eta=1.0))


# ------------------------------------------------------- nodeless ground

def test_ground_frozen_energies():
    pins = {(-2.0, -0.01): -0.6405503521,
            (-2.0, -2.5e-4): -0.6350503698,
            (-5.0, -0.01): -6.1760654813,
            (-10.0, -0.01): -25.0227522742,
            (-10.0, -2.5e-4): -24.9983544538}
    for (al, eta), om in pins.items():
        sts = stationary_finite(ModelParams(a=1.0, alpha=al, eta=eta))
        ground = [s for s in sts if s.branch == "finite_ground"]
        assert len(ground) == 1
        assert abs(ground[0].Omega - om) < 1e-8
        assert matching_violation(ground[0]) < 1e-10


def test_ground_approaches_linear_level():
    # the weak-coupling limit must land on the linear eigenvalue
    for al in (-2.0, -5.0, -10.0):
        om_lin = bound_state(ModelParams(a=1.0, alpha=al)).omega
        offsets = []
        for eta in (-0.1, -0.01, -2.5e-4):
            sts = stationary_finite(ModelParams(a=1.0, alpha=al, eta=eta))
            g = [s for s in sts if s.branch == "finite_ground"][0]
            offsets.append(abs(g.Omega - om_lin))
        assert offsets[0] > offsets[1] > offsets[2]
        assert offsets[2] < 1e-3


def test_ground_state_profile_by_shooting():
    sts = stationary_finite(ModelParams(a=1.0, alpha=-5.0, eta=-0.5))
    g = [s for s in sts if s.branch == "finite_ground"][0]
    mism, va, da = _shoot(g, g.a)
    assert mism < 1e-8
    assert abs(_norm_total(g) - 1.0) < 1e-8


# --------------------------------------------------------- bifurcation scan

@pytest.fixture(scope="module")
def pair_diagram():
    return bifurcation_scan(ModelParams(a=1.0, alpha=10.0, eta=-7.0),
                            (-9.0, -5.5), steps=15)


def test_scan_threshold_location(pair_diagram):
    d = pair_diagram
    assert d.threshold is not None
    assert abs(d.threshold - (-6.59)) < 0.05
    assert abs(d.threshold - (-6.5857)) < 2e-3
    assert d.folds[0] == d.threshold
    assert list(d.folds) == sorted(d.folds, reverse=True)


def test_scan_pair_counts_across_threshold(pair_diagram):
    d = pair_diagram
    for eta in d.eta_grid:
        got = d.at(eta)
        if eta < d.threshold:
            assert {b for b, _ in got} == {"finite_plus_1", "finite_minus_1"}
        else:
            assert got == []


def test_scan_branches_coalesce_at_fold(pair_diagram):
    d = pair_diagram

    def gap(eta):
        om = dict(d.at(eta))
        return abs(om["finite_plus_1"] - om["finite_minus_1"])

    assert gap(-6.75) < gap(-7.5) < gap(-9.0)


def test_scan_ground_persists_to_weak_coupling():
    d = bifurcation_scan(ModelParams(a=1.0, alpha=-10.0, eta=-0.01),
                         (-0.5, -2.5e-4), steps=9)
    assert d.folds == ()
    assert d.threshold is None
    assert d.gaps == ()
    for eta in d.eta_grid:
        got = d.at(eta)
        assert [b for b, _ in got] == ["finite_ground"]
    om_lin = bound_state(ModelParams(a=1.0, alpha=-10.0)).omega
    assert abs(d.at(d.eta_grid[-1])[0][1] - om_lin) < 1e-3


def test_scan_rejects_nonnegative_window():
    with pytest.raises(ValueError):
        bifurcation_scan(ModelParams(a=1.0, alpha=10.0, eta=-7.0), (-2.0, 1.0))


# ------------------------------------------------------------- rescaling

def test_rescale_reduced_coupling(pair_states):
    plus, minus = pair_states
    g_plus, prof_plus = rescale_to_gamma(plus)
    g_minus, prof_minus = rescale_to_gamma(minus)
    assert abs(g_plus - (-5.920444)) < 1e-4
    assert abs(g_minus - (-7.187709)) < 1e-4
    # the rescaled profile carries unit mass on the well alone
    for prof in (prof_plus, prof_minus):
        w = prof.grid.simpson_weights()
        assert abs(np.sum(w * np.abs(prof.values) ** 2) - 1.0) < 1e-8


def test_rescale_hard_wall_gamma_equals_eta():
    s = stationary_infinite_focusing(1.0, -7.4, 1)
    gamma, _ = rescale_to_gamma(s)
    assert gamma == s.eta
