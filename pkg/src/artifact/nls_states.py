"""Stationary states of the cubic nonlinear shell model.

Profiles solve -psi'' + eta |psi|^2 psi = Omega psi away from the shell,
vanish at the origin, satisfy the derivative jump alpha psi(a) at the
shell, and carry unit L^2 norm.  In the hard-wall limit the states are
closed-form Jacobi elliptic arcs whose modulus comes from one monotone
scalar equation per mode.  At finite alpha the focusing states match a
cn arc on (0, a) to a sech tail on (a, inf) through seven algebraic
conditions; eliminating the amplitudes reduces them to three unknowns,
solved by Newton iteration from a battery of hard-wall seeds plus, for
a*alpha < -1, a bound-state seed for the nodeless ground branch.  A
pseudo-arclength scan in eta walks the solution curves through their
saddle-node folds and reports fold locations and the existence
threshold.
"""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import optimize

from .errors import SolvabilityError
from .linmodel import bound_state
from .model import GridSpec, ModelParams, WaveFunction
from .specfun import (_carlson_rd, _elliptic_K_comp, elliptic_E, elliptic_K,
                      jacobi_sn_cn_dn)

__all__ = [
    "StationaryState",
    "BifurcationDiagram",
    "phase_reality_check",
    "stationary_infinite_defocusing",
    "stationary_infinite_focusing",
    "mass_integral_G",
    "matching_violation",
    "stationary_finite",
    "bifurcation_scan",
    "rescale_to_gamma",
]

_log = logging.getLogger(__name__)

# Every matching / normalization condition must close to this on a
# returned state; candidates violating it are dropped (debug-logged).
MATCH_TOL = 1e-10

_LN_HALF = math.log(0.5)


@dataclass(frozen=True)
class StationaryState:
    """One stationary profile, real up to a global phase.

    The inner arc is C sn(lam x, p) for the hard-wall defocusing family
    and C cn(lam (x - x0), p) otherwise; finite-alpha states continue as
    C_prime sech(lam_prime (x - x0_prime)) past the shell.  ``I`` is the
    mass held inside (0, a); hard-wall states carry all of it there.
    ``p_comp_sq`` stores 1 - p^2 explicitly: the nodeless branch lives
    within ~1e-8 of p = 1, where re-deriving the complement from the
    rounded p would cost nine digits.
    """

    branch: str
    a: float
    alpha: float
    eta: float
    p: float
    lam: float
    C: float
    x0: float
    Omega: float
    I: float
    lam_prime: float = math.nan
    C_prime: float = math.nan
    x0_prime: float = math.nan
    p_comp_sq: float = math.nan

    @property
    def hard_wall(self) -> bool:
        return self.branch.startswith("infinite")

    def _value(self, x: float) -> float:
        if x < 0.0:
            return 0.0
        if self.hard_wall:
            if x > self.a:
                return 0.0
            sn, cn, _ = jacobi_sn_cn_dn(self.lam * (x - self.x0), self.p)
            return self.C * (sn if "defocusing" in self.branch else cn)
        if x <= self.a:
            _, cn, _ = jacobi_sn_cn_dn(self.lam * (x - self.x0), self.p)
            return self.C * cn
        return self.C_prime / math.cosh(self.lam_prime * (x - self.x0_prime))

    def _slope(self, x: float) -> float:
        if x < 0.0:
            return 0.0
        if self.hard_wall and x > self.a:
            return 0.0
        if not self.hard_wall and x > self.a:
            w = self.lam_prime * (x - self.x0_prime)
            return -self.C_prime * self.lam_prime * math.tanh(w) / math.cosh(w)
        sn, cn, dn = jacobi_sn_cn_dn(self.lam * (x - self.x0), self.p)
        if self.hard_wall and "defocusing" in self.branch:
            return self.C * self.lam * cn * dn
        return -self.C * self.lam * sn * dn

    def evaluate(self, x):
        """Profile value(s); the shell point uses the inner arc."""
        xs = np.asarray(x, dtype=float)
        out = np.array([self._value(v) for v in np.atleast_1d(xs)])
        return float(out[0]) if xs.ndim == 0 else out

    def derivative(self, x):
        xs = np.asarray(x, dtype=float)
        out = np.array([self._slope(v) for v in np.atleast_1d(xs)])
        return float(out[0]) if xs.ndim == 0 else out

    def sample(self, grid: GridSpec) -> WaveFunction:
        return WaveFunction(grid, self.evaluate(grid.x()).astype(complex))


@dataclass(frozen=True)
class BifurcationDiagram:
    """Stationary-state content of an eta window at fixed (a, alpha).

    ``states`` holds every solved state, sorted by (branch, eta); each
    state carries its own eta.  ``folds`` are the saddle-node locations
    in descending order, so ``threshold`` (the largest, where the first
    pair is born) equals ``folds[0]`` when any fold lies in the window.
    ``gaps`` records branch stretches the continuation lost, as
    (branch, eta_reached, eta_target).
    """

    a: float
    alpha: float
    eta_grid: tuple[float, ...]
    states: tuple[StationaryState, ...]
    folds: tuple[float, ...]
    threshold: float | None
    gaps: tuple[tuple[str, float, float], ...]

    def at(self, eta: float) -> list[tuple[str, float]]:
        """(branch, Omega) pairs solved at one grid eta."""
        return [(s.branch, s.Omega) for s in self.states
                if math.isclose(s.eta, eta, rel_tol=0.0, abs_tol=1e-12)]


def phase_reality_check(psi: WaveFunction) -> float:
    """Residual imaginary part after removing the best global phase.

    The quadratic form int psi^2 dx picks the phase: writing it as
    R e^{2i theta}, rotating by e^{-i theta} minimizes the L^2 mass of
    Im psi.  Returns the max pointwise |Im| after that rotation.
    """
    w = psi.grid.simpson_weights()
    z = complex(np.sum(w * psi.values ** 2))
    theta = 0.5 * cmath.phase(z) if z != 0 else 0.0
    return float(np.max(np.abs(np.imag(np.exp(-1j * theta) * psi.values))))


# ---------------------------------------------------------------- hard wall

def _g_plus(p: float) -> float:
    return elliptic_K(p) * (elliptic_K(p) - elliptic_E(p))


def _g_minus(p: float) -> float:
    K = elliptic_K(p)
    return K * (elliptic_E(p) - (1.0 - p * p) * K)


def _solve_modulus(g, target: float) -> float:
    # g is strictly increasing with g(0+) = 0, g(1-) = inf; push the
    # upper bracket toward 1 until it clears the target.
    hi = 1.0 - 1e-6
    while g(hi) < target and hi < 1.0 - 1e-15:
        hi = 1.0 - 0.1 * (1.0 - hi)
    return float(optimize.brentq(lambda q: g(q) - target, 1e-12, hi,
                                 xtol=1e-15, rtol=4 * np.finfo(float).eps))


def stationary_infinite_defocusing(a: float, eta: float, m: int) -> StationaryState:
    """m-th defocusing stationary state of the hard-wall well (eta > 0).

    The modulus solves K(K - E) = a eta / 8 m^2; then lam = 2 m K / a,
    C = sqrt(2/eta) p lam, Omega = lam^2 (1 + p^2), and the profile is
    C sn(lam x, p) on (0, a).  Normalization is exact by construction.
    """
    if not eta > 0.0:
        raise ValueError("defocusing family needs eta > 0")
    if m < 1 or m != int(m):
        raise ValueError("mode index m must be a positive integer")
    p = _solve_modulus(_g_plus, a * eta / (8.0 * m * m))
    lam = 2.0 * m * elliptic_K(p) / a
    C = math.sqrt(2.0 / eta) * p * lam
    return StationaryState(branch=f"infinite_defocusing_{m}", a=a,
                           alpha=math.inf, eta=eta, p=p, lam=lam, C=C,
                           x0=0.0, Omega=lam * lam * (1.0 + p * p), I=1.0)


def stationary_infinite_focusing(a: float, eta: float, m: int) -> StationaryState:
    """m-th focusing stationary state of the hard-wall well (eta < 0).

    The modulus solves K[E - (1-p^2)K] = a|eta| / 8 m^2; then
    lam = 2 m K / a, C = sqrt(2/|eta|) p lam, Omega = lam^2 (1 - 2p^2),
    and the profile is C cn(lam x - K, p) on (0, a).
    """
    if not eta < 0.0:
        raise ValueError("focusing family needs eta < 0")
    if m < 1 or m != int(m):
        raise ValueError("mode index m must be a positive integer")
    p = _solve_modulus(_g_minus, a * abs(eta) / (8.0 * m * m))
    K = elliptic_K(p)
    lam = 2.0 * m * K / a
    C = math.sqrt(2.0 / abs(eta)) * p * lam
    return StationaryState(branch=f"infinite_focusing_{m}", a=a,
                           alpha=math.inf, eta=eta, p=p, lam=lam, C=C,
                           x0=K / lam, Omega=lam * lam * (1.0 - 2.0 * p * p),
                           I=1.0)


def mass_integral_G(u: float, p: float, comp_sq: float | None = None) -> float:
    """Integral of cn^2(q + K(p), p) over q in (0, u).

    Shifting by the quarter period turns cn into -p' sn/dn, so with the
    usual reduction n~ = round(u / 2K) the closed form is

        G(u) = 2 n~ G(K) + p'^2 (sn^3/3) R_D(cn^2, 1, dn^2),
        G(K) = (p'^2/3) R_D(0, 1, p'^2) = (E - p'^2 K)/p^2,

    with sn, cn, dn at the reduced phase.  Every factor carries full
    relative precision, so the value stays accurate both for p -> 0 and
    for moduli within ~1e-8 of 1 (the nodeless branch lives there),
    where difference-based forms of G lose all digits.  ``comp_sq``
    supplies 1 - p^2 explicitly when the caller knows it better than
    the rounded p can encode.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"modulus out of range: {p}")
    if comp_sq is None:
        if p == 1.0:
            return 0.0  # K = inf pushes the cn arc entirely past any finite u
        comp_sq = (1.0 - p) * (1.0 + p)
    K = _elliptic_K_comp(comp_sq)
    n = math.floor(u / (2.0 * K) + 0.5)
    sn, cn, dn = jacobi_sn_cn_dn(u - 2.0 * K * n, p)
    half = comp_sq / 3.0 * _carlson_rd(0.0, 1.0, comp_sq)
    return 2.0 * n * half + comp_sq * sn ** 3 / 3.0 * _carlson_rd(cn * cn, 1.0, dn * dn)


# ------------------------------------------------------------ finite alpha
#
# Unknowns z = (s, lam, tau) with p'^2 = e^s and T = tanh(tau), where
# T = tanh(lam' (a - x0')).  The amplitudes are eliminated exactly:
# C = sqrt(2/|eta|) p lam, C' = sgn * sqrt(2/|eta|) lam',
# lam' = lam sqrt(1 - 2 p'^2), x0 = K(p)/lam.  s keeps p < 1 strictly
# (the ground branch needs p'^2 ~ 1e-8, unreachable in a raw p
# coordinate) and tau frees the outer tail from |T| < 1 bookkeeping.

_REJECT3 = np.array([1e6, 1e6, 1e6])
_REJECT2 = np.array([1e6, 1e6])


def _finite_residuals(z, a, alpha, eta, sgn):
    """Continuity, jump, and mass residuals at z = (s, lam, tau)."""
    s, lam, tau = z
    # the window keeps exp and the elliptic plumbing in exact territory
    if not (-34.0 < s < _LN_HALF and 0.0 < lam < 1e6 and abs(tau) < 350.0):
        return _REJECT3
    pp2 = math.exp(s)
    p = math.sqrt(1.0 - pp2)
    qp = 2.0 / (1.0 + math.exp(2.0 * tau))    # 1 - T without cancellation
    qm = 2.0 / (1.0 + math.exp(-2.0 * tau))   # 1 + T
    T = math.tanh(tau)
    sech = math.sqrt(qp * qm)
    lamp = lam * math.sqrt(1.0 - 2.0 * pp2)
    sn, cn, dn = jacobi_sn_cn_dn(lam * a - _elliptic_K_comp(pp2), p)
    return np.array([
        sgn * lamp * sech - p * lam * cn,
        sgn * lamp * sech * (lamp * T + alpha) - p * lam * lam * sn * dn,
        (2.0 * p * p * lam / abs(eta)) * mass_integral_G(lam * a, p, pp2)
        + (2.0 * lamp / abs(eta)) * qp - 1.0,
    ])


def _eliminated_residuals(y, a, alpha, eta):
    """Residuals on the manifold where continuity and jump hold exactly.

    Solving those two conditions for (sech, T) leaves the Pythagorean
    consistency sech^2 + T^2 = 1 and the mass condition, both O(1) and
    well scaled; the 3-variable system amplifies their error by the
    local stiffness, which is what limited the plain Newton solve at
    the ground-branch corner.
    """
    s, lam = y
    if not (-34.0 < s < _LN_HALF and 0.0 < lam < 1e6):
        return _REJECT2, math.nan, math.nan
    pp2 = math.exp(s)
    p = math.sqrt(1.0 - pp2)
    lamp = lam * math.sqrt(1.0 - 2.0 * pp2)
    sn, cn, dn = jacobi_sn_cn_dn(lam * a - _elliptic_K_comp(pp2), p)
    if abs(cn) < 1e-9:
        return _REJECT2, math.nan, math.nan
    sech_s = p * lam * cn / lamp           # carries sgn = sign(cn)
    T = (lam * sn * dn / cn - alpha) / lamp
    F = np.array([
        sech_s * sech_s + T * T - 1.0,
        (2.0 * p * p * lam / abs(eta)) * mass_integral_G(lam * a, p, pp2)
        + (2.0 * lamp / abs(eta)) * (1.0 - T) - 1.0,
    ])
    return F, T, sech_s


def _polish(y0, a, alpha, eta, rounds=10):
    """Newton on the eliminated 2-system, fourth-order FD Jacobian.

    The consistency residual re-enters the shell conditions amplified
    by C' lam' (~1e3 on the ground branch), so the iteration is pushed
    to the rounding floor and quits once progress stops there.
    """
    y = np.asarray(y0, dtype=float)
    cur = np.abs(_eliminated_residuals(y, a, alpha, eta)[0]).max()
    for _ in range(rounds):
        if cur < 2e-16:
            break
        F = _eliminated_residuals(y, a, alpha, eta)[0]
        J = np.empty((2, 2))
        for j in range(2):
            h = 1e-6 * max(1.0, abs(y[j]))
            def fd(d, j=j):
                yt = y.copy()
                yt[j] += d
                return _eliminated_residuals(yt, a, alpha, eta)[0]
            J[:, j] = (8.0 * (fd(h) - fd(-h)) - (fd(2 * h) - fd(-2 * h))) / (12.0 * h)
        try:
            d = np.linalg.solve(J, F)
        except np.linalg.LinAlgError:
            break
        # backtrack until the step actually helps; cycling otherwise
        # pins the residual three decades above the rounding floor
        step, took = 1.0, False
        for _ in range(5):
            cand = y - step * d
            res = np.abs(_eliminated_residuals(cand, a, alpha, eta)[0]).max()
            if res < cur:
                y, cur, took = cand, res, True
                break
            step *= 0.5
        if not took:
            break
    return y, cur


def _solve_finite(z0, a, alpha, eta, sgn):
    """Root of the reduced system from one seed, or None.

    MINPACK's hybrd does the global work (damped Newton with a
    forward-difference Jacobian and internal column scaling); the
    eliminated 2-system then polishes (s, lam) so the matching
    conditions close in their natural form.  Returns (s, lam, T, sgn).
    """
    sol = optimize.root(_finite_residuals, np.asarray(z0, dtype=float),
                        args=(a, alpha, eta, sgn), method="hybr",
                        options={"xtol": 1e-14, "maxfev": 400})
    if np.abs(_finite_residuals(sol.x, a, alpha, eta, sgn)).max() > 1e-6:
        return None
    y, res = _polish(sol.x[:2], a, alpha, eta)
    if res > 1e-9:
        return None
    _, T, sech_s = _eliminated_residuals(y, a, alpha, eta)
    if not (math.isfinite(T) and abs(T) < 1.0 and abs(sech_s) <= 1.0 + 1e-12):
        return None
    return float(y[0]), float(y[1]), T, int(math.copysign(1.0, sech_s))


def _same_root(r1, r2) -> bool:
    s1, l1, T1, g1 = r1
    s2, l2, T2, g2 = r2
    return (g1 == g2 and abs(l1 - l2) < 1e-7 * max(1.0, abs(l1))
            and abs(T1 - T2) < 1e-6 and abs(s1 - s2) < 1e-6 * max(1.0, abs(s1)))


def _comp_sq(state: StationaryState) -> float:
    pp2 = state.p_comp_sq
    return pp2 if math.isfinite(pp2) else (1.0 - state.p) * (1.0 + state.p)


def _assemble_state(a, alpha, eta, s, lam, T, sgn) -> StationaryState:
    pp2 = math.exp(s)
    p = math.sqrt(1.0 - pp2)
    lamp = lam * math.sqrt(1.0 - 2.0 * pp2)
    C = math.sqrt(2.0 / abs(eta)) * p * lam
    state = StationaryState(
        branch="", a=a, alpha=alpha, eta=eta, p=p, lam=lam, C=C,
        x0=_elliptic_K_comp(pp2) / lam, Omega=lam * lam * (2.0 * pp2 - 1.0),
        I=(C * C / lam) * mass_integral_G(lam * a, p, pp2),
        lam_prime=lamp, C_prime=sgn * math.sqrt(2.0 / abs(eta)) * lamp,
        x0_prime=a - math.atanh(T) / lamp, p_comp_sq=pp2)
    return replace(state, branch=_family_label(state))


def _family_index(state: StationaryState) -> int:
    # counts inner cn humps; 0 means the arc peaks past the shell
    # (nodeless ground shape continuing the linear bound state)
    K = _elliptic_K_comp(_comp_sq(state))
    return math.floor((state.lam * state.a - K) / (2.0 * K)) + 1


def _family_label(state: StationaryState) -> str:
    n = _family_index(state)
    return "finite_ground" if n <= 0 else f"finite_pair_{n}"


def _label_pairs(states: list[StationaryState]) -> list[StationaryState]:
    """Resolve finite_pair_n placeholders into plus/minus by energy."""
    out = []
    by_family: dict[int, list[StationaryState]] = {}
    for st in states:
        if st.branch == "finite_ground":
            out.append(st)
        else:
            by_family.setdefault(_family_index(st), []).append(st)
    for n, group in by_family.items():
        group.sort(key=lambda s: -s.Omega)
        if len(group) > 2:
            _log.debug("family %d holds %d roots; labeling extras minus", n, len(group))
        for i, st in enumerate(group):
            side = "plus" if i == 0 else "minus"
            out.append(replace(st, branch=f"finite_{side}_{n}"))
    out.sort(key=lambda s: (_family_index(s), -s.Omega))
    return out


def matching_violation(state: StationaryState) -> float:
    """Worst residual among the defining conditions of the state.

    Hard-wall states: Dirichlet values at both ends.  Finite-alpha
    states: the quarter-period placement of x0, continuity and jump at
    the shell, unit mass, and the three amplitude relations.  Conditions
    whose terms grow like 1/sqrt|eta| (shell values, slopes, and the
    amplitude relations) are measured relative to their own scale,
    floored at one, so the criterion stays absolute for order-one
    states and meaningful for the tall weak-coupling ones.
    """
    a, al, eta = state.a, state.alpha, state.eta
    p, lam = state.p, state.lam
    if state.hard_wall:
        return max(abs(state.evaluate(0.0)), abs(state.evaluate(a)))
    pp2 = _comp_sq(state)
    K = _elliptic_K_comp(pp2)
    sn, cn, dn = jacobi_sn_cn_dn(lam * a - K, p)
    w = state.lam_prime * (a - state.x0_prime)
    sech, th = 1.0 / math.cosh(w), math.tanh(w)
    inner, d_inner = state.C * cn, -state.C * lam * sn * dn
    outer = state.C_prime * sech
    d_outer = -state.C_prime * state.lam_prime * sech * th
    r5 = 2.0 * (1.0 - pp2) * lam * lam / abs(eta)
    r6 = 2.0 * state.lam_prime ** 2 / abs(eta)
    r7 = state.lam_prime ** 2
    s2 = max(1.0, abs(inner) + abs(outer))
    s3 = max(1.0, abs(d_outer) + abs(d_inner) + abs(al * inner))
    return max(
        abs(lam * state.x0 - K),
        abs(inner - outer) / s2,
        abs(d_outer - d_inner - al * inner) / s3,
        abs((state.C ** 2 / lam) * mass_integral_G(lam * a, p, pp2)
            + (state.C_prime ** 2 / state.lam_prime) * (1.0 - th) - 1.0),
        abs(state.C ** 2 - r5) / max(1.0, r5),
        abs(state.C_prime ** 2 - r6) / max(1.0, r6),
        abs(lam * lam * (2.0 * pp2 - 1.0) + r7) / max(1.0, r7),
    )


def _ground_seed_direct(a, alpha, eta):
    """Seed (s, lam, tau) from the linear bound state, or None.

    For small |eta| the nodeless state is the linear mode with a sech
    cap grafted on: C' = sqrt(2/|eta|) kappa fixes the cap amplitude,
    matching it to the bound-state value at the shell fixes tau, and
    p'^2 = (4 e^{-(kappa a + tau)})^2 places the modulus.  Valid while
    the cap is comfortably taller than the shell value.
    """
    bs = bound_state(ModelParams(a=a, alpha=alpha))
    if bs is None:
        return None
    kap = bs.kappa
    sh, ch = math.sinh(kap * a), math.cosh(kap * a)
    norm = math.sqrt((sh * ch / kap - a) / 2.0 + sh * sh / (2.0 * kap))
    ratio = math.sqrt(2.0 / abs(eta)) * kap * norm / sh
    if ratio < 1.05:
        return None
    tau = math.acosh(ratio)
    pp = 4.0 * math.exp(-(kap * a + tau))
    if 2.0 * pp * pp >= 0.5:
        return None
    return np.array([2.0 * math.log(pp), kap / math.sqrt(1.0 - 2.0 * pp * pp), tau])


def _ground_seed(a, alpha, eta):
    """Direct bound-state seed, else march eta down from a weak coupling."""
    z = _ground_seed_direct(a, alpha, eta)
    if z is not None:
        return z
    eta_cur = -0.01
    while _ground_seed_direct(a, alpha, eta_cur) is None:
        eta_cur *= 0.1
        if abs(eta_cur) < 1e-12:
            return None
    z = _ground_seed_direct(a, alpha, eta_cur)
    while True:
        got = _solve_finite(z, a, alpha, eta_cur, +1)
        if got is None:
            return None
        s, lam, T, _ = got
        z = np.array([s, lam, math.atanh(T)])
        if eta_cur <= eta:
            return z
        eta_cur = max(eta, eta_cur * 2.5)


def _seed_battery(a, alpha, eta):
    """(z0, sgn) trials: hard-wall focusing modes fanned out, plus the
    bound-state continuation seed when the linear model binds."""
    trials = []
    for m in (1, 2, 3):
        st = stationary_infinite_focusing(a, eta, m)
        p0 = min(max(st.p, 0.715), 0.999)
        s0 = math.log((1.0 - p0) * (1.0 + p0))
        for fl in (0.88, 1.0, 1.12):
            for T0 in (0.99, 0.9, 0.5, -0.3, -0.9):
                for sgn in (1, -1):
                    trials.append((np.array([s0, st.lam * fl, math.atanh(T0)]), sgn))
    if a * alpha < -1.0:
        z = _ground_seed(a, alpha, eta)
        if z is not None:
            trials.append((z, 1))
        else:
            _log.debug("ground seed unavailable at eta=%g", eta)
    return trials


def _seed_to_trial(seed, a):
    if isinstance(seed, StationaryState):
        if not seed.hard_wall and seed.branch.startswith("finite"):
            s = math.log(_comp_sq(seed))
            tau = seed.lam_prime * (a - seed.x0_prime)
            return (np.array([s, seed.lam, tau]),
                    int(math.copysign(1.0, seed.C_prime)))
        p0 = min(max(seed.p, 0.715), 0.999)
        return (np.array([math.log((1.0 - p0) * (1.0 + p0)), seed.lam,
                          math.atanh(0.9)]), 1)
    p0, lam0, x0p = (float(v) for v in seed)
    lamp = lam0 * math.sqrt(2.0 * p0 * p0 - 1.0)
    return (np.array([math.log((1.0 - p0) * (1.0 + p0)), lam0,
                      lamp * (a - x0p)]), 1)


def stationary_finite(params: ModelParams, seed=None) -> list[StationaryState]:
    """All distinct focusing stationary states found at params.eta < 0.

    Newton iteration with a numerical Jacobian on the reduced unknowns,
    from either the default seed battery or one explicit ``seed`` (a
    StationaryState or a (p, lam, x0_prime) continuation hint).  Every
    returned state closes each matching condition to MATCH_TOL; failed
    or out-of-domain seeds are debug-logged and skipped.  States come
    back sorted: ground branch first, then each pair family with the
    higher-energy (plus) state before the lower (minus).
    """
    a, alpha, eta = params.a, params.alpha, params.eta
    if params.hard_wall:
        raise ValueError("hard-wall states come from the closed-form "
                         "constructors, not the matching solver")
    if not eta < 0.0:
        raise ValueError("finite-alpha stationary states need eta < 0")
    trials = _seed_battery(a, alpha, eta) if seed is None \
        else [_seed_to_trial(seed, a)]
    roots, failures = [], 0
    for z0, sgn in trials:
        got = _solve_finite(z0, a, alpha, eta, sgn)
        if got is None:
            failures += 1
            continue
        if not any(_same_root(got, r) for r in roots):
            roots.append(got)
    if failures:
        _log.debug("stationary_finite(a=%g, alpha=%g, eta=%g): %d/%d seeds "
                   "did not produce a root", a, alpha, eta, failures, len(trials))
    states = []
    for r in roots:
        st = _assemble_state(a, alpha, eta, *r)
        viol = matching_violation(st)
        if viol > MATCH_TOL:
            _log.debug("dropping candidate Omega=%.6g: matching residual %.2e",
                       st.Omega, viol)
            continue
        states.append(st)
    return _label_pairs(states)


# ------------------------------------------------------- continuation in eta

def _branch_residuals(Z, a, alpha, sgn):
    if not Z[3] < 0.0:
        return _REJECT3
    return _finite_residuals(Z[:3], a, alpha, Z[3], sgn)


def _tangent(Z, a, alpha, sgn):
    """Unit null vector of the 3x4 Jacobian along the solution curve."""
    J = np.empty((3, 4))
    for j in range(4):
        h = 1e-6 * max(1.0, abs(Z[j]))
        Zp, Zm = Z.copy(), Z.copy()
        Zp[j] += h
        Zm[j] -= h
        J[:, j] = (_branch_residuals(Zp, a, alpha, sgn)
                   - _branch_residuals(Zm, a, alpha, sgn)) / (2.0 * h)
    t = np.linalg.svd(J)[2][-1]
    return t / np.linalg.norm(t)


def _corrector(Z_pred, t, a, alpha, sgn):
    def aug(Z):
        return np.concatenate([_branch_residuals(Z, a, alpha, sgn),
                               [t @ (Z - Z_pred)]])
    sol = optimize.root(aug, Z_pred, method="hybr",
                        options={"xtol": 1e-13, "maxfev": 300})
    if np.abs(aug(sol.x)).max() > 1e-8:
        return None
    return sol.x


def _continue_branch(Z0, a, alpha, sgn, eta_lo, eta_hi, toward, label,
                     max_steps=4000):
    """Walk one solution curve by pseudo-arclength continuation.

    Returns (samples, fold_brackets, gap).  ``toward`` orients the
    initial tangent (+1 toward increasing eta).  Samples are the raw
    Z = (s, lam, tau, eta) points; folds are (eta_lo_side, eta_hi_side)
    brackets around tangent eta-component sign flips.
    """
    span = eta_hi - eta_lo
    Z = np.asarray(Z0, dtype=float)
    t = _tangent(Z, a, alpha, sgn)
    if t[3] * toward < 0:
        t = -t
    samples, folds, gap = [Z.copy()], [], None
    ds = min(0.02 * (1.0 + np.linalg.norm(Z)), 0.2)
    for _ in range(max_steps):
        stepped = tn = None
        while ds > 1e-7:
            Zn = _corrector(Z + ds * t, t, a, alpha, sgn)
            if Zn is not None and np.linalg.norm(Zn - Z) < 10.0 * ds + 1e-9:
                cand = _tangent(Zn, a, alpha, sgn)
                if cand @ t < 0:
                    cand = -cand
                # a sharp rotation means the step leapt over a turn of
                # the curve; resolve it instead of bracketing a phantom
                if cand @ t > 0.5:
                    stepped, tn = Zn, cand
                    break
            ds *= 0.5
        if stepped is None:
            gap = (label, float(Z[3]), eta_lo if t[3] < 0 else eta_hi)
            break
        if tn[3] * t[3] < 0:  # curve turned around in eta: a fold nearby
            folds.append((min(Z[3], stepped[3]), max(Z[3], stepped[3])))
        Z, t = stepped, tn
        samples.append(Z.copy())
        ds = min(ds * 1.4, 0.2)
        if Z[3] > eta_hi + 0.02 * span or Z[3] < eta_lo - 0.02 * span:
            break
    return samples, folds, gap


def _refine_fold(bracket_lo, bracket_hi, z_near, a, alpha, sgn, tol=1e-4):
    """Bisect the largest eta where the branch pair still solves.

    ``z_near`` is a curve point close to the turning point; candidate
    etas count as alive when Newton from that seed still closes.  The
    dead side starts just above the observed turnaround.
    """
    eta_alive = bracket_lo
    eta_dead = bracket_hi + max(10.0 * tol, 0.01 * abs(bracket_hi))
    z = np.asarray(z_near, dtype=float)
    while _solve_finite(z, a, alpha, eta_dead, sgn) is not None:
        eta_dead += max(10.0 * tol, 0.01 * abs(eta_dead))
        if eta_dead >= 0.0:
            return None
    while eta_dead - eta_alive > tol:
        mid = 0.5 * (eta_alive + eta_dead)
        got = _solve_finite(z, a, alpha, mid, sgn)
        if got is None:
            eta_dead = mid
        else:
            eta_alive = mid
            z = np.array([got[0], got[1], math.atanh(got[2])])
    return 0.5 * (eta_alive + eta_dead)


def bifurcation_scan(params: ModelParams, eta_range, steps: int = 33) -> BifurcationDiagram:
    """Track stationary branches over an eta window at fixed (a, alpha).

    Pair branches are seeded by the battery at the most negative eta
    and continued through their folds by pseudo-arclength; the nodeless
    ground branch (present when a alpha < -1) is seeded at the weak end
    and continued down.  Fold locations come from tangent sign flips,
    refined by bisection well below the 1e-3 reporting tolerance.  The
    diagram holds the states re-solved at each grid eta from curve
    seeds; lost stretches are recorded as gaps, not errors.
    """
    a, alpha = params.a, params.alpha
    lo, hi = float(min(eta_range)), float(max(eta_range))
    if not (lo < 0.0 and hi < 0.0):
        raise ValueError("the scan window must sit in eta < 0")
    eta_grid = np.linspace(lo, hi, int(steps))

    curves, fold_vals, gaps = [], [], []

    base = stationary_finite(ModelParams(a=a, alpha=alpha, eta=lo))
    covered = []
    for st in base:
        if st.branch == "finite_ground":
            continue
        if any(abs(st.Omega - o) < 1e-6 for o in covered):
            continue
        sgn = int(math.copysign(1.0, st.C_prime))
        Z0 = np.array([math.log((1.0 - st.p) * (1.0 + st.p)), st.lam,
                       st.lam_prime * (a - st.x0_prime), lo])
        samples, brackets, gap = _continue_branch(
            Z0, a, alpha, sgn, lo, hi, toward=+1, label=st.branch)
        curves.append((samples, sgn))
        if gap is not None:
            gaps.append(gap)
        for b_lo, b_hi in brackets:
            near = min(samples, key=lambda Zs: abs(Zs[3] - b_hi))
            fold = _refine_fold(b_lo, b_hi, near[:3], a, alpha, sgn)
            if fold is not None:
                fold_vals.append(fold)
        # a curve that comes back through the start eta covers its
        # partner root there; compare by the Omega re-solved at lo
        for k in range(2, len(samples)):
            e0, e1 = samples[k - 1][3], samples[k][3]
            if not min(e0, e1) <= lo <= max(e0, e1):
                continue
            frac = 0.5 if e1 == e0 else (lo - e0) / (e1 - e0)
            z0 = samples[k - 1][:3] + frac * (samples[k][:3] - samples[k - 1][:3])
            got = _solve_finite(z0, a, alpha, lo, sgn)
            if got is not None:
                pp2 = math.exp(got[0])
                covered.append(got[1] ** 2 * (2.0 * pp2 - 1.0))

    if a * alpha < -1.0:
        zg = _ground_seed(a, alpha, hi)
        got = None if zg is None else _solve_finite(zg, a, alpha, hi, +1)
        if got is None:
            gaps.append(("finite_ground", hi, lo))
        else:
            Z0 = np.array([got[0], got[1], math.atanh(got[2]), hi])
            samples, _, gap = _continue_branch(
                Z0, a, alpha, +1, lo, hi, toward=-1, label="finite_ground")
            curves.append((samples, +1))
            if gap is not None:
                gaps.append(gap)

    states: list[StationaryState] = []
    for eta in eta_grid:
        found = []
        for samples, sgn in curves:
            for k in range(len(samples) - 1):
                e0, e1 = samples[k][3], samples[k + 1][3]
                if not min(e0, e1) <= eta <= max(e0, e1):
                    continue
                frac = 0.5 if e1 == e0 else (eta - e0) / (e1 - e0)
                z0 = samples[k][:3] + frac * (samples[k + 1][:3] - samples[k][:3])
                got = _solve_finite(z0, a, alpha, float(eta), sgn)
                if got is None:
                    continue
                if not any(_same_root(got, r) for r in found):
                    found.append(got)
        here = []
        for r in found:
            st = _assemble_state(a, alpha, float(eta), *r)
            if matching_violation(st) <= MATCH_TOL:
                here.append(st)
        states.extend(_label_pairs(here))

    states.sort(key=lambda s: (s.branch, s.eta))
    fold_list: list[float] = []
    for v in sorted(fold_vals, reverse=True):
        # two curves through one saddle-node report the same fold
        if not fold_list or abs(fold_list[-1] - v) > 1e-3:
            fold_list.append(v)
    folds = tuple(fold_list)
    return BifurcationDiagram(
        a=a, alpha=alpha, eta_grid=tuple(float(e) for e in eta_grid),
        states=tuple(states), folds=folds,
        threshold=folds[0] if folds else None, gaps=tuple(gaps))


def rescale_to_gamma(state: StationaryState, eta: float | None = None,
                     n: int = 2000):
    """Reduced coupling Gamma = eta * I and the profile carrying unit
    mass on (0, a) alone.

    The rescaled profile phi = psi / sqrt(I) restricted to the well is
    what the fixed-energy scattering normalization sees, so stationary
    states at coupling eta sit on the scattering family at Gamma.
    Returns (Gamma, WaveFunction on [0, a]).
    """
    if eta is None:
        eta = state.eta
    gamma = eta * state.I
    grid = GridSpec(L=state.a, h=state.a / n, split=state.a / 2.0)
    values = state.evaluate(grid.x()) / math.sqrt(state.I)
    return gamma, WaveFunction(grid, values.astype(complex))
