"""Long-time survival amplitude for the confined ground state.

The initial state throughout is the hard-wall ground mode
sqrt(2/a) sin(pi x / a) on (0, a).  Its overlap with the evolved state
splits into a dispersive t^{-3/2} tail and a ladder of resonance
exponentials e^{-i omega_m t} whose coefficients are explicit in the
resonance momenta k_m.  This module evaluates those coefficients, the
truncated asymptotic sum, the instant where the tail overtakes the
slowest exponential, and an exact quadrature route (rotated-ray integral
plus residue corrections) that serves as the in-repo oracle for all of
the above.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import AccuracyWarning
from .kernel import gaussian_ray_quad
from .linmodel import resonances
from .model import ModelParams
from .specfun import lambert_w

__all__ = [
    "T_MIN",
    "ResonanceTerm",
    "AsymptoticCoefficients",
    "Crossover",
    "SurvivalTrace",
    "asymptotic_coefficients",
    "survival_asymptotic",
    "crossover_time",
    "survival_exact",
]

# Below this time the omitted O(t^{-5/2}) remainder is not small; results
# are still returned, with an AccuracyWarning.
T_MIN = 0.5

_PROVENANCES = ("asymptotic", "kernel-quadrature", "split-step")


@dataclass(frozen=True)
class ResonanceTerm:
    """One resonance contribution: beta * c * e^{-i omega t}."""

    m: int
    k: complex
    omega: complex
    beta: float
    q: complex
    c: complex


@dataclass(frozen=True)
class AsymptoticCoefficients:
    a: float
    alpha: float
    a1: complex
    terms: tuple

    @property
    def c1(self) -> complex:
        return self.terms[0].c

    @property
    def omega1(self) -> complex:
        return self.terms[0].omega


@dataclass(frozen=True)
class Crossover:
    """Instant where the t^{-3/2} tail overtakes the m=1 exponential.

    ``t_star`` is NaN when the exponential term never dominates (very wide
    resonance); ``approx`` is the small-width scale estimate
    |Im omega_1|^{-1} |ln |Im omega_1||, meaningful for narrow resonances.
    """

    t_star: float
    approx: float

    @property
    def crossed(self) -> bool:
        return math.isfinite(self.t_star)


@dataclass
class SurvivalTrace:
    times: np.ndarray
    amplitudes: np.ndarray
    provenance: str

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.times.ndim != 1 or self.times.shape != self.amplitudes.shape:
            raise ValueError("times and amplitudes must be matching 1-d arrays")
        if self.times.size >= 2 and not np.all(np.diff(self.times) > 0.0):
            raise ValueError("times must be strictly increasing")
        if self.provenance not in _PROVENANCES:
            raise ValueError(f"provenance must be one of {_PROVENANCES}")


def _q_of_k(a: float, al: float, k: complex) -> complex:
    # q(k) = -2 a pi [(1+e^{ika})/(pi^2-k^2a^2)]^2 (k + i al - i al e^{ika}),
    # with the last factor written as k + 2 al e^{ika/2} sin(ka/2) so the
    # k -> 0 cancellation never happens in floating point.
    ka = k * a
    s = (1.0 + cmath.exp(1j * ka)) / (math.pi**2 - ka * ka)
    w = k + 2.0 * al * cmath.exp(0.5j * ka) * cmath.sin(0.5 * ka)
    return -2.0 * a * math.pi * s * s * w


def _beta_of_k(k: complex) -> float:
    if abs(k.imag) > abs(k.real):
        return 0.0
    if abs(k.imag) == abs(k.real):
        return 0.5
    return 1.0


def asymptotic_coefficients(params: ModelParams, m_max: int = 10) -> AsymptoticCoefficients:
    """Tail coefficient a1 and resonance weights (beta_m, q_m, c_m), m <= m_max.

    Only defined for the repulsive shell (alpha > 0, finite): an attractive
    shell adds a bound-state overlap that never decays, and the hard wall
    has no resonances at all.
    """
    a, al = params.a, params.alpha
    if params.hard_wall or not (al > 0.0):
        raise ValueError("survival asymptotics need 0 < alpha < inf")
    a1 = -math.sqrt(2.0) * (1.0 + 1.0j) * a**3 / (2.0 * (1.0 + a * al) ** 2 * math.pi**2.5)
    terms = []
    for r in resonances(params, m_max):
        q = _q_of_k(a, al, r.k) / (2.0 + 2.0 * a * (al - 2.0j * r.k))
        c = 2.0j * math.pi * q
        terms.append(ResonanceTerm(m=r.m, k=r.k, omega=r.omega,
                                   beta=_beta_of_k(r.k), q=q, c=c))
    return AsymptoticCoefficients(a=a, alpha=al, a1=a1, terms=tuple(terms))


def survival_asymptotic(coeffs: AsymptoticCoefficients, t, two_term: bool = False):
    """A(t) = a1 t^{-3/2} - sum_m beta_m c_m e^{-i omega_m t}.

    The minus sign on the resonance sum is the pairing under which the
    coefficient records combine into the actual overlap <psi_0, psi_t>; it
    is pinned against the exact quadrature and propagator-matrix routes in
    the tests (both signs leave |A| unchanged, so only this pairing is
    observable at all).  ``two_term`` keeps only the m = 1 exponential (the
    short formula used for the tabulated comparisons).  Accepts a scalar or
    an array of times; times below T_MIN are computed anyway but flagged
    with AccuracyWarning.
    """
    ts = np.asarray(t, dtype=float)
    if np.any(ts <= 0.0):
        raise ValueError("t must be positive")
    if np.any(ts < T_MIN):
        warnings.warn(f"asymptotic survival amplitude below t = {T_MIN} "
                      "carries an O(t^-5/2) remainder that is not small",
                      AccuracyWarning, stacklevel=2)
    out = coeffs.a1 * ts**-1.5 + 0.0j
    terms = coeffs.terms[:1] if two_term else coeffs.terms
    for term in terms:
        out = out - term.beta * term.c * np.exp(-1j * term.omega * ts)
    return complex(out) if np.isscalar(t) else out


def crossover_time(coeffs: AsymptoticCoefficients) -> Crossover:
    """Solve |a1| t^{-3/2} = |beta_1 c_1| e^{Im(omega_1) t} for the late root.

    Uses the real branch -1 of Lambert W; when its argument falls outside
    [-1/e, 0) the exponential never dominates and t_star is NaN.
    """
    g = coeffs.omega1.imag
    if not (g < 0.0):
        raise ValueError("need a decaying m = 1 resonance (Im omega_1 < 0)")
    approx = abs(math.log(abs(g))) / abs(g)
    amp = coeffs.terms[0].beta * abs(coeffs.c1)
    if amp == 0.0 or coeffs.a1 == 0.0:
        return Crossover(t_star=math.nan, approx=approx)
    arg = (2.0 * g / 3.0) * (abs(coeffs.a1) / amp) ** (2.0 / 3.0)
    if arg < -1.0 / math.e:
        return Crossover(t_star=math.nan, approx=approx)
    w = lambert_w(-1, arg)
    t_star = 3.0 / (2.0 * g) * w.real
    return Crossover(t_star=t_star, approx=approx)


def _Q_free(a: float, k: complex) -> complex:
    # Overlap density of the free half-line evolution; the double zero of
    # the numerator cancels the (k^2 a^2 - pi^2)^2 pole, and on the rotated
    # ray the denominator is bounded below by pi^4 so no guard is needed.
    ka = k * a
    num = 2j * math.pi**2 * (1.0 + cmath.exp(1j * ka)) + ka * (math.pi**2 - ka * ka)
    return a * num / (1j * math.pi * (ka * ka - math.pi**2) ** 2)


def _Q_shell(a: float, al: float, k: complex) -> complex:
    # Shell part q(k)/(2k + i al - i al e^{2ika}); both factors vanish
    # linearly at k = 0, in the stable forms the ratio is finite there.
    if k == 0:
        return -4.0 * a / math.pi**3
    q = _q_of_k(a, al, k)
    F = 2j * (k + al * cmath.exp(1j * k * a) * cmath.sin(k * a))
    return 1j * q / F


@lru_cache(maxsize=32)
def _residue_ladder(params: ModelParams):
    return tuple(resonances(params, 60))


def survival_exact(params: ModelParams, t: float,
                   epsabs: float = 1e-12, epsrel: float = 1e-11) -> complex:
    """Exact survival amplitude by quadrature, no spatial grid.

    The defining k-integral is rotated onto the e^{-i pi/4} ray (where the
    integrand decays like a Gaussian) and the resonance poles swept by the
    rotation are restored as residue terms.  Intended for t >= ~0.05; the
    integrand grows as e^{3 a rho / sqrt 2} before the Gaussian weight wins,
    which overflows for much smaller t.  Cost is a few quad calls per time.
    """
    a, al = params.a, params.alpha
    if params.hard_wall or not (al > 0.0):
        raise ValueError("exact survival amplitude needs 0 < alpha < inf")
    if not (t > 0.0):
        raise ValueError("t must be positive")
    rot = cmath.exp(-0.25j * math.pi)

    def fn(rho: float) -> complex:
        k = rot * rho
        return rot * (_Q_free(a, k) + _Q_shell(a, al, k))

    out = gaussian_ray_quad(fn, t, epsabs=epsabs, epsrel=epsrel)
    # residue corrections for the poles between the real axis and the ray:
    # the wedge is traversed clockwise, so each crossed pole is subtracted
    for r in _residue_ladder(params):
        if math.exp(r.omega.imag * t) < 1e-18:
            break
        beta = _beta_of_k(r.k)
        if beta == 0.0:
            continue
        q = _q_of_k(a, al, r.k) / (2.0 + 2.0 * a * (al - 2.0j * r.k))
        out -= beta * 2.0j * math.pi * q * cmath.exp(-1j * r.omega * t)
    return out
