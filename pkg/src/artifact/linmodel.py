"""Linear delta-shell model on the half-line.

Spectrum, resonance ladder, resolvent kernel and the linear scattering
coefficient.  Everything is a pure function of immutable ModelParams; the
characteristic function

    F(k) = 2ik - alpha + alpha e^{2ika}

is the single source of truth: bound states are its roots on the positive
imaginary axis, resonances its roots in the sector arg k in (-pi/4, 0),
and the resolvent denominator is F itself.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from . import specfun
from .errors import NumericsError, PoleProximityError
from .model import GridSpec, ModelParams, WaveFunction

__all__ = [
    "ModelParams",
    "Resonance",
    "BoundState",
    "characteristic_residual",
    "bound_state",
    "resonances",
    "eigen_infinite",
    "resolvent_kernel",
    "scattering_linear",
]


@dataclass(frozen=True)
class Resonance:
    m: int
    k: complex
    omega: complex

    @classmethod
    def from_k(cls, m: int, k: complex) -> "Resonance":
        return cls(m=m, k=k, omega=k * k)


@dataclass(frozen=True)
class BoundState:
    omega: float
    kappa: float


def _require_finite_alpha(params: ModelParams):
    if params.hard_wall:
        raise ValueError("operation needs finite alpha (hard wall excluded)")


def characteristic_residual(params: ModelParams, k: complex) -> complex:
    """F(k) = 2ik - alpha + alpha e^{2ika}; zero at eigenvalues and resonances."""
    _require_finite_alpha(params)
    k = complex(k)
    return 2j * k - params.alpha + params.alpha * cmath.exp(2j * k * params.a)


def _polish_root(params: ModelParams, k: complex, tol: float = 1e-13) -> complex:
    # Newton on F; the seed from Lambert W is already near machine accuracy,
    # so this is one or two steps at most
    a, al = params.a, params.alpha
    for _ in range(8):
        f = characteristic_residual(params, k)
        if abs(f) <= tol:
            return k
        fp = 2j + 2j * a * al * cmath.exp(2j * k * a)
        k = k - f / fp
    return k


def bound_state(params: ModelParams) -> BoundState | None:
    """The single negative eigenvalue, present exactly when a*alpha < -1."""
    _require_finite_alpha(params)
    a, al = params.a, params.alpha
    if a * al >= -1.0:
        return None
    w = specfun.lambert_w(0, a * al * math.exp(a * al))
    kappa = (-a * al + w.real) / (2.0 * a)
    k = _polish_root(params, 1j * kappa)
    kappa = k.imag
    res = abs(characteristic_residual(params, 1j * kappa))
    if not (kappa > 0.0 and res <= 1e-12):
        raise NumericsError("bound-state root failed to converge", residual=res)
    return BoundState(omega=-kappa * kappa, kappa=kappa)


def resonances(params: ModelParams, m_max: int) -> list[Resonance]:
    """Resonance momenta k_m = i w_m, w_m = (-a alpha + W_{-m}(a alpha e^{a alpha}))/2a.

    Only the stated branch family is returned; each root is polished on F
    and must land in the sector arg k in (-pi/4, 0) with Re k > 0.
    """
    _require_finite_alpha(params)
    a, al = params.a, params.alpha
    if not (al > 0.0):
        raise ValueError("resonance ladder defined for alpha > 0")
    if m_max < 1:
        raise ValueError("m_max must be >= 1")
    z = a * al * math.exp(a * al)
    out = []
    for m in range(1, m_max + 1):
        w = (-a * al + specfun.lambert_w(-m, z)) / (2.0 * a)
        k = _polish_root(params, 1j * w)
        res = abs(characteristic_residual(params, k))
        # evaluating F itself carries ~4 a |k|^2 eps of argument-reduction
        # noise, so the fixed 1e-12 bar only makes sense below |k| ~ 50
        floor = 64.0 * 2.2e-16 * a * abs(k) ** 2
        if res > max(1e-12, floor):
            raise NumericsError(f"resonance m={m} failed to converge", residual=res)
        if not (k.real > 0.0 and -math.pi / 4 < cmath.phase(k) < 0.0):
            raise NumericsError(f"resonance m={m} left the sector: k={k!r}")
        out.append(Resonance.from_k(m, k))
    return out


def eigen_infinite(params: ModelParams, m: int, grid: GridSpec | None = None):
    """Hard-wall eigenpair: omega = (m pi / a)^2, psi = sqrt(2/a) sin(m pi x / a) on (0, a)."""
    if m < 1:
        raise ValueError("m must be >= 1")
    a = params.a
    if grid is None:
        grid = GridSpec.for_shell(a)
    omega = (m * math.pi / a) ** 2
    x = grid.x()
    vals = np.where(x < a, math.sqrt(2.0 / a) * np.sin(m * math.pi * x / a), 0.0)
    vals[grid.n_split:] = 0.0
    return omega, WaveFunction(grid, vals)


def resolvent_kernel(params: ModelParams, x: float, y: float, k: complex) -> complex:
    """Green function of H - k^2 on the half-line, Im k > 0 off the poles.

    K(x,y,k) = (i/2k) e^{ik|x-y|} - (1/4k^2) sum_j M_j e^{ik phase_j} with
    M = Gamma^{-1}(k), the 2x2 matrix whose denominator is F(k).
    """
    _require_finite_alpha(params)
    a, al = params.a, params.alpha
    k = complex(k)
    F = characteristic_residual(params, k)
    if abs(F) < 1e-12:
        raise PoleProximityError(
            f"resolvent evaluated within 1e-12 of a pole: |F|={abs(F):.3e}",
            residual=abs(F),
        )
    eika = cmath.exp(1j * k * a)
    m11, m12, m22 = -2.0 * k - 1j * al, 1j * al * eika, -1j * al
    ex, exa = abs(x), abs(x - a)
    ey, eya = abs(y), abs(y - a)
    s = (
        m11 * cmath.exp(1j * k * (ex + ey))
        + m12 * cmath.exp(1j * k * (ex + eya))
        + m12 * cmath.exp(1j * k * (exa + ey))
        + m22 * cmath.exp(1j * k * (exa + eya))
    )
    free = (1j / (2.0 * k)) * cmath.exp(1j * k * abs(x - y))
    return free - s / (2.0 * k * F)


def scattering_linear(params: ModelParams, omega: float) -> float:
    """S(omega) = k^2 / (k^2 + alpha^2 sin^2(ka) + k alpha sin(2ka)), k = sqrt(omega)."""
    _require_finite_alpha(params)
    if not (omega > 0.0):
        raise ValueError("omega must be positive")
    a, al = params.a, params.alpha
    k = math.sqrt(omega)
    denom = k * k + (al * math.sin(k * a)) ** 2 + k * al * math.sin(2.0 * k * a)
    if denom <= 0.0:
        raise NumericsError(f"scattering denominator not positive: {denom!r}")
    return k * k / denom
