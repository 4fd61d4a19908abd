"""Shared containers: model parameters, uniform grids, sampled wave functions.

The model lives on the half-line with a single delta shell of strength
``alpha`` at ``x = a``; ``alpha = +inf`` encodes a Dirichlet wall at the
shell (the limiting hard-wall model).  ``eta`` is the strength of the cubic
nonlinearity and is simply carried along for the modules that need it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["ModelParams", "GridSpec", "WaveFunction"]


@dataclass(frozen=True)
class ModelParams:
    a: float = 1.0
    alpha: float = 10.0
    eta: float = 0.0

    def __post_init__(self):
        if not (self.a > 0.0 and math.isfinite(self.a)):
            raise ValueError("shell position a must be positive and finite")
        if self.alpha == 0.0:
            raise ValueError("alpha = 0 is the free line, outside this model")
        if math.isinf(self.alpha) and self.alpha < 0:
            raise ValueError("only alpha = +inf encodes the hard wall")
        if not math.isfinite(self.eta):
            raise ValueError("eta must be finite")

    @property
    def hard_wall(self) -> bool:
        return math.isinf(self.alpha)


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid on [0, L] whose nodes include the shell position.

    ``split`` is that interior node.  Composite Simpson weights are built
    per panel on [0, split] and [split, L], so both panels need an even
    interval count; the constructor enforces it.
    """

    L: float
    h: float
    split: float

    def __post_init__(self):
        if not (0.0 < self.split < self.L):
            raise ValueError("need 0 < split < L")
        n1 = self.split / self.h
        n2 = (self.L - self.split) / self.h
        for n in (n1, n2):
            if abs(n - round(n)) > 1e-9 * max(1.0, n) or round(n) % 2:
                raise ValueError(
                    "h must divide both [0, split] and [split, L] into an "
                    "even number of intervals"
                )

    @classmethod
    def for_shell(cls, a: float, L: float | None = None, h: float | None = None) -> "GridSpec":
        # free-dispersion leakage past L stays < 1e-4 for t <= 1 at L = 8a
        if L is None:
            L = 8.0 * a
        if h is None:
            h = a / 400.0
        return cls(L=L, h=h, split=a)

    @property
    def n_split(self) -> int:
        return round(self.split / self.h)

    @property
    def n_nodes(self) -> int:
        return round(self.L / self.h) + 1

    def x(self) -> np.ndarray:
        return np.arange(self.n_nodes) * self.h

    def simpson_weights(self) -> np.ndarray:
        w = np.zeros(self.n_nodes)
        for lo, hi in ((0, self.n_split), (self.n_split, self.n_nodes - 1)):
            w[lo:hi + 1:2] += 2.0 * self.h / 3.0
            w[lo + 1:hi:2] += 4.0 * self.h / 3.0
            w[lo] -= self.h / 3.0
            w[hi] -= self.h / 3.0
        return w


@dataclass
class WaveFunction:
    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != (self.grid.n_nodes,):
            raise ValueError("values must be sampled on every grid node")

    def norm_sq(self) -> float:
        w = self.grid.simpson_weights()
        return float(np.real(w @ (np.abs(self.values) ** 2)))

    def norm(self) -> float:
        return math.sqrt(self.norm_sq())

    def normalized(self) -> "WaveFunction":
        return WaveFunction(self.grid, self.values / self.norm())

    def inner(self, other: "WaveFunction") -> complex:
        if other.grid != self.grid:
            raise ValueError("grids differ")
        w = self.grid.simpson_weights()
        return complex(np.sum(w * np.conj(self.values) * other.values))
