"""Compactly supported C^1 test functions with known support radius."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def plateau(u: np.ndarray) -> np.ndarray:
    """1 on u <= 0, 0 on u >= 1, cubic smoothstep in between (C^1)."""
    u = np.clip(u, 0.0, 1.0)
    return 1.0 - u * u * (3.0 - 2.0 * u)


@dataclass(frozen=True)
class PlateauBump:
    """height * plateau((|x - c| - inner) / (outer - inner)); vanishes outside ball(c, outer)."""

    center: tuple[float, ...]
    inner: float
    outer: float
    height: float = 1.0

    def __post_init__(self):
        if not 0 <= self.inner < self.outer:
            raise ValueError("need 0 <= inner < outer")

    @property
    def support_radius(self) -> float:
        """Radius of a ball about the origin containing the support."""
        return float(np.linalg.norm(self.center)) + self.outer

    @property
    def max_value(self) -> float:
        return abs(self.height)

    def __call__(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        r = np.linalg.norm(x - np.asarray(self.center), axis=1)
        return self.height * plateau((r - self.inner) / (self.outer - self.inner))

    def scaled(self, c: float) -> "PlateauBump":
        return PlateauBump(self.center, self.inner, self.outer, self.height * c)


@dataclass(frozen=True)
class ProductBump:
    """prod_i plateau((|x_i - c_i| - inner_i) / (outer_i - inner_i)); coordinates with
    ``outer_i = inf`` are left free."""

    center: tuple[float, ...]
    inner: tuple[float, ...]
    outer: tuple[float, ...]
    height: float = 1.0

    @property
    def support_radius(self) -> float:
        ext = [abs(c) + o for c, o in zip(self.center, self.outer) if np.isfinite(o)]
        if len(ext) != len(self.center):
            return float("inf")
        return float(np.linalg.norm(ext))

    @property
    def max_value(self) -> float:
        return abs(self.height)

    def factor(self, i: int, xi) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        o = self.outer[i]
        if not np.isfinite(o):
            return np.ones_like(xi)
        return plateau((np.abs(xi - self.center[i]) - self.inner[i]) / (o - self.inner[i]))

    def __call__(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        out = np.full(x.shape[0], float(self.height))
        for i in range(x.shape[1]):
            out *= self.factor(i, x[:, i])
        return out


@dataclass(frozen=True)
class Zero:
    dim: int

    support_radius = 0.0
    max_value = 0.0

    def __call__(self, x) -> np.ndarray:
        return np.zeros(np.atleast_2d(x).shape[0])
