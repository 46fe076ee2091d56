"""Gauss-Legendre rules and element-wise integration on 1D meshes."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

MAX_POINTS = 64


@dataclass(frozen=True)
class QuadRule:
    """Gauss-Legendre rule on the reference interval [-1, 1]."""

    nodes: np.ndarray
    weights: np.ndarray

    @property
    def order(self) -> int:
        return self.nodes.shape[0]

    def mapped(self, a, b):
        """Nodes and weights mapped affinely to ``[a, b]``.

        ``a`` and ``b`` may be arrays of element endpoints, in which case the
        results have shape ``(len(a), order)``.
        """
        a = np.asarray(a, dtype=float)[..., None]
        b = np.asarray(b, dtype=float)[..., None]
        half = 0.5 * (b - a)
        return 0.5 * (a + b) + half * self.nodes, half * self.weights


@lru_cache(maxsize=None)
def _gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(n: int) -> QuadRule:
    """``n``-point Gauss-Legendre rule, exact for polynomials of degree ``2n-1``."""
    if not isinstance(n, (int, np.integer)) or not 1 <= n <= MAX_POINTS:
        raise ValueError(f"number of Gauss points must be in [1, {MAX_POINTS}], got {n!r}")
    x, w = _gauss_legendre(int(n))
    return QuadRule(x, w)


def integrate_mesh(mesh, rule: QuadRule, f) -> float:
    """Integrate ``f`` over the mesh domain, applying ``rule`` on each element.

    ``f`` must accept an array of points and return values of the same shape.
    """
    br = mesh.breakpoints
    x, w = rule.mapped(br[:-1], br[1:])
    return float(np.sum(w * f(x)))
