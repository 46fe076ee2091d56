"""Boundary-reduced trial and test spaces and the map ``u -> u(T) - u``."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .splines import SplineSpace


class Kind(str, Enum):
    TRIAL = "trial"  # drop the first basis function: v(0) = 0
    TEST = "test"  # drop the last basis function: v(T) = 0


@dataclass(frozen=True, eq=False)
class ReducedSpace:
    """A spline space with one endpoint basis function removed.

    ``index_map[i]`` is the parent index of reduced basis function ``i``.
    """

    parent: SplineSpace
    kind: Kind
    index_map: np.ndarray

    @property
    def dim(self) -> int:
        return self.index_map.size

    @property
    def degree(self) -> int:
        return self.parent.degree

    @property
    def mesh(self):
        return self.parent.mesh

    @property
    def offset(self) -> int:
        """Parent index of reduced index 0."""
        return int(self.index_map[0])

    def embed(self, coeffs) -> np.ndarray:
        """Parent coefficients of a reduced coefficient vector."""
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (self.dim,):
            raise ValueError(f"expected {self.dim} coefficients, got shape {coeffs.shape}")
        out = np.zeros(self.parent.dim)
        out[self.index_map] = coeffs
        return out

    def restrict(self, parent_coeffs) -> np.ndarray:
        """Reduced coefficients; the dropped parent coefficient must be zero."""
        parent_coeffs = np.asarray(parent_coeffs, dtype=float)
        dropped = 0 if self.kind is Kind.TRIAL else self.parent.dim - 1
        if parent_coeffs[dropped] != 0.0:
            raise ValueError(f"function is not in the {self.kind.value} space")
        return parent_coeffs[self.index_map].copy()

    def evaluate(self, coeffs, x, k: int = 0):
        return self.parent.evaluate(self.embed(coeffs), x, k)

    def __eq__(self, other):
        return (
            isinstance(other, ReducedSpace)
            and self.kind is other.kind
            and self.parent == other.parent
        )

    def __hash__(self):
        return hash((self.kind, self.parent))


def reduce(space: SplineSpace, kind: Kind | str) -> ReducedSpace:
    """Remove the basis function that is nonzero at ``0`` (trial) or ``T`` (test)."""
    kind = Kind(kind)
    n = space.dim
    if n < 2:
        raise ValueError(f"cannot reduce a space of dimension {n}")
    idx = np.arange(1, n) if kind is Kind.TRIAL else np.arange(0, n - 1)
    idx.setflags(write=False)
    return ReducedSpace(space, kind, idx)


def _check_pair(trial: ReducedSpace, test: ReducedSpace):
    if trial.kind is not Kind.TRIAL or test.kind is not Kind.TEST:
        raise ValueError("expected a (trial, test) pair of reduced spaces")
    if trial.parent != test.parent:
        raise ValueError("trial and test spaces must share the same parent space")


def ht_map(trial_coeffs, trial: ReducedSpace, test: ReducedSpace) -> np.ndarray:
    """Test coefficients of ``u(T) - u`` for ``u`` in the trial space.

    By partition of unity, coefficient ``i`` is ``u_last - u_i`` in parent
    numbering, and the last one vanishes.
    """
    _check_pair(trial, test)
    u = trial.embed(trial_coeffs)
    return u[-1] - u[test.index_map]


def ht_inverse(test_coeffs, trial: ReducedSpace, test: ReducedSpace) -> np.ndarray:
    """Trial coefficients of ``v(0) - v`` for ``v`` in the test space."""
    _check_pair(trial, test)
    v = test.embed(test_coeffs)
    return v[0] - v[trial.index_map]


def ht_matrix(trial: ReducedSpace, test: ReducedSpace) -> np.ndarray:
    """Dense matrix ``M`` with ``ht_map(c) == M @ c``."""
    _check_pair(trial, test)
    n = trial.dim
    m = np.zeros((test.dim, n))
    m[:, -1] = 1.0
    # test index i <-> parent i; trial index j <-> parent j + 1
    m[np.arange(1, n), np.arange(0, n - 1)] -= 1.0
    return m


def eval_discrete(space: ReducedSpace, coeffs, x, k: int = 0):
    """``sum_i c_i d^k b_{index_map(i)}(x)``."""
    if not 0 <= k <= space.degree:
        raise ValueError(f"derivative order must be in [0, {space.degree}], got {k}")
    return space.evaluate(coeffs, x, k)
