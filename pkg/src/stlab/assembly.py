"""Banded assembly of the bilinear-form variants and load vectors.

All matrices are built on the parent space and then restricted, so entry
``(i, j)`` pairs test function ``i`` (row) with trial function ``j`` (column).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np

from . import kernels
from .linalg import BandedMatrix
from .spaces import ReducedSpace, _check_pair, ht_matrix
from .splines import ERROR_QUAD_POINTS, Mesh, SplineSpace, load_vector


class Variant(str, Enum):
    STANDARD = "standard"
    FEM_Q0 = "fem_q0"
    FEM_SCALED = "fem_scaled"
    IGA_SCALED = "iga_scaled"
    PENALTY = "penalty"


# Coefficient c in -(1 + c mu h^2) <u', v'> + mu <u, v>.
_SCALE = {Variant.FEM_SCALED: 1.0 / 12.0, Variant.IGA_SCALED: 1.0 / 9.0}


@dataclass(frozen=True)
class FormSpec:
    """Which bilinear form to assemble.

    Parameters
    ----------
    variant : Variant or str
        ``standard`` is ``-<u', v'> + mu <u, v>``.  ``fem_q0`` replaces
        ``<u, v>`` by ``<u, Q0 v>`` with ``Q0`` the L2 projection onto
        piecewise constants.  ``fem_scaled`` and ``iga_scaled`` multiply the
        stiffness term by ``1 + mu h^2/12`` and ``1 + mu h^2/9``.  ``penalty``
        subtracts ``delta mu h^{2q} <d^q u, d^q v>``.
    mu : float
        Zero is accepted so the pure stiffness form can be built.
    delta : float, optional
        Penalty weight; required for ``penalty`` and forbidden otherwise.
    penalty_order : int, optional
        ``q`` of the penalty; defaults to the space degree.
    per_element : bool
        Use element lengths ``h_l`` instead of the global ``h`` in the
        scaled and penalty forms.
    """

    variant: Variant
    mu: float
    delta: Optional[float] = None
    penalty_order: Optional[int] = None
    per_element: bool = False

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        if not np.isfinite(self.mu) or self.mu < 0:
            raise ValueError(f"mu must be a finite nonnegative number, got {self.mu}")
        if self.variant is Variant.PENALTY:
            if self.delta is None or not np.isfinite(self.delta) or self.delta < 0:
                raise ValueError(f"penalty form needs delta >= 0, got {self.delta}")
            if self.penalty_order is not None and self.penalty_order < 1:
                raise ValueError(f"penalty_order must be >= 1, got {self.penalty_order}")
        else:
            if self.delta is not None or self.penalty_order is not None:
                raise ValueError(f"delta/penalty_order only apply to the penalty form, not {self.variant.value}")

    @classmethod
    def standard(cls, mu: float) -> "FormSpec":
        return cls(Variant.STANDARD, mu)

    @classmethod
    def penalty(cls, mu: float, delta: float, order: int | None = None, per_element=False) -> "FormSpec":
        return cls(Variant.PENALTY, mu, delta, order, per_element)

    def order_for(self, degree: int) -> int:
        return degree if self.penalty_order is None else self.penalty_order

    def describe(self) -> str:
        s = self.variant.value
        if self.variant is Variant.PENALTY:
            s += f"(delta={self.delta:g}, q={self.penalty_order or 'p'})"
        if self.per_element:
            s += "[per-element]"
        return s


@dataclass(frozen=True)
class AssembledSystem:
    """Petrov matrix ``A`` (test x trial), derivative Grams and load vector."""

    A: BandedMatrix
    H1: BandedMatrix
    H2: BandedMatrix
    rhs: Optional[np.ndarray] = None
    meta: dict = field(default_factory=dict, compare=False)


def _check_space(space: SplineSpace):
    if space.degree < 1:
        raise ValueError("the variational problem needs degree >= 1")


def _q0_gram(space: SplineSpace) -> BandedMatrix:
    """``sum_l (1/h_l) (int_l b_i)(int_l b_j)`` in band form."""
    integ = space.element_integrals()
    inv_h = 1.0 / space.mesh.element_lengths
    ab = kernels.band_gram(
        integ[:, None, :], integ[:, None, :], inv_h[:, None], space.element_first(), space.dim, space.degree
    )
    return BandedMatrix(ab, space.degree, space.degree, (space.dim, space.dim))


def parent_form_matrix(space: SplineSpace, form: FormSpec) -> BandedMatrix:
    """The form evaluated on all pairs of parent basis functions."""
    _check_space(space)
    p = space.degree
    mu = form.mu
    hl = space.mesh.element_lengths
    h = space.mesh.h
    stiff = space.gram(1, 1)
    v = form.variant
    if v is Variant.FEM_Q0:
        return _q0_gram(space) * mu - stiff
    mass = space.gram(0, 0)
    base = mass * mu - stiff
    if v is Variant.STANDARD:
        return base
    if v in _SCALE:
        c = _SCALE[v]
        if form.per_element:
            return base - space.gram(1, 1, weight=hl**2) * (c * mu)
        return base - stiff * (c * mu * h**2)
    q = form.order_for(p)
    if q > p:
        raise ValueError(f"penalty order {q} exceeds the degree {p}")
    if form.delta == 0.0:
        return base
    if form.per_element:
        pen = space.gram(q, q, weight=hl ** (2 * q))
    else:
        pen = space.gram(q, q) * h ** (2 * q)
    return base - pen * (form.delta * mu)


def _restrict(g: BandedMatrix, trial: ReducedSpace, test: ReducedSpace) -> BandedMatrix:
    rows = slice(test.offset, test.offset + test.dim)
    cols = slice(trial.offset, trial.offset + trial.dim)
    return g.submatrix(rows, cols)


def assemble_matrix(trial: ReducedSpace, test: ReducedSpace, form: FormSpec) -> BandedMatrix:
    """Band matrix with entry ``(i, j) = form(trial_j, test_i)``.

    Metadata records the variant and whether the combination is known to
    stabilize poorly (``fem_q0`` on splines of degree other than one).
    """
    if trial.parent != test.parent:
        raise ValueError("trial and test spaces must share the same parent space")
    a = _restrict(parent_form_matrix(trial.parent, form), trial, test)
    a.meta.update(
        variant=form.variant.value,
        known_poor=form.variant is Variant.FEM_Q0 and trial.degree != 1,
    )
    return a


def derivative_grams(trial: ReducedSpace, test: ReducedSpace) -> tuple[BandedMatrix, BandedMatrix]:
    """``H1 = [<b_j', b_i'>]`` on the trial space and ``H2`` on the test space."""
    stiff = trial.parent.gram(1, 1)
    return _restrict(stiff, trial, trial), _restrict(stiff, test, test)


def assemble_load(test: ReducedSpace, f: Callable, quad_order: int = ERROR_QUAD_POINTS) -> np.ndarray:
    """``[b]_i = <f, test_i>`` with ``quad_order`` Gauss points per element."""
    return load_vector(test.parent, f, quad_order)[test.index_map]


def assemble_system(trial: ReducedSpace, test: ReducedSpace, form: FormSpec,
                    f: Callable | None = None, quad_order: int = ERROR_QUAD_POINTS) -> AssembledSystem:
    _check_pair(trial, test)
    a = assemble_matrix(trial, test, form)
    h1, h2 = derivative_grams(trial, test)
    rhs = None if f is None else assemble_load(test, f, quad_order)
    return AssembledSystem(a, h1, h2, rhs, dict(a.meta))


def bubnov_matrix(trial: ReducedSpace, test: ReducedSpace, form: FormSpec) -> np.ndarray:
    """Dense ``[form(trial_j, u(T) - trial_i)]_{ij}``, i.e. ``M^T A``."""
    a = assemble_matrix(trial, test, form).to_dense()
    return ht_matrix(trial, test).T @ a


def q0_project(mesh: Mesh, space: ReducedSpace | SplineSpace, coeffs) -> np.ndarray:
    """Element means ``(1/h_l) int_{tau_l} v`` of a discrete function."""
    if isinstance(space, ReducedSpace):
        parent, c = space.parent, space.embed(coeffs)
    else:
        parent, c = space, np.asarray(coeffs, dtype=float)
    if parent.mesh != mesh:
        raise ValueError("space is not defined on the given mesh")
    integ = parent.element_integrals()
    idx = parent.element_first()[:, None] + np.arange(parent.degree + 1)
    return np.sum(integ * c[idx], axis=1) / mesh.element_lengths


__all__ = [
    "Variant",
    "FormSpec",
    "AssembledSystem",
    "assemble_matrix",
    "assemble_load",
    "assemble_system",
    "bubnov_matrix",
    "derivative_grams",
    "parent_form_matrix",
    "q0_project",
]
