"""Closed-form mesh-size thresholds and stability constants.

All quantities depend only on ``mu > 0`` and the final time ``T > 0``.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass


@dataclass(frozen=True)
class BoundsReport:
    """Mesh-size thresholds (``fem_*``, ``iga_*``) and constants.

    Attributes
    ----------
    fem_theory, fem_raw : float
        Sufficient FEM thresholds; ``fem_theory`` uses the sharp Poincare
        constant and is the one drawn in plots.
    fem_fd : float
        ``sqrt(12/mu)``, the sharp uniform-mesh FEM threshold.
    iga_zank : float
        Quadratic IGA threshold from the transformation-based analysis.
    iga_garding : float
        Quadratic IGA threshold from the Garding argument at parameter ``b``.
    iga_empirical : float
        ``sqrt(9/mu)``, the observed quadratic IGA threshold.
    beta1, beta_fem, beta_fem_stabilized : float
        Inf-sup lower bounds (IGA, FEM, stabilized FEM).
    c2_garding : float
        Stability constant of the Garding argument at ``b``.
    cont_const, stab_const : float
        Continuity constant of the form and a priori constant of the ODE.
    """

    mu: float
    T: float
    b: float
    fem_theory: float
    fem_raw: float
    fem_fd: float
    iga_zank: float
    iga_garding: float
    iga_empirical: float
    beta1: float
    beta_fem: float
    beta_fem_stabilized: float
    c2_garding: float
    cont_const: float
    stab_const: float

    def as_dict(self) -> dict:
        return asdict(self)


def optimal_b(mu: float, T: float) -> float:
    """Maximizer of ``sqrt((2b - mu T^2) / (2b (2+b) mu))`` over ``b > mu T^2/2``."""
    m = mu * T * T
    return 0.5 * (m + math.sqrt(m * m + 4.0 * m))


def _check(mu: float, T: float):
    if not (mu > 0 and math.isfinite(mu)):
        raise ValueError(f"mu must be positive and finite, got {mu}")
    if not (T > 0 and math.isfinite(T)):
        raise ValueError(f"T must be positive and finite, got {T}")


def _check_b(mu: float, T: float, b: float):
    if not b > 0.5 * mu * T * T:
        raise ValueError(f"b must exceed mu T^2 / 2 = {0.5 * mu * T * T:g}, got {b}")


def garding_threshold(mu: float, T: float, b: float | None = None) -> float:
    _check(mu, T)
    if b is None:
        b = optimal_b(mu, T)
    _check_b(mu, T, b)
    m = mu * T * T
    s = 2.0 + math.sqrt(mu) * T
    pre = math.pi**5 / ((math.pi**2 + 4.0 * m) * (math.pi**2 + 2.0 * m * s))
    return pre * math.sqrt((2.0 * b - m) / (2.0 * b * (2.0 + b) * mu))


def garding_constant(mu: float, T: float, b: float | None = None) -> float:
    _check(mu, T)
    if b is None:
        b = optimal_b(mu, T)
    _check_b(mu, T, b)
    m = mu * T * T
    s = 2.0 + math.sqrt(mu) * T
    return s * (3.0 * b + m * (8.0 * b / math.pi**2 - 0.5)) / (2.0 * b - m)


def stability_bounds(mu: float, T: float, b: float | None = None) -> BoundsReport:
    """Evaluate every threshold and constant; ``b`` defaults to :func:`optimal_b`."""
    _check(mu, T)
    if b is None:
        b = optimal_b(mu, T)
    _check_b(mu, T, b)
    sq = math.sqrt(mu)
    s = 2.0 + sq * T
    m = mu * T * T
    pi2 = math.pi**2
    return BoundsReport(
        mu=float(mu),
        T=float(T),
        b=float(b),
        fem_theory=math.sqrt(3.0) * math.pi / (math.sqrt(2.0) * s * mu * T),
        fem_raw=2.0 * math.sqrt(3.0) / (s * mu * T),
        fem_fd=math.sqrt(12.0 / mu),
        iga_zank=pi2 / (math.sqrt(2.0) * s * mu * T),
        iga_garding=garding_threshold(mu, T, b),
        iga_empirical=math.sqrt(9.0 / mu),
        beta1=2.0 * pi2 / (s * s * (pi2 + 4.0 * m)),
        beta_fem=8.0 / (s * s * (4.0 + m)),
        beta_fem_stabilized=1.0 / (1.0 + math.sqrt(2.0) * m),
        c2_garding=garding_constant(mu, T, b),
        cont_const=1.0 + 4.0 * T * T * mu / pi2,
        stab_const=s / 2.0,
    )


def poincare_constant(T: float) -> float:
    """``C`` in ``||v||_{L2} <= C |v|_{H1}`` for ``v`` vanishing at one endpoint."""
    return 2.0 * T / math.pi
