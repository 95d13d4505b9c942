"""Excursion-set area and Hermite-chaos functionals of a field realization.

The q-th chaos functional is the sphere integral of H_q(field).  For q = 2 it
collapses to c_norm * sum(coeffs^2) - 4*pi, a shifted chi-square with
``spec.dof`` degrees of freedom, which doubles as a fast sampling oracle that
needs no synthesis.

Excursion areas use the strict inequality field > u; the boundary set
{field = u} has measure zero almost surely, so the non-strict variant is
indistinguishable in law.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .field import FieldSample, FieldSpec, HarmonicCoefficients, replicate_rng, sample_coefficients, synthesize
from .grid import SphereGrid, build_grid, integrate
from .specfun import FOUR_PI, gaussian_pdf, jq_coefficient


@dataclass(frozen=True)
class ExcursionResult:
    u: float
    area: float
    replicate_id: int
    spec: FieldSpec


@dataclass(frozen=True)
class ChaosProjection:
    q: int
    value: float
    method: str  # "quadrature" or "coefficient_exact"


def excursion_area(sample: FieldSample, u: float, replicate_id: int = -1) -> ExcursionResult:
    """Area of the region where the realization exceeds u (steradians)."""
    indicator = (sample.values > u).astype(float)
    return ExcursionResult(
        u=u,
        area=integrate(sample.grid, indicator),
        replicate_id=replicate_id,
        spec=sample.spec,
    )


def chaos_integrals(sample: FieldSample, q_max: int) -> np.ndarray:
    """Sphere integrals of H_q(field) for q = 0..q_max in one streaming pass."""
    if q_max < 0:
        raise ValueError(f"q_max must be >= 0, got {q_max}")
    v = sample.values
    out = np.empty(q_max + 1)
    prev = np.ones_like(v)
    out[0] = integrate(sample.grid, prev)
    if q_max == 0:
        return out
    cur = v
    out[1] = integrate(sample.grid, cur)
    for k in range(2, q_max + 1):
        prev, cur = cur, v * cur - (k - 1) * prev
        out[k] = integrate(sample.grid, cur)
    return out


def chaos_projection(sample: FieldSample, q: int) -> ChaosProjection:
    """Quadrature of H_q(field) over the sphere.

    Exact (up to roundoff) when the grid resolves degree q * n; warns when it
    does not.
    """
    if q < 1:
        raise ValueError(f"q must be >= 1, got {q}")
    if sample.grid.exact_degree < q * sample.spec.n:
        warnings.warn(
            f"grid degree {sample.grid.exact_degree} < {q} * n = {q * sample.spec.n}; "
            "chaos projection quadrature is not exact",
            stacklevel=2,
        )
    value = chaos_integrals(sample, q)[q]
    return ChaosProjection(q=q, value=value, method="quadrature")


def h2_exact_from_coeffs(coeffs: HarmonicCoefficients) -> float:
    """Second-chaos functional from the coefficients alone:
    c_norm * sum(coeffs^2) - 4*pi."""
    return coeffs.spec.c_norm * coeffs.sum_of_squares() - FOUR_PI


def h2_variance_formula(spec: FieldSpec) -> float:
    """Exact variance of the second-chaos functional: 2 (4 pi)^2 / D."""
    return 2.0 * FOUR_PI**2 / spec.dof


def h2_sample_direct(spec: FieldSpec, rng: np.random.Generator, size: int | None = None):
    """Draw the second-chaos functional directly as c_norm * chi2(D) - 4*pi,
    without synthesizing a field."""
    draws = rng.chisquare(spec.dof, size=size)
    return spec.c_norm * draws - FOUR_PI


@dataclass(frozen=True)
class ChaosVarianceRow:
    q: int
    weight: float          # J_q(u)^2 / q!^2
    var_hq: float          # exact formula for q = 2, Monte Carlo estimate otherwise
    contribution: float    # weight * var_hq
    method: str


@dataclass(frozen=True)
class ChaosVariancePrediction:
    spec: FieldSpec
    u: float
    leading_term: float    # u^2 phi(u)^2 / 4 * 2 (4 pi)^2 / D
    rows: tuple[ChaosVarianceRow, ...]
    var_s_hat: float | None


def chaos_variance_prediction(
    spec: FieldSpec,
    u: float,
    q_max: int,
    replicates: int = 0,
    master_seed: int = 0,
    grid: SphereGrid | None = None,
) -> ChaosVariancePrediction:
    """Predicted per-chaos contributions to Var(area).

    The q = 2 row uses the exact chi-square variance; rows q >= 3 are Monte
    Carlo estimates over ``replicates`` synthesized fields (skipped when
    replicates == 0).  The leading term is u^2 phi(u)^2/4 * 2 (4 pi)^2 / D.
    """
    if q_max < 2:
        raise ValueError(f"q_max must be >= 2, got {q_max}")
    phi_u = float(gaussian_pdf(u))
    leading = (u * phi_u) ** 2 / 4.0 * h2_variance_formula(spec)
    rows = [
        ChaosVarianceRow(
            q=2,
            weight=jq_coefficient(2, u) ** 2 / 4.0,
            var_hq=h2_variance_formula(spec),
            contribution=jq_coefficient(2, u) ** 2 / 4.0 * h2_variance_formula(spec),
            method="coefficient_exact",
        )
    ]
    var_s_hat = None
    if replicates > 0 and q_max >= 3:
        if grid is None:
            grid = build_grid(q_max * spec.n)
        elif grid.exact_degree < q_max * spec.n:
            warnings.warn("prediction grid does not resolve degree q_max * n", stacklevel=2)
        h = np.empty((replicates, q_max + 1))
        areas = np.empty(replicates)
        for r in range(replicates):
            rng = replicate_rng(master_seed, spec.n, r)
            sample = synthesize(sample_coefficients(spec, rng), grid)
            h[r] = chaos_integrals(sample, q_max)
            areas[r] = excursion_area(sample, u, replicate_id=r).area
        var_s_hat = float(areas.var(ddof=1))
        for q in range(3, q_max + 1):
            w = jq_coefficient(q, u) ** 2 / math.factorial(q) ** 2
            v = float(h[:, q].var(ddof=1))
            rows.append(ChaosVarianceRow(q=q, weight=w, var_hq=v, contribution=w * v, method="quadrature"))
    return ChaosVariancePrediction(
        spec=spec, u=u, leading_term=leading, rows=tuple(rows), var_s_hat=var_s_hat
    )
