"""Scalar special-function kernels: Legendre, normalized associated Legendre,
Jacobi P_n^(1,0), Bessel J1, probabilists' Hermite, Gaussian pdf/cdf and the
Hermite-expansion coefficients of a Gaussian level indicator.

Everything here is a pure function of its inputs; the tables are frozen
dataclasses and safe to share across threads/processes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SQRT_2PI = math.sqrt(2.0 * math.pi)
FOUR_PI = 4.0 * math.pi

# Crossover between the J1 power series and the large-argument (Hankel)
# expansion.  Both branches bottom out near 1.5e-12 absolute around x ~ 12;
# see tests for the measured error envelope.
_J1_CROSSOVER = 12.0


@dataclass(frozen=True)
class LegendreTable:
    """Values of P_0..P_max_degree at a single argument x in [-1, 1]."""

    max_degree: int
    argument: float
    values: np.ndarray


@dataclass(frozen=True)
class AssocLegendreTable:
    """Fully normalized associated Legendre values N_l^m(cos_theta).

    Normalization is the spherical-harmonic one (Condon-Shortley phase
    included): the real harmonics

        Y_{l,0}  = N_l^0,
        Y_{l,m}  = sqrt(2) * N_l^m * cos(m*phi)   (m > 0),
        Y_{l,-m} = sqrt(2) * N_l^m * sin(m*phi)   (m > 0),

    are orthonormal on the sphere and satisfy
    sum_m Y_{l,m}(x)^2 = (2l+1)/(4*pi) at every point.

    ``values[l, m]`` holds N_l^m for 0 <= m <= l; slots with m > l are zero.
    """

    max_degree: int
    argument: float
    values: np.ndarray

    def addition_sum(self, ell: int) -> float:
        """sum_{m=-ell}^{ell} Y_{ell,m}^2, which must equal (2*ell+1)/(4*pi)."""
        row = self.values[ell]
        return float(row[0] ** 2 + 2.0 * np.sum(row[1 : ell + 1] ** 2))


def legendre_all(ell_max: int, x: float) -> LegendreTable:
    """Table of Legendre polynomials P_0(x)..P_ell_max(x).

    Uses the stable upward recurrence
    (l+1) P_{l+1} = (2l+1) x P_l - l P_{l-1}.
    """
    if ell_max < 0:
        raise ValueError(f"ell_max must be >= 0, got {ell_max}")
    if not -1.0 <= x <= 1.0:
        raise ValueError(f"Legendre argument must lie in [-1, 1], got {x}")
    values = np.empty(ell_max + 1)
    values[0] = 1.0
    if ell_max >= 1:
        values[1] = x
    for ell in range(1, ell_max):
        values[ell + 1] = ((2 * ell + 1) * x * values[ell] - ell * values[ell - 1]) / (ell + 1)
    return LegendreTable(max_degree=ell_max, argument=x, values=values)


def legendre_band_sum(ell_min: int, ell_max: int, x: np.ndarray | float) -> np.ndarray | float:
    """sum_{l=ell_min}^{ell_max} (2l+1) P_l(x), vectorized over x.

    Runs the three-term recurrence once, accumulating only the band terms.
    """
    if ell_min < 0 or ell_max < ell_min:
        raise ValueError(f"need 0 <= ell_min <= ell_max, got [{ell_min}, {ell_max}]")
    scalar = np.isscalar(x)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(np.abs(x) > 1.0):
        raise ValueError("Legendre argument must lie in [-1, 1]")
    p_prev = np.ones_like(x)
    p_cur = x.copy()
    acc = np.zeros_like(x)
    if ell_min == 0:
        acc += p_prev
    if ell_max >= 1 and ell_min <= 1:
        acc += 3.0 * p_cur
    for ell in range(2, ell_max + 1):
        p_prev, p_cur = p_cur, ((2 * ell - 1) * x * p_cur - (ell - 1) * p_prev) / ell
        if ell >= ell_min:
            acc += (2 * ell + 1) * p_cur
    return float(acc[0]) if scalar else acc


def assoc_legendre_normalized(ell_max: int, cos_theta: float) -> AssocLegendreTable:
    """Fully normalized associated Legendre table at a single colatitude.

    The normalization is applied inside the recurrence, so the values stay
    O(sqrt(l)) up to ell_max ~ a few thousand (the unnormalized P_l^m would
    overflow near l ~ 150).
    """
    if not -1.0 <= cos_theta <= 1.0:
        raise ValueError(f"cos_theta must lie in [-1, 1], got {cos_theta}")
    if ell_max < 0:
        raise ValueError(f"ell_max must be >= 0, got {ell_max}")
    x = float(cos_theta)
    s = math.sqrt(max(0.0, 1.0 - x * x))
    vals = np.zeros((ell_max + 1, ell_max + 1))
    vals[0, 0] = 1.0 / math.sqrt(FOUR_PI)
    for ell in range(1, ell_max + 1):
        m = np.arange(0, ell - 1)
        if m.size:
            a = np.sqrt((4.0 * ell * ell - 1.0) / (ell * ell - m * m))
            b = -np.sqrt(
                (2.0 * ell + 1.0)
                * ((ell - 1.0) ** 2 - m * m)
                / ((2.0 * ell - 3.0) * (ell * ell - m * m))
            )
            vals[ell, : ell - 1] = a * x * vals[ell - 1, : ell - 1] + b * vals[ell - 2, : ell - 1]
        vals[ell, ell - 1] = math.sqrt(2.0 * ell + 1.0) * x * vals[ell - 1, ell - 1]
        vals[ell, ell] = -math.sqrt((2.0 * ell + 1.0) / (2.0 * ell)) * s * vals[ell - 1, ell - 1]
    return AssocLegendreTable(max_degree=ell_max, argument=x, values=vals)


def assoc_legendre_band(ell_min: int, ell_max: int, cos_theta: np.ndarray) -> np.ndarray:
    """Band-limited normalized associated Legendre table over many colatitudes.

    Returns an array of shape (ell_max - ell_min + 1, ell_max + 1, len(cos_theta))
    with entry [l - ell_min, m, j] = N_l^m(cos_theta[j]); slots with m > l are
    zero.  Only two full rows are kept while climbing in l, so memory stays
    proportional to the band width.
    """
    x = np.asarray(cos_theta, dtype=float)
    if x.ndim != 1:
        raise ValueError("cos_theta must be one-dimensional")
    if np.any(np.abs(x) > 1.0):
        raise ValueError("cos_theta must lie in [-1, 1]")
    if not 0 <= ell_min <= ell_max:
        raise ValueError(f"need 0 <= ell_min <= ell_max, got [{ell_min}, {ell_max}]")
    nt = x.size
    s = np.sqrt(np.maximum(0.0, 1.0 - x * x))
    width = ell_max + 1
    out = np.zeros((ell_max - ell_min + 1, width, nt))
    prev2 = np.zeros((width, nt))
    prev = np.zeros((width, nt))
    prev[0] = 1.0 / math.sqrt(FOUR_PI)
    if ell_min == 0:
        out[0] = prev
    for ell in range(1, ell_max + 1):
        cur = np.zeros((width, nt))
        m = np.arange(0, ell - 1)
        if m.size:
            a = np.sqrt((4.0 * ell * ell - 1.0) / (ell * ell - m * m))
            b = -np.sqrt(
                (2.0 * ell + 1.0)
                * ((ell - 1.0) ** 2 - m * m)
                / ((2.0 * ell - 3.0) * (ell * ell - m * m))
            )
            cur[: ell - 1] = (a[:, None] * x) * prev[: ell - 1] + b[:, None] * prev2[: ell - 1]
        cur[ell - 1] = math.sqrt(2.0 * ell + 1.0) * x * prev[ell - 1]
        cur[ell] = -math.sqrt((2.0 * ell + 1.0) / (2.0 * ell)) * s * prev[ell - 1]
        if ell >= ell_min:
            out[ell - ell_min] = cur
        prev2, prev = prev, cur
    return out


def jacobi_p10(n: int, x: np.ndarray | float) -> np.ndarray | float:
    """Jacobi polynomial P_n^(1,0)(x) by three-term recurrence, vectorized in x.

    Satisfies P_0 = 1, P_1 = (3x+1)/2 and
    (n+1)(2n-1) P_n = [(2n+1)(2n-1)x + 1] P_{n-1} - (n-1)(2n+1) P_{n-2}.
    """
    if n < 0:
        raise ValueError(f"degree must be >= 0, got {n}")
    scalar = np.isscalar(x)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(np.abs(x) > 1.0):
        raise ValueError("Jacobi argument must lie in [-1, 1]")
    p_prev = np.ones_like(x)
    if n == 0:
        return float(p_prev[0]) if scalar else p_prev
    p_cur = (3.0 * x + 1.0) / 2.0
    for k in range(2, n + 1):
        p_prev, p_cur = p_cur, (
            ((2 * k + 1) * (2 * k - 1) * x + 1.0) * p_cur - (k - 1) * (2 * k + 1) * p_prev
        ) / ((k + 1) * (2 * k - 1))
    return float(p_cur[0]) if scalar else p_cur


def _j1_series(x: np.ndarray) -> np.ndarray:
    # J1(x) = (x/2) sum_k (-x^2/4)^k / (k! (k+1)!); compensated summation
    # keeps the accumulation error at the level of the term roundoff.
    u = -(x * x) / 4.0
    term = x / 2.0
    total = term.copy()
    comp = np.zeros_like(x)
    for k in range(1, 60):
        term = term * u / (k * (k + 1))
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        if np.all(np.abs(term) <= 1e-18 * (np.abs(total) + 1e-300)):
            break
    return total


def _j1_asymptotic(x: np.ndarray) -> np.ndarray:
    # Hankel expansion: J1 = sqrt(2/(pi x)) [cos(chi) P(x) - sin(chi) Q(x)],
    # chi = x - 3 pi/4, with a_k = prod_{i<=k} (4 - (2i-1)^2) / (k! 8^k).
    # Terms are added while they keep decreasing (optimal truncation).
    p_sum = np.ones_like(x)
    q_sum = np.zeros_like(x)
    a = 1.0
    xk = np.ones_like(x)
    last = np.full_like(x, np.inf)
    active = np.ones_like(x, dtype=bool)
    for k in range(1, 40):
        a *= (4.0 - (2 * k - 1) ** 2) / (k * 8.0)
        xk = xk / x
        term = a * xk
        mag = np.abs(term)
        active &= mag < last
        if not np.any(active):
            break
        last = np.where(active, mag, last)
        if k % 2 == 1:
            sign = -1.0 if (k // 2) % 2 else 1.0
            q_sum = np.where(active, q_sum + sign * term, q_sum)
        else:
            sign = -1.0 if (k // 2) % 2 else 1.0
            p_sum = np.where(active, p_sum + sign * term, p_sum)
    chi = x - 0.75 * math.pi
    return np.sqrt(2.0 / (math.pi * x)) * (np.cos(chi) * p_sum - np.sin(chi) * q_sum)


def bessel_j1(x: np.ndarray | float) -> np.ndarray | float:
    """Bessel function J1 for x >= 0.

    Power series below the crossover, Hankel-type large-argument expansion
    above; absolute error stays below ~2e-12 everywhere and below 1e-13 away
    from the crossover region.
    """
    scalar = np.isscalar(x)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(x < 0.0):
        raise ValueError("bessel_j1 requires x >= 0")
    out = np.empty_like(x)
    small = x <= _J1_CROSSOVER
    if np.any(small):
        out[small] = _j1_series(x[small])
    if np.any(~small):
        out[~small] = _j1_asymptotic(x[~small])
    return float(out[0]) if scalar else out


def hermite_all(q_max: int, t: np.ndarray | float) -> np.ndarray:
    """Probabilists' Hermite polynomials H_0..H_q_max at t (scalar or array).

    H_0 = 1, H_1 = t, H_k = t H_{k-1} - (k-1) H_{k-2}.
    """
    if q_max < 0:
        raise ValueError(f"q_max must be >= 0, got {q_max}")
    t = np.asarray(t, dtype=float)
    out = np.empty((q_max + 1,) + t.shape)
    out[0] = 1.0
    if q_max >= 1:
        out[1] = t
    for k in range(2, q_max + 1):
        out[k] = t * out[k - 1] - (k - 1) * out[k - 2]
    return out


def gaussian_pdf(u: np.ndarray | float) -> np.ndarray | float:
    """Standard Gaussian density."""
    return np.exp(-0.5 * np.square(u)) / SQRT_2PI


_erfc_vec = np.frompyfunc(math.erfc, 1, 1)


def gaussian_cdf(u: np.ndarray | float) -> np.ndarray | float:
    """Standard Gaussian distribution function via the complementary error
    function, |error| <= 1e-12."""
    if np.isscalar(u):
        return 0.5 * math.erfc(-u / math.sqrt(2.0))
    u = np.asarray(u, dtype=float)
    return 0.5 * _erfc_vec(-u / math.sqrt(2.0)).astype(float)


def jq_coefficient(q: int, u: float) -> float:
    """Hermite-expansion coefficient of the level-u indicator:
    J_0 = Phi(u), J_q = -H_{q-1}(u) * phi(u) for q >= 1."""
    if q < 0:
        raise ValueError(f"q must be >= 0, got {q}")
    if q == 0:
        return float(gaussian_cdf(u))
    h = hermite_all(q - 1, float(u))
    return -float(h[q - 1]) * float(gaussian_pdf(u))
