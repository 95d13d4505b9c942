"""Band-limited Gaussian ensemble on the sphere: spec, coefficient sampling,
and synthesis of field values on a quadrature grid.

The ensemble keeps frequencies ell in [ell_min, n] with
ell_min = ceil(alpha * n), alpha = sqrt(1 - n^(-beta)), and renormalizes by
c_norm = 4*pi / D with the exact integer degree-of-freedom count
D = (n+1)^2 - ell_min^2, so the field has unit variance for every (n, beta)
even when alpha * n is not an integer.  Coefficients are i.i.d. standard
normals in the real spherical-harmonic basis, which is equal in law to the
complex convention with conjugate symmetry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import SphereGrid
from .specfun import FOUR_PI, assoc_legendre_band

_ROUNDINGS = ("ceil", "floor")


@dataclass(frozen=True)
class FieldSpec:
    """Parameters of the band-limited ensemble."""

    n: int
    beta: float
    alpha: float
    ell_min: int
    dof: int
    c_norm: float
    band_rounding: str = "ceil"

    @property
    def band_width(self) -> int:
        return self.n - self.ell_min + 1


def _finish_spec(n: int, beta: float, alpha: float, ell_min: int, rounding: str) -> FieldSpec:
    dof = (n + 1) ** 2 - ell_min**2
    return FieldSpec(
        n=n,
        beta=beta,
        alpha=alpha,
        ell_min=ell_min,
        dof=dof,
        c_norm=FOUR_PI / dof,
        band_rounding=rounding,
    )


def make_spec(n: int, beta: float, band_rounding: str = "ceil") -> FieldSpec:
    """Build the ensemble spec for top frequency n and bandwidth exponent beta.

    beta must lie strictly inside (0, 1); the boundary regimes are exposed
    separately as single_ell_spec (one frequency) and full_band_spec (all
    frequencies from 0).
    """
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    if not 0.0 < beta < 1.0:
        raise ValueError(f"beta must lie in (0, 1), got {beta}")
    if band_rounding not in _ROUNDINGS:
        raise ValueError(f"band_rounding must be one of {_ROUNDINGS}")
    alpha = math.sqrt(1.0 - n ** (-beta))
    edge = alpha * n
    ell_min = math.ceil(edge) if band_rounding == "ceil" else math.floor(edge)
    ell_min = max(0, min(ell_min, n))
    return _finish_spec(n, beta, alpha, ell_min, band_rounding)


def single_ell_spec(n: int) -> FieldSpec:
    """Degenerate one-frequency ensemble (band [n, n]), the beta -> 1 regime."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return _finish_spec(n, 1.0, 1.0, n, "ceil")


def full_band_spec(n: int) -> FieldSpec:
    """Full-band ensemble (band [0, n]), the beta -> 0 regime."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return _finish_spec(n, 0.0, 0.0, 0, "ceil")


@dataclass(frozen=True, eq=False)
class HarmonicCoefficients:
    """One realization's random coefficients in the real-harmonic basis.

    ``matrix[l - ell_min, n + m]`` holds the coefficient of Y_{l,m}; slots
    outside the band or with |m| > l are zero.
    """

    spec: FieldSpec
    matrix: np.ndarray

    def coefficient(self, ell: int, m: int) -> float:
        if not (self.spec.ell_min <= ell <= self.spec.n and abs(m) <= ell):
            raise IndexError(f"(ell={ell}, m={m}) outside the band")
        return float(self.matrix[ell - self.spec.ell_min, self.spec.n + m])

    def sum_of_squares(self) -> float:
        return float(np.sum(self.matrix * self.matrix))


@dataclass(frozen=True, eq=False)
class FieldSample:
    """Field values on a grid, row-major (theta outer, phi inner)."""

    spec: FieldSpec
    grid: SphereGrid
    values: np.ndarray


def replicate_rng(master_seed: int, *stream_key: int) -> np.random.Generator:
    """Deterministic per-replicate generator keyed by (master_seed, *key).

    The key tuple feeds a SeedSequence, so streams are independent of worker
    scheduling and of each other.
    """
    return np.random.default_rng(np.random.SeedSequence([int(master_seed), *map(int, stream_key)]))


def sample_coefficients(spec: FieldSpec, rng: np.random.Generator) -> HarmonicCoefficients:
    """Draw the D i.i.d. standard-normal coefficients of one realization.

    Values are drawn in a fixed order (ell ascending, m from -ell to ell), so a
    given generator state always produces the same realization.
    """
    flat = rng.standard_normal(spec.dof)
    matrix = np.zeros((spec.band_width, 2 * spec.n + 1))
    pos = 0
    for ell in range(spec.ell_min, spec.n + 1):
        count = 2 * ell + 1
        matrix[ell - spec.ell_min, spec.n - ell : spec.n + ell + 1] = flat[pos : pos + count]
        pos += count
    return HarmonicCoefficients(spec=spec, matrix=matrix)


# --- synthesis ---------------------------------------------------------------

_TABLE_CACHE: dict[tuple, np.ndarray] = {}


def band_table(spec: FieldSpec, grid: SphereGrid) -> np.ndarray:
    """Normalized associated-Legendre table for the band on the grid nodes,
    shape (band_width, n + 1, n_theta).  Cached per (band, grid geometry);
    build it before forking workers so they share one copy."""
    key = (spec.ell_min, spec.n, grid.n_theta, grid.n_phi)
    table = _TABLE_CACHE.get(key)
    if table is None:
        table = assoc_legendre_band(spec.ell_min, spec.n, grid.cos_nodes)
        _TABLE_CACHE[key] = table
    return table


def clear_table_cache() -> None:
    _TABLE_CACHE.clear()


def _fourier_rows(coeffs: HarmonicCoefficients, table: np.ndarray):
    """Per-theta cos/sin amplitudes A_m, B_m of the synthesized field."""
    spec = coeffs.spec
    n = spec.n
    cos_part = coeffs.matrix[:, n:]          # m >= 0 columns, [l, m]
    sin_part = coeffs.matrix[:, n::-1]       # m <= 0 columns reversed: [l, |m|]
    a = np.einsum("lm,lmt->tm", cos_part, table)
    b = np.einsum("lm,lmt->tm", sin_part, table)
    a[:, 1:] *= math.sqrt(2.0)
    b[:, 1:] *= math.sqrt(2.0)
    b[:, 0] = 0.0
    return a, b


def synthesize(
    coeffs: HarmonicCoefficients, grid: SphereGrid, method: str = "auto"
) -> FieldSample:
    """Evaluate the realization on all grid nodes.

    Works separably: accumulate per-colatitude Fourier amplitudes over the
    band, then evaluate the longitude trigonometric sum, by real FFT when the
    longitude count allows it and by direct cos/sin products otherwise.  The
    two paths agree to ~1e-12.
    """
    spec = coeffs.spec
    if grid.exact_degree < spec.n:
        raise ValueError(
            f"grid resolves degree {grid.exact_degree} < field degree {spec.n}"
        )
    if method not in ("auto", "fft", "direct"):
        raise ValueError(f"unknown synthesis method {method!r}")
    table = band_table(spec, grid)
    a, b = _fourier_rows(coeffs, table)
    n = spec.n
    if method == "auto":
        method = "fft" if grid.n_phi >= 2 * n + 2 else "direct"
    if method == "fft":
        if grid.n_phi < 2 * n + 2:
            raise ValueError("n_phi too small for alias-free FFT synthesis")
        spectrum = np.zeros((grid.n_theta, grid.n_phi // 2 + 1), dtype=complex)
        spectrum[:, : n + 1] = 0.5 * (a - 1j * b)
        spectrum[:, 0] = a[:, 0]
        values = np.fft.irfft(spectrum, n=grid.n_phi, axis=1) * grid.n_phi
    else:
        phi = grid.phi_nodes
        marange = np.arange(n + 1)
        cosm = np.cos(np.outer(marange, phi))
        sinm = np.sin(np.outer(marange, phi))
        values = a @ cosm + b @ sinm
    values *= math.sqrt(spec.c_norm)
    return FieldSample(spec=spec, grid=grid, values=values)


def write_field_csv(sample: FieldSample, out, header_lines: tuple[str, ...] = ()) -> None:
    """Dump a realization as flat rows theta_index,phi_index,value."""
    close = False
    if isinstance(out, (str, bytes)):
        out = open(out, "w")
        close = True
    try:
        for line in header_lines:
            out.write(f"# {line}\n")
        out.write("theta_index,phi_index,value\n")
        for i in range(sample.grid.n_theta):
            row = sample.values[i]
            for j in range(sample.grid.n_phi):
                out.write(f"{i},{j},{row[j]:.16e}\n")
    finally:
        if close:
            out.close()
