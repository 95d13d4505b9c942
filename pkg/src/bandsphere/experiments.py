"""Monte Carlo experiment orchestration: variance sweeps over the top
frequency, scaling-exponent regression, CLT testing, and chaos-dominance
diagnostics, all with bootstrap uncertainty quantification.

Reproducibility contract: a config plus master seed determines every output
bit, independently of the worker count.  Per-replicate generator streams are
keyed by (master_seed, n, replicate_index); replicate results are collected
into arrays indexed by replicate, so reductions always run in the same order.
"""

from __future__ import annotations

import math
import multiprocessing
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .chaos import chaos_integrals, excursion_area, h2_exact_from_coeffs, h2_sample_direct, h2_variance_formula
from .field import FieldSpec, band_table, make_spec, sample_coefficients, synthesize
from .grid import build_grid
from .specfun import gaussian_cdf, jq_coefficient

# Asymptotic two-sided Kolmogorov-Smirnov critical coefficient at the 1% level
KS_COEFF_1PCT = 1.628

_BOOTSTRAP_KEY = 1_000_003  # stream-key tag separating bootstrap draws from replicates

MODES = ("field_full", "h2_direct")


@dataclass(frozen=True)
class ExperimentConfig:
    n_list: tuple[int, ...]
    beta: float
    u: float = 1.0
    replicates: int = 2000
    master_seed: int = 20260808
    oversample: float = 4.0
    mode: str = "field_full"
    q_max: int = 4
    workers: int = 1
    band_rounding: str = "ceil"

    def __post_init__(self):
        object.__setattr__(self, "n_list", tuple(int(n) for n in self.n_list))
        if not self.n_list:
            raise ValueError("n_list must not be empty")
        if any(a >= b for a, b in zip(self.n_list, self.n_list[1:])):
            raise ValueError("n_list must be strictly increasing")
        if self.replicates < 100:
            raise ValueError("need at least 100 replicates for variance estimates")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.q_max < 2:
            raise ValueError("q_max must be >= 2")
        if self.oversample < 1.0:
            raise ValueError("oversample must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass(frozen=True)
class SweepRow:
    n: int
    ell_min: int
    dof: int
    var_s_hat: float | None = None
    var_s_se: float | None = None
    mean_s_hat: float | None = None
    mean_s_se: float | None = None
    var_h2_hat: float | None = None
    var_h2_se: float | None = None
    var_h2_exact_formula: float | None = None
    clt_ks_stat: float | None = None
    clt_pass: bool | None = None
    var_hq: dict[int, float] = field(default_factory=dict)
    var_hq_se: dict[int, float] = field(default_factory=dict)
    chaos_ratios: dict[int, float] = field(default_factory=dict)
    error: str | None = None


@dataclass(frozen=True, eq=False)
class ExperimentResult:
    config: ExperimentConfig
    rows: tuple[SweepRow, ...]
    fitted_exponent: float | None = None
    fitted_intercept: float | None = None
    exponent_ci: tuple[float, float] | None = None
    replicate_data: dict = field(default_factory=dict, repr=False)


# --- statistics helpers ------------------------------------------------------

def ks_statistic(sample: np.ndarray) -> float:
    """One-sample Kolmogorov-Smirnov distance to the standard normal CDF."""
    z = np.sort(np.asarray(sample, dtype=float))
    r = z.size
    cdf = np.asarray(gaussian_cdf(z))
    i = np.arange(1, r + 1)
    return float(max((i / r - cdf).max(), (cdf - (i - 1) / r).max()))


def ks_statistic_two_sample(a: np.ndarray, b: np.ndarray) -> float:
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    both = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, both, side="right") / a.size
    cdf_b = np.searchsorted(b, both, side="right") / b.size
    return float(np.abs(cdf_a - cdf_b).max())


def ks_critical_one_sample(r: int) -> float:
    """Asymptotic 1% two-sided critical value for a sample of size r."""
    return KS_COEFF_1PCT / math.sqrt(r)


def ks_critical_two_sample(n1: int, n2: int) -> float:
    return KS_COEFF_1PCT * math.sqrt((n1 + n2) / (n1 * n2))


def clt_test(samples: np.ndarray) -> tuple[float, bool]:
    """Standardize the samples and KS-test them against the standard normal
    at the 1% level."""
    samples = np.asarray(samples, dtype=float)
    if samples.size < 500:
        raise ValueError(f"need >= 500 samples, got {samples.size}")
    sd = samples.std(ddof=1)
    if not sd > 0:
        raise ValueError("degenerate sample: zero standard deviation")
    z = (samples - samples.mean()) / sd
    stat = ks_statistic(z)
    return stat, stat < ks_critical_one_sample(samples.size)


def bootstrap_variance_se(
    values: np.ndarray, rng: np.random.Generator, n_boot: int = 1000
) -> float:
    """Bootstrap standard error of the sample variance (ddof=1)."""
    values = np.asarray(values, dtype=float)
    r = values.size
    boots = np.empty(n_boot)
    for b in range(n_boot):
        boots[b] = values[rng.integers(0, r, r)].var(ddof=1)
    return float(boots.std(ddof=1))


def bootstrap_mean_se(values: np.ndarray, rng: np.random.Generator, n_boot: int = 1000) -> float:
    values = np.asarray(values, dtype=float)
    r = values.size
    boots = np.empty(n_boot)
    for b in range(n_boot):
        boots[b] = values[rng.integers(0, r, r)].mean()
    return float(boots.std(ddof=1))


# --- replicate evaluation ----------------------------------------------------

_WORKER_CTX: dict = {}


def _replicate_row(spec: FieldSpec, grid, u: float, q_max: int, master_seed: int, r: int):
    ss = np.random.SeedSequence([int(master_seed), spec.n, r])
    rng = np.random.default_rng(ss)
    seed_id = int(ss.generate_state(1, np.uint64)[0])
    coeffs = sample_coefficients(spec, rng)
    sample = synthesize(coeffs, grid)
    ints = chaos_integrals(sample, q_max)
    area = excursion_area(sample, u, replicate_id=r).area
    return r, seed_id, area, ints, h2_exact_from_coeffs(coeffs)


def _worker_chunk(bounds):
    lo, hi = bounds
    ctx = _WORKER_CTX
    return [
        _replicate_row(ctx["spec"], ctx["grid"], ctx["u"], ctx["q_max"], ctx["seed"], r)
        for r in range(lo, hi)
    ]


def _run_replicates(spec, grid, u, q_max, master_seed, replicates, workers):
    """Evaluate all replicates, in order-independent parallel chunks."""
    areas = np.empty(replicates)
    h = np.empty((replicates, q_max + 1))
    h2x = np.empty(replicates)
    seeds = np.empty(replicates, dtype=np.uint64)

    def consume(row):
        r, sid, area, ints, hx = row
        areas[r] = area
        h[r] = ints
        h2x[r] = hx
        seeds[r] = sid

    if workers <= 1:
        for r in range(replicates):
            consume(_replicate_row(spec, grid, u, q_max, master_seed, r))
    else:
        global _WORKER_CTX
        _WORKER_CTX = {"spec": spec, "grid": grid, "u": u, "q_max": q_max, "seed": master_seed}
        chunk = max(1, replicates // (workers * 8))
        bounds = [(lo, min(lo + chunk, replicates)) for lo in range(0, replicates, chunk)]
        mp_ctx = multiprocessing.get_context("fork")
        with ProcessPoolExecutor(max_workers=workers, mp_context=mp_ctx) as pool:
            for rows in pool.map(_worker_chunk, bounds):
                for row in rows:
                    consume(row)
        _WORKER_CTX = {}
    return {"area": areas, "h": h, "h2_exact": h2x, "seed": seeds}


def _field_row(config: ExperimentConfig, n: int):
    spec = make_spec(n, config.beta, config.band_rounding)
    degree = max(int(math.ceil(config.oversample * n)), 2 * n)
    grid = build_grid(degree)
    band_table(spec, grid)  # build before forking so workers share it
    data = _run_replicates(
        spec, grid, config.u, config.q_max, config.master_seed, config.replicates, config.workers
    )
    areas = data["area"]
    h2x = data["h2_exact"]
    boot_rng = np.random.default_rng(
        np.random.SeedSequence([config.master_seed, n, _BOOTSTRAP_KEY])
    )
    var_s = float(areas.var(ddof=1))
    var_s_se = bootstrap_variance_se(areas, boot_rng)
    mean_s = float(areas.mean())
    mean_s_se = bootstrap_mean_se(areas, boot_rng)
    var_h2 = float(h2x.var(ddof=1))
    var_h2_se = bootstrap_variance_se(h2x, boot_rng)
    ks_stat, ks_pass = clt_test(areas) if areas.size >= 500 else (None, None)
    var_hq = {}
    var_hq_se = {}
    ratios = {2: jq_coefficient(2, config.u) ** 2 / 4.0 * var_h2 / var_s if var_s > 0 else math.nan}
    for q in range(3, config.q_max + 1):
        vq = float(data["h"][:, q].var(ddof=1))
        var_hq[q] = vq
        var_hq_se[q] = bootstrap_variance_se(data["h"][:, q], boot_rng)
        if var_s > 0:
            ratios[q] = jq_coefficient(q, config.u) ** 2 / math.factorial(q) ** 2 * vq / var_s
    row = SweepRow(
        n=n,
        ell_min=spec.ell_min,
        dof=spec.dof,
        var_s_hat=var_s,
        var_s_se=var_s_se,
        mean_s_hat=mean_s,
        mean_s_se=mean_s_se,
        var_h2_hat=var_h2,
        var_h2_se=var_h2_se,
        var_h2_exact_formula=h2_variance_formula(spec),
        clt_ks_stat=ks_stat,
        clt_pass=ks_pass,
        var_hq=var_hq,
        var_hq_se=var_hq_se,
        chaos_ratios=ratios,
    )
    data["u"] = config.u
    return row, data


def _direct_row(config: ExperimentConfig, n: int):
    spec = make_spec(n, config.beta, config.band_rounding)
    rng = np.random.default_rng(np.random.SeedSequence([config.master_seed, n, 0]))
    draws = h2_sample_direct(spec, rng, size=config.replicates)
    boot_rng = np.random.default_rng(
        np.random.SeedSequence([config.master_seed, n, _BOOTSTRAP_KEY])
    )
    ks_stat, ks_pass = clt_test(draws) if draws.size >= 500 else (None, None)
    row = SweepRow(
        n=n,
        ell_min=spec.ell_min,
        dof=spec.dof,
        var_h2_hat=float(draws.var(ddof=1)),
        var_h2_se=bootstrap_variance_se(draws, boot_rng),
        var_h2_exact_formula=h2_variance_formula(spec),
        clt_ks_stat=ks_stat,
        clt_pass=ks_pass,
    )
    return row, {"h2_exact": draws, "u": config.u}


def run_variance_sweep(config: ExperimentConfig) -> ExperimentResult:
    """Run the per-n Monte Carlo and aggregate summary rows.

    A failure for one n is recorded in its row and does not abort the others.
    """
    rows = []
    replicate_data = {}
    for n in config.n_list:
        try:
            if config.mode == "field_full":
                row, data = _field_row(config, n)
            else:
                row, data = _direct_row(config, n)
            replicate_data[n] = data
        except Exception as exc:  # propagate per-n without aborting the sweep
            spec_ok = None
            try:
                spec_ok = make_spec(n, config.beta, config.band_rounding)
            except Exception:
                pass
            row = SweepRow(
                n=n,
                ell_min=spec_ok.ell_min if spec_ok else -1,
                dof=spec_ok.dof if spec_ok else -1,
                error=f"{type(exc).__name__}: {exc}",
            )
        rows.append(row)
    result = ExperimentResult(config=config, rows=tuple(rows), replicate_data=replicate_data)
    usable = [r for r in rows if r.var_s_hat is not None and r.var_s_hat > 0]
    if config.mode == "field_full" and len(usable) >= 3:
        slope, intercept, ci = fit_scaling_exponent(
            usable, raw_areas={n: replicate_data[n]["area"] for n in config.n_list if n in replicate_data},
            master_seed=config.master_seed,
        )
        result = replace(result, fitted_exponent=slope, fitted_intercept=intercept, exponent_ci=ci)
    return result


def fit_scaling_exponent(
    rows,
    raw_areas: dict[int, np.ndarray] | None = None,
    n_boot: int = 400,
    master_seed: int = 0,
):
    """Ordinary least squares of log(var_S_hat) against log(n).

    Returns (slope, intercept, ci); the confidence interval comes from
    bootstrap resampling of the replicates when raw areas are available, and
    is None otherwise.
    """
    usable = [r for r in rows if r.var_s_hat is not None and r.var_s_hat > 0]
    if len(usable) < 3:
        raise ValueError("need at least 3 rows with positive variances")
    ns = np.array([r.n for r in usable], dtype=float)
    vs = np.array([r.var_s_hat for r in usable], dtype=float)
    slope, intercept = np.polyfit(np.log(ns), np.log(vs), 1)
    ci = None
    if raw_areas is not None and all(r.n in raw_areas for r in usable):
        rng = np.random.default_rng(np.random.SeedSequence([master_seed, _BOOTSTRAP_KEY, 2]))
        slopes = np.empty(n_boot)
        logn = np.log(ns)
        for b in range(n_boot):
            logv = np.empty(len(usable))
            for i, row in enumerate(usable):
                areas = raw_areas[row.n]
                idx = rng.integers(0, areas.size, areas.size)
                logv[i] = math.log(areas[idx].var(ddof=1))
            slopes[b] = np.polyfit(logn, logv, 1)[0]
        lo, hi = np.percentile(slopes, [2.5, 97.5])
        ci = (float(lo), float(hi))
    return float(slope), float(intercept), ci


@dataclass(frozen=True)
class ChaosDominanceReport:
    config: ExperimentConfig
    rows: tuple[SweepRow, ...]
    h2_normalized: dict[int, float]      # n -> Var_hat(h2) * D / (2 (4 pi)^2)
    q3_scaled: dict[int, float]          # n -> Var_hat(h3) * n^2
    q4_scaled: dict[int, float]          # n -> Var_hat(h4) * n^2 / log n
    h3_h2_ratio: dict[int, float]
    flags: dict[str, bool]


def chaos_dominance_report(config: ExperimentConfig) -> ChaosDominanceReport:
    """Scaled higher-chaos variance table with boundedness/decay flags."""
    if config.mode != "field_full":
        raise ValueError("chaos dominance report requires field_full mode")
    if config.q_max < 4:
        config = replace(config, q_max=4)
    result = run_variance_sweep(config)
    h2_norm, q3s, q4s, ratio = {}, {}, {}, {}
    h2_ok = True
    for row in result.rows:
        if row.error is not None:
            continue
        norm = row.var_h2_hat / row.var_h2_exact_formula
        h2_norm[row.n] = norm
        se_norm = row.var_h2_se / row.var_h2_exact_formula
        if abs(norm - 1.0) > 3.0 * se_norm:
            h2_ok = False
        q3s[row.n] = row.var_hq[3] * row.n**2
        q4s[row.n] = row.var_hq[4] * row.n**2 / math.log(row.n)
        ratio[row.n] = row.var_hq[3] / row.var_h2_hat
    def within_band(d, factor=3.0):
        vals = list(d.values())
        return bool(vals) and max(vals) <= factor * min(vals)

    ns = sorted(ratio)
    decay_ok = True
    for a, b in zip(ns, ns[1:]):
        expected = (a / b) ** config.beta  # ratio should shrink like n^-beta
        if not 0.5 * expected <= ratio[b] / ratio[a] <= 1.5 * expected:
            decay_ok = False
    flags = {
        "h2_identity_ok": h2_ok,
        "q3_band_ok": within_band(q3s),
        "q4_band_ok": within_band(q4s),
        "h3_h2_decay_ok": decay_ok,
    }
    return ChaosDominanceReport(
        config=config,
        rows=result.rows,
        h2_normalized=h2_norm,
        q3_scaled=q3s,
        q4_scaled=q4s,
        h3_h2_ratio=ratio,
        flags=flags,
    )


# --- serialization -----------------------------------------------------------

def write_replicate_csv(result: ExperimentResult, n: int, out, header_lines: tuple[str, ...] = ()) -> None:
    """Replicate-level CSV: replicate,seed,u,area,h1,h2_quad,h2_exact,h3,h4."""
    data = result.replicate_data.get(n)
    if data is None:
        raise KeyError(f"no replicate data for n={n}")
    close = False
    if isinstance(out, (str, bytes)):
        out = open(out, "w")
        close = True

    def fmt(x) -> str:
        return "" if x is None else f"{x:.16e}"

    try:
        for line in header_lines:
            out.write(f"# {line}\n")
        out.write("replicate,seed,u,area,h1,h2_quad,h2_exact,h3,h4\n")
        reps = data["h2_exact"].size
        h = data.get("h")
        areas = data.get("area")
        seeds = data.get("seed")
        u = data["u"]
        for r in range(reps):
            cols = [
                str(r),
                str(int(seeds[r])) if seeds is not None else "",
                f"{u:.16e}",
                fmt(float(areas[r])) if areas is not None else "",
                fmt(float(h[r, 1])) if h is not None else "",
                fmt(float(h[r, 2])) if h is not None and h.shape[1] > 2 else "",
                fmt(float(data["h2_exact"][r])),
                fmt(float(h[r, 3])) if h is not None and h.shape[1] > 3 else "",
                fmt(float(h[r, 4])) if h is not None and h.shape[1] > 4 else "",
            ]
            out.write(",".join(cols) + "\n")
    finally:
        if close:
            out.close()


def config_to_dict(config: ExperimentConfig) -> dict:
    return {
        "n_list": list(config.n_list),
        "beta": config.beta,
        "u": config.u,
        "replicates": config.replicates,
        "master_seed": config.master_seed,
        "oversample": config.oversample,
        "mode": config.mode,
        "q_max": config.q_max,
        "workers": config.workers,
        "band_rounding": config.band_rounding,
    }


def row_to_dict(row: SweepRow) -> dict:
    return {
        "n": row.n,
        "ell_min": row.ell_min,
        "dof": row.dof,
        "var_s_hat": row.var_s_hat,
        "var_s_se": row.var_s_se,
        "mean_s_hat": row.mean_s_hat,
        "mean_s_se": row.mean_s_se,
        "var_h2_hat": row.var_h2_hat,
        "var_h2_se": row.var_h2_se,
        "var_h2_exact_formula": row.var_h2_exact_formula,
        "clt_ks_stat": row.clt_ks_stat,
        "clt_pass": row.clt_pass,
        "var_hq": {str(q): v for q, v in sorted(row.var_hq.items())},
        "var_hq_se": {str(q): v for q, v in sorted(row.var_hq_se.items())},
        "chaos_ratios": {str(q): v for q, v in sorted(row.chaos_ratios.items())},
        "error": row.error,
    }


def result_to_dict(result: ExperimentResult) -> dict:
    return {
        "config": config_to_dict(result.config),
        "rows": [row_to_dict(r) for r in result.rows],
        "fitted_exponent": result.fitted_exponent,
        "fitted_intercept": result.fitted_intercept,
        "exponent_ci": list(result.exponent_ci) if result.exponent_ci else None,
    }
