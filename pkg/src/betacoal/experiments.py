"""Named, reproducible experiments, one per limit theorem.

Every experiment returns an :class:`ExperimentReport`; :func:`write_outputs`
turns it into ``<name>_report.json`` and ``<name>_samples.csv``. Replicate
``i`` always draws from ``rng_stream(seed, i)`` and results are merged by
index, so the numbers do not depend on the thread count.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
import json
import math
import os
from pathlib import Path
import time

import numpy as np

from . import __version__, coalescent, levy, rates, stats
from .errors import AbsorbedError, ConfigError, HorizonError, check_alpha
from .stable import rng_stream, sample_limit_X, sample_poisson

# Stream indices at or above this offset are reserved for exact limit draws
# and other non-replicate randomness.
AUX_STREAM = 2**40

GATE_FACTOR = 50

DEFAULT_TOLERANCES = {
    "speed": {"rel": 0.05},
    "clt": {"ks": 0.1},
    "rfluct": {"ks": 0.05, "exhausted": 0.01},
    "poisson": {"coverage": 0.999, "dispersion_lo": 0.97, "dispersion_hi": 1.03},
    "csbp": {"se": 3.0},
}


@dataclass
class ExperimentConfig:
    alpha: float
    t: float | None = None
    n_blocks: int | None = None
    reps: int = 100
    step: float | None = None
    seed: int = 0
    tolerances: dict = field(default_factory=dict)
    out_dir: str | None = None
    override_gate: bool = False
    threads: int | None = None
    refine_n_blocks: int | None = None
    lam: float = 1.0

    def tolerance(self, name, key):
        return float(self.tolerances.get(key, DEFAULT_TOLERANCES[name][key]))


@dataclass
class ExperimentReport:
    experiment: str
    config: dict
    constants: dict
    statistics: dict
    ks: dict
    verdicts: dict
    runtime_seconds: float
    version: str = __version__
    samples: dict = field(default_factory=dict, repr=False)

    @property
    def passed(self):
        return all(v["pass"] for v in self.verdicts.values())

    def as_dict(self):
        return {
            "experiment": self.experiment,
            "config": self.config,
            "constants": self.constants,
            "statistics": self.statistics,
            "ks": self.ks,
            "verdicts": self.verdicts,
            "runtime_seconds": self.runtime_seconds,
            "version": self.version,
        }


def _verdict(measured, tolerance, passed, rule):
    return {"measured": measured, "tolerance": tolerance, "pass": bool(passed), "rule": rule}


def map_replicates(fn, reps, seed, threads=None):
    """``[fn(i, rng_stream(seed, i)) for i in range(reps)]``, possibly on a
    thread pool; output order is by replicate index."""
    def one(i):
        return fn(i, rng_stream(seed, i))

    threads = threads or os.cpu_count() or 1
    if threads <= 1 or reps <= 1:
        return [one(i) for i in range(reps)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(one, range(reps), chunksize=max(1, reps // (8 * threads))))


def speed_scale(t, alpha):
    """``(alpha Gamma(alpha) / t) ** (1 / (alpha - 1))``."""
    return rates.constants(alpha).speed_const * t ** (-1.0 / (alpha - 1.0))


def gate_blocks(t, alpha):
    return int(math.ceil(GATE_FACTOR * speed_scale(t, alpha)))


def _check_common(cfg, need_t=True):
    try:
        alpha = check_alpha(cfg.alpha, regime=True)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if int(cfg.reps) != cfg.reps or cfg.reps < 1:
        raise ConfigError(f"reps must be a positive integer, got {cfg.reps}")
    if need_t and (cfg.t is None or not cfg.t > 0):
        raise ConfigError("t must be given and positive")
    return alpha


def _resolve_blocks(cfg, alpha, t, n=None):
    gate = gate_blocks(t, alpha)
    n = cfg.n_blocks if n is None else n
    if n is None:
        return gate, gate
    if n < gate and not cfg.override_gate:
        raise ConfigError(
            f"n_blocks={n} is below the gate {GATE_FACTOR} * v(t) = {gate}; "
            "pass override_gate to run anyway")
    return int(n), gate


def _config_echo(cfg, **extra):
    d = asdict(cfg)
    d.update(extra)
    return d


def _block_counts(n, alpha, t, seed, reps, threads):
    table = rates.total_rate_table(n, alpha)
    out = map_replicates(
        lambda i, g: coalescent.block_count_value(n, alpha, t, g, table), reps, seed, threads)
    return np.array(out, dtype=float)


def run_speed_experiment(cfg):
    start = time.perf_counter()
    alpha = _check_common(cfg)
    t = float(cfg.t)
    n, gate = _resolve_blocks(cfg, alpha, t)
    const = rates.constants(alpha)

    counts = _block_counts(n, alpha, t, cfg.seed, cfg.reps, cfg.threads)
    stat = t ** (1.0 / (alpha - 1.0)) * counts
    summ = stats.summary(stat)
    rel = abs(summ["mean"] - const.speed_const) / const.speed_const
    tol = cfg.tolerance("speed", "rel")
    finite_n = t ** (1.0 / (alpha - 1.0)) * coalescent.finite_n_mean(n, t, alpha)

    return ExperimentReport(
        experiment="speed",
        config=_config_echo(cfg, n_blocks=n, gate_blocks=gate, gate_factor=GATE_FACTOR,
                            gate_overridden=n < gate),
        constants=const.as_dict(),
        statistics={
            "statistic": "t^(1/(alpha-1)) N(t)",
            "summary": summ,
            "target": const.speed_const,
            "relative_deviation": rel,
            "finite_n_prediction": finite_n,
            "v_psi_scaled": t ** (1.0 / (alpha - 1.0)) * rates.v_psi(t, alpha),
        },
        ks={},
        verdicts={"mean_speed": _verdict(rel, tol, rel < tol, "|mean - speed_const| / speed_const < tol")},
        runtime_seconds=time.perf_counter() - start,
        samples={"statistic": stat},
    )


def clt_statistic(counts, t, alpha):
    return t ** (1.0 / (alpha * (alpha - 1.0))) * (counts - speed_scale(t, alpha))


def _limit_draws(alpha, factor, seed, reps, offset=0):
    return factor * sample_limit_X(alpha, rng_stream(seed, AUX_STREAM + offset), size=reps)


def _median_band(alpha, factor, seed, reps, batches=400):
    g = rng_stream(seed, AUX_STREAM + 99)
    meds = np.median(factor * sample_limit_X(alpha, g, size=(batches, reps)), axis=1)
    return float(np.quantile(meds, 0.025)), float(np.quantile(meds, 0.975))


def run_clt_experiment(cfg):
    start = time.perf_counter()
    alpha = _check_common(cfg)
    t = float(cfg.t)
    n, gate = _resolve_blocks(cfg, alpha, t)
    t2 = t / 2.0
    n2_default = int(math.ceil(n * 2.0 ** (1.0 / (alpha - 1.0))))
    n2, gate2 = _resolve_blocks(cfg, alpha, t2, cfg.refine_n_blocks or n2_default)
    const = rates.constants(alpha)
    tol = cfg.tolerance("clt", "ks")

    stat = clt_statistic(_block_counts(n, alpha, t, cfg.seed, cfg.reps, cfg.threads), t, alpha)
    limit = _limit_draws(alpha, -const.d_alpha, cfg.seed, cfg.reps)
    ks1 = stats.ks_two_sample(stat, limit)

    stat2 = clt_statistic(
        _block_counts(n2, alpha, t2, cfg.seed + 1, cfg.reps, cfg.threads), t2, alpha)
    limit2 = _limit_draws(alpha, -const.d_alpha, cfg.seed + 1, cfg.reps)
    ks2 = stats.ks_two_sample(stat2, limit2)

    lo, hi = _median_band(alpha, -const.d_alpha, cfg.seed, cfg.reps)
    med = float(np.median(stat))

    def finite_n_shift(nn, tt):
        return float(clt_statistic(coalescent.finite_n_mean(nn, tt, alpha), tt, alpha))

    return ExperimentReport(
        experiment="clt",
        config=_config_echo(cfg, n_blocks=n, gate_blocks=gate, gate_factor=GATE_FACTOR,
                            gate_overridden=n < gate, refine_t=t2, refine_n_blocks=n2,
                            refine_gate_blocks=gate2),
        constants=const.as_dict(),
        statistics={
            "statistic": "t^(1/(alpha(alpha-1))) (N(t) - (alpha Gamma(alpha)/t)^(1/(alpha-1)))",
            "limit": "-D_alpha X",
            "summary": stats.summary(stat),
            "limit_summary": stats.summary(limit),
            "refine_summary": stats.summary(stat2),
            "median": med,
            "limit_median_band_95": [lo, hi],
            "median_in_band": lo <= med <= hi,
            "finite_n_predicted_shift": finite_n_shift(n, t),
            "refine_finite_n_predicted_shift": finite_n_shift(n2, t2),
        },
        ks={"t": ks1.as_dict(), "t_half": ks2.as_dict()},
        verdicts={
            "ks": _verdict(ks1.statistic, tol, ks1.statistic < tol, "KS distance < tol"),
            "ks_refinement": _verdict(ks2.statistic, ks1.statistic,
                                      ks2.statistic <= ks1.statistic,
                                      "KS at t/2 <= KS at t"),
        },
        runtime_seconds=time.perf_counter() - start,
        samples={"statistic": stat, "limit_sample": limit},
    )


def _rfluct_replicate(alpha, t, step, horizon):
    def one(i, g):
        path = levy.simulate_path(alpha, horizon, step, g)
        cache = levy.time_change_cache(path)
        try:
            return levy.compute_R(path, cache, t), levy.r_inverse(path, cache, t)
        except (AbsorbedError, HorizonError):
            return None

    return one


def run_rfluct_experiment(cfg):
    start = time.perf_counter()
    alpha = _check_common(cfg)
    t = float(cfg.t)
    step = float(cfg.step) if cfg.step is not None else t / 1e3
    if step > t / 1e3 * (1 + 1e-12):
        raise ConfigError(f"step must be <= t/1000 = {t / 1e3}")
    horizon = 4.0 * t
    if horizon / step > 1e7 + 1:
        raise ConfigError("more than 1e7 grid points per path")
    const = rates.constants(alpha)
    c = const.c_alpha
    tol = cfg.tolerance("rfluct", "ks")
    max_exhausted = cfg.tolerance("rfluct", "exhausted")

    results = map_replicates(_rfluct_replicate(alpha, t, step, horizon),
                             cfg.reps, cfg.seed, cfg.threads)
    ok = [r for r in results if r is not None]
    exhausted = len(results) - len(ok)
    r_t = np.array([r for r, _ in ok])
    r_inv = np.array([ri for _, ri in ok])
    scale = t ** (1.0 + 1.0 / alpha)

    s_r = (r_t - c * t) / scale
    s_rinv = (r_inv - t / c) / scale
    s_pow = t ** (1.0 / (alpha * (alpha - 1.0))) * (
        ((alpha - 1.0) * r_inv) ** (-1.0 / (alpha - 1.0)) - speed_scale(t, alpha))

    x = _limit_draws(alpha, 1.0, cfg.seed, cfg.reps)
    limits = {
        "R": (1.0 - alpha) * c * x,
        "R_inverse": (alpha - 1.0) / c ** (1.0 + 1.0 / alpha) * x,
        "R_inverse_power": -const.d_alpha * x,
    }
    sets = {"R": s_r, "R_inverse": s_rinv, "R_inverse_power": s_pow}
    ks = {k: stats.ks_two_sample(sets[k], limits[k]).as_dict() for k in sets}
    frac_exhausted = exhausted / cfg.reps

    verdicts = {
        f"ks_{k}": _verdict(ks[k]["statistic"], tol, ks[k]["statistic"] < tol, "KS distance < tol")
        for k in sets
    }
    verdicts["valid"] = _verdict(frac_exhausted, max_exhausted, frac_exhausted <= max_exhausted,
                                 "fraction of horizon-exhausted paths <= tol")

    samples = {}
    for k in sets:
        samples[f"{k}_statistic"] = sets[k]
        samples[f"{k}_limit_sample"] = limits[k]

    return ExperimentReport(
        experiment="rfluct",
        config=_config_echo(cfg, step=step, horizon=horizon),
        constants=const.as_dict(),
        statistics={
            "summaries": {k: stats.summary(v) for k, v in sets.items()},
            "exhausted_paths": exhausted,
            "spearman": {
                "R_vs_R_inverse": stats.spearman(s_r, s_rinv),
                "R_inverse_vs_power": stats.spearman(s_rinv, s_pow),
                "R_vs_power": stats.spearman(s_r, s_pow),
            },
        },
        ks=ks,
        verdicts=verdicts,
        runtime_seconds=time.perf_counter() - start,
        samples=samples,
    )


POISSON_GRID = (1e2, 1e3, 1e4)
POISSON_EPS = 0.2
DISPERSION_DRAWS = 10**5


def run_poisson_experiment(cfg):
    start = time.perf_counter()
    if int(cfg.reps) != cfg.reps or cfg.reps < 1:
        raise ConfigError(f"reps must be a positive integer, got {cfg.reps}")
    coverage_tol = cfg.tolerance("poisson", "coverage")
    lo_tol = cfg.tolerance("poisson", "dispersion_lo")
    hi_tol = cfg.tolerance("poisson", "dispersion_hi")

    freq, worst = {}, {}
    last = None
    for j, theta in enumerate(POISSON_GRID):
        d = sample_poisson(theta, rng_stream(cfg.seed, AUX_STREAM + j), size=cfg.reps)
        dev = np.abs(d - theta) / theta ** (0.5 + POISSON_EPS)
        freq[f"{theta:g}"] = float(np.mean(dev <= 1.0))
        worst[f"{theta:g}"] = float(dev.max())
        last = d
    disp_draws = sample_poisson(POISSON_GRID[-1], rng_stream(cfg.seed, AUX_STREAM + 10),
                                size=DISPERSION_DRAWS)
    disp = stats.dispersion_index(disp_draws)
    fvals = list(freq.values())
    top = freq[f"{POISSON_GRID[-1]:g}"]

    return ExperimentReport(
        experiment="poisson",
        config=_config_echo(cfg, grid=list(POISSON_GRID), epsilon=POISSON_EPS,
                            dispersion_draws=DISPERSION_DRAWS),
        constants={},
        statistics={
            "coverage": freq,
            "max_scaled_deviation": worst,
            "max_scaled_deviation_overall": max(worst.values()),
            "coverage_nondecreasing": all(a <= b for a, b in zip(fvals, fvals[1:])),
            "dispersion_index": disp,
        },
        ks={},
        verdicts={
            "coverage": _verdict(top, coverage_tol, top >= coverage_tol,
                                 "fraction within t^(1/2+eps) at t=1e4 >= tol"),
            "dispersion": _verdict(disp, [lo_tol, hi_tol], lo_tol <= disp <= hi_tol,
                                   "dispersion index at theta=1e4 within band"),
        },
        runtime_seconds=time.perf_counter() - start,
        samples={"statistic": last.astype(float)},
    )


def run_csbp_experiment(cfg):
    """Lamperti-constructed CSBP at time ``t`` against the closed-form flow:
    ``E exp(-lam Z(t)) = exp(-u_t(lam))`` and ``P(Z(t) = 0) = exp(-u_t(inf))``."""
    start = time.perf_counter()
    alpha = _check_common(cfg)
    t = float(cfg.t)
    step = float(cfg.step) if cfg.step is not None else 1e-4
    lam = float(cfg.lam)
    k = cfg.tolerance("csbp", "se")

    z = np.array(map_replicates(lambda i, g: levy.csbp_value(alpha, t, step, g),
                                cfg.reps, cfg.seed, cfg.threads))
    est, se = stats.empirical_laplace(z, lam)
    target = math.exp(-rates.u_flow(t, lam, alpha))
    p_ext = float(np.mean(z == 0.0))
    target_ext = math.exp(-rates.poisson_parameter(t, alpha))
    se_ext = math.sqrt(target_ext * (1.0 - target_ext) / cfg.reps)
    dev_l = abs(est - target) / se if se > 0 else math.inf
    dev_e = abs(p_ext - target_ext) / se_ext

    return ExperimentReport(
        experiment="csbp",
        config=_config_echo(cfg, step=step),
        constants=rates.constants(alpha).as_dict(),
        statistics={
            "laplace_estimate": est,
            "laplace_stderr": se,
            "laplace_target": target,
            "extinction_frequency": p_ext,
            "extinction_target": target_ext,
            "survival_frequency": 1.0 - p_ext,
            "survival_target": 1.0 - target_ext,
            "summary": stats.summary(z),
        },
        ks={},
        verdicts={
            "laplace": _verdict(dev_l, k, dev_l <= k, "|estimate - exp(-u_t(lam))| <= tol * SE"),
            "extinction": _verdict(dev_e, k, dev_e <= k,
                                   "|P(Z(t)=0) - exp(-u_t(inf))| <= tol * SE"),
        },
        runtime_seconds=time.perf_counter() - start,
        samples={"statistic": z},
    )


EXPERIMENTS = {
    "speed": run_speed_experiment,
    "clt": run_clt_experiment,
    "rfluct": run_rfluct_experiment,
    "poisson": run_poisson_experiment,
    "csbp": run_csbp_experiment,
}


def _fmt(x):
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x) or math.isinf(x):
            return "null"
        return format(x, ".17g")
    if x is None:
        return "null"
    if isinstance(x, str):
        return json.dumps(x)
    if isinstance(x, dict):
        return "{" + ", ".join(f"{_fmt(str(k))}: {_fmt(v)}" for k, v in x.items()) + "}"
    if isinstance(x, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_fmt(v) for v in x) + "]"
    raise TypeError(f"cannot serialise {type(x).__name__}")


def to_json(obj):
    """JSON text with every float written to 17 significant digits."""
    return _fmt(obj) + "\n"


def samples_to_csv(samples, fh):
    cols = list(samples)
    fh.write(",".join(cols) + "\n")
    length = max(len(v) for v in samples.values())
    for i in range(length):
        fh.write(",".join(format(float(samples[c][i]), ".17g") if i < len(samples[c]) else ""
                          for c in cols) + "\n")


def write_outputs(report, out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    json_path = out / f"{report.experiment}_report.json"
    json_path.write_text(to_json(report.as_dict()))
    csv_path = out / f"{report.experiment}_samples.csv"
    with open(csv_path, "w") as fh:
        samples_to_csv(report.samples, fh)
    return json_path, csv_path
