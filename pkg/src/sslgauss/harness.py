"""Monte Carlo experiment orchestration.

Runs M independent trials per (method, sweep point), each with a freshly
drawn sparse mean and dataset, scores them with the closed-form metrics, and
persists plot-ready CSV. Trial seeds depend only on (master seed, trial
index), so all methods and sweep points of a trial share the same data,
and parallel execution is bit-identical to serial.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, SslgaussError
from .estimators import METHODS, MethodOptions
from .gmodel import (Dataset, ProblemParams, SparseMean, k_from_alpha, labeled_count,
                     make_sparse_mean, sample_dataset, unlabeled_count)
from .metrics import score
from .rng import mix64

STREAM_TRIAL = 0x54
STREAM_MEAN = 0x55
STREAM_DATA = 0x56

CSV_HEADER = "method,p,k,lambda,L,n,trial,seed,overlap,gen_error,excess_risk,runtime_ms,failed"
AGG_HEADER = ("method,L,n,count,failures,overlap_mean,overlap_std,"
              "gen_error_mean,gen_error_std,excess_risk_mean,excess_risk_std")
AGG_COMMENT = "# aggregates over non-failed trials; std is the sample standard deviation (ddof=1)"

SWEEP_AXES = ("L", "n")


@dataclass(frozen=True)
class ExperimentConfig:
    """A full experiment: base problem, optional sweep, methods, trial count."""

    params: ProblemParams
    methods: tuple[str, ...] = ("lspca",)
    trials: int = 50
    sweep_axis: str | None = None
    sweep_values: tuple[int, ...] = ()
    gamma_threshold: float = 0.8
    beta_tilde: float | str = "auto"
    out_path: str | None = None
    f32: bool = False
    threads: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if self.sweep_axis is not None:
            if self.sweep_axis not in SWEEP_AXES:
                raise ConfigError(f"sweep_axis must be one of {SWEEP_AXES}, got {self.sweep_axis!r}")
            if not self.sweep_values:
                raise ConfigError("sweep_axis given but sweep_values is empty")
            vals = list(self.sweep_values)
            if any(v < 0 for v in vals):
                raise ConfigError("sweep values must be nonnegative")
            if any(b <= a for a, b in zip(vals, vals[1:])):
                raise ConfigError("sweep values must be strictly increasing")
        elif self.sweep_values:
            raise ConfigError("sweep_values given without sweep_axis")
        if not self.methods:
            raise ConfigError("at least one method is required")
        unknown = [m for m in self.methods if m not in METHODS]
        if unknown:
            raise ConfigError(f"unknown methods {unknown}; registered: {sorted(METHODS)}")
        if self.beta_tilde != "auto" and not 0.0 < float(self.beta_tilde) < 1.0:
            raise ConfigError(f"beta_tilde must be 'auto' or in (0, 1), got {self.beta_tilde}")
        if self.gamma_threshold < 0:
            raise ConfigError(f"Gamma must be nonnegative, got {self.gamma_threshold}")
        if self.threads < 1:
            raise ConfigError(f"threads must be >= 1, got {self.threads}")

    def points(self) -> list[tuple[int, int]]:
        """(L, n) pairs covered by the sweep (a single pair when no sweep)."""
        if self.sweep_axis is None:
            return [(self.params.L, self.params.n)]
        if self.sweep_axis == "n":
            return [(self.params.L, v) for v in self.sweep_values]
        return [(v, self.params.n) for v in self.sweep_values]


@dataclass(frozen=True)
class TrialRecord:
    method: str
    p: int
    k: int
    lam: float
    L: int
    n: int
    trial: int
    seed: int
    overlap: float
    gen_error: float
    excess_risk: float
    runtime_ms: float
    failed: bool
    error: str = ""  # not persisted in the CSV

    def csv_row(self) -> str:
        cells = [self.method, str(self.p), str(self.k), repr(float(self.lam)),
                 str(self.L), str(self.n), str(self.trial), str(self.seed),
                 repr(float(self.overlap)), repr(float(self.gen_error)),
                 repr(float(self.excess_risk)), repr(float(self.runtime_ms)),
                 "1" if self.failed else "0"]
        return ",".join(cells)


def trial_seed(config: ExperimentConfig, trial_index: int) -> int:
    return mix64(config.params.seed, STREAM_TRIAL, trial_index)


def trial_ground_truth(config: ExperimentConfig, trial_index: int,
                       point: tuple[int, int] | None = None
                       ) -> tuple[SparseMean, Dataset]:
    """Mean and dataset of one trial. The mean and the sample streams depend
    only on (master seed, trial index); the point sets how many rows are
    materialized, and smaller draws are prefixes of larger ones."""
    L, n = point if point is not None else (config.params.L, config.params.n)
    pp = config.params.with_counts(L=L, n=n)
    seed = trial_seed(config, trial_index)
    mu = make_sparse_mean(pp, seed=mix64(seed, STREAM_MEAN))
    dtype = np.float32 if config.f32 else np.float64
    ds = sample_dataset(mu, pp.L, pp.n, seed=mix64(seed, STREAM_DATA), dtype=dtype)
    return mu, ds


def run_trial(config: ExperimentConfig, method: str, point: tuple[int, int],
              trial_index: int) -> TrialRecord:
    """One estimator on one fresh realization; estimator failures are
    recorded in the row, not raised."""
    if method not in METHODS:
        raise ConfigError(f"unknown method {method!r}")
    L, n = point
    pp = config.params.with_counts(L=L, n=n)
    mu, ds = trial_ground_truth(config, trial_index, point)
    opts = MethodOptions(beta_tilde=config.beta_tilde,
                         gamma_threshold=config.gamma_threshold)
    start = time.perf_counter()
    try:
        est = METHODS[method](ds, pp, opts)
        runtime_ms = (time.perf_counter() - start) * 1e3
        metrics = score(mu, est.support, est.direction, runtime_ms)
        return TrialRecord(method=method, p=pp.p, k=pp.k, lam=pp.lam, L=L, n=n,
                           trial=trial_index, seed=trial_seed(config, trial_index),
                           overlap=metrics.overlap, gen_error=metrics.gen_error,
                           excess_risk=metrics.excess_risk,
                           runtime_ms=metrics.runtime_ms, failed=False)
    except SslgaussError as err:
        runtime_ms = (time.perf_counter() - start) * 1e3
        return TrialRecord(method=method, p=pp.p, k=pp.k, lam=pp.lam, L=L, n=n,
                           trial=trial_index, seed=trial_seed(config, trial_index),
                           overlap=math.nan, gen_error=math.nan, excess_risk=math.nan,
                           runtime_ms=runtime_ms, failed=True, error=str(err))


def _run_task(task) -> TrialRecord:
    config, method, point, trial_index = task
    return run_trial(config, method, point, trial_index)


@dataclass(frozen=True)
class AggregateRow:
    method: str
    L: int
    n: int
    count: int
    failures: int
    overlap_mean: float
    overlap_std: float
    gen_error_mean: float
    gen_error_std: float
    excess_risk_mean: float
    excess_risk_std: float

    def csv_row(self) -> str:
        return ",".join([self.method, str(self.L), str(self.n), str(self.count),
                         str(self.failures)] +
                        [repr(float(x)) for x in (self.overlap_mean, self.overlap_std,
                                                  self.gen_error_mean, self.gen_error_std,
                                                  self.excess_risk_mean, self.excess_risk_std)])


def _mean_std(values: list[float]) -> tuple[float, float]:
    if not values:
        return math.nan, math.nan
    arr = np.asarray(values, dtype=np.float64)
    mean = float(arr.mean())
    std = float(arr.std(ddof=1)) if arr.size > 1 else math.nan
    return mean, std


def aggregate(records: list[TrialRecord]) -> list[AggregateRow]:
    """Mean and unbiased std per (method, point), failures excluded and counted."""
    groups: dict[tuple[str, int, int], list[TrialRecord]] = {}
    for rec in records:
        groups.setdefault((rec.method, rec.L, rec.n), []).append(rec)
    rows = []
    for (method, L, n), recs in sorted(groups.items()):
        ok = [r for r in recs if not r.failed]
        o_mean, o_std = _mean_std([r.overlap for r in ok])
        g_mean, g_std = _mean_std([r.gen_error for r in ok])
        e_mean, e_std = _mean_std([r.excess_risk for r in ok])
        rows.append(AggregateRow(method=method, L=L, n=n, count=len(ok),
                                 failures=len(recs) - len(ok),
                                 overlap_mean=o_mean, overlap_std=o_std,
                                 gen_error_mean=g_mean, gen_error_std=g_std,
                                 excess_risk_mean=e_mean, excess_risk_std=e_std))
    return rows


def run_sweep(config: ExperimentConfig, threads: int | None = None
              ) -> tuple[list[TrialRecord], list[AggregateRow]]:
    """Execute trials x points x methods; results do not depend on the worker
    count (records are merged under a deterministic sort key)."""
    workers = config.threads if threads is None else threads
    tasks = [(config, method, point, t)
             for method in config.methods
             for point in config.points()
             for t in range(config.trials)]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_task, tasks, chunksize=1))
    else:
        records = [_run_task(t) for t in tasks]
    records.sort(key=lambda r: (r.method, r.L, r.n, r.trial))
    return records, aggregate(records)


def write_csv(records: list[TrialRecord], path) -> None:
    with open(path, "w") as fh:
        fh.write(CSV_HEADER + "\n")
        for rec in records:
            fh.write(rec.csv_row() + "\n")


def write_aggregates(rows: list[AggregateRow], path) -> None:
    with open(path, "w") as fh:
        fh.write(AGG_COMMENT + "\n")
        fh.write(AGG_HEADER + "\n")
        for row in rows:
            fh.write(row.csv_row() + "\n")


# ---------------------------------------------------------------------------
# config files: flat "key = value" lines, '#' comments, comma-separated lists
# ---------------------------------------------------------------------------

KNOWN_KEYS = ("p", "k", "L", "n", "alpha", "beta", "gamma", "c1", "c2", "lambda",
              "seed", "methods", "trials", "Gamma", "beta_tilde", "sweep_axis",
              "sweep_values", "out", "f32", "threads")

_EXCLUSIVE_GROUPS = (("k", "alpha"), ("L", "beta"), ("n", "gamma"))

DEFAULTS = {
    "p": 100000, "alpha": 0.4, "L": 200, "n": 1000, "lambda": 3.0,
    "c1": 1.0, "c2": 1.0, "seed": 1729, "trials": 50, "Gamma": 0.8,
    "beta_tilde": "auto", "f32": False, "threads": 1,
    "methods": ("lspca", "ls2pca", "top_k_labeled", "self_train",
                "ul_diag_threshold_pca", "vanilla_pca"),
}


def parse_config_text(text: str, source: str = "<config>") -> dict:
    """Parse the flat key=value format into a string-valued dict."""
    out: dict = {}
    unknown = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        if key not in KNOWN_KEYS:
            unknown.append(f"{key} (line {lineno})")
            continue
        if key in out:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        out[key] = value
    if unknown:
        raise ConfigError(f"{source}: unknown keys: {', '.join(unknown)}")
    return out


def _parse_int(key: str, value) -> int:
    try:
        return int(str(value).strip())
    except ValueError:
        raise ConfigError(f"key {key!r}: expected an integer, got {value!r}") from None


def _parse_float(key: str, value) -> float:
    try:
        return float(str(value).strip())
    except ValueError:
        raise ConfigError(f"key {key!r}: expected a number, got {value!r}") from None


def _parse_bool(key: str, value) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ("true", "1", "yes"):
        return True
    if text in ("false", "0", "no"):
        return False
    raise ConfigError(f"key {key!r}: expected true/false, got {value!r}")


def _parse_list(value) -> list[str]:
    if isinstance(value, (list, tuple)):
        return [str(v) for v in value]
    return [part.strip() for part in str(value).split(",") if part.strip()]


def config_from_dict(raw: dict) -> ExperimentConfig:
    """Resolve a (string-valued or typed) key mapping into an ExperimentConfig.

    Raw counts and exponent forms are mutually exclusive per parameter group
    (k|alpha, L|beta, n|gamma); groups can mix forms with each other.
    """
    for a, b in _EXCLUSIVE_GROUPS:
        if a in raw and b in raw:
            raise ConfigError(f"keys {a!r} and {b!r} are mutually exclusive")
    unknown = [key for key in raw if key not in KNOWN_KEYS]
    if unknown:
        raise ConfigError(f"unknown keys: {', '.join(sorted(unknown))}")

    def get(key, parser):
        if key in raw:
            return parser(key, raw[key])
        return DEFAULTS.get(key)

    p = get("p", _parse_int)
    lam = get("lambda", _parse_float)
    seed = get("seed", _parse_int)
    c1 = get("c1", _parse_float)
    c2 = get("c2", _parse_float)
    if "k" in raw:
        k = _parse_int("k", raw["k"])
    else:
        alpha = _parse_float("alpha", raw.get("alpha", DEFAULTS["alpha"]))
        k = k_from_alpha(p, alpha, c1)
    if "beta" in raw:
        L = labeled_count(p, k, _parse_float("beta", raw["beta"]), lam)
    else:
        L = _parse_int("L", raw.get("L", DEFAULTS["L"]))
    if "gamma" in raw:
        n = unlabeled_count(k, _parse_float("gamma", raw["gamma"]), lam, c2)
    else:
        n = _parse_int("n", raw.get("n", DEFAULTS["n"]))
    params = ProblemParams(p=p, k=k, lam=lam, L=L, n=n, seed=seed)

    methods = tuple(_parse_list(raw.get("methods", DEFAULTS["methods"])))
    sweep_axis = str(raw["sweep_axis"]).strip() if "sweep_axis" in raw else None
    sweep_values = tuple(_parse_int("sweep_values", v) for v in _parse_list(raw["sweep_values"])) \
        if "sweep_values" in raw else ()
    beta_tilde = raw.get("beta_tilde", DEFAULTS["beta_tilde"])
    if beta_tilde != "auto":
        beta_tilde = _parse_float("beta_tilde", beta_tilde)
    return ExperimentConfig(
        params=params, methods=methods, trials=get("trials", _parse_int),
        sweep_axis=sweep_axis, sweep_values=sweep_values,
        gamma_threshold=get("Gamma", _parse_float), beta_tilde=beta_tilde,
        out_path=str(raw["out"]).strip() if "out" in raw else None,
        f32=get("f32", _parse_bool), threads=get("threads", _parse_int))


def read_config(path) -> ExperimentConfig:
    with open(path) as fh:
        text = fh.read()
    return config_from_dict(parse_config_text(text, source=str(path)))


def write_config(config: ExperimentConfig, path) -> None:
    """Emit a config file that read_config() round-trips to an equal structure."""
    lines = [
        f"p = {config.params.p}",
        f"k = {config.params.k}",
        f"lambda = {config.params.lam!r}",
        f"L = {config.params.L}",
        f"n = {config.params.n}",
        f"seed = {config.params.seed}",
        "methods = " + ", ".join(config.methods),
        f"trials = {config.trials}",
        f"Gamma = {config.gamma_threshold!r}",
        f"beta_tilde = {config.beta_tilde if config.beta_tilde == 'auto' else repr(float(config.beta_tilde))}",
        f"f32 = {'true' if config.f32 else 'false'}",
        f"threads = {config.threads}",
    ]
    if config.sweep_axis is not None:
        lines.append(f"sweep_axis = {config.sweep_axis}")
        lines.append("sweep_values = " + ", ".join(str(v) for v in config.sweep_values))
    if config.out_path is not None:
        lines.append(f"out = {config.out_path}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
