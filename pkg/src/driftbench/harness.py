"""Experiment orchestration: configs, runs, metrics, and CSV persistence.

Runs a grid of algorithms over repeated seeded streams, records per-round
predictions and cumulative true error next to the reference bound curve, and
persists everything as CSV plus a fully resolved config echo.  Run r of every
algorithm sees the same stream (paired comparisons), and per-run sub-seeds
split off the master seed so results never depend on scheduling.
"""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import baselines, datagen, kernel as kernelmod, subroutines
from .datagen import ShiftSpec, Stream, StreamSpec
from .meta import ExpertPool, MetaConfig

META_KINDS = ("flh", "iflh")
ALGORITHM_KINDS = META_KINDS + ("single", "fixed-restart-ogd", "oracle")
SUBROUTINE_KINDS = ("ma", "ogd", "ons", "awv", "kernel-awv")

ETA_AUTO_FORMULA = "1/(32*Y**2) recomputed each round from the running max |y|"
LOG_BASES = {
    "batch_formulas": "natural",
    "expert_lifetimes": 2,
    "cover_counts": 2,
}


class ConfigError(ValueError):
    """Invalid experiment configuration (CLI exit code 2)."""


def _default_radius(d: int) -> float:
    return 2.0 * math.sqrt(d)


@dataclass
class AlgorithmSpec:
    """One algorithm entry: a meta-aggregator, a bare subroutine, or a baseline."""

    id: str
    kind: str
    subroutine: Optional[Dict[str, Any]] = None
    batch: Any = "auto"  # fixed-restart-ogd
    radius: Optional[float] = None
    mode: str = "scalar"  # oracle
    m: Any = "auto"  # oracle
    norm: Optional[str] = None  # oracle partition norm

    def __post_init__(self):
        if self.kind not in ALGORITHM_KINDS:
            raise ConfigError(f"unknown algorithm kind {self.kind!r}")
        if self.kind in META_KINDS + ("single",):
            if not self.subroutine or "kind" not in self.subroutine:
                raise ConfigError(f"algorithm {self.id!r} needs a subroutine kind")
            if self.subroutine["kind"] not in SUBROUTINE_KINDS:
                raise ConfigError(
                    f"unknown subroutine kind {self.subroutine['kind']!r}"
                )
        if self.kind == "oracle" and self.mode not in baselines.ORACLE_MODES:
            raise ConfigError(f"unknown oracle mode {self.mode!r}")


@dataclass
class ExperimentConfig:
    """Data family x algorithm grid plus run/seed/output knobs."""

    n: int
    d: int
    sigma: float
    shift: ShiftSpec
    algorithms: List[AlgorithmSpec]
    input_mode: str = "uniform-cube"
    truth: str = "linear"  # or "dictionary"
    n_anchors: int = 8
    kernel: Optional[kernelmod.KernelFunction] = None
    norm_bound: float = 1.0
    runs: int = 1
    eta: Any = "auto"
    seed: int = 0
    bound_constant: float = 1.0
    out_dir: Optional[str] = None

    def __post_init__(self):
        if self.runs < 1:
            raise ConfigError("runs must be >= 1")
        ids = [a.id for a in self.algorithms]
        if len(set(ids)) != len(ids):
            raise ConfigError("algorithm ids must be unique within a config")
        if self.input_mode == "constant-one" and self.d != 1:
            raise ConfigError("constant-one inputs force d = 1")
        if self.truth not in ("linear", "dictionary"):
            raise ConfigError(f"unknown truth kind {self.truth!r}")
        if self.truth == "dictionary" and self.kernel is None:
            raise ConfigError("dictionary truth needs a kernel")
        for algo in self.algorithms:
            sub = algo.subroutine or {}
            if sub.get("kind") == "kernel-awv" and self.input_mode == "constant-one":
                raise ConfigError(
                    "kernel subroutines need vector inputs, not constant-one"
                )
        if isinstance(self.eta, str):
            if self.eta != "auto":
                raise ConfigError("eta must be a positive float or 'auto'")
        elif self.eta <= 0:
            raise ConfigError("eta must be a positive float or 'auto'")


@dataclass
class RunResult:
    """Per-(algorithm, run) round-level outputs."""

    algorithm: str
    run: int
    seed: int
    y_hat: np.ndarray
    inst_err: np.ndarray
    cum_err: np.ndarray
    bound: np.ndarray
    n_active: np.ndarray
    resolved: Dict[str, Any] = field(default_factory=dict)


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    runs: List[RunResult]
    summary: List[Dict[str, Any]]
    streams: List[Stream]
    run_details: List[Dict[str, Any]]


def cumulative_true_error(preds: Sequence[float], truths: Sequence[float]) -> np.ndarray:
    """Partial sums of squared prediction error against the truth."""
    preds = np.asarray(preds, dtype=float)
    truths = np.asarray(truths, dtype=float)
    if preds.shape != truths.shape:
        raise ValueError(
            f"length mismatch: {preds.shape[0]} predictions vs {truths.shape[0]} truths"
        )
    return np.cumsum((preds - truths) ** 2)


def bound_curve(t, d: int, tv: float, constant: float = 1.0):
    """Reference rate d^(1/3) t^(1/3) tv^(2/3), scaled by an optional constant."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 1) or d < 1 or tv < 0:
        raise ValueError("need t >= 1, d >= 1, tv >= 0")
    vals = constant * d ** (1.0 / 3.0) * t_arr ** (1.0 / 3.0) * tv ** (2.0 / 3.0)
    return float(vals) if np.isscalar(t) else vals


def _run_seed(master: int, run: int) -> int:
    """64-bit sub-seed for one run, split off the master seed."""
    return int(np.random.SeedSequence(master, spawn_key=(run,)).generate_state(1)[0])


def make_stream(config: ExperimentConfig, run: int) -> Stream:
    """Generate the shared stream for one run index."""
    seed = _run_seed(config.seed, run)
    spec = StreamSpec(
        n=config.n,
        d=config.d,
        sigma=config.sigma,
        input_mode=config.input_mode,
        seed=seed,
    )
    if config.truth == "dictionary":
        anchors = datagen.random_anchors(config.n_anchors, config.d, config.seed)
        truth = datagen.gen_dictionary_truth(
            config.n,
            anchors,
            config.kernel,
            config.shift.starts,
            seed,
            norm_bound=config.norm_bound,
        )
        return datagen.gen_dictionary_stream(truth, spec)
    if config.shift.kind == "soft":
        path = datagen.gen_soft_shifts(config.n, config.d, config.shift.alpha, seed)
    else:
        path = datagen.gen_hard_shifts(config.n, config.d, config.shift.starts, seed)
    return datagen.gen_stream(path, spec)


def _build_subroutine_factory(
    sub_cfg: Dict[str, Any], d: int
) -> Tuple[Any, Dict[str, Any]]:
    kind = sub_cfg["kind"]
    if kind == "ma":
        return subroutines.moving_average_factory(), {"kind": "ma"}
    if kind == "ogd":
        radius = float(sub_cfg.get("radius") or _default_radius(d))
        grad_bound = float(sub_cfg.get("grad_bound", 1.0))
        return (
            subroutines.ogd_factory(d, radius, grad_bound),
            {"kind": "ogd", "radius": radius, "grad_bound": grad_bound},
        )
    if kind == "ons":
        radius = float(sub_cfg.get("radius") or _default_radius(d))
        gamma = sub_cfg.get("gamma")
        epsilon = sub_cfg.get("epsilon")
        return (
            subroutines.ons_factory(d, radius, gamma, epsilon),
            {"kind": "ons", "radius": radius, "gamma": gamma or "auto",
             "epsilon": epsilon or "auto"},
        )
    if kind == "awv":
        lam = float(sub_cfg.get("lam", 1.0))
        return subroutines.awv_factory(d, lam), {"kind": "awv", "lam": lam}
    if kind == "kernel-awv":
        kern = _parse_kernel(sub_cfg.get("kernel", {"kind": "linear"}))
        lam = float(sub_cfg.get("lam", 1.0))
        return (
            kernelmod.kernel_awv_factory(kern, lam),
            {"kind": "kernel-awv", "kernel": _kernel_echo(kern), "lam": lam},
        )
    raise ConfigError(f"unknown subroutine kind {kind!r}")


def _parse_kernel(cfg: Dict[str, Any]) -> kernelmod.KernelFunction:
    kind = cfg.get("kind", "linear")
    try:
        if kind == "linear":
            return kernelmod.linear_kernel()
        if kind == "gaussian":
            return kernelmod.gaussian_kernel(float(cfg.get("bandwidth", 1.0)))
        if kind == "polynomial":
            return kernelmod.polynomial_kernel(
                int(cfg.get("degree", 2)), float(cfg.get("offset", 0.0))
            )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    raise ConfigError(f"unknown kernel kind {kind!r}")


def _kernel_echo(kern: kernelmod.KernelFunction) -> Dict[str, Any]:
    out: Dict[str, Any] = {"kind": kern.kind}
    if kern.kind == "gaussian":
        out["bandwidth"] = kern.bandwidth
    if kern.kind == "polynomial":
        out["degree"] = kern.degree
        out["offset"] = kern.offset
    return out


def _run_algorithm(
    algo: AlgorithmSpec, stream: Stream, config: ExperimentConfig
) -> Tuple[np.ndarray, np.ndarray, Dict[str, Any]]:
    """Drive one algorithm over one stream; returns (preds, n_active, resolved)."""
    n = stream.n
    if algo.kind in META_KINDS:
        factory, resolved = _build_subroutine_factory(algo.subroutine, stream.d)
        pruning = "binary" if algo.kind == "iflh" else "none"
        pool = ExpertPool(
            MetaConfig(subroutine_factory=factory, eta=config.eta, pruning=pruning)
        )
        preds = np.zeros(n)
        n_active = np.zeros(n, dtype=int)
        for t in range(1, n + 1):
            rec = pool.step(stream.xs[t - 1], float(stream.ys[t - 1]))
            preds[t - 1] = rec.y_hat
            n_active[t - 1] = pool.n_active
        resolved["eta"] = config.eta
        return preds, n_active, resolved
    if algo.kind == "single":
        factory, resolved = _build_subroutine_factory(algo.subroutine, stream.d)
        sub = factory(1)
        preds = np.zeros(n)
        for t in range(1, n + 1):
            x = stream.xs[t - 1]
            preds[t - 1] = sub.predict(x)
            sub.observe(x, float(stream.ys[t - 1]))
        return preds, np.ones(n, dtype=int), resolved
    if algo.kind == "fixed-restart-ogd":
        if algo.batch == "auto":
            tv = stream.path.tv_l1 if stream.path is not None else 0.0
            if tv <= 0 or stream.sigma <= 0:
                batch = n
            else:
                batch = baselines.fixed_restart_batch_size(n, stream.sigma, tv)
        else:
            batch = int(algo.batch)
        radius = algo.radius or _default_radius(stream.d)
        preds = baselines.fixed_restart_ogd_run(stream, batch, radius)
        return preds, np.ones(n, dtype=int), {"batch": batch, "radius": radius}
    if algo.kind == "oracle":
        if stream.path is None:
            raise ConfigError("oracle baselines require generated streams")
        norm = algo.norm or ("l2" if algo.mode == "kernel" else "l1")
        if algo.m == "auto":
            tv = stream.path.tv(norm)
            m = baselines.optimal_num_batches(n, tv, stream.sigma) if tv > 0 else 1
        else:
            m = int(algo.m)
        partition = baselines.greedy_restart_partition(stream.path, m, norm)
        preds = baselines.oracle_forecast(stream, partition, algo.mode)
        return (
            preds,
            np.ones(n, dtype=int),
            {"m": m, "norm": norm, "segments": partition.n_segments},
        )
    raise ConfigError(f"unknown algorithm kind {algo.kind!r}")


def _n_workers() -> int:
    env = os.environ.get("DRIFTBENCH_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ConfigError(f"DRIFTBENCH_THREADS must be an integer, got {env!r}") from exc
    return min(8, os.cpu_count() or 1)


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Execute every (algorithm, run) pair and summarize across runs.

    Work may fan out over a thread pool (capped by DRIFTBENCH_THREADS); each
    pair owns its pool and stream exclusively and results are merged in
    config order, so the output is independent of scheduling.
    """
    streams = [make_stream(config, r) for r in range(config.runs)]
    t_axis = np.arange(1, config.n + 1)
    jobs = [(ai, r) for ai in range(len(config.algorithms)) for r in range(config.runs)]

    def _one(job: Tuple[int, int]) -> RunResult:
        ai, r = job
        algo = config.algorithms[ai]
        stream = streams[r]
        preds, n_active, resolved = _run_algorithm(algo, stream, config)
        inst = (preds - stream.y_true) ** 2
        tv = stream.path.tv_l1 if stream.path is not None else 0.0
        bound = bound_curve(t_axis, stream.d, tv, config.bound_constant)
        return RunResult(
            algorithm=algo.id,
            run=r,
            seed=_run_seed(config.seed, r),
            y_hat=preds,
            inst_err=inst,
            cum_err=np.cumsum(inst),
            bound=bound,
            n_active=n_active,
            resolved=resolved,
        )

    workers = _n_workers()
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_one, jobs))
    else:
        results = [_one(job) for job in jobs]

    summary: List[Dict[str, Any]] = []
    for ai, algo in enumerate(config.algorithms):
        block = results[ai * config.runs : (ai + 1) * config.runs]
        cum = np.stack([rr.cum_err for rr in block])
        bnd = np.stack([rr.bound for rr in block])
        mean = cum.mean(axis=0)
        std = cum.std(axis=0, ddof=1) if config.runs > 1 else np.zeros(config.n)
        summary.append(
            {
                "algorithm": algo.id,
                "t": t_axis,
                "mean_cum_err": mean,
                "std_cum_err": std,
                "bound": bnd.mean(axis=0),
            }
        )

    run_details = []
    for r, stream in enumerate(streams):
        detail: Dict[str, Any] = {
            "run": r,
            "seed": _run_seed(config.seed, r),
            "spawn_key": [r],
        }
        if stream.path is not None:
            detail["tv_l1"] = stream.path.tv_l1
            detail["tv_l2"] = stream.path.tv_l2
        detail["resolved"] = {
            rr.algorithm: rr.resolved for rr in results if rr.run == r
        }
        run_details.append(detail)

    return ExperimentResult(
        config=config,
        runs=results,
        summary=summary,
        streams=streams,
        run_details=run_details,
    )


def config_echo(result: ExperimentResult) -> Dict[str, Any]:
    """Fully resolved configuration, including defaults and per-run seeds."""
    config = result.config
    algos = []
    for algo, rr in zip(config.algorithms, result.runs[:: max(1, config.runs)]):
        algos.append(
            {
                "id": algo.id,
                "kind": algo.kind,
                "resolved": rr.resolved,
            }
        )
    shift: Dict[str, Any] = {"kind": config.shift.kind}
    if config.shift.kind == "soft":
        shift["alpha"] = config.shift.alpha
    else:
        shift["starts"] = datagen.normalize_starts(config.shift.starts, config.n)
    echo: Dict[str, Any] = {
        "n": config.n,
        "d": config.d,
        "sigma": config.sigma,
        "input_mode": config.input_mode,
        "shift": shift,
        "truth": config.truth,
        "runs": config.runs,
        "master_seed": config.seed,
        "eta": config.eta,
        "bound_constant": config.bound_constant,
        "log_bases": LOG_BASES,
        "algorithms": algos,
        "run_details": result.run_details,
    }
    if config.eta == "auto":
        echo["eta_formula"] = ETA_AUTO_FORMULA
    if config.truth == "dictionary":
        echo["n_anchors"] = config.n_anchors
        echo["kernel"] = _kernel_echo(config.kernel)
        echo["norm_bound"] = config.norm_bound
    return echo


RESULT_COLUMNS = [
    "algorithm",
    "run",
    "seed",
    "t",
    "y_hat",
    "inst_err",
    "cum_err",
    "bound",
    "n_active",
]
SUMMARY_COLUMNS = ["algorithm", "t", "mean_cum_err", "std_cum_err", "bound"]


def write_results(result: ExperimentResult, out_dir: str) -> List[str]:
    """Persist results.csv, summary.csv, config.json, and the run-0 stream.

    Floats are written with repr so parsing reproduces them exactly; files
    are UTF-8 with LF line endings.  Returns the written paths.
    """
    try:
        os.makedirs(out_dir, exist_ok=True)
        results_path = os.path.join(out_dir, "results.csv")
        with open(results_path, "w", encoding="utf-8", newline="\n") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(RESULT_COLUMNS)
            for rr in result.runs:
                for t in range(rr.y_hat.shape[0]):
                    writer.writerow(
                        [
                            rr.algorithm,
                            rr.run,
                            rr.seed,
                            t + 1,
                            repr(float(rr.y_hat[t])),
                            repr(float(rr.inst_err[t])),
                            repr(float(rr.cum_err[t])),
                            repr(float(rr.bound[t])),
                            int(rr.n_active[t]),
                        ]
                    )
        summary_path = os.path.join(out_dir, "summary.csv")
        with open(summary_path, "w", encoding="utf-8", newline="\n") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(SUMMARY_COLUMNS)
            for row in result.summary:
                for idx, t in enumerate(row["t"]):
                    writer.writerow(
                        [
                            row["algorithm"],
                            int(t),
                            repr(float(row["mean_cum_err"][idx])),
                            repr(float(row["std_cum_err"][idx])),
                            repr(float(row["bound"][idx])),
                        ]
                    )
        config_path = os.path.join(out_dir, "config.json")
        with open(config_path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(config_echo(result), fh, indent=2, sort_keys=True)
            fh.write("\n")
        written = [results_path, summary_path, config_path]
        if result.streams:
            stream_path = os.path.join(out_dir, "stream_run0.csv")
            datagen.write_stream_csv(result.streams[0], stream_path)
            written.append(stream_path)
        return written
    except OSError as exc:
        raise OSError(f"failed writing results under {out_dir!r}: {exc}") from exc


def read_results_csv(path: str) -> List[Dict[str, Any]]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        rows = []
        for row in reader:
            rows.append(
                {
                    "algorithm": row["algorithm"],
                    "run": int(row["run"]),
                    "seed": int(row["seed"]),
                    "t": int(row["t"]),
                    "y_hat": float(row["y_hat"]),
                    "inst_err": float(row["inst_err"]),
                    "cum_err": float(row["cum_err"]),
                    "bound": float(row["bound"]),
                    "n_active": int(row["n_active"]),
                }
            )
    return rows


def read_summary_csv(path: str) -> List[Dict[str, Any]]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        rows = []
        for row in reader:
            rows.append(
                {
                    "algorithm": row["algorithm"],
                    "t": int(row["t"]),
                    "mean_cum_err": float(row["mean_cum_err"]),
                    "std_cum_err": float(row["std_cum_err"]),
                    "bound": float(row["bound"]),
                }
            )
    return rows


def parse_experiment_config(raw: Dict[str, Any]) -> ExperimentConfig:
    """Build a validated ExperimentConfig from a plain JSON-style dict."""
    try:
        shift_raw = raw["shift"]
        shift = ShiftSpec(
            kind=shift_raw["kind"],
            alpha=float(shift_raw.get("alpha", 0.3)),
            starts=tuple(shift_raw.get("starts", ())),
        )
        algorithms = [
            AlgorithmSpec(
                id=a["id"],
                kind=a["kind"],
                subroutine=a.get("subroutine"),
                batch=a.get("batch", "auto"),
                radius=a.get("radius"),
                mode=a.get("mode", "scalar"),
                m=a.get("m", "auto"),
                norm=a.get("norm"),
            )
            for a in raw["algorithms"]
        ]
        kern = _parse_kernel(raw["kernel"]) if "kernel" in raw else None
        return ExperimentConfig(
            n=int(raw["n"]),
            d=int(raw["d"]),
            sigma=float(raw["sigma"]),
            shift=shift,
            algorithms=algorithms,
            input_mode=raw.get("input_mode", "uniform-cube"),
            truth=raw.get("truth", "linear"),
            n_anchors=int(raw.get("n_anchors", 8)),
            kernel=kern,
            norm_bound=float(raw.get("norm_bound", 1.0)),
            runs=int(raw.get("runs", 1)),
            eta=raw.get("eta", "auto"),
            seed=int(raw.get("seed", 0)),
            bound_constant=float(raw.get("bound_constant", 1.0)),
            out_dir=raw.get("out_dir"),
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid experiment config: {exc}") from exc
