"""Synthetic non-stationary streams: drifting parameters, inputs, noise.

Two drift families: a random walk with polynomially decaying innovation
variance (soft shifts) and piecewise-constant sign vectors redrawn at given
change points (hard shifts).  Streams combine a parameter path with inputs
and Gaussian noise; every draw comes from a counter-based splittable RNG so
path innovations, inputs, and noise consume disjoint sub-streams and adding
runs never perturbs earlier draws.

Truth values (``y_true``) ride along for evaluation only.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterator, List, Optional, Sequence, Union

import numpy as np

from .core import Observation
from .kernel import KernelFunction

# Sub-stream labels so each consumer of a seed gets an independent stream.
_PATH_STREAM = 0
_INPUT_STREAM = 1
_NOISE_STREAM = 2
_DICT_STREAM = 3

INPUT_MODES = ("constant-one", "uniform-cube")


def rng_for(seed: int, *key: int) -> np.random.Generator:
    """Philox generator for a (seed, sub-stream key) pair."""
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence(seed, spawn_key=tuple(key)))
    )


@dataclass
class ParameterPath:
    """A ground-truth parameter sequence with its variation budget.

    ``tv_l1``/``tv_l2`` are the definitional sums over the stored path and
    ``b_l1``/``b_l2`` the max per-round norms, all recomputable from
    ``thetas``.
    """

    thetas: np.ndarray  # (n, d)
    tv_l1: float
    tv_l2: float
    b_l1: float
    b_l2: float

    @classmethod
    def from_thetas(cls, thetas: np.ndarray) -> "ParameterPath":
        thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
        diffs = np.diff(thetas, axis=0)
        return cls(
            thetas=thetas,
            tv_l1=float(np.abs(diffs).sum()),
            tv_l2=float(np.linalg.norm(diffs, axis=1).sum()),
            b_l1=float(np.abs(thetas).sum(axis=1).max()),
            b_l2=float(np.linalg.norm(thetas, axis=1).max()),
        )

    @property
    def n(self) -> int:
        return self.thetas.shape[0]

    @property
    def d(self) -> int:
        return self.thetas.shape[1]

    def tv(self, norm: str = "l1") -> float:
        return self.tv_l1 if norm == "l1" else self.tv_l2

    def bound(self, norm: str = "l2") -> float:
        return self.b_l1 if norm == "l1" else self.b_l2


@dataclass(frozen=True)
class ShiftSpec:
    """Drift family: soft(alpha) decaying walk or hard(starts) sign redraws."""

    kind: str
    alpha: float = 0.3
    starts: Sequence[int] = ()

    def __post_init__(self):
        if self.kind not in ("soft", "hard"):
            raise ValueError(f"unknown shift kind {self.kind!r}")
        if self.kind == "soft" and self.alpha <= 0:
            raise ValueError("soft shifts need alpha > 0")


@dataclass(frozen=True)
class StreamSpec:
    """Stream dimensions, noise level, input distribution, and master seed."""

    n: int
    d: int
    sigma: float
    input_mode: str = "uniform-cube"
    seed: int = 0

    def __post_init__(self):
        if self.n < 1 or self.d < 1:
            raise ValueError("need n >= 1 and d >= 1")
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")
        if self.input_mode not in INPUT_MODES:
            raise ValueError(f"unknown input mode {self.input_mode!r}")
        if self.input_mode == "constant-one" and self.d != 1:
            raise ValueError("constant-one inputs force d = 1")


@dataclass
class DictionaryTruth:
    """Drifting function expressed on a fixed dictionary of anchor points.

    The truth at round t is x -> sum_j coeffs[t, j] * k(anchor_j, x).  The
    ``whitened`` path holds the coefficients mapped through the anchor Gram
    square root, so its l2 norms and variation equal the function-space
    (RKHS) norms exactly.
    """

    anchors: np.ndarray  # (J, d)
    kernel: KernelFunction
    coeffs: ParameterPath  # (n, J)
    whitened: ParameterPath

    def evaluate(self, coeff_row: np.ndarray, x: np.ndarray) -> float:
        k_vec = self.kernel.pairwise(self.anchors, np.atleast_2d(x))[:, 0]
        return float(coeff_row @ k_vec)


@dataclass
class Stream:
    """Materialized rounds of one run plus the (firewalled) truth."""

    xs: np.ndarray  # (n, d)
    ys: np.ndarray  # (n,)
    y_true: np.ndarray  # (n,)
    sigma: float
    spec: Optional[StreamSpec] = None
    path: Optional[ParameterPath] = None
    dictionary: Optional[DictionaryTruth] = None

    @property
    def n(self) -> int:
        return self.xs.shape[0]

    @property
    def d(self) -> int:
        return self.xs.shape[1]

    def observations(self) -> Iterator[Observation]:
        for t in range(self.n):
            yield Observation(
                t=t + 1,
                x=self.xs[t],
                y=float(self.ys[t]),
                y_true=float(self.y_true[t]),
            )


def gen_soft_shifts(n: int, d: int, alpha: float, seed: int) -> ParameterPath:
    """Random walk from the origin with innovation variance t^(-alpha)."""
    if n < 1 or alpha <= 0:
        raise ValueError("need n >= 1 and alpha > 0")
    rng = rng_for(seed, _PATH_STREAM)
    thetas = np.zeros((n, d))
    if n > 1:
        steps = np.arange(2, n + 1, dtype=float)
        scales = steps ** (-alpha / 2.0)
        eps = rng.standard_normal((n - 1, d)) * scales[:, None]
        thetas[1:] = np.cumsum(eps, axis=0)
    return ParameterPath.from_thetas(thetas)


def normalize_starts(starts: Sequence[int], n: int) -> List[int]:
    """Sorted unique chunk starts within [1, n], with 1 always present."""
    cleaned = sorted({int(s) for s in starts if 1 <= int(s) <= n})
    if not cleaned or cleaned[0] != 1:
        cleaned = [1] + cleaned
    return cleaned


def gen_hard_shifts(n: int, d: int, starts: Sequence[int], seed: int) -> ParameterPath:
    """Piecewise-constant path; every coordinate is redrawn +-1 at each start."""
    if n < 1:
        raise ValueError("need n >= 1")
    boundaries = normalize_starts(starts, n)
    rng = rng_for(seed, _PATH_STREAM)
    values = rng.integers(0, 2, size=(len(boundaries), d)).astype(float) * 2.0 - 1.0
    thetas = np.empty((n, d))
    edges = boundaries + [n + 1]
    for i in range(len(boundaries)):
        thetas[edges[i] - 1 : edges[i + 1] - 1] = values[i]
    return ParameterPath.from_thetas(thetas)


def total_variation(path: Union[ParameterPath, np.ndarray], norm: str = "l1") -> float:
    """Sum over rounds of the step norm, under l1 or l2."""
    thetas = path.thetas if isinstance(path, ParameterPath) else np.atleast_2d(path)
    if thetas.shape[0] == 0:
        raise ValueError("path must be nonempty")
    if norm not in ("l1", "l2"):
        raise ValueError(f"unknown norm {norm!r}")
    diffs = np.diff(thetas, axis=0)
    if norm == "l1":
        return float(np.abs(diffs).sum())
    return float(np.linalg.norm(diffs, axis=1).sum())


def _draw_inputs(spec: StreamSpec) -> np.ndarray:
    if spec.input_mode == "constant-one":
        return np.ones((spec.n, 1))
    rng = rng_for(spec.seed, _INPUT_STREAM)
    return rng.uniform(-1.0, 1.0, size=(spec.n, spec.d))


def _draw_noise(spec: StreamSpec) -> np.ndarray:
    if spec.sigma == 0.0:
        return np.zeros(spec.n)
    rng = rng_for(spec.seed, _NOISE_STREAM)
    return rng.standard_normal(spec.n) * spec.sigma


def gen_stream(path: ParameterPath, spec: StreamSpec) -> Stream:
    """Observed stream y = x.theta + noise over a linear parameter path."""
    if path.n != spec.n or path.d != spec.d:
        raise ValueError("path shape does not match the stream spec")
    xs = _draw_inputs(spec)
    y_true = np.einsum("td,td->t", xs, path.thetas)
    ys = y_true + _draw_noise(spec)
    return Stream(xs=xs, ys=ys, y_true=y_true, sigma=spec.sigma, spec=spec, path=path)


def gen_dictionary_truth(
    n: int,
    anchors: np.ndarray,
    kernel: KernelFunction,
    starts: Sequence[int],
    seed: int,
    norm_bound: float = 1.0,
) -> DictionaryTruth:
    """Hard-shifted coefficients on a fixed anchor dictionary.

    Coefficients are piecewise-constant sign vectors rescaled so the largest
    function-space norm along the path equals ``norm_bound``.
    """
    anchors = np.atleast_2d(np.asarray(anchors, dtype=float))
    n_anchors = anchors.shape[0]
    raw = gen_hard_shifts(n, n_anchors, starts, seed)
    gram = kernel.pairwise(anchors, anchors)
    evals, evecs = np.linalg.eigh(gram)
    evals = np.maximum(evals, 0.0)
    sqrt_gram = evecs @ np.diag(np.sqrt(evals)) @ evecs.T
    whitened = raw.thetas @ sqrt_gram
    max_norm = float(np.linalg.norm(whitened, axis=1).max())
    scale = norm_bound / max_norm if max_norm > 0 else 1.0
    coeffs = ParameterPath.from_thetas(raw.thetas * scale)
    whitened_path = ParameterPath.from_thetas(whitened * scale)
    return DictionaryTruth(
        anchors=anchors, kernel=kernel, coeffs=coeffs, whitened=whitened_path
    )


def gen_dictionary_stream(truth: DictionaryTruth, spec: StreamSpec) -> Stream:
    """Observed stream over a dictionary truth; y = g_t(x_t) + noise."""
    if truth.coeffs.n != spec.n:
        raise ValueError("truth length does not match the stream spec")
    xs = _draw_inputs(spec)
    k_mat = truth.kernel.pairwise(xs, truth.anchors)  # (n, J)
    y_true = np.einsum("tj,tj->t", k_mat, truth.coeffs.thetas)
    ys = y_true + _draw_noise(spec)
    return Stream(
        xs=xs,
        ys=ys,
        y_true=y_true,
        sigma=spec.sigma,
        spec=spec,
        path=truth.whitened,
        dictionary=truth,
    )


def random_anchors(n_anchors: int, d: int, seed: int) -> np.ndarray:
    """Anchor dictionary drawn once from the unit cube."""
    rng = rng_for(seed, _DICT_STREAM)
    return rng.uniform(-1.0, 1.0, size=(n_anchors, d))


def write_stream_csv(stream: Stream, path: str) -> None:
    """Stream rows as CSV: t, x_1..x_d, y, y_true (header, UTF-8, LF)."""
    header = ["t"] + [f"x_{i + 1}" for i in range(stream.d)] + ["y", "y_true"]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for t in range(stream.n):
            row = (
                [str(t + 1)]
                + [repr(float(v)) for v in stream.xs[t]]
                + [repr(float(stream.ys[t])), repr(float(stream.y_true[t]))]
            )
            writer.writerow(row)


def read_stream_csv(path: str) -> Stream:
    """Inverse of ``write_stream_csv``; the truth path itself is not stored."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        d = len(header) - 3
        xs, ys, y_true = [], [], []
        for row in reader:
            xs.append([float(v) for v in row[1 : 1 + d]])
            ys.append(float(row[1 + d]))
            y_true.append(float(row[2 + d]))
    return Stream(
        xs=np.array(xs).reshape(len(ys), d),
        ys=np.array(ys),
        y_true=np.array(y_true),
        sigma=float("nan"),
    )
