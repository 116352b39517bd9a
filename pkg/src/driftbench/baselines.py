"""Comparators and analysis oracles.

The restart oracle cannot be run online (it reads the true parameter path),
but it anchors the error analysis: a greedy left-to-right partition keeps
each segment's internal variation under a per-segment budget, and the oracle
predicts with within-segment averages.  The practical comparator is gradient
descent restarted on a fixed schedule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .datagen import ParameterPath, Stream
from .subroutines import Ogd

ORACLE_MODES = ("scalar", "linear", "kernel")


@dataclass
class RestartPartition:
    """Segment boundaries 1 = t_1 < ... < t_{k+1} = n+1 and the TV budget."""

    boundaries: List[int]
    budget: float

    @property
    def n_segments(self) -> int:
        return len(self.boundaries) - 1

    def segments(self) -> List[Tuple[int, int]]:
        """(start, end_exclusive) pairs in round indices."""
        return list(zip(self.boundaries[:-1], self.boundaries[1:]))


def greedy_restart_partition(
    path: ParameterPath, m: int, norm: str = "l1"
) -> RestartPartition:
    """Left-to-right segmentation with per-segment variation at most TV/m.

    A segment is extended while its internal variation stays within budget
    and closed otherwise, so each closed segment plus its bridging jump
    consumes more than one budget unit; at most m+1 segments result.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    thetas = path.thetas
    n = thetas.shape[0]
    budget = path.tv(norm) / m
    steps = np.diff(thetas, axis=0)
    if norm == "l1":
        step_sizes = np.abs(steps).sum(axis=1)
    elif norm == "l2":
        step_sizes = np.linalg.norm(steps, axis=1)
    else:
        raise ValueError(f"unknown norm {norm!r}")
    boundaries = [1]
    acc = 0.0
    for t in range(2, n + 1):
        acc += float(step_sizes[t - 2])
        if acc > budget + 1e-12:
            boundaries.append(t)
            acc = 0.0
    boundaries.append(n + 1)
    return RestartPartition(boundaries=boundaries, budget=budget)


def optimal_num_batches(n: int, c_n: float, sigma: float) -> int:
    """Restart count (n C^2 / (sigma^2 (2 + ln n)))^(1/3), floored at 1."""
    if n < 1 or c_n <= 0 or sigma <= 0:
        raise ValueError("need n >= 1, c_n > 0, sigma > 0")
    m = (n * c_n * c_n / (sigma * sigma * (2.0 + math.log(n)))) ** (1.0 / 3.0)
    return max(1, round(m))


def fixed_restart_batch_size(n: int, sigma: float, tv: float) -> int:
    """Batch length ceil(sqrt(n ln n) / (sigma tv)) for scheduled restarts."""
    if n < 1 or sigma <= 0 or tv <= 0:
        raise ValueError("need n >= 1, sigma > 0, tv > 0")
    if n == 1:
        return 1
    return max(1, math.ceil(math.sqrt(n * math.log(n)) / (sigma * tv)))


def oracle_forecast(
    stream: Stream,
    partition: RestartPartition,
    mode: str,
) -> np.ndarray:
    """Per-round oracle predictions under a restart partition.

    scalar: running mean of observed outputs within the current segment,
    0 at each segment start.  linear: x_t . mean of the true parameters over
    the segment.  kernel: same averaging in function space via the stream's
    anchor dictionary.  The last two modes require generated truth.
    """
    if mode not in ORACLE_MODES:
        raise ValueError(f"unknown oracle mode {mode!r}")
    n = stream.n
    preds = np.zeros(n)
    if mode == "scalar":
        for start, end in partition.segments():
            acc = 0.0
            for t in range(start, min(end, n + 1)):
                preds[t - 1] = acc / (t - start) if t > start else 0.0
                acc += float(stream.ys[t - 1])
        return preds
    if mode == "linear":
        if stream.path is None:
            raise ValueError("linear oracle mode requires a stream with truth")
        thetas = stream.path.thetas
        for start, end in partition.segments():
            seg_mean = thetas[start - 1 : min(end, n + 1) - 1].mean(axis=0)
            sl = slice(start - 1, min(end, n + 1) - 1)
            preds[sl] = stream.xs[sl] @ seg_mean
        return preds
    if stream.dictionary is None:
        raise ValueError("kernel oracle mode requires a dictionary-truth stream")
    truth = stream.dictionary
    k_mat = truth.kernel.pairwise(stream.xs, truth.anchors)
    for start, end in partition.segments():
        sl = slice(start - 1, min(end, n + 1) - 1)
        seg_mean = truth.coeffs.thetas[sl].mean(axis=0)
        preds[sl] = k_mat[sl] @ seg_mean
    return preds


def fixed_restart_ogd_run(
    stream: Stream,
    batch: int,
    radius: Optional[float] = None,
    grad_bound: float = 1.0,
) -> np.ndarray:
    """Projected gradient descent reset to fresh every ``batch`` rounds.

    Predictions are x.theta before each observe; restarts fire at rounds
    1, 1+batch, 1+2*batch, ...
    """
    if batch < 1:
        raise ValueError("batch must be >= 1")
    if radius is None:
        radius = 2.0 * math.sqrt(stream.d)
    preds = np.zeros(stream.n)
    state: Optional[Ogd] = None
    for t in range(1, stream.n + 1):
        if (t - 1) % batch == 0:
            state = Ogd(stream.d, radius, grad_bound)
        x = stream.xs[t - 1]
        preds[t - 1] = state.predict(x)
        state.observe(x, float(stream.ys[t - 1]))
    return preds
