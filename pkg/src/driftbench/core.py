"""Shared domain types, the subroutine contract, and loss/bound plumbing.

Everything downstream (subroutines, aggregation, baselines, harness) builds
on the small vocabulary defined here: a stream observation, the behavioral
contract every online learner has to satisfy, and the running output bound
used to keep exponential-weight losses bounded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Protocol, Tuple, runtime_checkable

import numpy as np


@runtime_checkable
class Subroutine(Protocol):
    """Behavioral contract for a restartable online learner.

    ``predict`` must not mutate state; ``observe`` is the state transition.
    An instance only ever sees data from its birth round on, and must be
    deterministic given that history.  Instances are independently owned, so
    distinct instances may run on distinct threads.
    """

    def predict(self, x: np.ndarray) -> float: ...

    def observe(self, x: np.ndarray, y: float) -> None: ...


# A factory receives the birth round and returns a fresh instance that has
# seen no data.  The birth round is bookkeeping only; freshness is what
# guarantees the instance ignores everything before it.
SubroutineFactory = Callable[[int], Subroutine]


@dataclass
class Observation:
    """One round of a stream.

    ``y_true`` is the noiseless output and is present iff the stream came
    from a generator.  It exists for evaluation only: subroutines and the
    aggregation layer never receive it.
    """

    t: int
    x: np.ndarray
    y: float
    y_true: Optional[float] = None


@dataclass
class PredictionRecord:
    """Per-round output of the aggregation layer.

    ``per_expert`` maps expert birth round to (clipped prediction,
    post-update normalized weight); the weights sum to 1 within 1e-12.
    ``err_true`` is filled in by the harness when the truth is known.
    """

    t: int
    y_hat: float
    per_expert: Dict[int, Tuple[float, float]] = field(default_factory=dict)
    loss_obs: float = 0.0
    err_true: Optional[float] = None


class OutputBound:
    """Running maximum of |y| seen so far; non-decreasing over rounds."""

    __slots__ = ("y_max",)

    def __init__(self, y_max: float = 0.0):
        if y_max < 0:
            raise ValueError("output bound must be non-negative")
        self.y_max = float(y_max)

    def __repr__(self):
        return f"OutputBound({self.y_max!r})"


def square_loss(y_hat: float, y: float) -> float:
    """Squared prediction error (y_hat - y)**2; rejects non-finite inputs."""
    if not (math.isfinite(y_hat) and math.isfinite(y)):
        raise ValueError(f"square_loss requires finite inputs, got ({y_hat}, {y})")
    d = y_hat - y
    return d * d


def clip_to_bound(y_hat: float, bound: "OutputBound | float") -> float:
    """Clamp a prediction to [-Y, Y] where Y is the running max |y| seen.

    Keeps losses fed to the exponential-weights update bounded so a fixed
    learning rate stays valid without knowing the noise level.
    """
    y_max = bound.y_max if isinstance(bound, OutputBound) else float(bound)
    if y_hat > y_max:
        return y_max
    if y_hat < -y_max:
        return -y_max
    return float(y_hat)


def update_output_bound(bound: OutputBound, y: float) -> OutputBound:
    """Fold one observed output into the running bound (Y' = max(Y, |y|))."""
    if not math.isfinite(y):
        raise ValueError("observed output must be finite")
    bound.y_max = max(bound.y_max, abs(float(y)))
    return bound
