"""Aggregation layer: exponentially weighted mixing of restarted experts.

A pool spawns one fresh expert per round and mixes the clipped expert
predictions with exponential weights.  Without pruning every expert lives
forever; with binary pruning an expert born at t survives through round
t + 2^k, where 2^k is the lowest set bit of t, which keeps the active set
logarithmic.  Expert losses (and the reported combination) use predictions
clipped to the running output bound so the losses stay bounded without
knowing the noise level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from .core import (
    OutputBound,
    PredictionRecord,
    Subroutine,
    SubroutineFactory,
    clip_to_bound,
    update_output_bound,
)


def ending_time(t: int) -> int:
    """Round through which the expert born at t stays alive: t + lowest set bit."""
    if t < 1:
        raise ValueError("round index must be >= 1")
    return t + (t & -t)


def learning_rate(bound: OutputBound) -> float:
    """Exp-concavity based learning rate 1/(32 Y^2); defaults to 1 when Y = 0.

    Both the outputs and the clipped predictions lie in [-Y, Y], so the loss
    argument range is 2Y and the usual 1/(8 B^2) curvature constant becomes
    1/(8 (2Y)^2).
    """
    y = bound.y_max
    if y <= 0.0:
        return 1.0
    return 1.0 / (32.0 * y * y)


def interval_cover(r: int, s: int) -> List[Tuple[int, int]]:
    """Chained expert lifetimes covering [r, s].

    Starting at r, each segment runs from its birth to that expert's ending
    time, and the next segment starts at the previous ending time.  The
    lowest set bit at least doubles along the chain, so the segment count is
    at most ceil(log2(s - r + 1)) + 1.
    """
    if not 1 <= r <= s:
        raise ValueError("need 1 <= r <= s")
    segments: List[Tuple[int, int]] = []
    t = r
    while True:
        end = ending_time(t)
        segments.append((t, end))
        if end >= s:
            return segments
        t = end


def exp_weight_update(
    weights: np.ndarray, losses: np.ndarray, eta: float
) -> np.ndarray:
    """Multiply weights by exp(-eta * loss) and renormalize.

    Losses are shifted by their minimum before exponentiation; the shift is a
    common factor, so normalized weights are unchanged while underflow on
    large losses is avoided.  If everything still underflows the update
    resets to uniform, preserving the simplex.
    """
    if eta < 0:
        raise ValueError("eta must be non-negative")
    w = np.asarray(weights, dtype=float)
    l = np.asarray(losses, dtype=float)
    shifted = l - l.min()
    w = w * np.exp(-eta * shifted)
    total = float(w.sum())
    if total <= 0.0 or not math.isfinite(total):
        return np.full(w.shape, 1.0 / w.shape[0])
    return w / total


@dataclass
class MetaConfig:
    """Aggregator knobs: learning rate, pruning policy, and the expert factory.

    ``eta`` is a positive float or "auto"; auto recomputes ``learning_rate``
    from the running output bound each round and applies it to that round's
    update only.  ``pruning`` is "none" or "binary".
    """

    subroutine_factory: SubroutineFactory
    eta: Union[float, str] = "auto"
    pruning: str = "binary"

    def __post_init__(self):
        if self.pruning not in ("none", "binary"):
            raise ValueError(f"unknown pruning mode {self.pruning!r}")
        if isinstance(self.eta, str):
            if self.eta != "auto":
                raise ValueError("eta must be a positive float or 'auto'")
        elif self.eta <= 0:
            raise ValueError("eta must be a positive float or 'auto'")


@dataclass
class ExpertSlot:
    """A live expert: birth round, last round it may act, weight, state."""

    birth: int
    end: float  # inf when pruning is off
    weight: float
    sub: Subroutine


class ExpertPool:
    """Ordered pool of expert slots driving one stream.

    Per round: ``spawn_and_normalize`` drops dead slots and inserts the fresh
    expert with weight share 1/t; ``meta_predict`` mixes clipped expert
    predictions; ``meta_update`` applies the exponential-weight step and fans
    the observation out to every live subroutine.  ``step`` wires the three
    together.  A pool is exclusively owned by one driver; the per-expert work
    inside a round carries no shared mutable state.
    """

    def __init__(self, config: MetaConfig):
        self.config = config
        self.slots: Dict[int, ExpertSlot] = {}
        self.round = 0
        self.bound = OutputBound()
        self._pending: Optional[Dict[int, float]] = None

    @property
    def n_active(self) -> int:
        return len(self.slots)

    def weights(self) -> Dict[int, float]:
        return {b: s.weight for b, s in self.slots.items()}

    def spawn_and_normalize(self, t: int) -> "ExpertPool":
        """Advance the pool to round t: prune, insert the newborn, renormalize."""
        if t != self.round + 1:
            raise ValueError(f"pool is at round {self.round}, cannot spawn at {t}")
        for birth in [b for b, s in self.slots.items() if s.end < t]:
            del self.slots[birth]
        end = float(ending_time(t)) if self.config.pruning == "binary" else math.inf
        fresh = ExpertSlot(
            birth=t, end=end, weight=1.0, sub=self.config.subroutine_factory(t)
        )
        survivors = list(self.slots.values())
        if not survivors:
            fresh.weight = 1.0
        else:
            carried = sum(s.weight for s in survivors)
            share = 1.0 - 1.0 / t
            for s in survivors:
                s.weight = share * (s.weight / carried)
            fresh.weight = 1.0 / t
        self.slots[t] = fresh
        self.round = t
        return self

    def meta_predict(self, x: np.ndarray) -> Tuple[float, Dict[int, float]]:
        """Weighted combination of clipped expert predictions for round ``round``."""
        preds: Dict[int, float] = {}
        y_hat = 0.0
        for birth, slot in self.slots.items():
            clipped = clip_to_bound(slot.sub.predict(x), self.bound)
            preds[birth] = clipped
            y_hat += slot.weight * clipped
        self._pending = preds
        return y_hat, preds

    def meta_update(
        self,
        x: np.ndarray,
        y: float,
        eta: Optional[float] = None,
        preds: Optional[Dict[int, float]] = None,
    ) -> "ExpertPool":
        """Exponential-weight step against y, then fan the observation out."""
        if preds is None:
            preds = self._pending
        if preds is None:
            raise ValueError("meta_update requires this round's meta_predict output")
        update_output_bound(self.bound, y)
        if eta is None:
            eta = (
                learning_rate(self.bound)
                if self.config.eta == "auto"
                else float(self.config.eta)
            )
        births = list(self.slots.keys())
        losses = np.array([(y - preds[b]) ** 2 for b in births])
        weights = np.array([self.slots[b].weight for b in births])
        new_weights = exp_weight_update(weights, losses, eta)
        for b, w in zip(births, new_weights):
            self.slots[b].weight = float(w)
        for slot in self.slots.values():
            slot.sub.observe(x, y)
        self._pending = None
        return self

    def step(self, x: np.ndarray, y: float) -> PredictionRecord:
        """Run one full round and report the prediction with expert detail."""
        t = self.round + 1
        self.spawn_and_normalize(t)
        y_hat, preds = self.meta_predict(x)
        self.meta_update(x, y, preds=preds)
        per_expert = {b: (preds[b], self.slots[b].weight) for b in self.slots}
        return PredictionRecord(
            t=t, y_hat=y_hat, per_expert=per_expert, loss_obs=(y_hat - y) ** 2
        )
