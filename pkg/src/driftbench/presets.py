"""Canned experiment configurations for the benchmark figures.

Each preset maps to one or more panels; a panel is a standalone experiment
written to its own subdirectory.  The one-dimensional panels pair the
moving-average aggregator with the scalar restart oracle and scheduled-
restart gradient descent; the regression panels run the aggregator with
gradient, Newton, and ridge subroutines against the same baseline.
"""

from __future__ import annotations

from typing import Callable, Dict, List, Tuple

from .datagen import ShiftSpec
from .harness import AlgorithmSpec, ExperimentConfig


def _one_dim_algorithms() -> List[AlgorithmSpec]:
    return [
        AlgorithmSpec(id="iflh+ma", kind="iflh", subroutine={"kind": "ma"}),
        AlgorithmSpec(id="fixed-restart-ogd", kind="fixed-restart-ogd"),
        AlgorithmSpec(id="oracle-scalar", kind="oracle", mode="scalar"),
    ]


def _regression_algorithms() -> List[AlgorithmSpec]:
    return [
        AlgorithmSpec(id="iflh+ogd", kind="iflh", subroutine={"kind": "ogd"}),
        AlgorithmSpec(id="iflh+ons", kind="iflh", subroutine={"kind": "ons"}),
        AlgorithmSpec(id="iflh+awv", kind="iflh", subroutine={"kind": "awv"}),
        AlgorithmSpec(id="fixed-restart-ogd", kind="fixed-restart-ogd"),
    ]


def _soft_1d(seed: int, runs: int) -> ExperimentConfig:
    return ExperimentConfig(
        n=1000, d=1, sigma=1.0, input_mode="constant-one",
        shift=ShiftSpec(kind="soft", alpha=0.3),
        algorithms=_one_dim_algorithms(), runs=runs, seed=seed,
    )


def _hard_1d_exp(seed: int, runs: int) -> ExperimentConfig:
    return ExperimentConfig(
        n=1024, d=1, sigma=1.0, input_mode="constant-one",
        shift=ShiftSpec(kind="hard", starts=tuple(2 ** i for i in range(1, 11))),
        algorithms=_one_dim_algorithms(), runs=runs, seed=seed,
    )


def _hard_1d_lin(seed: int, runs: int) -> ExperimentConfig:
    return ExperimentConfig(
        n=1000, d=1, sigma=1.0, input_mode="constant-one",
        shift=ShiftSpec(kind="hard", starts=tuple(100 * i for i in range(1, 11))),
        algorithms=_one_dim_algorithms(), runs=runs, seed=seed,
    )


def _soft_reg(alpha: float, d: int) -> Callable[[int, int], ExperimentConfig]:
    def build(seed: int, runs: int) -> ExperimentConfig:
        return ExperimentConfig(
            n=4096, d=d, sigma=1.0,
            shift=ShiftSpec(kind="soft", alpha=alpha),
            algorithms=_regression_algorithms(), runs=runs, seed=seed,
        )

    return build


def _hard_reg(starts: Tuple[int, ...], d: int, n: int) -> Callable[[int, int], ExperimentConfig]:
    def build(seed: int, runs: int) -> ExperimentConfig:
        return ExperimentConfig(
            n=n, d=d, sigma=1.0,
            shift=ShiftSpec(kind="hard", starts=starts),
            algorithms=_regression_algorithms(), runs=runs, seed=seed,
        )

    return build


_POW2_14 = tuple(2 ** i for i in range(1, 15))
_LIN_100 = tuple(100 * i for i in range(1, 11))

# name -> list of (panel name, builder(seed, runs))
PRESETS: Dict[str, List[Tuple[str, Callable[[int, int], ExperimentConfig]]]] = {
    "fig1": [
        ("soft", _soft_1d),
        ("hard-exp", _hard_1d_exp),
        ("hard-lin", _hard_1d_lin),
    ],
    "fig2": [
        ("soft", _soft_1d),
        ("hard-exp", _hard_1d_exp),
        ("hard-lin", _hard_1d_lin),
    ],
    "fig3": [
        ("soft-a1-d2", _soft_reg(1.0, 2)),
        ("soft-a2-d2", _soft_reg(2.0, 2)),
        ("soft-a2-d10", _soft_reg(2.0, 10)),
    ],
    "fig4": [
        ("hard-lin-d10", _hard_reg(_LIN_100, 10, 1100)),
        ("hard-exp-d2", _hard_reg(_POW2_14, 2, 16384)),
        ("hard-exp-d10", _hard_reg(_POW2_14, 10, 16384)),
    ],
}

DEFAULT_RUNS = 10
DEFAULT_SEED = 20240


def preset_names() -> List[str]:
    return sorted(PRESETS)


def build_preset(
    name: str, seed: int = DEFAULT_SEED, runs: int = DEFAULT_RUNS
) -> List[Tuple[str, ExperimentConfig]]:
    """Panel configs for a preset; panel names become output subdirectories."""
    if name not in PRESETS:
        raise KeyError(name)
    return [(panel, build(seed, runs)) for panel, build in PRESETS[name]]
