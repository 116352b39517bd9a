"""Benchmark library for non-stationary online regression.

Aggregates restarted online learners with exponential weights (optionally
pruned to a logarithmic active set), provides oracle and scheduled-restart
baselines, synthetic drift generators, and a reproducible experiment
harness with a CLI.
"""

from .core import (
    Observation,
    OutputBound,
    PredictionRecord,
    Subroutine,
    SubroutineFactory,
    clip_to_bound,
    square_loss,
    update_output_bound,
)
from .subroutines import Awv, MovingAverage, Ogd, Ons
from .kernel import (
    KernelAwv,
    KernelFunction,
    effective_dimension,
    gaussian_kernel,
    kernel_eval,
    lambda_schedule,
    linear_kernel,
    polynomial_kernel,
)
from .meta import (
    ExpertPool,
    ExpertSlot,
    MetaConfig,
    ending_time,
    exp_weight_update,
    interval_cover,
    learning_rate,
)
from .datagen import (
    ParameterPath,
    ShiftSpec,
    Stream,
    StreamSpec,
    gen_hard_shifts,
    gen_soft_shifts,
    gen_stream,
    total_variation,
)
from .baselines import (
    RestartPartition,
    fixed_restart_batch_size,
    fixed_restart_ogd_run,
    greedy_restart_partition,
    optimal_num_batches,
    oracle_forecast,
)
from .harness import (
    AlgorithmSpec,
    ConfigError,
    ExperimentConfig,
    bound_curve,
    cumulative_true_error,
    run_experiment,
    write_results,
)

__version__ = "0.1.0"
