"""Deterministic self-organizing map training.

Identical inputs produce byte-identical maps: prototypes start on a fixed
corner-to-corner gradient ramp, samples are presented in a deterministic
staggered rotation whose pass count doubles as the epoch budget, and training
stops as soon as a full epoch moves no sample to a new best-match unit.
Seeded random init/selection baselines are included for contrast, plus an
application layer for classifying 42-bin cloud joint-histogram records.
"""

from .cloud import (
    CloudDataError,
    CloudDataset,
    CloudRecord,
    load_records,
    pattern_correlation,
    regime_cloud_fraction,
    regime_report,
    rfo_grid,
)
from .estimator import SelfOrganizingMap
from .grid import (
    NodeCoord,
    SomGrid,
    bmu,
    gradient_init,
    grid_distance,
    random_init,
    read_grid_csv,
    write_grid_csv,
)
from .schedule import (
    DecaySchedule,
    influence,
    initial_radius,
    learning_rate_at,
    radius_at,
)
from .selection import random_passes, staggered_epoch_count, staggered_passes
from .trainer import (
    TrainerConfig,
    TrainingRun,
    dataset_hash,
    derive_dims,
    initial_grid,
    load_run,
    quantization_error,
    resolve_dims,
    save_run,
    train,
    train_epoch,
    update_prototype,
)

__version__ = "0.1.0"

__all__ = [
    "CloudDataError",
    "CloudDataset",
    "CloudRecord",
    "DecaySchedule",
    "NodeCoord",
    "SelfOrganizingMap",
    "SomGrid",
    "TrainerConfig",
    "TrainingRun",
    "bmu",
    "dataset_hash",
    "derive_dims",
    "gradient_init",
    "grid_distance",
    "influence",
    "initial_grid",
    "initial_radius",
    "learning_rate_at",
    "load_records",
    "load_run",
    "pattern_correlation",
    "quantization_error",
    "radius_at",
    "random_init",
    "random_passes",
    "read_grid_csv",
    "regime_cloud_fraction",
    "regime_report",
    "resolve_dims",
    "rfo_grid",
    "save_run",
    "staggered_epoch_count",
    "staggered_passes",
    "train",
    "train_epoch",
    "update_prototype",
    "write_grid_csv",
]
