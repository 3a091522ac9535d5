"""Training orchestration: dimension derivation, epoch loop, no-moves stopping.

The epoch loop is online and strictly sequential: each sample finds its BMU on
the grid as already updated by the samples before it, then pulls every node
within the current neighborhood radius toward itself. Training stops at the
first epoch in which no sample changed its BMU (``converged``) or when the
epoch budget is exhausted. All arithmetic is 64-bit floating point in a fixed
order, so a run is a pure function of (dataset bytes, configuration).
"""

from __future__ import annotations

import hashlib
import json
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .grid import (
    SomGrid,
    gradient_init,
    pairwise_node_distances,
    random_init,
    read_grid_csv,
    write_grid_csv,
)
from .schedule import DecaySchedule, initial_radius, learning_rate_at, radius_at
from .selection import random_passes, staggered_epoch_count, staggered_passes

__all__ = [
    "TrainerConfig",
    "TrainingRun",
    "derive_dims",
    "resolve_dims",
    "initial_grid",
    "update_prototype",
    "train_epoch",
    "train",
    "quantization_error",
    "dataset_hash",
    "save_run",
    "load_run",
]

INIT_MODES = ("gradient", "random")
SELECTION_MODES = ("staggered", "random")


@dataclass
class TrainerConfig:
    """Configuration for one training run.

    The map size comes either from explicit ``rows``/``cols`` or from
    ``avg_samples_per_node`` (the node count is then derived from the dataset
    size); exactly one of the two must be given. ``init`` and ``selection``
    toggle the deterministic components independently so baseline comparisons
    can add them one at a time; any random mode requires an explicit ``seed``.
    ``epoch_cap``, when set, bounds the self-tuned epoch budget and the decay
    schedules anchor to the capped value.
    """

    rows: int | None = None
    cols: int | None = None
    avg_samples_per_node: float | None = None
    learning_rate: float = 0.1
    base: float = math.e
    init: str = "gradient"
    selection: str = "staggered"
    seed: int | None = None
    epoch_cap: int | None = None
    rescale_gradient_init: bool = False

    @property
    def deterministic(self) -> bool:
        return self.init == "gradient" and self.selection == "staggered"

    def validate(self) -> None:
        explicit = self.rows is not None or self.cols is not None
        if explicit and (self.rows is None or self.cols is None):
            raise ValueError("rows and cols must be given together")
        if explicit and self.avg_samples_per_node is not None:
            raise ValueError(
                "avg_samples_per_node conflicts with explicit rows/cols"
            )
        if not explicit and self.avg_samples_per_node is None:
            raise ValueError(
                "either rows/cols or avg_samples_per_node must be set"
            )
        if explicit and (self.rows < 1 or self.cols < 1):
            raise ValueError(f"map dimensions must be >= 1, got {self.rows}x{self.cols}")
        if self.avg_samples_per_node is not None and self.avg_samples_per_node <= 0:
            raise ValueError("avg_samples_per_node must be positive")
        if not 0.0 < self.learning_rate <= 1.0:
            raise ValueError(f"learning_rate must be in (0, 1], got {self.learning_rate}")
        if self.base <= 1.0:
            raise ValueError(f"base must be > 1, got {self.base}")
        if self.init not in INIT_MODES:
            raise ValueError(f"init must be one of {INIT_MODES}, got {self.init!r}")
        if self.selection not in SELECTION_MODES:
            raise ValueError(
                f"selection must be one of {SELECTION_MODES}, got {self.selection!r}"
            )
        if (self.init == "random" or self.selection == "random") and self.seed is None:
            raise ValueError("random init/selection requires an explicit seed")
        if self.epoch_cap is not None and self.epoch_cap < 1:
            raise ValueError(f"epoch_cap must be >= 1, got {self.epoch_cap}")


@dataclass
class TrainingRun:
    """Everything a finished run produced.

    ``assignments`` holds one flat row-major node index per dataset record,
    recomputed against the final grid in a single frozen labeling sweep so
    assignments and prototypes are mutually consistent. ``change_counts`` has
    one entry per executed epoch: the number of samples whose BMU differed
    from the previous epoch (the first epoch counts every sample).
    """

    grid: SomGrid
    assignments: np.ndarray
    epochs_run: int
    converged: bool
    change_counts: list[int] = field(default_factory=list)
    manifest: dict = field(default_factory=dict)

    def assignment_coords(self) -> np.ndarray:
        """(n_samples, 2) array of 1-indexed (row, col) assignments."""
        rows = self.assignments // self.grid.cols + 1
        cols = self.assignments % self.grid.cols + 1
        return np.column_stack([rows, cols])


def derive_dims(n_samples: int, avg_per_node: float) -> tuple[int, int]:
    """Derive (rows, cols) from a target average number of samples per node.

    The node count is ``round(n_samples / avg_per_node)`` (ties to even, at
    least 1) and is factored as the most nearly square rectangle. A prime
    count above 3 has no usable factorization, so the map is widened to
    ``floor(sqrt(n)) x ceil(n / floor(sqrt(n)))``, slightly exceeding the
    target. Always returns rows <= cols.
    """
    if n_samples < 1:
        raise ValueError(f"need at least one sample, got {n_samples}")
    if avg_per_node <= 0:
        raise ValueError(f"avg_per_node must be positive, got {avg_per_node}")
    n_nodes = max(1, round(n_samples / avg_per_node))
    rows = 1
    for d in range(math.isqrt(n_nodes), 0, -1):
        if n_nodes % d == 0:
            rows = d
            break
    if rows == 1 and n_nodes > 3:  # prime: only 1 x n would divide evenly
        rows = math.isqrt(n_nodes)
        cols = math.ceil(n_nodes / rows)
    else:
        cols = n_nodes // rows
    return rows, cols


def update_prototype(
    v: np.ndarray, f: np.ndarray, infl: float, rate: float
) -> np.ndarray:
    """One competitive-learning pull: ``v + (infl * rate) * (f - v)``."""
    v = np.asarray(v, dtype=np.float64)
    f = np.asarray(f, dtype=np.float64)
    if v.shape != f.shape:
        raise ValueError(f"vector shapes differ: {v.shape} vs {f.shape}")
    return v + (infl * rate) * (f - v)


def _neighborhoods(
    grid: SomGrid, t: int, schedule: DecaySchedule
) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Per potential BMU: the node indices within radius and their pull weights.

    Both depend only on the epoch, so they are computed once per epoch. The
    weight of a neighbor at lattice distance d is influence(d) * L(t); nodes
    beyond the radius get no update at all.
    """
    r_t = radius_at(t, schedule)
    l_t = learning_rate_at(t, schedule)
    dist = pairwise_node_distances(grid.rows, grid.cols)
    members = []
    weights = []
    for b in range(grid.n_nodes):
        idx = np.flatnonzero(dist[b] <= r_t)
        w = schedule.base ** (-dist[b, idx] / (2.0 * r_t)) * l_t
        members.append(idx)
        weights.append(w)
    return members, weights


def train_epoch(
    grid: SomGrid,
    samples: np.ndarray,
    pass_order: np.ndarray,
    t: int,
    schedule: DecaySchedule,
    prev_assignments: np.ndarray | None,
) -> tuple[SomGrid, np.ndarray, int]:
    """Run one full presentation pass, updating ``grid`` in place.

    Samples are shown one at a time in ``pass_order``; each finds its BMU on
    the grid as updated so far, records it, and pulls every node within the
    epoch's neighborhood radius of that BMU toward itself. Returns the grid,
    the per-sample BMU indices recorded at presentation time, and how many
    samples changed BMU relative to ``prev_assignments`` (all of them when
    ``prev_assignments`` is None, i.e. on the first epoch).
    """
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 2 or (samples.size and samples.shape[1] != grid.dim):
        raise ValueError(
            f"samples have shape {samples.shape}, grid dimension is {grid.dim}"
        )
    n = samples.shape[0]
    members, weights = _neighborhoods(grid, t, schedule)
    prototypes = grid.prototypes
    assignments = np.zeros(n, dtype=np.intp)
    diff = np.empty_like(prototypes)
    d2 = np.empty(grid.n_nodes)
    for i in pass_order:
        f = samples[i]
        np.subtract(prototypes, f, out=diff)
        np.einsum("ij,ij->i", diff, diff, out=d2)
        b = int(np.argmin(d2))
        assignments[i] = b
        idx = members[b]
        current = prototypes[idx]
        prototypes[idx] = current + weights[b][:, None] * (f - current)
    if prev_assignments is None:
        changed = n
    else:
        changed = int(np.count_nonzero(assignments != prev_assignments))
    return grid, assignments, changed


def _label(grid: SomGrid, samples: np.ndarray) -> np.ndarray:
    """BMU index of every sample against a frozen grid."""
    prototypes = grid.prototypes
    out = np.empty(samples.shape[0], dtype=np.intp)
    diff = np.empty_like(prototypes)
    d2 = np.empty(grid.n_nodes)
    for i in range(samples.shape[0]):
        np.subtract(prototypes, samples[i], out=diff)
        np.einsum("ij,ij->i", diff, diff, out=d2)
        out[i] = np.argmin(d2)
    return out


def quantization_error(grid: SomGrid, samples: np.ndarray) -> float:
    """Mean Euclidean distance from each sample to its nearest prototype."""
    samples = np.asarray(samples, dtype=np.float64)
    prototypes = grid.prototypes
    total = 0.0
    for i in range(samples.shape[0]):
        diff = prototypes - samples[i]
        d2 = np.einsum("ij,ij->i", diff, diff)
        total += math.sqrt(d2.min())
    return total / samples.shape[0]


def dataset_hash(samples: np.ndarray) -> str:
    """SHA-256 of the dataset's shape and raw float64 bytes (C order)."""
    samples = np.ascontiguousarray(samples, dtype=np.float64)
    h = hashlib.sha256()
    h.update(f"{samples.shape[0]}x{samples.shape[1]}:".encode("ascii"))
    h.update(samples.tobytes())
    return h.hexdigest()


def _validate_dataset(dataset) -> np.ndarray:
    try:
        samples = np.ascontiguousarray(dataset, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"dataset is not a uniform numeric table: {exc}") from exc
    if samples.ndim != 2:
        raise ValueError(
            f"dataset must be 2-D (samples x features), got shape {samples.shape}"
        )
    if samples.shape[0] == 0:
        raise ValueError("dataset is empty")
    if not np.all(np.isfinite(samples)):
        raise ValueError("dataset contains non-finite values")
    return samples


def resolve_dims(n_samples: int, config: TrainerConfig) -> tuple[int, int]:
    """Map dimensions for a dataset of ``n_samples`` under ``config``."""
    if config.avg_samples_per_node is not None:
        return derive_dims(n_samples, config.avg_samples_per_node)
    return config.rows, config.cols


def initial_grid(dataset, config: TrainerConfig) -> SomGrid:
    """The grid a run of ``config`` on ``dataset`` starts from.

    Gradient init uses the raw unit ramp unless ``rescale_gradient_init``
    maps it per feature onto the data min/max; random init always draws from
    the per-feature data min/max.
    """
    config.validate()
    samples = _validate_dataset(dataset)
    rows, cols = resolve_dims(samples.shape[0], config)
    dim = samples.shape[1]
    lo = samples.min(axis=0)
    hi = samples.max(axis=0)
    if config.init == "gradient":
        feature_range = (lo, hi) if config.rescale_gradient_init else None
        return gradient_init(rows, cols, dim, feature_range=feature_range)
    return random_init(rows, cols, dim, config.seed, lo, hi)


def train(dataset, config: TrainerConfig, input_hash: str | None = None) -> TrainingRun:
    """Train a map on ``dataset`` according to ``config``.

    Deterministic components: gradient initialization and the staggered
    selection schedule, whose pass count (the dataset size) becomes the epoch
    budget. Random components use the configured seed. Runs stop early at the
    first epoch with zero BMU changes; otherwise they exhaust the budget.

    ``input_hash`` identifies the input in the run manifest; by default it is
    the hash of the dataset array itself.
    """
    config.validate()
    samples = _validate_dataset(dataset)
    started = time.perf_counter()
    n, dim = samples.shape
    rows, cols = resolve_dims(n, config)
    max_epochs = staggered_epoch_count(n)
    if config.epoch_cap is not None:
        max_epochs = min(max_epochs, config.epoch_cap)
    schedule = DecaySchedule(
        radius0=initial_radius(rows, cols),
        rate0=config.learning_rate,
        max_epochs=max_epochs,
        base=config.base,
    )
    grid = initial_grid(samples, config)

    if config.selection == "staggered":
        passes = staggered_passes(n)
    else:
        passes = random_passes(n, max_epochs, config.seed)

    prev = None
    change_counts: list[int] = []
    converged = False
    for t, order in enumerate(passes):
        if t >= max_epochs:
            break
        _, prev, changed = train_epoch(grid, samples, order, t, schedule, prev)
        change_counts.append(changed)
        if changed == 0:
            converged = True
            break
    assignments = _label(grid, samples)
    duration = time.perf_counter() - started

    manifest = {
        "config": asdict(config),
        "deterministic": config.deterministic,
        "schedule": {
            "radius0": schedule.radius0,
            "rate0": schedule.rate0,
            "base": schedule.base,
            "max_epochs": schedule.max_epochs,
            "lambda_radius": schedule.lambda_radius,
            "lambda_rate": schedule.lambda_rate,
        },
        "input_hash": input_hash if input_hash is not None else dataset_hash(samples),
        "rows": rows,
        "cols": cols,
        "dim": dim,
        "n_samples": n,
        "max_epochs": max_epochs,
        "epochs_run": len(change_counts),
        "converged": converged,
        "change_counts": change_counts,
        "duration_sec": duration,
    }
    return TrainingRun(
        grid=grid,
        assignments=assignments,
        epochs_run=len(change_counts),
        converged=converged,
        change_counts=change_counts,
        manifest=manifest,
    )


# Run-directory artifact names; `compare` diffs the two data files only,
# since the manifest records wall-clock time and legitimately varies.
MANIFEST_FILE = "manifest.json"
PROTOTYPES_FILE = "prototypes.csv"
ASSIGNMENTS_FILE = "assignments.csv"


def save_run(run: TrainingRun, out_dir) -> None:
    """Write manifest.json, prototypes.csv and assignments.csv to a directory."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / MANIFEST_FILE, "w", encoding="utf-8") as fh:
        json.dump(run.manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    write_grid_csv(run.grid, out / PROTOTYPES_FILE)
    coords = run.assignment_coords()
    lines = ["record_index,row,col"]
    lines += [f"{i},{r},{c}" for i, (r, c) in enumerate(coords)]
    with open(out / ASSIGNMENTS_FILE, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def load_run(run_dir) -> TrainingRun:
    """Rebuild a TrainingRun from a directory written by :func:`save_run`."""
    run_dir = Path(run_dir)
    manifest_path = run_dir / MANIFEST_FILE
    if not manifest_path.exists():
        raise FileNotFoundError(f"{manifest_path}: missing run manifest")
    with open(manifest_path, "r", encoding="utf-8") as fh:
        manifest = json.load(fh)
    grid = read_grid_csv(run_dir / PROTOTYPES_FILE)
    assignments = []
    with open(run_dir / ASSIGNMENTS_FILE, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "record_index,row,col":
            raise ValueError(f"unexpected assignments header {header!r}")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            _, r, c = line.split(",")
            assignments.append((int(r) - 1) * grid.cols + (int(c) - 1))
    return TrainingRun(
        grid=grid,
        assignments=np.asarray(assignments, dtype=np.intp),
        epochs_run=manifest["epochs_run"],
        converged=manifest["converged"],
        change_counts=list(manifest["change_counts"]),
        manifest=manifest,
    )
