"""Cloud-regime application layer.

Ingests daily grid-cell records whose feature vector is a 42-bin joint
histogram of cloud fractions (6 optical-thickness classes x 7 top-pressure
classes), filters out unusable rows, and computes regime products from a
finished training run: per-node prototype histograms, total cloud fractions,
relative-frequency-of-occurrence (RFO) maps over the spatial grid, and
pairwise pattern correlations.

Input CSV contract: UTF-8, header ``day,cell_row,cell_col,b00,...,b41``, one
record per line. Cell indices are 0-based and nonnegative. A blank bin field
or the literal ``NaN`` marks missing data; such rows are excluded (counted,
not errors), as are rows whose 42 bins are all zero. Bin values outside
[0, 1], histograms summing above 1, or rows that fail to parse are hard
errors reported with their line number.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .grid import FLOAT_FORMAT, NodeCoord
from .trainer import TrainingRun

__all__ = [
    "N_BINS",
    "CloudDataError",
    "CloudRecord",
    "CloudDataset",
    "RegimeReport",
    "load_records",
    "write_records",
    "regime_cloud_fraction",
    "rfo_grid",
    "pattern_correlation",
    "regime_report",
    "write_report",
    "write_rfo_csv",
    "write_rfo_pgm",
]

N_BINS = 42
SUM_TOLERANCE = 1e-9
# Serialized stand-in for "this cell was never observed", as opposed to an
# observed cell where the regime simply never occurs (0.0).
NO_DATA_SENTINEL = -1.0


class CloudDataError(ValueError):
    """A record file violates the input contract; message carries the line number."""


@dataclass(frozen=True)
class CloudRecord:
    """One (day, grid-cell) observation with its 42-bin cloud-fraction histogram."""

    day: int
    cell_row: int
    cell_col: int
    hist: np.ndarray

    def __post_init__(self) -> None:
        hist = np.ascontiguousarray(self.hist, dtype=np.float64)
        object.__setattr__(self, "hist", hist)
        if hist.shape != (N_BINS,):
            raise ValueError(f"histogram must have {N_BINS} bins, got shape {hist.shape}")
        if not np.all(np.isfinite(hist)):
            raise ValueError("histogram contains non-finite values")
        if np.any(hist < 0.0) or np.any(hist > 1.0):
            raise ValueError("histogram bins must lie in [0, 1]")
        if float(hist.sum()) > 1.0 + SUM_TOLERANCE:
            raise ValueError("histogram bins sum above 1 (total cloud fraction)")
        if not np.any(hist):
            raise ValueError("histogram is all zero (cloud-free record)")


@dataclass
class CloudDataset:
    """Retained records plus the spatial extent of their cell indices."""

    records: list[CloudRecord]
    grid_rows: int
    grid_cols: int
    source_hash: str = ""

    def __len__(self) -> int:
        return len(self.records)

    def features(self) -> np.ndarray:
        """(n_records, 42) float64 feature matrix in file order."""
        return np.stack([r.hist for r in self.records])

    def cells(self) -> np.ndarray:
        """(n_records, 2) int array of (cell_row, cell_col) per record."""
        return np.array([(r.cell_row, r.cell_col) for r in self.records], dtype=np.intp)


def _file_hash(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


EXPECTED_HEADER = "day,cell_row,cell_col," + ",".join(f"b{i:02d}" for i in range(N_BINS))


def load_records(path) -> tuple[CloudDataset, int, int]:
    """Load and filter a record CSV.

    Returns the dataset of retained records (file order preserved) together
    with the number of rows dropped for missing data and the number dropped
    for being completely cloud-free. Contract violations raise
    :class:`CloudDataError` naming the offending line.
    """
    path = Path(path)
    records: list[CloudRecord] = []
    dropped_missing = 0
    dropped_all_zero = 0
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").rstrip("\r")
        if header != EXPECTED_HEADER:
            raise CloudDataError(f"{path}:1: unexpected header {header!r}")
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 3 + N_BINS:
                raise CloudDataError(
                    f"{path}:{lineno}: expected {3 + N_BINS} fields, got {len(parts)}"
                )
            try:
                day = int(parts[0])
                cell_row = int(parts[1])
                cell_col = int(parts[2])
            except ValueError as exc:
                raise CloudDataError(f"{path}:{lineno}: bad record key: {exc}") from exc
            if cell_row < 0 or cell_col < 0:
                raise CloudDataError(
                    f"{path}:{lineno}: cell indices must be nonnegative"
                )
            bins = parts[3:]
            if any(b == "" or b.lower() == "nan" for b in bins):
                dropped_missing += 1
                continue
            try:
                hist = np.array([float(b) for b in bins], dtype=np.float64)
            except ValueError as exc:
                raise CloudDataError(f"{path}:{lineno}: bad bin value: {exc}") from exc
            if not np.all(np.isfinite(hist)):
                raise CloudDataError(f"{path}:{lineno}: non-finite bin value")
            if np.any(hist < 0.0) or np.any(hist > 1.0):
                raise CloudDataError(f"{path}:{lineno}: bin value outside [0, 1]")
            if float(hist.sum()) > 1.0 + SUM_TOLERANCE:
                raise CloudDataError(
                    f"{path}:{lineno}: histogram sums above 1 (total cloud fraction)"
                )
            if not np.any(hist):
                dropped_all_zero += 1
                continue
            records.append(CloudRecord(day, cell_row, cell_col, hist))
    grid_rows = 1 + max((r.cell_row for r in records), default=-1)
    grid_cols = 1 + max((r.cell_col for r in records), default=-1)
    dataset = CloudDataset(records, grid_rows, grid_cols, source_hash=_file_hash(path))
    return dataset, dropped_missing, dropped_all_zero


def write_records(dataset: CloudDataset, path) -> None:
    """Serialize a dataset back to the input CSV format (round-trip exact)."""
    lines = [EXPECTED_HEADER]
    for r in dataset.records:
        bins = ",".join(FLOAT_FORMAT % v for v in r.hist)
        lines.append(f"{r.day},{r.cell_row},{r.cell_col},{bins}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def regime_cloud_fraction(prototype: np.ndarray) -> float:
    """Total cloud fraction of a regime: the sum of its 42 histogram bins."""
    prototype = np.asarray(prototype, dtype=np.float64)
    if prototype.shape != (N_BINS,):
        raise ValueError(f"expected {N_BINS} bins, got shape {prototype.shape}")
    return float(prototype.sum())


def rfo_grid(
    dataset: CloudDataset, assignment_coords: np.ndarray, node: NodeCoord
) -> np.ndarray:
    """Relative frequency of occurrence of ``node`` over the spatial grid.

    Entry (r, c) is the fraction of retained records at cell (r, c) that were
    assigned to ``node``. Cells with no retained records hold NaN so that
    "never observed" stays distinct from "observed but never this regime".
    """
    assignment_coords = np.asarray(assignment_coords)
    if assignment_coords.shape != (len(dataset), 2):
        raise ValueError(
            f"assignments have shape {assignment_coords.shape}, "
            f"expected ({len(dataset)}, 2)"
        )
    totals = np.zeros((dataset.grid_rows, dataset.grid_cols))
    hits = np.zeros((dataset.grid_rows, dataset.grid_cols))
    target = (int(node[0]), int(node[1]))
    for record, (arow, acol) in zip(dataset.records, assignment_coords):
        totals[record.cell_row, record.cell_col] += 1.0
        if (int(arow), int(acol)) == target:
            hits[record.cell_row, record.cell_col] += 1.0
    with np.errstate(invalid="ignore", divide="ignore"):
        rfo = hits / totals
    rfo[totals == 0.0] = np.nan
    return rfo


def pattern_correlation(x: np.ndarray, y: np.ndarray) -> float:
    """Pearson product-moment correlation between two patterns.

    Positions where either input is NaN (no-data cells in RFO maps) are
    excluded pairwise. Raises ValueError when fewer than two valid pairs
    remain or when a remaining input is constant, which leaves the
    correlation undefined.
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.shape != y.shape:
        raise ValueError(f"pattern lengths differ: {x.size} vs {y.size}")
    valid = ~(np.isnan(x) | np.isnan(y))
    x = x[valid]
    y = y[valid]
    if x.size < 2:
        raise ValueError("need at least two valid pairs for a correlation")
    dx = x - x.mean()
    dy = y - y.mean()
    sx = math.sqrt(float(dx @ dx))
    sy = math.sqrt(float(dy @ dy))
    if sx == 0.0 or sy == 0.0:
        raise ValueError("correlation undefined for constant input")
    return float(dx @ dy) / (sx * sy)


def _correlation_or_nan(x: np.ndarray, y: np.ndarray) -> float:
    try:
        return pattern_correlation(x, y)
    except ValueError:
        return math.nan


@dataclass
class RegimeReport:
    """Per-node regime products computed from a finished run.

    Node lists are in row-major node order. ``correlation`` is the pairwise
    Pearson correlation matrix of the node histograms, NaN where undefined.
    """

    rows: int
    cols: int
    node_coords: list[NodeCoord]
    histograms: np.ndarray  # (n_nodes, 42)
    cloud_fractions: np.ndarray  # (n_nodes,)
    sample_counts: np.ndarray  # (n_nodes,) int
    rfo: dict[NodeCoord, np.ndarray] = field(default_factory=dict)
    correlation: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    retained_records: int = 0
    input_hash: str = ""
    grid_rows: int = 0
    grid_cols: int = 0


def regime_report(run: TrainingRun, dataset: CloudDataset) -> RegimeReport:
    """Compute the full regime bundle for a run trained on ``dataset``.

    Rejects a run whose manifest input hash does not match the dataset's
    source hash, so reports cannot silently mix a map with foreign data.
    """
    if run.grid.dim != N_BINS:
        raise ValueError(f"run grid dimension {run.grid.dim} is not {N_BINS}")
    run_hash = run.manifest.get("input_hash", "")
    if run_hash and dataset.source_hash and run_hash != dataset.source_hash:
        raise ValueError(
            "run/dataset mismatch: manifest input hash "
            f"{run_hash[:12]}... != dataset hash {dataset.source_hash[:12]}..."
        )
    if len(dataset) != run.assignments.shape[0]:
        raise ValueError(
            f"run has {run.assignments.shape[0]} assignments for "
            f"{len(dataset)} records"
        )
    grid = run.grid
    coords = run.assignment_coords()
    node_coords = [grid.coord(k) for k in range(grid.n_nodes)]
    counts = np.bincount(run.assignments, minlength=grid.n_nodes)
    fractions = grid.prototypes.sum(axis=1)
    rfo = {nc: rfo_grid(dataset, coords, nc) for nc in node_coords}
    n = grid.n_nodes
    corr = np.full((n, n), np.nan)
    for i in range(n):
        for j in range(n):
            corr[i, j] = _correlation_or_nan(grid.prototypes[i], grid.prototypes[j])
    return RegimeReport(
        rows=grid.rows,
        cols=grid.cols,
        node_coords=node_coords,
        histograms=grid.prototypes.copy(),
        cloud_fractions=fractions,
        sample_counts=counts,
        rfo=rfo,
        correlation=corr,
        retained_records=len(dataset),
        input_hash=run_hash,
        grid_rows=dataset.grid_rows,
        grid_cols=dataset.grid_cols,
    )


def write_rfo_csv(rfo: np.ndarray, path) -> None:
    """Write one RFO grid as dense CSV, encoding no-data cells as -1.0."""
    filled = np.where(np.isnan(rfo), NO_DATA_SENTINEL, rfo)
    lines = [",".join(FLOAT_FORMAT % v for v in row) for row in filled]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_rfo_pgm(rfo: np.ndarray, path) -> None:
    """Write one RFO grid as an ASCII PGM for quick viewing.

    Gray levels: 0 marks no-data cells; observed cells map [0, 1] linearly
    onto 1..255.
    """
    rows, cols = rfo.shape
    lines = ["P2", f"{cols} {rows}", "255"]
    for row in rfo:
        pixels = [
            "0" if math.isnan(v) else str(1 + int(round(v * 254.0))) for v in row
        ]
        lines.append(" ".join(pixels))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_report(
    report: RegimeReport,
    out_dir,
    dropped_missing: int | None = None,
    dropped_all_zero: int | None = None,
    emit_pgm: bool = False,
) -> None:
    """Write report.json plus one RFO grid file per node into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    nodes = []
    for k, nc in enumerate(report.node_coords):
        nodes.append(
            {
                "row": int(nc.row),
                "col": int(nc.col),
                "sample_count": int(report.sample_counts[k]),
                "cloud_fraction": float(report.cloud_fractions[k]),
                "histogram": [float(v) for v in report.histograms[k]],
            }
        )
    corr = [
        [None if math.isnan(v) else float(v) for v in row] for row in report.correlation
    ]
    payload = {
        "input_hash": report.input_hash,
        "map": {"rows": report.rows, "cols": report.cols},
        "spatial_grid": {"rows": report.grid_rows, "cols": report.grid_cols},
        "retained_records": report.retained_records,
        "nodes": nodes,
        "histogram_correlation": corr,
        "rfo_no_data_sentinel": NO_DATA_SENTINEL,
    }
    if dropped_missing is not None:
        payload["dropped_missing"] = int(dropped_missing)
    if dropped_all_zero is not None:
        payload["dropped_all_zero"] = int(dropped_all_zero)
    with open(out / "report.json", "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    for nc in report.node_coords:
        write_rfo_csv(report.rfo[nc], out / f"rfo_node_{nc.row}_{nc.col}.csv")
        if emit_pgm:
            write_rfo_pgm(report.rfo[nc], out / f"rfo_node_{nc.row}_{nc.col}.pgm")
