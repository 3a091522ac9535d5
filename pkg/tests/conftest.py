"""Shared synthetic datasets and the acceptance summary hook."""

from __future__ import annotations

import numpy as np
import pytest

from detsom.cloud import EXPECTED_HEADER
from detsom.grid import FLOAT_FORMAT


def peak4_centroids(delta: float = 0.1) -> np.ndarray:
    """Four regime histograms on the corners of a square in 42-dim space.

    A strong single-bin base pattern plus two orthogonal displacement vectors
    of length ``delta`` on otherwise-empty bins. Adjacent corners are exactly
    ``delta`` apart; all four are valid cloud histograms (components in
    [0, 1], total below 1 even after +-0.002 noise on every bin).
    """
    base = np.zeros(42)
    base[0] = 0.6
    u = np.zeros(42)
    u[10] = u[11] = delta / np.sqrt(2.0)
    w = np.zeros(42)
    w[12] = w[13] = delta / np.sqrt(2.0)
    return np.stack([base, base + u, base + w, base + u + w])


def lattice12_centroids() -> np.ndarray:
    """Twelve regime histograms on pairwise-disjoint bin pairs."""
    cents = np.zeros((12, 42))
    for k in range(12):
        cents[k, 2 * k] = 0.35
        cents[k, 2 * k + 1] = 0.35
    return cents


def clustered_histograms(
    centroids: np.ndarray,
    n_samples: int,
    noise_amp: float,
    seed: int,
    order: str = "shuffled",
) -> tuple[np.ndarray, np.ndarray]:
    """Samples drawn around ``centroids`` with uniform +-noise_amp noise.

    Cluster labels are balanced. ``order`` fixes the row order of the
    dataset: "shuffled" interleaves the clusters irregularly (a seeded
    permutation) so the presentation order never locks into a periodic
    pattern; "cycle" repeats clusters round-robin. Values are clipped to
    [0, 1] so every sample stays a valid histogram.
    """
    rng = np.random.default_rng(seed)
    labels = np.arange(n_samples) % len(centroids)
    if order == "shuffled":
        labels = rng.permutation(labels)
    X = centroids[labels] + rng.uniform(
        -noise_amp, noise_amp, size=(n_samples, centroids.shape[1])
    )
    return np.clip(X, 0.0, 1.0), labels


def write_cloud_csv(
    path,
    X: np.ndarray,
    cell_rows: int = 5,
    cell_cols: int = 6,
) -> None:
    """Write samples in the record CSV format with synthetic day/cell keys.

    Records cycle through a ``cell_rows x cell_cols`` spatial grid, bumping
    the day every full sweep, so every cell collects many records.
    """
    n_cells = cell_rows * cell_cols
    lines = [EXPECTED_HEADER]
    for i, x in enumerate(X):
        cell = i % n_cells
        day = i // n_cells
        bins = ",".join(FLOAT_FORMAT % v for v in x)
        lines.append(f"{day},{cell // cell_cols},{cell % cell_cols},{bins}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


@pytest.fixture(scope="session")
def regime4_data():
    """2,000 samples around 4 well-separated regime centroids (for 2x2 maps)."""
    cents = peak4_centroids()
    X, labels = clustered_histograms(cents, 2000, noise_amp=0.002, seed=42)
    return X, labels, cents


@pytest.fixture(scope="session")
def bulk12_data():
    """10,000 samples around 12 disjoint regime centroids (for 4x3 maps)."""
    cents = lattice12_centroids()
    X, labels = clustered_histograms(cents, 10000, noise_amp=0.01, seed=7, order="cycle")
    return X, labels, cents


def assignment_purity(labels: np.ndarray, assignments: np.ndarray) -> float:
    """Fraction of samples in the majority generator class of their node."""
    correct = 0
    for node in np.unique(assignments):
        members = labels[assignments == node]
        _, counts = np.unique(members, return_counts=True)
        correct += counts.max()
    return correct / len(labels)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One PASS/FAIL line per acceptance criterion at the end of the run.

    Parametrized variants of one criterion collapse into a single line that
    fails if any variant failed.
    """
    verdicts = {}
    for category, verdict in (("passed", "PASS"), ("failed", "FAIL"), ("error", "FAIL")):
        for report in terminalreporter.stats.get(category, []):
            name = report.nodeid.rsplit("::", 1)[-1].split("[", 1)[0]
            if "test_acceptance" in report.nodeid and name.startswith("test_criterion_"):
                key = name[len("test_criterion_") :]
                if getattr(report, "when", "call") in ("call", "setup"):
                    if verdicts.get(key) != "FAIL":
                        verdicts[key] = verdict
    if verdicts:
        terminalreporter.write_sep("-", "acceptance criteria")
        for key in sorted(verdicts):
            num, _, desc = key.partition("_")
            terminalreporter.write_line(
                f"acceptance criterion {num} ({desc.replace('_', ' ')}): {verdicts[key]}"
            )
