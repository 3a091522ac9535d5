"""Per-epoch sample presentation order.

Two schedules: a deterministic staggered rotation that gives every sample a
turn at opening an epoch while alternating sweep direction, and a seeded
random baseline. Passes are generated lazily, one epoch at a time, because a
staggered run budgets as many epochs as there are samples and early stopping
usually ends training long before that.
"""

from __future__ import annotations

from collections.abc import Iterator

import numpy as np

__all__ = ["staggered_epoch_count", "staggered_passes", "random_passes"]


def staggered_epoch_count(n_samples: int) -> int:
    """Number of passes the staggered schedule produces: one per sample.

    This doubles as the self-tuned epoch budget of a deterministic run.
    """
    if n_samples < 1:
        raise ValueError(f"need at least one sample, got {n_samples}")
    return n_samples


def staggered_passes(n_samples: int) -> Iterator[np.ndarray]:
    """Yield the presentation order for each epoch of the staggered schedule.

    A front cursor and a back cursor start at the ends of the index list.
    Forward passes open at the front cursor and walk the whole list once,
    wrapping past the end; reverse passes open at the back cursor and walk
    backwards, wrapping past the start. After each pass the opening cursor is
    consumed (front advances or back retreats) and the direction flips,
    starting forward. The schedule ends when the cursors cross, after exactly
    ``n_samples`` passes, each a permutation of ``0..n_samples-1``.
    """
    if n_samples < 1:
        raise ValueError(f"need at least one sample, got {n_samples}")
    steps = np.arange(n_samples, dtype=np.intp)
    front = 0
    back = n_samples - 1
    reverse = False
    while front <= back:
        if reverse:
            yield (back - steps) % n_samples
            back -= 1
        else:
            yield (front + steps) % n_samples
            front += 1
        reverse = not reverse


def random_passes(n_samples: int, epochs: int, seed: int) -> Iterator[np.ndarray]:
    """Yield ``epochs`` independent uniform shuffles of ``0..n_samples-1``.

    Shuffles come from the same seeded PCG64 generator family used for random
    grid initialization; an identical seed reproduces the identical pass
    sequence.
    """
    if n_samples < 1:
        raise ValueError(f"need at least one sample, got {n_samples}")
    if epochs < 1:
        raise ValueError(f"need at least one epoch, got {epochs}")
    rng = np.random.default_rng(seed)
    for _ in range(epochs):
        yield rng.permutation(n_samples).astype(np.intp, copy=False)
