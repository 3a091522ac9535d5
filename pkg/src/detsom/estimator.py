"""Scikit-learn style front end for the deterministic trainer."""

from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .trainer import TrainerConfig, train

__all__ = ["SelfOrganizingMap"]


class SelfOrganizingMap(ClusterMixin, TransformerMixin, BaseEstimator):
    """Self-organizing map with deterministic training.

    Projects samples onto a small rows x cols lattice of prototype vectors by
    competitive learning. With the default configuration (gradient
    initialization, staggered sample selection) fitting is fully
    deterministic: the same data always yields the same map, bit for bit, and
    the epoch budget tunes itself to the dataset size. Random initialization
    and random selection are available as seeded baselines.

    Parameters
    ----------
    rows, cols : int, optional
        Explicit map dimensions. Give both, or neither plus
        ``avg_samples_per_node``.
    avg_samples_per_node : float, optional
        Derive the map size so each node averages about this many samples.
    learning_rate : float, default=0.1
        Initial learning rate in (0, 1]; decays exponentially over the run.
    base : float, default=e
        Logarithmic base shared by the radius/rate/influence decays.
    init : {"gradient", "random"}, default="gradient"
        Prototype initialization scheme.
    selection : {"staggered", "random"}, default="staggered"
        Per-epoch sample presentation order.
    seed : int, optional
        Seed for the random init/selection baselines (required when either
        is selected).
    epoch_cap : int, optional
        Hard bound on the self-tuned epoch budget.
    rescale_gradient_init : bool, default=False
        Rescale the gradient ramp per feature to the data min/max instead of
        the raw [0, 1] ramp.

    Attributes
    ----------
    prototypes_ : ndarray of shape (n_nodes, n_features)
        Final prototype vectors in row-major node order.
    labels_ : ndarray of shape (n_samples,)
        Flat node index assigned to each training sample.
    rows_, cols_ : int
        Fitted map dimensions.
    n_epochs_ : int
        Epochs actually run.
    converged_ : bool
        True when training stopped because an epoch moved no sample.
    change_counts_ : list of int
        Per-epoch count of samples that changed best-match unit.
    run_ : TrainingRun
        The full run record, including the reproducibility manifest.
    """

    def __init__(
        self,
        rows: int | None = None,
        cols: int | None = None,
        avg_samples_per_node: float | None = None,
        learning_rate: float = 0.1,
        base: float = math.e,
        init: str = "gradient",
        selection: str = "staggered",
        seed: int | None = None,
        epoch_cap: int | None = None,
        rescale_gradient_init: bool = False,
    ):
        self.rows = rows
        self.cols = cols
        self.avg_samples_per_node = avg_samples_per_node
        self.learning_rate = learning_rate
        self.base = base
        self.init = init
        self.selection = selection
        self.seed = seed
        self.epoch_cap = epoch_cap
        self.rescale_gradient_init = rescale_gradient_init

    def _config(self) -> TrainerConfig:
        return TrainerConfig(
            rows=self.rows,
            cols=self.cols,
            avg_samples_per_node=self.avg_samples_per_node,
            learning_rate=self.learning_rate,
            base=self.base,
            init=self.init,
            selection=self.selection,
            seed=self.seed,
            epoch_cap=self.epoch_cap,
            rescale_gradient_init=self.rescale_gradient_init,
        )

    def fit(self, X, y=None):
        """Train the map on X and store the fitted lattice."""
        X = check_array(X, dtype=np.float64)
        run = train(X, self._config())
        self.run_ = run
        self.rows_ = run.grid.rows
        self.cols_ = run.grid.cols
        self.prototypes_ = run.grid.prototypes
        self.labels_ = run.assignments.copy()
        self.n_epochs_ = run.epochs_run
        self.converged_ = run.converged
        self.change_counts_ = list(run.change_counts)
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        """Flat node index of the best-match unit for each sample."""
        check_is_fitted(self, "prototypes_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, map was fit with {self.n_features_in_}"
            )
        d2 = self._squared_distances(X)
        return np.argmin(d2, axis=1)

    def transform(self, X):
        """Euclidean distance from each sample to every node prototype."""
        check_is_fitted(self, "prototypes_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, map was fit with {self.n_features_in_}"
            )
        return np.sqrt(self._squared_distances(X))

    def _squared_distances(self, X: np.ndarray) -> np.ndarray:
        # Broadcasted einsum keeps the same sequential per-pair reduction as
        # the trainer's BMU search, so predictions match training labels
        # exactly.
        diff = X[:, None, :] - self.prototypes_[None, :, :]
        return np.einsum("snd,snd->sn", diff, diff)

    def node_coordinates(self, labels=None) -> np.ndarray:
        """(n, 2) array of 1-indexed (row, col) for flat node indices.

        Defaults to the training labels.
        """
        check_is_fitted(self, "prototypes_")
        if labels is None:
            labels = self.labels_
        labels = np.asarray(labels)
        return np.column_stack([labels // self.cols_ + 1, labels % self.cols_ + 1])
