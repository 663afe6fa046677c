"""Scikit-learn style wrapper around :func:`lago.optimizer.run_lago`."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.utils.validation import check_is_fitted

from .exceptions import NotActive
from .linkstream import ActiveTimeNode
from .optimizer import LagoConfig, run_lago
from .quality import QualityConfig, q_score
from .validation import (check_expectation, check_link_stream, check_omega, check_seed,
                         check_variant)

__all__ = ["LAGO"]


class LAGO(ClusterMixin, BaseEstimator):
    """Dynamic community detection on a link stream.

    Each sample is an active time node ``(node, tick)``; ``labels_[i]`` is the
    community of ``stream.active_nodes[i]``.

    Parameters
    ----------
    variant : str, default="LV+E*"
        Optimizer variant name, e.g. ``"LV"``, ``"LVxN*"``, ``"IM+E"``.
    expectation : {"MM", "JM"}, default="MM"
        Null model of the quality function.
    omega : float, default=1.0
        Weight of the community switch penalty.
    random_state : int, RandomState, Generator or None
        Seed for visiting orders.  The integer actually used is stored in
        ``seed_``.
    max_outer_iters : int, default=100

    Attributes
    ----------
    stream_ : LinkStream
    communities_ : DynamicCommunityStructure
    labels_ : ndarray of int
    quality_ : QualityBreakdown
    n_communities_ : int
    report_ : RunReport
    seed_ : int

    Examples
    --------
    >>> from lago import LAGO
    >>> rows = [(0, "a", "b"), (0, "b", "c"), (1, "a", "b")]
    >>> est = LAGO(random_state=0).fit(rows)
    >>> est.n_communities_
    1
    """

    def __init__(self, variant="LV+E*", expectation="MM", omega=1.0, random_state=None,
                 max_outer_iters=100):
        self.variant = variant
        self.expectation = expectation
        self.omega = omega
        self.random_state = random_state
        self.max_outer_iters = max_outer_iters

    def _config(self, seed):
        return LagoConfig.from_variant(
            check_variant(self.variant), check_expectation(self.expectation),
            check_omega(self.omega), seed=seed, max_outer_iters=int(self.max_outer_iters))

    def fit(self, X, y=None):
        """Detect communities on ``X`` (a LinkStream or rows of ``(t, u, v)``)."""
        stream = check_link_stream(X)
        seed = check_seed(self.random_state)
        report = run_lago(stream, self._config(seed))
        self.stream_ = stream
        self.seed_ = report.seed
        self.report_ = report
        self.communities_ = report.structure
        self.quality_ = report.quality
        self.n_communities_ = report.quality.num_communities
        self.labels_ = np.asarray(report.structure.labels(), dtype=int)
        return self

    def predict(self, X):
        """Community id of each ``(node, tick)`` pair in ``X``, with ticks in stream units.

        Raises NotActive for pairs that are not active time nodes of the
        fitted stream.
        """
        check_is_fitted(self, "labels_")
        out = []
        for node, tick in X:
            atn = ActiveTimeNode(str(node), int(tick))
            if not self.stream_.is_active(*atn):
                raise NotActive(atn)
            out.append(self.labels_[self.stream_.atn_index(atn)])
        return np.asarray(out, dtype=int)

    def score(self, X=None, y=None):
        """Quality of the fitted structure, optionally re-scored on the same stream ``X``."""
        check_is_fitted(self, "labels_")
        if X is not None and check_link_stream(X) != self.stream_:
            raise ValueError("score() expects the stream the estimator was fitted on")
        config = QualityConfig(check_expectation(self.expectation), check_omega(self.omega))
        return q_score(self.stream_, self.communities_, config).total
