"""Bernoulli Naive Bayes with Laplace smoothing.

Features are presence bits, so each feature is a Bernoulli variable
per class: P(f=1|c) = (count_1 + alpha) / (n_c + 2*alpha), and
P(f=0|c) is stored as its exact complement so the two always sum to 1.
The score is the log-posterior odds log P(Need|x) - log P(NoNeed|x),
which collapses to a linear function of the bits.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from . import ClassifierSpec

# class index order everywhere in this module: row 0 = NoNeed, row 1 = Need


@dataclass(eq=False)
class NaiveBayesModel:
    spec: "ClassifierSpec"
    vocab_terms: tuple[str, ...]
    class_priors: np.ndarray  # shape (2,), unsmoothed class fractions
    prob_one: np.ndarray  # shape (2, d), smoothed P(f=1 | class)
    positive_class: str = "need"
    prob_zero: np.ndarray = field(init=False, repr=False)
    _weights: np.ndarray = field(init=False, repr=False)
    _bias: float = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self.prob_zero = 1.0 - self.prob_one
        log_one = np.log(self.prob_one)
        log_zero = np.log(self.prob_zero)
        self._weights = (log_one[1] - log_one[0]) - (log_zero[1] - log_zero[0])
        self._bias = float(
            np.log(self.class_priors[1])
            - np.log(self.class_priors[0])
            + np.sum(log_zero[1] - log_zero[0])
        )

    def score_matrix(self, X: np.ndarray) -> np.ndarray:
        return X.astype(np.float64) @ self._weights + self._bias


def fit_naive_bayes(
    spec: "ClassifierSpec",
    vocab_terms: tuple[str, ...],
    X: np.ndarray,
    y: np.ndarray,
    alpha: float = 1.0,
) -> NaiveBayesModel:
    n = X.shape[0]
    counts = np.array([np.sum(y == 0), np.sum(y == 1)], dtype=np.float64)
    ones = np.stack([X[y == 0].sum(axis=0), X[y == 1].sum(axis=0)]).astype(np.float64)
    prob_one = (ones + alpha) / (counts[:, None] + 2.0 * alpha)
    priors = counts / float(n)
    return NaiveBayesModel(
        spec=spec,
        vocab_terms=vocab_terms,
        class_priors=priors,
        prob_one=prob_one,
    )
