"""Stochastic Pegasos solver for the linear SVM primal objective

    f(w) = (lambda/2) * ||w||^2 + (1/n) * sum_i hinge(w; x_i, y_i)

One uniformly drawn instance per step, learning rate 1/(lambda * t),
optional projection onto the ball of radius 1/sqrt(lambda). The bias
is an always-on extra feature, so it is regularized with the weights.
The training objective is evaluated after every epoch and kept on the
model for convergence inspection.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from . import ClassifierSpec


@dataclass(eq=False)
class PegasosModel:
    spec: "ClassifierSpec"
    vocab_terms: tuple[str, ...]
    weights: np.ndarray  # shape (d,)
    bias: float
    objective_trace: tuple[float, ...] = ()
    positive_class: str = "need"

    def score_matrix(self, X: np.ndarray) -> np.ndarray:
        return X.astype(np.float64) @ self.weights + self.bias


def _objective(w: np.ndarray, Xb: np.ndarray, y_pm: np.ndarray, lam: float) -> float:
    margins = y_pm * (Xb @ w)
    hinge = np.maximum(0.0, 1.0 - margins)
    return float(0.5 * lam * (w @ w) + hinge.mean())


def fit_pegasos(
    spec: "ClassifierSpec",
    vocab_terms: tuple[str, ...],
    X: np.ndarray,
    y: np.ndarray,
    lam: float,
    epochs: int,
    projection: bool,
    rng: np.random.Generator,
) -> PegasosModel:
    n, d = X.shape
    Xb = np.hstack([X.astype(np.float64), np.ones((n, 1))])
    y_pm = np.where(y == 1, 1.0, -1.0)
    w = np.zeros(d + 1)
    radius = 1.0 / np.sqrt(lam)

    t = 0
    trace = []
    for _ in range(epochs):
        for _ in range(n):
            t += 1
            i = int(rng.integers(0, n))
            eta = 1.0 / (lam * t)
            margin = y_pm[i] * (Xb[i] @ w)
            w *= 1.0 - eta * lam
            if margin < 1.0:
                w += eta * y_pm[i] * Xb[i]
            if projection:
                norm = float(np.linalg.norm(w))
                if norm > radius:
                    w *= radius / norm
        trace.append(_objective(w, Xb, y_pm, lam))

    return PegasosModel(
        spec=spec,
        vocab_terms=vocab_terms,
        weights=w[:d].copy(),
        bias=float(w[d]),
        objective_trace=tuple(trace),
    )
