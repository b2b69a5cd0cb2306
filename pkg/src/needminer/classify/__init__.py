"""Binary classifiers behind one uniform contract.

Four algorithms train on Boolean feature vectors and emit a real
ranking score (higher = more Need-like): Bernoulli Naive Bayes, the
stochastic Pegasos linear SVM, a randomized decision tree, and a
bagged forest of such trees. predict is Need exactly when the score
is positive; a score of 0 falls to NoNeed, the majority class.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence, Union

import numpy as np

from ..errors import (
    DimensionMismatch,
    InvalidHyperparameter,
    SingleClassTraining,
)
from ..seeds import derive_seed
from ..textproc import FeatureVector
from .naive_bayes import NaiveBayesModel, fit_naive_bayes
from .pegasos import PegasosModel, fit_pegasos
from .trees import RandomForestModel, RandomTreeModel, fit_random_forest, fit_random_tree

NEED = "need"
NO_NEED = "no_need"

ALGORITHMS = ("naive_bayes", "spegasos", "random_tree", "random_forest")

DEFAULT_HYPERPARAMETERS: dict[str, dict[str, object]] = {
    "naive_bayes": {"alpha": 1.0},
    "spegasos": {"lambda": 1e-4, "epochs": 100, "batch_size": 1, "projection": True},
    "random_tree": {"candidate_features": 0},  # 0 = ceil(sqrt(d))
    "random_forest": {"n_trees": 100, "candidate_features": 0},
}

TrainedModel = Union[NaiveBayesModel, PegasosModel, RandomTreeModel, RandomForestModel]


@dataclass(frozen=True)
class ClassifierSpec:
    """Algorithm choice, hyperparameters, and the training seed."""

    algorithm: str
    hyperparameters: Mapping[str, object] = field(default_factory=dict)
    seed: int = 0


def resolve_hyperparameters(spec: ClassifierSpec) -> dict[str, object]:
    """Merge defaults with overrides, validating names and ranges."""
    if spec.algorithm not in ALGORITHMS:
        raise InvalidHyperparameter(f"unknown algorithm {spec.algorithm!r}; choose from {ALGORITHMS}")
    merged = dict(DEFAULT_HYPERPARAMETERS[spec.algorithm])
    for key, value in spec.hyperparameters.items():
        if key not in merged:
            raise InvalidHyperparameter(f"{spec.algorithm}: unknown hyperparameter {key!r}")
        merged[key] = value
    if spec.algorithm == "naive_bayes":
        if not (isinstance(merged["alpha"], (int, float)) and merged["alpha"] > 0):
            raise InvalidHyperparameter("naive_bayes: alpha must be > 0")
    elif spec.algorithm == "spegasos":
        if not (isinstance(merged["lambda"], (int, float)) and merged["lambda"] > 0):
            raise InvalidHyperparameter("spegasos: lambda must be > 0")
        if not (isinstance(merged["epochs"], int) and merged["epochs"] >= 1):
            raise InvalidHyperparameter("spegasos: epochs must be an integer >= 1")
        if merged["batch_size"] != 1:
            raise InvalidHyperparameter("spegasos: only batch_size 1 is supported")
        if not isinstance(merged["projection"], bool):
            raise InvalidHyperparameter("spegasos: projection must be boolean")
    else:
        cand = merged["candidate_features"]
        if not (isinstance(cand, int) and cand >= 0):
            raise InvalidHyperparameter(f"{spec.algorithm}: candidate_features must be an integer >= 0")
        if spec.algorithm == "random_forest":
            if not (isinstance(merged["n_trees"], int) and merged["n_trees"] >= 1):
                raise InvalidHyperparameter("random_forest: n_trees must be an integer >= 1")
    return merged


def _training_matrix(vectors: Sequence[FeatureVector]) -> tuple[np.ndarray, np.ndarray]:
    if not vectors:
        raise SingleClassTraining("empty training set")
    # Normalize order by instance id so fit is insensitive to caller
    # ordering; id-less vectors keep their relative position at the end.
    indexed = sorted(
        enumerate(vectors),
        key=lambda pair: (pair[1].instance_id is None, pair[1].instance_id or "", pair[0]),
    )
    ordered = [fv for _, fv in indexed]
    width = len(ordered[0].bits)
    for fv in ordered:
        if len(fv.bits) != width:
            raise DimensionMismatch("training vectors differ in length")
        if fv.label not in (NEED, NO_NEED):
            raise ValueError(f"training vector needs a need/no_need label, got {fv.label!r}")
    X = np.stack([fv.bits for fv in ordered]).astype(np.uint8)
    y = np.fromiter((1 if fv.label == NEED else 0 for fv in ordered), dtype=np.int8, count=len(ordered))
    return X, y


def fit(spec: ClassifierSpec, vectors: Sequence[FeatureVector], vocab_terms: Sequence[str] | None = None) -> TrainedModel:
    """Train one model.

    vocab_terms, when given, is embedded in the model for later
    serialization and dimension checks; otherwise an anonymous
    positional vocabulary of matching width is assumed.
    """
    hp = resolve_hyperparameters(spec)
    X, y = _training_matrix(vectors)
    if len(np.unique(y)) < 2:
        raise SingleClassTraining("training set contains a single class")
    terms = tuple(vocab_terms) if vocab_terms is not None else tuple(f"f{i}" for i in range(X.shape[1]))
    if len(terms) != X.shape[1]:
        raise DimensionMismatch(f"vocabulary size {len(terms)} != vector width {X.shape[1]}")

    if spec.algorithm == "naive_bayes":
        return fit_naive_bayes(spec, terms, X, y, alpha=float(hp["alpha"]))
    if spec.algorithm == "spegasos":
        return fit_pegasos(
            spec,
            terms,
            X,
            y,
            lam=float(hp["lambda"]),
            epochs=int(hp["epochs"]),
            projection=bool(hp["projection"]),
            rng=np.random.default_rng(derive_seed(spec.seed, "pegasos")),
        )
    if spec.algorithm == "random_tree":
        return fit_random_tree(spec, terms, X, y, candidate_features=int(hp["candidate_features"]))
    return fit_random_forest(
        spec,
        terms,
        X,
        y,
        n_trees=int(hp["n_trees"]),
        candidate_features=int(hp["candidate_features"]),
    )


def _as_bits(fv: FeatureVector | np.ndarray) -> np.ndarray:
    bits = fv.bits if isinstance(fv, FeatureVector) else np.asarray(fv)
    return bits.astype(np.uint8, copy=False)


def score(model: TrainedModel, fv: FeatureVector | np.ndarray) -> float:
    """Ranking score; higher means more Need-like."""
    bits = _as_bits(fv)
    if bits.shape[0] != len(model.vocab_terms):
        raise DimensionMismatch(
            f"vector length {bits.shape[0]} != vocabulary size {len(model.vocab_terms)}"
        )
    return float(model.score_matrix(bits[None, :])[0])


def score_many(model: TrainedModel, X: np.ndarray) -> np.ndarray:
    """Vectorized scores for a (n, d) bit matrix."""
    if X.shape[1] != len(model.vocab_terms):
        raise DimensionMismatch(
            f"matrix width {X.shape[1]} != vocabulary size {len(model.vocab_terms)}"
        )
    return model.score_matrix(X.astype(np.uint8, copy=False))


def predict(model: TrainedModel, fv: FeatureVector | np.ndarray) -> str:
    """Need iff score > 0; an exact 0 tie goes to NoNeed."""
    return NEED if score(model, fv) > 0.0 else NO_NEED


def predict_many(model: TrainedModel, X: np.ndarray) -> list[str]:
    return [NEED if s > 0.0 else NO_NEED for s in score_many(model, X)]


def candidate_count(d: int, candidate_features: int) -> int:
    """Number of random split candidates per node: explicit value or
    ceil(sqrt(d)), never more than d."""
    return min(d, candidate_features if candidate_features > 0 else math.ceil(math.sqrt(d)))
