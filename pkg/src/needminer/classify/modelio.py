"""Save and load trained classifiers as self-contained JSON files.

A model file bundles everything needed to score new text without the
training data: the algorithm name, its resolved hyperparameters, the
fitting seed, the vocabulary, the fitted parameters, and (optionally)
the text-preprocessing configuration that produced the vocabulary.
Files are written with sorted keys and compact separators so that
saving the same model twice yields byte-identical output.

The container carries a format version; readers accept any file whose
version is at most their own and reject newer ones, so old models keep
loading after upgrades while files from a future writer fail loudly
instead of being misread.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from ..errors import CorruptModel, IoError, VersionMismatch
from ..textproc import PreprocessConfig
from . import (
    ALGORITHMS,
    ClassifierSpec,
    NaiveBayesModel,
    PegasosModel,
    RandomForestModel,
    RandomTreeModel,
    TrainedModel,
    resolve_hyperparameters,
)
from .trees import TreeNode

FORMAT_NAME = "needminer-model"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class ModelBundle:
    """A loaded model plus the preprocessing it expects, if recorded."""

    model: TrainedModel
    preprocess: PreprocessConfig | None


def _preprocess_to_obj(cfg: PreprocessConfig | None) -> dict[str, Any] | None:
    if cfg is None:
        return None
    return {
        "stopwords": sorted(cfg.stopwords),
        "suffix_rules": list(cfg.suffix_rules),
        "min_token_len": cfg.min_token_len,
        "min_stem_len": cfg.min_stem_len,
    }


def _preprocess_from_obj(obj: Any) -> PreprocessConfig | None:
    if obj is None:
        return None
    if not isinstance(obj, dict):
        raise CorruptModel("preprocess section must be an object or null")
    try:
        return PreprocessConfig(
            stopwords=frozenset(str(s) for s in obj["stopwords"]),
            suffix_rules=tuple(str(s) for s in obj["suffix_rules"]),
            min_token_len=int(obj["min_token_len"]),
            min_stem_len=int(obj["min_stem_len"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptModel(f"invalid preprocess section: {exc}") from exc


def _parameters_for(model: TrainedModel) -> dict[str, Any]:
    if isinstance(model, NaiveBayesModel):
        return {
            "class_priors": model.class_priors.tolist(),
            "prob_one": model.prob_one.tolist(),
        }
    if isinstance(model, PegasosModel):
        return {
            "weights": model.weights.tolist(),
            "bias": model.bias,
            "objective_trace": list(model.objective_trace),
        }
    if isinstance(model, RandomTreeModel):
        return {"nodes": [list(node) for node in model.nodes]}
    if isinstance(model, RandomForestModel):
        return {"trees": [[list(node) for node in nodes] for nodes in model.trees]}
    raise CorruptModel(f"unsupported model type: {type(model).__name__}")


def save_model(
    model: TrainedModel,
    path: str | Path,
    preprocess: PreprocessConfig | None = None,
) -> None:
    obj = {
        "format": FORMAT_NAME,
        "format_version": FORMAT_VERSION,
        "algorithm": model.spec.algorithm,
        "seed": model.spec.seed,
        "hyperparameters": dict(resolve_hyperparameters(model.spec)),
        "positive_class": model.positive_class,
        "vocabulary": list(model.vocab_terms),
        "preprocess": _preprocess_to_obj(preprocess),
        "parameters": _parameters_for(model),
    }
    text = json.dumps(obj, sort_keys=True, ensure_ascii=False, separators=(",", ":"))
    try:
        Path(path).write_text(text + "\n", encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot write model file {path}: {exc}") from exc


def _float_list(obj: Any, what: str) -> np.ndarray:
    try:
        arr = np.asarray(obj, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise CorruptModel(f"{what} must be numeric: {exc}") from exc
    return arr


def _nodes_from_obj(obj: Any, what: str) -> tuple[TreeNode, ...]:
    if not isinstance(obj, list) or not obj:
        raise CorruptModel(f"{what} must be a non-empty list of nodes")
    nodes = []
    for entry in obj:
        if not isinstance(entry, list) or len(entry) != 5:
            raise CorruptModel(f"{what} entries must be 5-element lists")
        try:
            nodes.append(TreeNode(*(int(v) for v in entry)))
        except (TypeError, ValueError) as exc:
            raise CorruptModel(f"{what} entries must be integers: {exc}") from exc
    for node in nodes:
        for child in (node.left, node.right):
            if child >= len(nodes) or (node.feature >= 0 and child < 0):
                raise CorruptModel(f"{what} has an out-of-range child index")
    return tuple(nodes)


def _model_from_obj(obj: dict[str, Any]) -> TrainedModel:
    algorithm = obj["algorithm"]
    if algorithm not in ALGORITHMS:
        raise CorruptModel(f"unknown algorithm: {algorithm!r}")
    hyperparameters = obj["hyperparameters"]
    if not isinstance(hyperparameters, dict):
        raise CorruptModel("hyperparameters must be an object")
    vocab = obj["vocabulary"]
    if not isinstance(vocab, list):
        raise CorruptModel("vocabulary must be a list")
    vocab_terms = tuple(str(t) for t in vocab)
    d = len(vocab_terms)
    spec = ClassifierSpec(
        algorithm=algorithm,
        hyperparameters=hyperparameters,
        seed=int(obj["seed"]),
    )
    positive_class = str(obj["positive_class"])
    params = obj["parameters"]
    if not isinstance(params, dict):
        raise CorruptModel("parameters must be an object")

    if algorithm == "naive_bayes":
        priors = _float_list(params["class_priors"], "class_priors")
        prob_one = _float_list(params["prob_one"], "prob_one")
        if priors.shape != (2,) or prob_one.shape != (2, d):
            raise CorruptModel("naive_bayes parameter shapes do not match vocabulary")
        return NaiveBayesModel(
            spec=spec,
            vocab_terms=vocab_terms,
            class_priors=priors,
            prob_one=prob_one,
            positive_class=positive_class,
        )
    if algorithm == "spegasos":
        weights = _float_list(params["weights"], "weights")
        if weights.shape != (d,):
            raise CorruptModel("spegasos weight count does not match vocabulary")
        try:
            bias = float(params["bias"])
        except (TypeError, ValueError) as exc:
            raise CorruptModel(f"bias must be a number: {exc}") from exc
        trace = tuple(float(v) for v in params.get("objective_trace", []))
        return PegasosModel(
            spec=spec,
            vocab_terms=vocab_terms,
            weights=weights,
            bias=bias,
            objective_trace=trace,
            positive_class=positive_class,
        )
    if algorithm == "random_tree":
        nodes = _nodes_from_obj(params["nodes"], "nodes")
        return RandomTreeModel(
            spec=spec, vocab_terms=vocab_terms, nodes=nodes, positive_class=positive_class
        )
    trees_obj = params["trees"]
    if not isinstance(trees_obj, list) or not trees_obj:
        raise CorruptModel("trees must be a non-empty list")
    trees = tuple(_nodes_from_obj(entry, "trees") for entry in trees_obj)
    return RandomForestModel(
        spec=spec, vocab_terms=vocab_terms, trees=trees, positive_class=positive_class
    )


def load_model(path: str | Path) -> ModelBundle:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read model file {path}: {exc}") from exc
    try:
        obj = json.loads(text)
    except ValueError as exc:
        raise CorruptModel(f"model file is not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise CorruptModel("model file must contain a JSON object")
    if obj.get("format") != FORMAT_NAME:
        raise CorruptModel(f"not a {FORMAT_NAME} file")
    version = obj.get("format_version")
    if not isinstance(version, int):
        raise CorruptModel("format_version must be an integer")
    if version > FORMAT_VERSION:
        raise VersionMismatch(
            f"model file has format_version {version}; this reader supports up to {FORMAT_VERSION}"
        )
    try:
        model = _model_from_obj(obj)
        preprocess = _preprocess_from_obj(obj.get("preprocess"))
    except KeyError as exc:
        raise CorruptModel(f"model file is missing field {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise CorruptModel(f"model file has an invalid field: {exc}") from exc
    return ModelBundle(model=model, preprocess=preprocess)
