"""Randomized decision trees and bagged forests on Boolean features.

Every split tests one feature bit (left = 0, right = 1) chosen as the
best Gini-impurity reduction among a random candidate subset of
ceil(sqrt(d)) features. Nodes grow until pure or until no candidate
improves impurity; there is no pruning. A leaf keeps its class counts
so the tree can emit a proportion-based score.

A forest bags n_trees such trees on bootstrap resamples and scores by
vote fraction. A single-tree forest skips the bootstrap so it is
exactly the plain randomized tree: with one tree there is nothing to
decorrelate, and the equivalence makes the two algorithms mutually
checkable.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, NamedTuple

import numpy as np

from ..seeds import derive_seed

if TYPE_CHECKING:
    from . import ClassifierSpec


class TreeNode(NamedTuple):
    feature: int  # -1 for a leaf
    left: int  # child index when bit == 0; -1 for a leaf
    right: int  # child index when bit == 1; -1 for a leaf
    count_noneed: int
    count_need: int


def _gini(counts: np.ndarray) -> float:
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts / total
    return float(1.0 - np.sum(p * p))


def _grow_tree(
    X: np.ndarray,
    y: np.ndarray,
    rng: np.random.Generator,
    n_candidates: int,
) -> tuple[TreeNode, ...]:
    d = X.shape[1]
    nodes: list[TreeNode | None] = []

    def build(idx: np.ndarray) -> int:
        node_id = len(nodes)
        nodes.append(None)
        counts = np.bincount(y[idx], minlength=2)

        best_feature = -1
        best_decrease = 0.0
        if counts[0] > 0 and counts[1] > 0:
            parent = _gini(counts)
            total = len(idx)
            candidates = rng.choice(d, size=n_candidates, replace=False)
            for j in candidates:
                right_mask = X[idx, j] == 1
                n_right = int(right_mask.sum())
                if n_right == 0 or n_right == total:
                    continue
                right_counts = np.bincount(y[idx[right_mask]], minlength=2)
                left_counts = counts - right_counts
                weighted = (
                    (total - n_right) * _gini(left_counts) + n_right * _gini(right_counts)
                ) / total
                decrease = parent - weighted
                if decrease > best_decrease + 1e-12:
                    best_decrease = decrease
                    best_feature = int(j)

        if best_feature < 0:
            nodes[node_id] = TreeNode(-1, -1, -1, int(counts[0]), int(counts[1]))
            return node_id

        right_mask = X[idx, best_feature] == 1
        left_id = build(idx[~right_mask])
        right_id = build(idx[right_mask])
        nodes[node_id] = TreeNode(best_feature, left_id, right_id, int(counts[0]), int(counts[1]))
        return node_id

    build(np.arange(X.shape[0]))
    return tuple(node for node in nodes if node is not None)


def _leaf_for(nodes: tuple[TreeNode, ...], bits: np.ndarray) -> TreeNode:
    node = nodes[0]
    while node.feature >= 0:
        node = nodes[node.right if bits[node.feature] else node.left]
    return node


def _need_proportion(nodes: tuple[TreeNode, ...], bits: np.ndarray) -> float:
    leaf = _leaf_for(nodes, bits)
    total = leaf.count_noneed + leaf.count_need
    return leaf.count_need / total if total else 0.5


@dataclass(eq=False)
class RandomTreeModel:
    spec: "ClassifierSpec"
    vocab_terms: tuple[str, ...]
    nodes: tuple[TreeNode, ...]
    positive_class: str = "need"

    def score_matrix(self, X: np.ndarray) -> np.ndarray:
        # leaf Need proportion, centered so that score > 0 <=> Need
        return np.array([_need_proportion(self.nodes, row) - 0.5 for row in X])


@dataclass(eq=False)
class RandomForestModel:
    spec: "ClassifierSpec"
    vocab_terms: tuple[str, ...]
    trees: tuple[tuple[TreeNode, ...], ...]
    positive_class: str = "need"

    def score_matrix(self, X: np.ndarray) -> np.ndarray:
        # fraction of trees voting Need, centered; an exact half-half
        # vote gives score 0 and therefore predicts NoNeed
        votes = np.zeros(X.shape[0])
        for nodes in self.trees:
            votes += np.array([1.0 if _need_proportion(nodes, row) > 0.5 else 0.0 for row in X])
        return votes / len(self.trees) - 0.5


def _tree_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(derive_seed(seed, "tree", index))


def fit_random_tree(
    spec: "ClassifierSpec",
    vocab_terms: tuple[str, ...],
    X: np.ndarray,
    y: np.ndarray,
    candidate_features: int = 0,
) -> RandomTreeModel:
    from . import candidate_count

    rng = _tree_rng(spec.seed, 0)
    n_candidates = candidate_count(X.shape[1], candidate_features)
    nodes = _grow_tree(X, y.astype(np.intp), rng, n_candidates)
    return RandomTreeModel(spec=spec, vocab_terms=vocab_terms, nodes=nodes)


def fit_random_forest(
    spec: "ClassifierSpec",
    vocab_terms: tuple[str, ...],
    X: np.ndarray,
    y: np.ndarray,
    n_trees: int = 100,
    candidate_features: int = 0,
) -> RandomForestModel:
    from . import candidate_count

    n = X.shape[0]
    n_candidates = candidate_count(X.shape[1], candidate_features)
    y = y.astype(np.intp)
    trees = []
    for t in range(n_trees):
        rng = _tree_rng(spec.seed, t)
        if n_trees == 1:
            Xt, yt = X, y
        else:
            sample = rng.integers(0, n, size=n)
            Xt, yt = X[sample], y[sample]
        trees.append(_grow_tree(Xt, yt, rng, n_candidates))
    return RandomForestModel(spec=spec, vocab_terms=vocab_terms, trees=tuple(trees))
