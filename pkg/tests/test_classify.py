"""The four classifiers behind the uniform fit/score/predict contract,
plus model serialization."""
from __future__ import annotations

import math

import numpy as np
import pytest

from needminer.classify import (
    ClassifierSpec,
    DEFAULT_HYPERPARAMETERS,
    candidate_count,
    fit,
    predict,
    predict_many,
    resolve_hyperparameters,
    score,
    score_many,
)
from needminer.classify.modelio import ModelBundle, load_model, save_model
from needminer.classify.trees import RandomForestModel, TreeNode
from needminer.errors import (
    CorruptModel,
    DimensionMismatch,
    InvalidHyperparameter,
    IoError,
    SingleClassTraining,
    VersionMismatch,
)
from needminer.textproc import FeatureVector, PreprocessConfig


def fv(bits, label, iid) -> FeatureVector:
    return FeatureVector(bits=np.array(bits, dtype=np.uint8), label=label, instance_id=iid)


def four_instance_fixture() -> list[FeatureVector]:
    return [
        fv([1, 0], "need", "a"),
        fv([1, 1], "need", "b"),
        fv([0, 0], "no_need", "c"),
        fv([0, 1], "no_need", "d"),
    ]


def separable_vectors(n_per_class: int = 10, d: int = 6) -> list[FeatureVector]:
    """Linearly separable bits: feature 0 marks Need, feature 1 NoNeed."""
    vectors = []
    for i in range(n_per_class):
        bits = np.zeros(d, dtype=np.uint8)
        bits[0] = 1
        bits[2] = i % 2
        vectors.append(FeatureVector(bits=bits, label="need", instance_id=f"n{i:02d}"))
    for i in range(n_per_class):
        bits = np.zeros(d, dtype=np.uint8)
        bits[1] = 1
        bits[3] = i % 2
        vectors.append(FeatureVector(bits=bits, label="no_need", instance_id=f"o{i:02d}"))
    return vectors


def train_matrix(vectors) -> tuple[np.ndarray, list[str]]:
    X = np.stack([v.bits for v in vectors])
    return X, [v.label for v in vectors]


# --- word-presence Bayes ---------------------------------------------------


def test_naive_bayes_parameters_match_hand_computation():
    model = fit(ClassifierSpec("naive_bayes"), four_instance_fixture())
    # rows: 0 = NoNeed, 1 = Need; columns follow the two features
    expected_prob_one = np.array([[0.25, 0.5], [0.75, 0.5]])
    assert np.allclose(model.prob_one, expected_prob_one, atol=1e-12, rtol=0.0)
    assert np.allclose(model.class_priors, [0.5, 0.5], atol=1e-12, rtol=0.0)


def test_naive_bayes_probabilities_sum_to_one_exactly():
    model = fit(ClassifierSpec("naive_bayes"), four_instance_fixture())
    assert np.all(model.prob_one + model.prob_zero == 1.0)


def test_naive_bayes_score_is_log_posterior_odds():
    model = fit(ClassifierSpec("naive_bayes"), four_instance_fixture())
    bits = np.array([1, 0], dtype=np.uint8)
    # log odds = log(0.5*0.75*0.5) - log(0.5*0.25*0.5) = log 3
    assert abs(score(model, bits) - math.log(3)) < 1e-12
    assert predict(model, bits) == "need"


def test_exact_zero_score_predicts_no_need():
    model = fit(
        ClassifierSpec("naive_bayes"),
        [fv([1, 0], "need", "a"), fv([0, 1], "no_need", "b")],
    )
    bits = np.array([0, 0], dtype=np.uint8)
    assert score(model, bits) == 0.0
    assert predict(model, bits) == "no_need"


def test_naive_bayes_alpha_controls_smoothing():
    strong = fit(ClassifierSpec("naive_bayes", {"alpha": 100.0}), four_instance_fixture())
    # heavy smoothing pulls conditionals toward 1/2
    assert np.all(np.abs(strong.prob_one - 0.5) < 0.01)


# --- stochastic linear separator ------------------------------------------


def test_pegasos_separates_separable_data():
    vectors = separable_vectors()
    model = fit(ClassifierSpec("spegasos", {"epochs": 30}, seed=1), vectors)
    X, labels = train_matrix(vectors)
    assert predict_many(model, X) == labels


def test_pegasos_objective_trace_has_one_entry_per_epoch():
    model = fit(ClassifierSpec("spegasos", {"epochs": 17}, seed=0), separable_vectors())
    assert len(model.objective_trace) == 17
    assert all(value >= 0.0 for value in model.objective_trace)


def test_pegasos_median_objective_is_nonincreasing_at_the_end():
    vectors = separable_vectors()
    traces = []
    for seed in range(5):
        model = fit(ClassifierSpec("spegasos", {"epochs": 100}, seed=seed), vectors)
        traces.append(model.objective_trace)
    median = np.median(np.array(traces), axis=0)
    tail = median[90:]
    assert np.all(np.diff(tail) <= 1e-9)


def test_pegasos_projection_bounds_the_weights():
    lam = 0.01
    model = fit(
        ClassifierSpec("spegasos", {"lambda": lam, "epochs": 20}, seed=2),
        separable_vectors(),
    )
    norm = math.sqrt(float(np.dot(model.weights, model.weights)) + model.bias**2)
    assert norm <= 1.0 / math.sqrt(lam) + 1e-9


def test_pegasos_is_deterministic_per_seed():
    spec = ClassifierSpec("spegasos", {"epochs": 10}, seed=9)
    a = fit(spec, separable_vectors())
    b = fit(spec, separable_vectors())
    assert np.array_equal(a.weights, b.weights) and a.bias == b.bias
    c = fit(ClassifierSpec("spegasos", {"epochs": 10}, seed=10), separable_vectors())
    assert not np.array_equal(a.weights, c.weights)


# --- randomized trees -------------------------------------------------------


def test_random_tree_fits_separable_data():
    vectors = separable_vectors()
    model = fit(ClassifierSpec("random_tree", seed=3), vectors)
    X, labels = train_matrix(vectors)
    assert predict_many(model, X) == labels


def test_random_tree_leaf_counts_drive_the_score():
    vectors = separable_vectors()
    model = fit(ClassifierSpec("random_tree", seed=3), vectors)
    need_point = np.zeros(6, dtype=np.uint8)
    need_point[0] = 1
    # a pure Need leaf scores its proportion centered at one half
    assert score(model, need_point) == pytest.approx(0.5)


def test_forest_where_every_tree_votes_need_scores_half():
    leaf_only_tree = (TreeNode(-1, -1, -1, 0, 5),)
    forest = RandomForestModel(
        spec=ClassifierSpec("random_forest"),
        vocab_terms=("w1", "w2"),
        trees=(leaf_only_tree,) * 7,
    )
    assert score(forest, np.array([0, 1], dtype=np.uint8)) == 0.5
    assert predict(forest, np.array([0, 1], dtype=np.uint8)) == "need"


def test_single_tree_forest_equals_standalone_tree():
    vectors = separable_vectors(n_per_class=12, d=9)
    tree = fit(ClassifierSpec("random_tree", seed=21), vectors)
    forest = fit(ClassifierSpec("random_forest", {"n_trees": 1}, seed=21), vectors)
    rng = np.random.default_rng(0)
    probe = rng.integers(0, 2, size=(80, 9)).astype(np.uint8)
    assert predict_many(forest, probe) == predict_many(tree, probe)


def test_forest_outvotes_individual_noise():
    vectors = separable_vectors(n_per_class=15, d=8)
    model = fit(ClassifierSpec("random_forest", {"n_trees": 25}, seed=4), vectors)
    X, labels = train_matrix(vectors)
    assert predict_many(model, X) == labels


def test_candidate_count_defaults_to_sqrt():
    assert candidate_count(9, 0) == 3
    assert candidate_count(10, 0) == 4  # ceil(sqrt(10))
    assert candidate_count(3, 5) == 3  # capped at d
    assert candidate_count(100, 7) == 7


def test_tree_is_deterministic_per_seed():
    vectors = separable_vectors()
    a = fit(ClassifierSpec("random_tree", seed=5), vectors)
    b = fit(ClassifierSpec("random_tree", seed=5), vectors)
    assert a.nodes == b.nodes


# --- shared contract --------------------------------------------------------


def test_fit_is_insensitive_to_vector_order():
    vectors = separable_vectors()
    shuffled = list(reversed(vectors))
    for algorithm in ("naive_bayes", "spegasos", "random_tree", "random_forest"):
        spec = ClassifierSpec(algorithm, seed=6)
        if algorithm == "spegasos":
            spec = ClassifierSpec(algorithm, {"epochs": 5}, seed=6)
        if algorithm == "random_forest":
            spec = ClassifierSpec(algorithm, {"n_trees": 5}, seed=6)
        a = fit(spec, vectors)
        b = fit(spec, shuffled)
        probe = np.random.default_rng(1).integers(0, 2, size=(30, 6)).astype(np.uint8)
        assert np.array_equal(score_many(a, probe), score_many(b, probe)), algorithm


def test_single_class_training_is_rejected():
    all_need = [fv([1, 0], "need", "a"), fv([0, 1], "need", "b")]
    for algorithm in ("naive_bayes", "spegasos", "random_tree", "random_forest"):
        with pytest.raises(SingleClassTraining):
            fit(ClassifierSpec(algorithm), all_need)
    with pytest.raises(SingleClassTraining):
        fit(ClassifierSpec("naive_bayes"), [])


def test_dimension_mismatch_is_rejected():
    model = fit(ClassifierSpec("naive_bayes"), four_instance_fixture())
    with pytest.raises(DimensionMismatch):
        score(model, np.array([1, 0, 1], dtype=np.uint8))
    with pytest.raises(DimensionMismatch):
        score_many(model, np.zeros((2, 5), dtype=np.uint8))
    with pytest.raises(DimensionMismatch):
        fit(ClassifierSpec("naive_bayes"), [fv([1, 0], "need", "a"), fv([1], "no_need", "b")])
    with pytest.raises(DimensionMismatch):
        fit(ClassifierSpec("naive_bayes"), four_instance_fixture(), vocab_terms=("only-one",))


def test_hyperparameter_validation():
    cases = [
        ClassifierSpec("magic"),
        ClassifierSpec("naive_bayes", {"beta": 1}),
        ClassifierSpec("naive_bayes", {"alpha": 0}),
        ClassifierSpec("spegasos", {"lambda": -1}),
        ClassifierSpec("spegasos", {"epochs": 0}),
        ClassifierSpec("spegasos", {"batch_size": 4}),
        ClassifierSpec("random_forest", {"n_trees": 0}),
        ClassifierSpec("random_tree", {"candidate_features": -1}),
    ]
    for spec in cases:
        with pytest.raises(InvalidHyperparameter):
            resolve_hyperparameters(spec)


def test_resolved_hyperparameters_merge_defaults():
    merged = resolve_hyperparameters(ClassifierSpec("spegasos", {"epochs": 3}))
    assert merged == {**DEFAULT_HYPERPARAMETERS["spegasos"], "epochs": 3}


# --- model files -------------------------------------------------------------


@pytest.mark.parametrize(
    "spec",
    [
        ClassifierSpec("naive_bayes", seed=7),
        ClassifierSpec("spegasos", {"epochs": 8}, seed=7),
        ClassifierSpec("random_tree", seed=7),
        ClassifierSpec("random_forest", {"n_trees": 9}, seed=7),
    ],
    ids=lambda spec: spec.algorithm,
)
def test_model_roundtrip_preserves_predictions(tmp_path, spec):
    vectors = separable_vectors()
    model = fit(spec, vectors, vocab_terms=tuple(f"w{i}" for i in range(6)))
    path = tmp_path / "model.json"
    save_model(model, path, preprocess=PreprocessConfig.create(stopwords=["ist"]))

    bundle = load_model(path)
    assert isinstance(bundle, ModelBundle)
    assert bundle.model.vocab_terms == model.vocab_terms
    assert "ist" in bundle.preprocess.stopwords
    probe = np.random.default_rng(2).integers(0, 2, size=(100, 6)).astype(np.uint8)
    assert predict_many(bundle.model, probe) == predict_many(model, probe)
    assert np.allclose(score_many(bundle.model, probe), score_many(model, probe))


def test_saving_twice_is_byte_identical(tmp_path):
    model = fit(ClassifierSpec("naive_bayes", seed=1), four_instance_fixture())
    save_model(model, tmp_path / "a.json")
    save_model(model, tmp_path / "b.json")
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_truncated_model_file_is_corrupt(tmp_path):
    model = fit(ClassifierSpec("naive_bayes", seed=1), four_instance_fixture())
    path = tmp_path / "model.json"
    save_model(model, path)
    raw = path.read_bytes()
    path.write_bytes(raw[: len(raw) // 2])
    with pytest.raises(CorruptModel):
        load_model(path)


def test_model_file_from_a_future_version_is_rejected(tmp_path):
    import json

    model = fit(ClassifierSpec("naive_bayes", seed=1), four_instance_fixture())
    path = tmp_path / "model.json"
    save_model(model, path)
    obj = json.loads(path.read_text())
    obj["format_version"] = 99
    path.write_text(json.dumps(obj))
    with pytest.raises(VersionMismatch):
        load_model(path)


def test_model_file_with_foreign_format_is_rejected(tmp_path):
    path = tmp_path / "model.json"
    path.write_text('{"format": "something-else", "format_version": 1}')
    with pytest.raises(CorruptModel):
        load_model(path)


def test_model_file_with_broken_tree_children_is_rejected(tmp_path):
    import json

    model = fit(ClassifierSpec("random_tree", seed=1), separable_vectors())
    path = tmp_path / "model.json"
    save_model(model, path)
    obj = json.loads(path.read_text())
    obj["parameters"]["nodes"][0][1] = 10_000  # child index out of range
    path.write_text(json.dumps(obj))
    with pytest.raises(CorruptModel):
        load_model(path)


def test_missing_model_file_is_an_io_error(tmp_path):
    with pytest.raises(IoError):
        load_model(tmp_path / "absent.json")
