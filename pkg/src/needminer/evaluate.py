"""Classification metrics, the repeated-split evaluation protocol,
leaderboards over the sampling x algorithm grid, and objective-based
model recommendation.

Metrics treat Need as the positive class. A cell (one sampling
strategy paired with one algorithm) is evaluated over several
repetitions; each repetition draws its own stratified train/test
split, builds a vocabulary from that repetition's original training
instances only, balances the training side, fits, and scores the
untouched test side. Aggregates are arithmetic means over repetitions.
A cell whose pooled predictions contain a single class is flagged
degenerate and excluded from recommendations: a predictor that calls
everything Need earns perfect recall without being usable.

All randomness is derived from (base_seed, cell name, repetition), so
cells can be evaluated in any order or in parallel without changing
results.
"""
from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from statistics import fmean
from typing import Iterable, Mapping, Sequence

import numpy as np

from .classify import ALGORITHMS, ClassifierSpec, fit, score_many
from .errors import (
    AllDegenerate,
    ClassTooSmall,
    ConfigError,
    Empty,
    IoError,
    LengthMismatch,
    MalformedLine,
    SingleClassTruth,
)
from .sampling import (
    DEFAULT_SMOTE_K,
    NEED,
    NO_NEED,
    SAMPLING_STRATEGIES,
    Instance,
    LabeledDataset,
    SplitPlan,
    apply_sampling,
    stratified_split,
    vectorize_instances,
)
from .seeds import derive_seed
from .textproc import FeatureVector, build_vocabulary, vectorize

PROTOCOL_MODES = ("split", "kfold")
OBJECTIVES = ("precision", "recall", "f1", "f05", "f2", "auc")
_OBJECTIVE_KEYS = {
    "precision": "precision_need",
    "recall": "recall_need",
    "f1": "f_1",
    "f05": "f_05",
    "f2": "f_2",
    "auc": "auc",
}
_REFERENCE_FILE = Path(__file__).parent / "data" / "reference_results.tsv"
_METRIC_FIELDS = (
    "accuracy",
    "auc",
    "precision_need",
    "recall_need",
    "precision_noneed",
    "recall_noneed",
    "f_05",
    "f_1",
    "f_2",
)


@dataclass(frozen=True)
class ConfusionMatrix:
    """Counts with Need as the positive class."""

    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


def confusion(predictions: Sequence[str], truths: Sequence[str]) -> ConfusionMatrix:
    preds = tuple(predictions)
    trus = tuple(truths)
    if len(preds) != len(trus):
        raise LengthMismatch(f"{len(preds)} predictions vs {len(trus)} truths")
    if not preds:
        raise Empty("cannot compute a confusion matrix from zero instances")
    tp = fp = fn = tn = 0
    for p, t in zip(preds, trus):
        if t == NEED:
            if p == NEED:
                tp += 1
            else:
                fn += 1
        else:
            if p == NEED:
                fp += 1
            else:
                tn += 1
    return ConfusionMatrix(tp=tp, fp=fp, fn=fn, tn=tn)


def _safe_div(num: int, den: int) -> float:
    return num / den if den else 0.0


def accuracy(cm: ConfusionMatrix) -> float:
    return (cm.tp + cm.tn) / cm.total


def precision_need(cm: ConfusionMatrix) -> float:
    return _safe_div(cm.tp, cm.tp + cm.fp)


def recall_need(cm: ConfusionMatrix) -> float:
    return _safe_div(cm.tp, cm.tp + cm.fn)


def precision_noneed(cm: ConfusionMatrix) -> float:
    return _safe_div(cm.tn, cm.tn + cm.fn)


def recall_noneed(cm: ConfusionMatrix) -> float:
    return _safe_div(cm.tn, cm.tn + cm.fp)


def f_beta(precision: float, recall: float, beta: float) -> float:
    """F_beta = (1 + beta^2) * p * r / (beta^2 * p + r), taken as 0 at
    the p == r == 0 singularity (the limit convention)."""
    denominator = beta * beta * precision + recall
    if denominator == 0.0:
        return 0.0
    return (1.0 + beta * beta) * precision * recall / denominator


def roc_auc(
    scores: Sequence[float], truths: Sequence[str]
) -> tuple[tuple[tuple[float, float], ...], float]:
    """ROC points from sweeping a threshold over the distinct score
    values, plus the trapezoidal area under them.

    The area equals the rank statistic P(score+ > score-) plus half the
    tied-pair probability. Both classes must appear in the truths.
    """
    s = np.asarray(list(scores), dtype=np.float64)
    t = tuple(truths)
    if len(s) != len(t):
        raise LengthMismatch(f"{len(s)} scores vs {len(t)} truths")
    positive = np.array([label == NEED for label in t])
    n_pos = int(positive.sum())
    n_neg = len(t) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise SingleClassTruth("ROC needs both classes in the truth labels")

    points: list[tuple[float, float]] = [(0.0, 0.0)]
    for threshold in sorted(set(s.tolist()), reverse=True):
        predicted = s >= threshold
        tpr = int((predicted & positive).sum()) / n_pos
        fpr = int((predicted & ~positive).sum()) / n_neg
        points.append((fpr, tpr))

    area = 0.0
    for (x0, y0), (x1, y1) in zip(points, points[1:]):
        area += (x1 - x0) * (y0 + y1) / 2.0
    return tuple(points), area


def roc_lines(points: Iterable[tuple[float, float]]) -> list[str]:
    """Two-column text (false positive rate, true positive rate) for
    external plotting."""
    return [f"{fpr:.6f}\t{tpr:.6f}" for fpr, tpr in points]


@dataclass(frozen=True)
class Protocol:
    """How a cell is evaluated.

    split mode runs `repetitions` independent stratified splits at
    `ratio` training fraction. kfold mode partitions each class into
    `repetitions` folds once and holds out one fold per repetition
    (ratio is then implied by the fold count).
    """

    repetitions: int = 10
    ratio: float = 2 / 3
    base_seed: int = 0
    mode: str = "split"

    def __post_init__(self) -> None:
        if self.repetitions < 1:
            raise ConfigError("protocol repetitions must be >= 1")
        if not 0.0 < self.ratio < 1.0:
            raise ConfigError("protocol ratio must be strictly between 0 and 1")
        if self.mode not in PROTOCOL_MODES:
            raise ConfigError(f"protocol mode must be one of {PROTOCOL_MODES}")
        if self.mode == "kfold" and self.repetitions < 2:
            raise ConfigError("kfold mode needs at least 2 folds")


@dataclass(frozen=True)
class RepetitionMetrics:
    """Raw per-repetition outcome, kept so aggregates stay auditable."""

    repetition: int
    seed: int
    confusion: ConfusionMatrix
    accuracy: float
    auc: float
    precision_need: float
    recall_need: float
    precision_noneed: float
    recall_noneed: float
    f_05: float
    f_1: float
    f_2: float
    scores: tuple[float, ...]
    truths: tuple[str, ...]


@dataclass(frozen=True)
class EvalReport:
    """Mean metrics over all repetitions of one cell."""

    accuracy: float
    auc: float
    precision_need: float
    recall_need: float
    precision_noneed: float
    recall_noneed: float
    f_05: float
    f_1: float
    f_2: float
    degenerate: bool
    repetitions: int
    per_repetition: tuple[RepetitionMetrics, ...] = ()


@dataclass(frozen=True)
class LeaderboardRow:
    sampling: str
    algorithm: str
    report: EvalReport

    @property
    def name(self) -> str:
        return f"{self.sampling}+{self.algorithm}"


def _fold_assignment(count: int, folds: int, seed: int) -> list[int]:
    order = np.random.default_rng(seed).permutation(count)
    assignment = [0] * count
    for position, member in enumerate(order.tolist()):
        assignment[member] = position % folds
    return assignment


def _kfold_plans(dataset: LabeledDataset, folds: int, seed: int) -> list[SplitPlan]:
    by_label = {
        NEED: sorted((i for i in dataset.instances if i.label == NEED), key=lambda i: i.item_id),
        NO_NEED: sorted(
            (i for i in dataset.instances if i.label == NO_NEED), key=lambda i: i.item_id
        ),
    }
    for label, members in by_label.items():
        if len(members) < folds:
            raise ClassTooSmall(
                f"class {label!r} has {len(members)} instance(s); {folds}-fold needs >= {folds}"
            )
    if len(by_label[NEED]) <= len(by_label[NO_NEED]):
        minority, majority = NEED, NO_NEED
    else:
        minority, majority = NO_NEED, NEED
    assignment = {
        label: _fold_assignment(len(members), folds, derive_seed(seed, label))
        for label, members in by_label.items()
    }

    def parts(label: str, fold: int) -> tuple[tuple[Instance, ...], tuple[Instance, ...]]:
        members = by_label[label]
        held = assignment[label]
        train = tuple(m for i, m in enumerate(members) if held[i] != fold)
        test = tuple(m for i, m in enumerate(members) if held[i] == fold)
        return train, test

    plans = []
    for fold in range(folds):
        a, b = parts(minority, fold)
        c, e = parts(majority, fold)
        plans.append(
            SplitPlan(
                x=tuple(by_label[minority]),
                y=tuple(by_label[majority]),
                a=a,
                c=c,
                b=b,
                e=e,
                ratio=(folds - 1) / folds,
                seed=seed,
                minority_label=minority,
                majority_label=majority,
            )
        )
    return plans


def evaluate_cell(
    dataset: LabeledDataset,
    sampling: str,
    spec: ClassifierSpec,
    protocol: Protocol = Protocol(),
    smote_k: int = DEFAULT_SMOTE_K,
) -> EvalReport:
    """Run the full protocol for one (sampling, algorithm) cell.

    Each repetition: split, build the vocabulary from the repetition's
    original training instances, vectorize, balance the training side,
    fit with a repetition-specific seed, then score the held-out test
    side. Test instances never enter the vocabulary or the sampler.
    """
    cell = f"{sampling}+{spec.algorithm}"
    fold_plans = (
        _kfold_plans(dataset, protocol.repetitions, derive_seed(protocol.base_seed, cell, "folds"))
        if protocol.mode == "kfold"
        else None
    )

    reps: list[RepetitionMetrics] = []
    pooled_predictions: set[str] = set()
    for r in range(protocol.repetitions):
        seed_r = derive_seed(protocol.base_seed, cell, r)
        if fold_plans is not None:
            plan = fold_plans[r]
        else:
            plan = stratified_split(dataset, protocol.ratio, derive_seed(seed_r, "split"))

        vocab = build_vocabulary([inst.tokens for inst in (*plan.a, *plan.c)])
        plan.a = vectorize_instances(plan.a, vocab)
        plan.c = vectorize_instances(plan.c, vocab)
        training = apply_sampling(plan, sampling, derive_seed(seed_r, "sample"), k=smote_k)
        vectors = [
            FeatureVector(bits=inst.bits, label=inst.label, instance_id=inst.item_id)
            for inst in training
        ]
        model = fit(replace(spec, seed=derive_seed(seed_r, "fit")), vectors, vocab.terms)

        test = plan.test
        X = np.stack([vectorize(inst.tokens, vocab).bits for inst in test])
        scores = score_many(model, X)
        predictions = [NEED if s > 0.0 else NO_NEED for s in scores]
        truths = [inst.label for inst in test]
        pooled_predictions.update(predictions)

        cm = confusion(predictions, truths)
        p = precision_need(cm)
        q = recall_need(cm)
        _, auc = roc_auc(scores, truths)
        reps.append(
            RepetitionMetrics(
                repetition=r,
                seed=seed_r,
                confusion=cm,
                accuracy=accuracy(cm),
                auc=auc,
                precision_need=p,
                recall_need=q,
                precision_noneed=precision_noneed(cm),
                recall_noneed=recall_noneed(cm),
                f_05=f_beta(p, q, 0.5),
                f_1=f_beta(p, q, 1.0),
                f_2=f_beta(p, q, 2.0),
                scores=tuple(float(s) for s in scores),
                truths=tuple(truths),
            )
        )

    means = {name: fmean(getattr(rep, name) for rep in reps) for name in _METRIC_FIELDS}
    return EvalReport(
        degenerate=len(pooled_predictions) == 1,
        repetitions=protocol.repetitions,
        per_repetition=tuple(reps),
        **means,
    )


def pooled_roc(report: EvalReport) -> tuple[tuple[tuple[float, float], ...], float]:
    """One ROC curve over all repetitions' test scores pooled together;
    the exportable summary curve for a cell."""
    scores: list[float] = []
    truths: list[str] = []
    for rep in report.per_repetition:
        scores.extend(rep.scores)
        truths.extend(rep.truths)
    if not scores:
        raise Empty("report carries no per-repetition scores")
    return roc_auc(scores, truths)


def leaderboard(
    dataset: LabeledDataset,
    samplings: Sequence[str] = SAMPLING_STRATEGIES,
    algorithms: Sequence[str] = ALGORITHMS,
    protocol: Protocol = Protocol(),
    hyperparameters: Mapping[str, Mapping[str, object]] | None = None,
    smote_k: int = DEFAULT_SMOTE_K,
    jobs: int = 1,
) -> tuple[LeaderboardRow, ...]:
    """Evaluate every (sampling, algorithm) cell and sort by accuracy
    descending, ties by AUC descending, then by cell name."""
    if not samplings or not algorithms:
        raise Empty("leaderboard grid is empty")
    cells = [(s, a) for s in samplings for a in algorithms]

    def run(cell: tuple[str, str]) -> LeaderboardRow:
        sampling, algorithm = cell
        spec = ClassifierSpec(
            algorithm=algorithm,
            hyperparameters=dict((hyperparameters or {}).get(algorithm, {})),
        )
        report = evaluate_cell(dataset, sampling, spec, protocol, smote_k)
        return LeaderboardRow(sampling=sampling, algorithm=algorithm, report=report)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(run, cells))
    else:
        rows = [run(cell) for cell in cells]
    return tuple(
        sorted(rows, key=lambda row: (-row.report.accuracy, -row.report.auc, row.name))
    )


@dataclass(frozen=True)
class Recommendation:
    row: LeaderboardRow
    objective: str
    value: float
    rationale: str


def recommend(rows: Sequence[LeaderboardRow], objective: str) -> Recommendation:
    """Pick the row maximizing the objective's key indicator, after
    dropping degenerate rows (a single-class predictor's perfect recall
    is an artifact, not a recommendation).

    precision -> precision_need, recall -> recall_need, f05/f1/f2 ->
    the matching F column, auc -> auc. On ties the last qualifying row
    in the given order wins, so in an accuracy-sorted table the tie
    goes to the bottom-most row.
    """
    rows = tuple(rows)
    if not rows:
        raise Empty("no rows to recommend from")
    if objective not in _OBJECTIVE_KEYS:
        raise ConfigError(f"objective must be one of {OBJECTIVES}")
    key = _OBJECTIVE_KEYS[objective]
    eligible = [row for row in rows if not row.report.degenerate]
    if not eligible:
        raise AllDegenerate("every row is degenerate; nothing to recommend")

    best = eligible[0]
    best_value = getattr(best.report, key)
    for row in eligible[1:]:
        value = getattr(row.report, key)
        if value >= best_value:
            best, best_value = row, value

    excluded = len(rows) - len(eligible)
    rationale = (
        f"{best.name} maximizes {objective} ({key.replace('_', ' ')}) "
        f"at {best_value:.3f} across {len(eligible)} non-degenerate row(s)"
        + (f"; {excluded} degenerate row(s) excluded" if excluded else "")
        + "."
    )
    return Recommendation(row=best, objective=objective, value=best_value, rationale=rationale)


def format_leaderboard(rows: Sequence[LeaderboardRow]) -> str:
    """Aligned human-readable table; accuracy printed as a percentage,
    everything else as 3-decimal fractions."""
    header = (
        f"{'Accuracy':>8}  {'AUC':>5}  {'P(Need)':>7}  {'R(Need)':>7}  "
        f"{'P(NoNeed)':>9}  {'R(NoNeed)':>9}  {'Sampling':<13}  {'Algorithm':<15}  "
        f"{'F0.5':>5}  {'F1':>5}  {'F2':>5}"
    )
    lines = [header, "-" * len(header)]
    for row in rows:
        rep = row.report
        line = (
            f"{rep.accuracy * 100:>8.3f}  {rep.auc:>5.3f}  {rep.precision_need:>7.3f}  "
            f"{rep.recall_need:>7.3f}  {rep.precision_noneed:>9.3f}  {rep.recall_noneed:>9.3f}  "
            f"{row.sampling:<13}  {row.algorithm:<15}  "
            f"{rep.f_05:>5.3f}  {rep.f_1:>5.3f}  {rep.f_2:>5.3f}"
        )
        if rep.degenerate:
            line += "  degenerate"
        lines.append(line)
    return "\n".join(lines)


def rows_to_records(rows: Sequence[LeaderboardRow]) -> list[str]:
    """Machine-readable line records (one JSON object per row)."""
    records = []
    for row in rows:
        obj: dict[str, object] = {"sampling": row.sampling, "algorithm": row.algorithm}
        for name in _METRIC_FIELDS:
            obj[name] = getattr(row.report, name)
        obj["degenerate"] = row.report.degenerate
        obj["repetitions"] = row.report.repetitions
        records.append(json.dumps(obj, sort_keys=True, ensure_ascii=False, separators=(",", ":")))
    return records


def rows_from_records(lines: Iterable[str]) -> tuple[LeaderboardRow, ...]:
    rows = []
    for number, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
            report = EvalReport(
                degenerate=bool(obj["degenerate"]),
                repetitions=int(obj["repetitions"]),
                **{name: float(obj[name]) for name in _METRIC_FIELDS},
            )
            rows.append(
                LeaderboardRow(
                    sampling=str(obj["sampling"]), algorithm=str(obj["algorithm"]), report=report
                )
            )
        except (ValueError, TypeError, KeyError) as exc:
            raise MalformedLine(f"leaderboard record {number}: {exc}") from exc
    return tuple(rows)


def load_reference_rows(path: str | Path | None = None) -> tuple[LeaderboardRow, ...]:
    """The bundled published leaderboard (29 rows, accuracy-sorted),
    usable wherever generated rows are. Rows for algorithms this
    package does not implement participate as data only."""
    source = Path(path) if path is not None else _REFERENCE_FILE
    try:
        text = source.read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read reference table {source}: {exc}") from exc
    rows = []
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 12:
            raise MalformedLine(f"reference table line {number}: expected 12 columns")
        try:
            report = EvalReport(
                accuracy=float(fields[0]) / 100.0,
                auc=float(fields[1]),
                precision_need=float(fields[2]),
                recall_need=float(fields[3]),
                precision_noneed=float(fields[4]),
                recall_noneed=float(fields[5]),
                f_05=float(fields[8]),
                f_1=float(fields[9]),
                f_2=float(fields[10]),
                degenerate=fields[11] == "1",
                repetitions=0,
            )
        except ValueError as exc:
            raise MalformedLine(f"reference table line {number}: {exc}") from exc
        rows.append(LeaderboardRow(sampling=fields[6], algorithm=fields[7], report=report))
    return tuple(rows)
