"""Stratified train/test splits and class-imbalance balancing.

A SplitPlan binds the partitions of one split: X/Y are the minority
and majority classes, A/C their training parts, B/E their test parts,
and (for SMOTE) synthetic minority instances generated between
training minority neighbors. The test side always keeps the original
class distribution; balancing touches only the training side.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ClassTooSmall, EmptyDataset, IoError, MalformedLine, MinorityTooSmall
from .labeling import Verdict
from .textproc import PreprocessConfig, Vocabulary, preprocess, vectorize

NEED = "need"
NO_NEED = "no_need"
SAMPLING_STRATEGIES = ("none", "undersampling", "oversampling", "smote")
DEFAULT_SMOTE_K = 5


@dataclass(eq=False)
class Instance:
    """One labeled training/test unit.

    tokens carry the preprocessed text until a per-split vocabulary
    exists; bits appear after vectorization. synthetic marks SMOTE
    output, which must never reach test sets or vocabulary building.
    """

    item_id: str
    label: str
    tokens: tuple[str, ...] | None = None
    bits: np.ndarray | None = None
    synthetic: bool = False


@dataclass(frozen=True)
class LabeledDataset:
    """Need/NoNeed instances, deterministically ordered by item id."""

    instances: tuple[Instance, ...]

    def count(self, label: str) -> int:
        return sum(1 for inst in self.instances if inst.label == label)

    def __len__(self) -> int:
        return len(self.instances)


def build_dataset(
    export_rows: Iterable[tuple[str, str, Verdict]],
    cfg: PreprocessConfig,
) -> LabeledDataset:
    """Turn a labeled export into preprocessed token-list instances.

    Suspend rows are excluded (disagreements train nothing); Need and
    NoNeed rows are preprocessed and kept as token lists so that each
    split can build its own vocabulary later.
    """
    label_map = {Verdict.NEED: NEED, Verdict.NO_NEED: NO_NEED}
    instances = []
    for item_id, text, verdict in sorted(export_rows, key=lambda row: row[0]):
        if verdict not in label_map:
            continue
        instances.append(
            Instance(item_id=item_id, label=label_map[verdict], tokens=tuple(preprocess(text, cfg)))
        )
    if not instances:
        raise EmptyDataset("no Need/NoNeed instances after Suspend exclusion")
    return LabeledDataset(instances=tuple(instances))


@dataclass
class SplitPlan:
    """Partitions of one stratified split (minority X, majority Y)."""

    x: tuple[Instance, ...]
    y: tuple[Instance, ...]
    a: tuple[Instance, ...]  # minority training
    c: tuple[Instance, ...]  # majority training
    b: tuple[Instance, ...]  # minority test
    e: tuple[Instance, ...]  # majority test
    ratio: float
    seed: int
    minority_label: str
    majority_label: str
    synthetic: tuple[Instance, ...] = field(default=())

    @property
    def test(self) -> tuple[Instance, ...]:
        return self.b + self.e


def _train_count(n: int, ratio: float) -> int:
    # floor, clamped so both sides stay non-empty
    return min(n - 1, max(1, math.floor(ratio * n)))


def stratified_split(ds: LabeledDataset, ratio: float = 2 / 3, seed: int = 0) -> SplitPlan:
    """Per class, draw floor(ratio * count) instances uniformly without
    replacement (seeded) into training; the remainder is the test side.

    The minority class is whichever label has fewer instances (ties go
    to Need). Each class needs at least 2 instances so both sides of
    the split are non-empty.
    """
    if not 0.0 < ratio < 1.0:
        raise ValueError("ratio must be strictly between 0 and 1")
    by_label: dict[str, list[Instance]] = {NEED: [], NO_NEED: []}
    for inst in ds.instances:
        if inst.label not in by_label:
            raise ValueError(f"unexpected label {inst.label!r}")
        by_label[inst.label].append(inst)
    for label, members in by_label.items():
        if len(members) < 2:
            raise ClassTooSmall(f"class {label!r} has {len(members)} instance(s); need >= 2")

    if len(by_label[NEED]) <= len(by_label[NO_NEED]):
        minority_label, majority_label = NEED, NO_NEED
    else:
        minority_label, majority_label = NO_NEED, NEED

    rng = np.random.default_rng(seed)
    parts: dict[str, tuple[tuple[Instance, ...], tuple[Instance, ...]]] = {}
    for label in (minority_label, majority_label):
        members = sorted(by_label[label], key=lambda inst: inst.item_id)
        k = _train_count(len(members), ratio)
        order = rng.permutation(len(members))
        train_idx = set(order[:k].tolist())
        train = tuple(m for i, m in enumerate(members) if i in train_idx)
        test = tuple(m for i, m in enumerate(members) if i not in train_idx)
        parts[label] = (train, test)

    a, b = parts[minority_label]
    c, e = parts[majority_label]
    return SplitPlan(
        x=tuple(sorted(by_label[minority_label], key=lambda i: i.item_id)),
        y=tuple(sorted(by_label[majority_label], key=lambda i: i.item_id)),
        a=a,
        c=c,
        b=b,
        e=e,
        ratio=ratio,
        seed=seed,
        minority_label=minority_label,
        majority_label=majority_label,
    )


def no_sampling(plan: SplitPlan) -> list[Instance]:
    """Identity strategy: the raw, possibly imbalanced training set."""
    return list(plan.a) + list(plan.c)


def undersample(plan: SplitPlan, seed: int = 0) -> list[Instance]:
    """A plus a uniform random |A|-subset of C; no duplicates."""
    if len(plan.a) > len(plan.c):
        raise ValueError("minority training part larger than majority")
    rng = np.random.default_rng(seed)
    chosen = rng.choice(len(plan.c), size=len(plan.a), replace=False)
    kept = [plan.c[i] for i in sorted(chosen.tolist())]
    return list(plan.a) + kept


def oversample(plan: SplitPlan, seed: int = 0) -> list[Instance]:
    """C plus A plus |C|-|A| exact duplicates drawn from A with
    replacement. Duplicates get derived ids so training order
    normalization stays total."""
    if len(plan.a) > len(plan.c):
        raise ValueError("minority training part larger than majority")
    rng = np.random.default_rng(seed)
    extra = len(plan.c) - len(plan.a)
    picks = rng.integers(0, len(plan.a), size=extra) if extra else np.empty(0, dtype=int)
    duplicates = [
        replace(plan.a[int(src)], item_id=f"{plan.a[int(src)].item_id}+dup{n}")
        for n, src in enumerate(picks)
    ]
    return list(plan.a) + duplicates + list(plan.c)


def smote(plan: SplitPlan, k: int = DEFAULT_SMOTE_K, seed: int = 0) -> list[Instance]:
    """Balance by synthesizing |C|-|A| minority instances between
    nearest minority neighbors.

    Sources rotate round-robin over a seeded shuffle of A. For each
    synthetic instance a neighbor n is drawn from the source's k'
    nearest minority neighbors (Euclidean distance on the 0/1 vectors,
    k' = min(k, |A|-1)), one blend factor g is drawn uniform in [0,1],
    and every bit where source and neighbor differ copies the neighbor
    with probability g (otherwise the source). Bits where they agree
    are fixed, so each synthetic bit always equals the source's or the
    neighbor's. The generated instances land in plan.synthetic too.
    """
    if len(plan.a) < 2:
        raise MinorityTooSmall(f"SMOTE needs >= 2 minority training instances, got {len(plan.a)}")
    if any(inst.bits is None for inst in plan.a):
        raise ValueError("SMOTE requires vectorized instances (bits missing)")
    k_eff = min(k, len(plan.a) - 1)
    if k_eff < 1:
        raise MinorityTooSmall("no minority neighbors available")

    rng = np.random.default_rng(seed)
    matrix = np.stack([inst.bits for inst in plan.a]).astype(np.float64)
    # Pairwise squared Euclidean distances; ordering equals Euclidean.
    diff = matrix[:, None, :] - matrix[None, :, :]
    dist = np.einsum("ijk,ijk->ij", diff, diff)
    np.fill_diagonal(dist, np.inf)
    # Stable argsort keeps neighbor choice deterministic under ties.
    neighbor_idx = np.argsort(dist, axis=1, kind="stable")[:, :k_eff]

    n_synth = len(plan.c) - len(plan.a)
    order = rng.permutation(len(plan.a))
    synthetics: list[Instance] = []
    for i in range(n_synth):
        src_pos = int(order[i % len(plan.a)])
        src = plan.a[src_pos]
        neighbor = plan.a[int(neighbor_idx[src_pos, int(rng.integers(0, k_eff))])]
        g = float(rng.random())
        take_neighbor = rng.random(matrix.shape[1]) < g
        bits = np.where(take_neighbor, neighbor.bits, src.bits).astype(np.uint8)
        synthetics.append(
            Instance(
                item_id=f"synthetic-{i:05d}",
                label=plan.minority_label,
                bits=bits,
                synthetic=True,
            )
        )
    plan.synthetic = tuple(synthetics)
    return list(plan.a) + synthetics + list(plan.c)


def apply_sampling(
    plan: SplitPlan,
    strategy: str,
    seed: int = 0,
    k: int = DEFAULT_SMOTE_K,
) -> list[Instance]:
    """Dispatch one strategy; SMOTE falls back to oversampling (with a
    warning) when the minority training part is a single instance."""
    if strategy == "none":
        return no_sampling(plan)
    if strategy == "undersampling":
        return undersample(plan, seed)
    if strategy == "oversampling":
        return oversample(plan, seed)
    if strategy == "smote":
        try:
            return smote(plan, k, seed)
        except MinorityTooSmall:
            warnings.warn("minority training part < 2; falling back to oversampling", stacklevel=2)
            return oversample(plan, seed)
    raise ValueError(f"unknown sampling strategy {strategy!r}")


def full_training_plan(ds: LabeledDataset) -> SplitPlan:
    """Degenerate plan that treats the whole dataset as training; used
    when fitting a final model for application to unseen data."""
    need = tuple(sorted((i for i in ds.instances if i.label == NEED), key=lambda i: i.item_id))
    noneed = tuple(sorted((i for i in ds.instances if i.label == NO_NEED), key=lambda i: i.item_id))
    if len(need) <= len(noneed):
        x, y, minority, majority = need, noneed, NEED, NO_NEED
    else:
        x, y, minority, majority = noneed, need, NO_NEED, NEED
    return SplitPlan(
        x=x, y=y, a=x, c=y, b=(), e=(),
        ratio=1.0, seed=0, minority_label=minority, majority_label=majority,
    )


def vectorize_instances(
    instances: Sequence[Instance], vocab: Vocabulary
) -> tuple[Instance, ...]:
    """Fresh copies with presence bits under the given vocabulary.

    Copies, not in-place updates: the same instances are shared across
    evaluation repetitions and each repetition has its own vocabulary,
    hence its own bit layout.
    """
    return tuple(
        Instance(
            item_id=inst.item_id,
            label=inst.label,
            tokens=inst.tokens,
            bits=vectorize(inst.tokens, vocab).bits,
        )
        for inst in instances
    )


def class_counts(instances: Sequence[Instance]) -> dict[str, int]:
    counts = {NEED: 0, NO_NEED: 0}
    for inst in instances:
        counts[inst.label] = counts.get(inst.label, 0) + 1
    return counts


def write_dataset(ds: LabeledDataset, path: str | Path) -> None:
    """One JSON object per instance ({id, label, tokens}), in id order;
    byte-identical across runs for the same dataset."""
    lines = [
        json.dumps(
            {"id": inst.item_id, "label": inst.label, "tokens": list(inst.tokens or ())},
            sort_keys=True,
            ensure_ascii=False,
            separators=(",", ":"),
        )
        for inst in ds.instances
    ]
    try:
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot write dataset file {path}: {exc}") from exc


def read_dataset(path: str | Path) -> LabeledDataset:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read dataset file {path}: {exc}") from exc
    instances = []
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
            label = str(obj["label"])
            if label not in (NEED, NO_NEED):
                raise ValueError(f"label must be {NEED!r} or {NO_NEED!r}, got {label!r}")
            instances.append(
                Instance(
                    item_id=str(obj["id"]),
                    label=label,
                    tokens=tuple(str(t) for t in obj["tokens"]),
                )
            )
        except (ValueError, TypeError, KeyError) as exc:
            raise MalformedLine(f"dataset line {number}: {exc}") from exc
    if not instances:
        raise EmptyDataset(f"dataset file {path} holds no instances")
    return LabeledDataset(instances=tuple(instances))
