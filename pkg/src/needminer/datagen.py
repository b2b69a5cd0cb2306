"""Deterministic synthetic fixtures for exercising the full pipeline.

The generated corpus is a seeded, linearly separable German micro-blog
sample: every Need text contains all three cue lexemes (brauch-,
benoetig-, "fehlt"), no NoNeed text contains any of them, every text
embeds one of the bundled product keywords so ingest keeps it, and all
texts survive filtering (German, URL-free, pairwise distinct under
near-duplicate folding). Ids, timestamps, and word choices derive from
the seed alone, so two runs emit byte-identical files.

A matching unanimous vote set (three labelers agreeing with ground
truth) turns the corpus into a completed labeling session, letting the
whole ingest -> filter -> label -> dataset -> evaluate chain run
without any manual labeling.
"""
from __future__ import annotations

import argparse
import sys
from datetime import datetime, timedelta
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .corpus import KeywordSet, TweetRecord, write_records
from .filtering import dedup_key
from .labeling import LabelVote, vote_to_line
from .seeds import derive_seed
from .textproc import DEFAULT_KEYWORD_FILE

NEED = "need"
NO_NEED = "no_need"
DEFAULT_LABELERS = ("ann", "ben", "cara")

# Topic nouns; none of them is a cue lexeme and no two share a stem.
_FILLERS = (
    "akku",
    "anbieter",
    "anzeige",
    "arbeit",
    "autobahn",
    "batterie",
    "bremse",
    "einkauf",
    "familie",
    "garage",
    "heizung",
    "kabel",
    "karte",
    "komfort",
    "lack",
    "ladestation",
    "licht",
    "motor",
    "navigation",
    "parkplatz",
    "pendeln",
    "radio",
    "rechnung",
    "reichweite",
    "reifen",
    "route",
    "software",
    "stadtverkehr",
    "steckdose",
    "stecker",
    "tarif",
    "tempo",
    "urlaub",
    "verbrauch",
    "werkstatt",
    "winter",
)

_NEED_TEMPLATES = (
    "{kw}: ich brauche {f0} und benötige {f1}, mir fehlt {f2} im {f3}",
    "{kw}: wir brauchen {f0}, mir fehlt {f1} und ich benötige {f2} für {f3}",
)
_NONEED_TEMPLATES = (
    "{kw}: die {f0} und der {f1} im {f2}, dazu {f3}",
    "{kw}: {f0} mit {f1} auf der {f2}, dann {f3} und {f4}",
)


def generate_separable_corpus(
    count: int = 200,
    seed: int = 0,
    need_fraction: float = 0.3,
    keywords: KeywordSet | None = None,
) -> list[tuple[TweetRecord, str]]:
    """Seeded (record, truth-label) pairs; see the module docstring for
    the guarantees the texts carry."""
    if count < 2:
        raise ValueError("count must be >= 2")
    if not 0.0 < need_fraction < 1.0:
        raise ValueError("need_fraction must be strictly between 0 and 1")
    ks = keywords if keywords is not None else KeywordSet.from_file(DEFAULT_KEYWORD_FILE)

    n_need = min(count - 1, max(1, round(count * need_fraction)))
    labels = np.array([NEED] * n_need + [NO_NEED] * (count - n_need))
    rng = np.random.default_rng(derive_seed(seed, "corpus"))
    rng.shuffle(labels)

    base_time = datetime(2015, 4, 1)
    pairs: list[tuple[TweetRecord, str]] = []
    seen_keys: set[str] = set()
    for i, label in enumerate(labels.tolist()):
        kw = ks.keywords[i % len(ks.keywords)]
        templates = _NEED_TEMPLATES if label == NEED else _NONEED_TEMPLATES
        for _ in range(1000):
            template = templates[int(rng.integers(0, len(templates)))]
            picks = rng.choice(len(_FILLERS), size=5, replace=False)
            words = {f"f{j}": _FILLERS[int(p)] for j, p in enumerate(picks)}
            text = template.format(kw=kw, **words)
            key = dedup_key(text)
            if key not in seen_keys:
                seen_keys.add(key)
                break
        else:  # pragma: no cover - 36 fillers make collisions vanishing
            raise RuntimeError("could not generate a distinct text")
        record = TweetRecord(
            id=f"syn-{i:05d}",
            text=text,
            lang="de",
            created_at=(base_time + timedelta(minutes=i)).strftime("%Y-%m-%dT%H:%M:%SZ"),
            source="file",
        )
        pairs.append((record, label))
    return pairs


def unanimous_votes(
    pairs: Iterable[tuple[TweetRecord, str]],
    labelers: Sequence[str] = DEFAULT_LABELERS,
) -> list[LabelVote]:
    """Every labeler votes the ground truth on every record, with
    deterministic timestamps, completing all items."""
    labelers = tuple(labelers)
    if not labelers:
        raise ValueError("need at least one labeler")
    base_time = datetime(2015, 4, 8)
    votes = []
    stamp = 0
    for record, label in pairs:
        for labeler in labelers:
            votes.append(
                LabelVote(
                    item_id=record.id,
                    labeler_id=labeler,
                    has_need=label == NEED,
                    submitted_at=(base_time + timedelta(seconds=stamp)).strftime(
                        "%Y-%m-%dT%H:%M:%SZ"
                    ),
                )
            )
            stamp += 1
    return votes


def write_votes(votes: Iterable[LabelVote], path: str | Path) -> int:
    votes = list(votes)
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text("".join(vote_to_line(v) + "\n" for v in votes), encoding="utf-8")
    return len(votes)


def main(argv: Sequence[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="python -m needminer.datagen",
        description="Generate the seeded separable demo corpus and its unanimous votes.",
    )
    parser.add_argument("--corpus", required=True, help="output record file (JSON lines)")
    parser.add_argument("--votes", help="output vote file (JSON lines)")
    parser.add_argument("--count", type=int, default=200)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--need-fraction", type=float, default=0.3)
    parser.add_argument(
        "--labelers", default=",".join(DEFAULT_LABELERS), help="comma-separated labeler ids"
    )
    args = parser.parse_args(argv)

    pairs = generate_separable_corpus(args.count, args.seed, args.need_fraction)
    write_records((record for record, _ in pairs), args.corpus)
    n_need = sum(1 for _, label in pairs if label == NEED)
    print(f"wrote {len(pairs)} records ({n_need} need / {len(pairs) - n_need} no_need) to {args.corpus}")
    if args.votes:
        labelers = [l.strip() for l in args.labelers.split(",") if l.strip()]
        n_votes = write_votes(unanimous_votes(pairs, labelers), args.votes)
        print(f"wrote {n_votes} votes by {len(labelers)} labelers to {args.votes}")
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
