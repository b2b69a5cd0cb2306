"""Shared fixtures: the hand-built funnel corpus, the seeded separable
corpus, and the acceptance-criteria reporting hook."""
from __future__ import annotations

import pytest

from needminer import datagen
from needminer.corpus import TweetRecord
from needminer.labeling import Verdict
from needminer.sampling import LabeledDataset, build_dataset
from needminer.textproc import default_config

# Filled by the acceptance suite; echoed after the run so every
# criterion shows one visible pass/fail line.
acceptance_lines: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if acceptance_lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in acceptance_lines:
            terminalreporter.write_line(line)


@pytest.fixture
def record_criterion():
    def _record(ok: bool, name: str, detail: str) -> None:
        line = f"{'PASS' if ok else 'FAIL'}  {name}  [{detail}]"
        acceptance_lines.append(line)
        assert ok, line

    return _record


def make_funnel_records() -> list[TweetRecord]:
    """Ten hand-enumerated records whose funnel is exactly 10 -> 6 -> 4 -> 3.

    Six are German; two of those carry URLs; of the remaining four, the
    retweet and the mention are the same content as each other, so the
    duplicate stage removes one. The bare variant of that content is
    English-tagged and already falls at the language stage.
    """
    return [
        TweetRecord(id="t01", text="RT @alice: Strom ist teuer", lang="de",
                    created_at="2015-04-01T10:00:00Z"),
        TweetRecord(id="t02", text="@bob Strom ist teuer", lang="de",
                    created_at="2015-04-01T10:05:00Z"),
        TweetRecord(id="t03", text="Strom ist teuer", lang="en",
                    created_at="2015-04-01T10:10:00Z"),
        TweetRecord(id="t04", text="eAuto News https://t.co/abc123", lang="de",
                    created_at="2015-04-01T10:15:00Z"),
        TweetRecord(id="t05", text="besuch www.example.de für mehr", lang="de",
                    created_at="2015-04-01T10:20:00Z"),
        TweetRecord(id="t06", text="Elektroauto laden ist teuer", lang="de",
                    created_at="2015-04-01T10:25:00Z"),
        TweetRecord(id="t07", text="Die Ladesäule ist kaputt", lang="de",
                    created_at="2015-04-01T10:30:00Z"),
        TweetRecord(id="t08", text="charging is expensive", lang="en",
                    created_at="2015-04-01T10:35:00Z"),
        TweetRecord(id="t09", text="la voiture électrique", lang="fr",
                    created_at="2015-04-01T10:40:00Z"),
        TweetRecord(id="t10", text="no language tag at all", lang="",
                    created_at="2015-04-01T10:45:00Z"),
    ]


@pytest.fixture
def funnel_records() -> list[TweetRecord]:
    return make_funnel_records()


@pytest.fixture(scope="session")
def separable_pairs():
    return datagen.generate_separable_corpus(count=200, seed=0)


@pytest.fixture(scope="session")
def cli_pipeline():
    """Run the whole file-to-file pipeline in a directory and return the
    artifact paths. Everything is seeded, so two runs with the same
    arguments must produce byte-identical artifacts."""
    from pathlib import Path

    from needminer import cli
    from needminer.corpus import write_records

    def run(workdir: Path, count: int = 60, seed: int = 0,
            repetitions: int = 2, base_seed: int = 11) -> dict[str, Path]:
        workdir.mkdir(parents=True, exist_ok=True)
        names = ("incoming", "corpus", "filtered", "votes", "labels", "dataset", "rows")
        paths = {name: workdir / f"{name}.jsonl" for name in names}
        paths["model"] = workdir / "model.json"
        paths["config"] = workdir / "needminer.cfg"
        paths["config"].write_text(
            "[paths]\n"
            f"corpus = {paths['corpus']}\n"
            f"filtered = {paths['filtered']}\n"
            f"votes = {paths['votes']}\n"
            f"export = {paths['labels']}\n"
            f"dataset = {paths['dataset']}\n"
            f"model_dir = {workdir / 'models'}\n"
            "\n[protocol]\n"
            f"repetitions = {repetitions}\n"
            f"base_seed = {base_seed}\n"
            "\n[classifier.spegasos]\n"
            "epochs = 20\n",
            encoding="utf-8",
        )

        pairs = datagen.generate_separable_corpus(count=count, seed=seed)
        write_records((record for record, _ in pairs), paths["incoming"])
        datagen.write_votes(datagen.unanimous_votes(pairs), paths["votes"])

        base = ["--config", str(paths["config"])]
        assert cli.main([*base, "ingest", str(paths["incoming"])]) == 0
        assert cli.main([*base, "filter"]) == 0
        assert cli.main([*base, "label", "export"]) == 0
        assert cli.main([*base, "dataset", "build"]) == 0
        assert cli.main(
            [*base, "train", "--algo", "naive_bayes", "--sampling", "undersampling",
             "--seed", "7", "--out", str(paths["model"])]
        ) == 0
        assert cli.main(
            [*base, "evaluate", "--grid", "--jobs", "4", "--format", "records",
             "--out", str(paths["rows"])]
        ) == 0
        return paths

    return run


@pytest.fixture(scope="session")
def separable_dataset(separable_pairs) -> LabeledDataset:
    rows = [
        (record.id, record.text, Verdict.NEED if label == "need" else Verdict.NO_NEED)
        for record, label in separable_pairs
    ]
    return build_dataset(rows, default_config())
