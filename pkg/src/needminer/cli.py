"""Command-line entry point wiring the pipeline stages.

Every stage reads and writes plain files named in the run
configuration, so any intermediate artifact can be inspected, diffed,
or regenerated in isolation:

    ingest -> corpus store -> filter -> filtered records
           -> label serve / label export -> labeled export
           -> dataset build -> dataset
           -> train / evaluate / leaderboard / recommend / predict

Exit codes: 0 success, 1 domain error (the error class name is printed
to stderr), 2 usage error. All outputs are deterministic given the
configuration; nothing seeds from the clock.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path
from typing import Sequence

from . import __version__
from .classify import ALGORITHMS, ClassifierSpec, fit, score
from .classify.modelio import load_model, save_model
from .config import RunConfig, load_config
from .corpus import CorpusStore, KeywordSet, parse_record, write_records
from .errors import NeedminerError
from .evaluate import (
    OBJECTIVES,
    LeaderboardRow,
    Protocol,
    evaluate_cell,
    format_leaderboard,
    leaderboard,
    load_reference_rows,
    pooled_roc,
    recommend,
    roc_lines,
    rows_from_records,
    rows_to_records,
)
from .filtering import report_lines, report_records, run_filters
from .labeling import LabelStore, Verdict, read_export, write_export
from .sampling import (
    NEED,
    NO_NEED,
    SAMPLING_STRATEGIES,
    apply_sampling,
    build_dataset,
    full_training_plan,
    read_dataset,
    vectorize_instances,
    write_dataset,
)
from .seeds import derive_seed
from .service import create_server, serve_forever
from .textproc import (
    FeatureVector,
    PreprocessConfig,
    Vocabulary,
    build_vocabulary,
    preprocess,
    vectorize,
)


def _preprocess_config(cfg: RunConfig) -> PreprocessConfig:
    return PreprocessConfig.load(cfg.stopwords_path, cfg.suffixes_path)


def _read_filtered_items(cfg: RunConfig) -> list[tuple[str, str]]:
    store_like = Path(cfg.filtered_path)
    if not store_like.is_file():
        raise NeedminerError(
            f"filtered record file not found: {store_like} (run the filter stage first)"
        )
    items = []
    for line in store_like.read_text(encoding="utf-8").splitlines():
        if line.strip():
            record = parse_record(line)
            items.append((record.id, record.text))
    return items


def _label_store(cfg: RunConfig, votes_required: int) -> LabelStore:
    return LabelStore(
        items=_read_filtered_items(cfg),
        votes_path=cfg.votes_path,
        votes_required=votes_required,
    )


def cmd_ingest(args: argparse.Namespace, cfg: RunConfig) -> int:
    store = CorpusStore.open(cfg.corpus_path)
    ks = KeywordSet.from_file(cfg.keywords_path)
    report = store.ingest(args.file, ks)
    print(
        f"read={report.read} matched={report.matched} duplicates={report.duplicates} "
        f"non_matching={report.non_matching} rejected={report.rejected} stored={len(store)}"
    )
    return 0


def cmd_filter(args: argparse.Namespace, cfg: RunConfig) -> int:
    store = CorpusStore.open(cfg.corpus_path)
    retained, report = run_filters(store.records())
    write_records(retained, cfg.filtered_path)
    if args.format == "records":
        print(json.dumps(report_records(report), sort_keys=True))
    else:
        print("\n".join(report_lines(report)))
        print(f"wrote {len(retained)} records to {cfg.filtered_path}")
    return 0


def cmd_label_serve(args: argparse.Namespace, cfg: RunConfig) -> int:
    store = _label_store(cfg, args.votes_required)
    host = args.host if args.host is not None else cfg.service_host
    port = args.port if args.port is not None else cfg.service_port
    ui_dir = Path(args.ui) if args.ui else cfg.ui_dir
    server = create_server(store, host=host, port=port, ui_dir=ui_dir)
    bound_host, bound_port = server.server_address[:2]
    print(f"labeling service listening on http://{bound_host}:{bound_port}/", flush=True)
    try:
        serve_forever(server)
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


def cmd_label_export(args: argparse.Namespace, cfg: RunConfig) -> int:
    store = _label_store(cfg, args.votes_required)
    rows = store.export()
    count = write_export(rows, cfg.export_path)
    by_verdict = {v: 0 for v in (Verdict.NEED, Verdict.NO_NEED, Verdict.SUSPEND)}
    for _, _, verdict in rows:
        by_verdict[verdict] += 1
    print(
        f"exported {count} completed items to {cfg.export_path} "
        f"(need={by_verdict[Verdict.NEED]} no_need={by_verdict[Verdict.NO_NEED]} "
        f"suspend={by_verdict[Verdict.SUSPEND]})"
    )
    return 0


def cmd_dataset_build(args: argparse.Namespace, cfg: RunConfig) -> int:
    rows = read_export(cfg.export_path)
    ds = build_dataset(rows, _preprocess_config(cfg))
    write_dataset(ds, cfg.dataset_path)
    print(
        f"built dataset with {len(ds)} instances "
        f"(need={ds.count(NEED)} no_need={ds.count(NO_NEED)}) at {cfg.dataset_path}"
    )
    return 0


def cmd_train(args: argparse.Namespace, cfg: RunConfig) -> int:
    ds = read_dataset(cfg.dataset_path)
    pre = _preprocess_config(cfg)
    sampling = args.sampling if args.sampling is not None else cfg.sampling_strategy
    seed = args.seed if args.seed is not None else cfg.protocol.base_seed

    plan = full_training_plan(ds)
    vocab = build_vocabulary([inst.tokens for inst in (*plan.a, *plan.c)])
    plan.a = vectorize_instances(plan.a, vocab)
    plan.c = vectorize_instances(plan.c, vocab)
    training = apply_sampling(plan, sampling, derive_seed(seed, "sample"), k=cfg.smote_k)
    vectors = [
        FeatureVector(bits=inst.bits, label=inst.label, instance_id=inst.item_id)
        for inst in training
    ]
    spec = ClassifierSpec(
        algorithm=args.algo,
        hyperparameters=dict(cfg.hyperparameters.get(args.algo, {})),
        seed=derive_seed(seed, "fit"),
    )
    model = fit(spec, vectors, vocab.terms)

    if args.out:
        out = Path(args.out)
    else:
        out = cfg.model_dir / f"{args.algo}-{sampling}-{seed}.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    save_model(model, out, preprocess=pre)
    print(f"trained {args.algo} on {len(vectors)} instances ({sampling}); model at {out}")
    return 0


def _protocol_for(args: argparse.Namespace, cfg: RunConfig) -> Protocol:
    protocol = cfg.protocol
    if getattr(args, "repetitions", None) is not None:
        protocol = replace(protocol, repetitions=args.repetitions)
    if getattr(args, "seed", None) is not None:
        protocol = replace(protocol, base_seed=args.seed)
    return protocol


def _emit_rows(rows: Sequence[LeaderboardRow], fmt: str, out: str | None) -> None:
    if fmt == "records":
        print("\n".join(rows_to_records(rows)))
    else:
        print(format_leaderboard(rows))
    if out:
        Path(out).write_text("".join(line + "\n" for line in rows_to_records(rows)), "utf-8")


def cmd_evaluate(args: argparse.Namespace, cfg: RunConfig) -> int:
    if not args.grid and (args.sampling is None or args.algo is None):
        print(
            "error: evaluate needs --grid, or both --sampling and --algo for a single cell",
            file=sys.stderr,
        )
        return 2
    ds = read_dataset(cfg.dataset_path)
    protocol = _protocol_for(args, cfg)
    if args.grid:
        rows = leaderboard(
            ds,
            protocol=protocol,
            hyperparameters=cfg.hyperparameters,
            smote_k=cfg.smote_k,
            jobs=args.jobs,
        )
        _emit_rows(rows, args.format, args.out)
        return 0
    spec = ClassifierSpec(
        algorithm=args.algo, hyperparameters=dict(cfg.hyperparameters.get(args.algo, {}))
    )
    report = evaluate_cell(ds, args.sampling, spec, protocol, smote_k=cfg.smote_k)
    row = LeaderboardRow(sampling=args.sampling, algorithm=args.algo, report=report)
    _emit_rows([row], args.format, args.out)
    if args.roc:
        points, _ = pooled_roc(report)
        Path(args.roc).write_text("".join(line + "\n" for line in roc_lines(points)), "utf-8")
    return 0


def _rows_from_args(args: argparse.Namespace) -> Sequence[LeaderboardRow]:
    if args.input:
        path = Path(args.input)
        if not path.is_file():
            raise NeedminerError(f"leaderboard record file not found: {path}")
        return rows_from_records(path.read_text(encoding="utf-8").splitlines())
    return load_reference_rows()


def cmd_leaderboard(args: argparse.Namespace, cfg: RunConfig) -> int:
    rows = _rows_from_args(args)
    if args.format == "records":
        print("\n".join(rows_to_records(rows)))
    else:
        print(format_leaderboard(rows))
    return 0


def cmd_recommend(args: argparse.Namespace, cfg: RunConfig) -> int:
    rec = recommend(_rows_from_args(args), args.objective)
    print(f"{rec.row.sampling}+{rec.row.algorithm}\t{rec.value:.3f}")
    print(rec.rationale)
    return 0


def cmd_predict(args: argparse.Namespace, cfg: RunConfig) -> int:
    bundle = load_model(args.model)
    pre = bundle.preprocess if bundle.preprocess is not None else _preprocess_config(cfg)
    vocab = Vocabulary.from_terms(bundle.model.vocab_terms)
    try:
        lines = Path(args.file).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise NeedminerError(f"cannot read input file {args.file}: {exc}") from exc
    for line in lines:
        if not line.strip():
            continue
        record = parse_record(line)
        tokens = preprocess(record.text, pre)
        value = score(bundle.model, vectorize(tokens, vocab))
        verdict = NEED if value > 0.0 else NO_NEED
        print(f"{record.id}\t{value:.6f}\t{verdict}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="needminer",
        description="Mine customer needs from German micro-blog posts: "
        "ingest, filter, crowd-label, vectorize, balance, classify, evaluate.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", metavar="FILE", help="INI run configuration")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("ingest", help="add keyword-matching records from a file to the corpus")
    p.add_argument("file", help="record file (one JSON object per line)")
    p.set_defaults(handler=cmd_ingest)

    p = sub.add_parser("filter", help="language / URL / duplicate funnel over the corpus")
    p.add_argument("--format", choices=("table", "records"), default="table")
    p.set_defaults(handler=cmd_filter)

    p = sub.add_parser("label", help="crowd-labeling session commands")
    label_sub = p.add_subparsers(dest="label_command", required=True, metavar="subcommand")
    serve = label_sub.add_parser("serve", help="run the HTTP labeling service")
    serve.add_argument("--host", default=None)
    serve.add_argument("--port", type=int, default=None)
    serve.add_argument("--ui", metavar="DIR", help="directory of static UI files served at /ui")
    serve.add_argument("--votes-required", type=int, default=3)
    serve.set_defaults(handler=cmd_label_serve)
    export = label_sub.add_parser("export", help="write completed items with verdicts")
    export.add_argument("--votes-required", type=int, default=3)
    export.set_defaults(handler=cmd_label_export)

    p = sub.add_parser("dataset", help="training-data commands")
    ds_sub = p.add_subparsers(dest="dataset_command", required=True, metavar="subcommand")
    build = ds_sub.add_parser("build", help="preprocess the labeled export into instances")
    build.set_defaults(handler=cmd_dataset_build)

    p = sub.add_parser("train", help="fit one classifier on the full dataset")
    p.add_argument("--algo", choices=ALGORITHMS, required=True)
    p.add_argument("--sampling", choices=SAMPLING_STRATEGIES, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", metavar="FILE", help="model file (default: under model_dir)")
    p.set_defaults(handler=cmd_train)

    p = sub.add_parser("evaluate", help="run the repeated-split protocol")
    p.add_argument("--grid", action="store_true", help="evaluate every sampling x algorithm cell")
    p.add_argument("--sampling", choices=SAMPLING_STRATEGIES, default=None)
    p.add_argument("--algo", choices=ALGORITHMS, default=None)
    p.add_argument("--repetitions", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--jobs", type=int, default=1, help="parallel cell evaluations")
    p.add_argument("--format", choices=("table", "records"), default="table")
    p.add_argument("--out", metavar="FILE", help="also write machine-readable row records")
    p.add_argument("--roc", metavar="FILE", help="write pooled ROC points (single cell only)")
    p.set_defaults(handler=cmd_evaluate)

    p = sub.add_parser("leaderboard", help="print rows (default: the bundled published table)")
    p.add_argument("--input", metavar="FILE", help="row records from a previous evaluate --out")
    p.add_argument("--format", choices=("table", "records"), default="table")
    p.set_defaults(handler=cmd_leaderboard)

    p = sub.add_parser("recommend", help="pick the best non-degenerate row for an objective")
    p.add_argument("--objective", choices=OBJECTIVES, required=True)
    p.add_argument("--input", metavar="FILE", help="row records from a previous evaluate --out")
    p.set_defaults(handler=cmd_recommend)

    p = sub.add_parser("predict", help="score a record file with a trained model")
    p.add_argument("--model", metavar="FILE", required=True)
    p.add_argument("file", help="record file (one JSON object per line)")
    p.set_defaults(handler=cmd_predict)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        return args.handler(args, cfg)
    except NeedminerError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def entry() -> None:  # console script
    sys.exit(main())


if __name__ == "__main__":  # pragma: no cover
    entry()
