"""Command-line interface: one subcommand per pipeline stage plus `run`."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import botml
from . import explain as explain_mod
from . import relevance as relevance_mod
from .artifacts import read_jsonl, write_csv, write_jsonl
from .enrich import ServiceId
from .extract import DEFAULT_TLDS, ExclusionList, dedup_iocs, extract_iocs, load_tld_file
from .ingest import filter_corpus, load_archive
from .model import PostRecord, canonical_json
from .pipeline import (
    PipelineConfig,
    PipelineError,
    _read_botness_csv,
    _read_features_csv,
    build_provider,
    enrich_files,
    features_files,
    features_from_timelines,
    metrics_files,
    run_pipeline,
)
from .preprocess import preprocess

log = logging.getLogger("ctikit")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.handler(args)
    except PipelineError as exc:
        print(f"ctikit: error {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"ctikit: error: {exc}", file=sys.stderr)
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ctikit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="filter a post archive (language, retweets, duplicates)")
    p.add_argument("input", help="JSONL or JSONL.gz post archive")
    p.add_argument("output", help="filtered posts JSONL")
    p.add_argument("--lang", default="en")
    p.add_argument("--stats", help="write funnel counters to this JSON file")
    p.set_defaults(handler=cmd_ingest)

    p = sub.add_parser("preprocess", help="normalize post text to classifier tokens")
    p.add_argument("input", help="posts JSONL")
    p.add_argument("output", help="tokens JSONL ({post_id, tokens})")
    p.set_defaults(handler=cmd_preprocess)

    p = sub.add_parser("train-text", help="fit the relevance classifier from labeled tokens")
    p.add_argument("--tokens", required=True, help="tokens JSONL from `preprocess`")
    p.add_argument("--labels", required=True, help="labels JSONL ({post_id, label})")
    p.add_argument("--out", required=True, help="model file to write")
    p.add_argument("--learning-rate", type=float, default=0.5)
    p.add_argument("--epochs", type=int, default=300)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(handler=cmd_train_text)

    p = sub.add_parser("classify-tweets", help="score tokens with a trained relevance model")
    p.add_argument("input", help="tokens JSONL")
    p.add_argument("output", help="JSONL with {post_id, relevant, score}")
    p.add_argument("--model", required=True)
    p.add_argument("--threshold", type=float, default=0.5)
    p.set_defaults(handler=cmd_classify)

    p = sub.add_parser("extract", help="extract indicators from posts")
    p.add_argument("input", help="posts JSONL")
    p.add_argument("output", help="indicators JSONL")
    p.add_argument("--exclusions", help="file of blocked host suffixes, one per line")
    p.add_argument("--tlds", help="file of accepted final labels for bare domains")
    p.set_defaults(handler=cmd_extract)

    p = sub.add_parser("enrich", help="query threat-intelligence services for verdicts")
    p.add_argument("input", help="indicators JSONL")
    p.add_argument("output", help="verdicts JSONL")
    p.add_argument("--services", default=",".join(s.value for s in ServiceId))
    p.add_argument("--provider", choices=("fixture", "live"), default="fixture")
    p.add_argument("--fixture-dir")
    p.add_argument("--cache", required=True, help="verdict cache directory")
    p.set_defaults(handler=cmd_enrich)

    p = sub.add_parser("metrics", help="correctness, timeliness, and overlap reports")
    p.add_argument("--iocs", required=True)
    p.add_argument("--verdicts", required=True)
    p.add_argument("--outdir", required=True)
    p.add_argument("--services", default=",".join(s.value for s in ServiceId))
    p.set_defaults(handler=cmd_metrics)

    p = sub.add_parser("features", help="compute the 47 account features")
    p.add_argument("--posts", help="filtered posts JSONL (with --accounts)")
    p.add_argument("--accounts", help="account profiles JSONL (with --posts)")
    p.add_argument("--timelines", help="timelines JSONL ({account, posts}) instead of --posts/--accounts")
    p.add_argument("output", help="feature CSV")
    p.set_defaults(handler=cmd_features)

    p = sub.add_parser("train-bot", help="train the bot/human classifier")
    p.add_argument("--features", required=True, help="feature CSV")
    p.add_argument("--scores", required=True, help="CSV author_id,botness")
    p.add_argument("--out", required=True, help="model file")
    p.add_argument("--kind", choices=[k.value for k in botml.ModelKind], default="random_forest")
    p.add_argument("--threshold", type=float, default=botml.BOTNESS_THRESHOLD)
    p.add_argument("--k-features", type=int, default=0, help="0 keeps all 47")
    p.add_argument("--n-trees", type=int, default=100)
    p.add_argument("--max-depth", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(handler=cmd_train_bot)

    p = sub.add_parser("predict-bot", help="score accounts with a trained bot model")
    p.add_argument("--model", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("output", help="CSV author_id,probability,predicted_bot")
    p.set_defaults(handler=cmd_predict_bot)

    p = sub.add_parser("explain", help="explain a bot-model prediction or the model globally")
    p.add_argument("--model", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--scores", help="needed for --method perm (labels)")
    p.add_argument("--instance", help="author_id to explain")
    p.add_argument("--method", choices=("linear", "lime", "perm"), default="lime")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("output", help="CSV of (feature, contribution)")
    p.set_defaults(handler=cmd_explain)

    p = sub.add_parser("run", help="run the whole pipeline from a config file")
    p.add_argument("--config", required=True, help="TOML config file")
    p.add_argument("--outdir", help="override output_dir")
    p.add_argument("--seed", type=int, help="override seed")
    p.add_argument("--provider", choices=("fixture", "live"), help="override provider")
    p.set_defaults(handler=cmd_run)

    return parser


def cmd_ingest(args: argparse.Namespace) -> int:
    posts = load_archive(args.input, strict=True)
    retained, stats = filter_corpus(posts, lang=args.lang)
    write_jsonl(args.output, "ctikit.posts", (p.to_dict() for p in retained))
    if args.stats:
        Path(args.stats).write_bytes(canonical_json(stats.to_dict()) + b"\n")
    log.info("retained %d of %d posts", stats.retained, stats.total_read)
    return 0


def cmd_preprocess(args: argparse.Namespace) -> int:
    rows = (
        {"post_id": d["post_id"], "tokens": preprocess(d["text"])} for d in read_jsonl(args.input)
    )
    write_jsonl(args.output, "ctikit.tokens", rows)
    return 0


def _load_tokens(path: str) -> dict[str, list[str]]:
    return {row["post_id"]: list(row["tokens"]) for row in read_jsonl(path)}


def cmd_train_text(args: argparse.Namespace) -> int:
    tokens = _load_tokens(args.tokens)
    labeled = [
        relevance_mod.LabeledTokenSeq(
            post_id=row["post_id"], tokens=tuple(tokens[row["post_id"]]), label=int(row["label"])
        )
        for row in read_jsonl(args.labels)
        if row["post_id"] in tokens
    ]
    config = relevance_mod.TextConfig(
        learning_rate=args.learning_rate, epochs=args.epochs, seed=args.seed
    )
    model = relevance_mod.train_text(labeled, config)
    relevance_mod.save_model(model, args.out)
    log.info("trained on %d labeled posts", len(labeled))
    return 0


def cmd_classify(args: argparse.Namespace) -> int:
    model = relevance_mod.load_model(args.model)
    rows = []
    for row in read_jsonl(args.input):
        score = model.score(row["tokens"])
        rows.append(row | {"score": score, "relevant": score >= args.threshold})
    write_jsonl(args.output, "ctikit.relevance", rows)
    return 0


def cmd_extract(args: argparse.Namespace) -> int:
    exclusions = ExclusionList.from_file(args.exclusions) if args.exclusions else ExclusionList()
    tlds = load_tld_file(args.tlds) if args.tlds else DEFAULT_TLDS
    records = []
    for data in read_jsonl(args.input):
        records.extend(extract_iocs(PostRecord.from_dict(data), exclusions=exclusions, tlds=tlds))
    unique = dedup_iocs(records)
    write_jsonl(args.output, "ctikit.iocs", (r.to_dict() for r in unique))
    log.info("extracted %d unique indicators", len(unique))
    return 0


def cmd_enrich(args: argparse.Namespace) -> int:
    if args.provider == "fixture" and not args.fixture_dir:
        raise PipelineError("enrich", "missing_fixture_dir", "--fixture-dir is required")
    config = PipelineConfig(
        services=args.services.split(","),
        provider=args.provider,
        fixture_dir=args.fixture_dir or "",
        cache_dir=args.cache,
    )
    from .enrich import VerdictCache

    output = Path(args.output)
    enrich_files(
        Path(args.input),
        output,
        output.with_name(output.stem + "_failures.jsonl"),
        config.service_ids(),
        build_provider(config),
        VerdictCache(args.cache),
    )
    return 0


def cmd_metrics(args: argparse.Namespace) -> int:
    services = {ServiceId(s) for s in args.services.split(",")}
    outdir = Path(args.outdir)
    metrics_files(Path(args.iocs), Path(args.verdicts), outdir, services)
    print((outdir / "correctness.csv").read_text("utf-8"), end="")
    return 0


def cmd_features(args: argparse.Namespace) -> int:
    if args.timelines:
        features_from_timelines(Path(args.timelines), Path(args.output))
        return 0
    if not (args.posts and args.accounts):
        raise PipelineError("features", "missing_input", "need --timelines or both --posts and --accounts")
    features_files(Path(args.posts), args.accounts, Path(args.output))
    return 0


def cmd_train_bot(args: argparse.Namespace) -> int:
    rows = _read_features_csv(Path(args.features))
    scores = _read_botness_csv(args.scores)
    labeled = botml.label_accounts(rows, scores, threshold=args.threshold)
    X, y = botml.matrix_from(labeled)
    config = botml.TrainConfig(
        k_features=args.k_features or None, n_trees=args.n_trees, max_depth=args.max_depth
    )
    model = botml.train_classifier(botml.ModelKind(args.kind), X, y, config=config, seed=args.seed)
    botml.save_model(model, args.out)
    counts, f1 = botml.evaluate(model, X, y)
    log.info("training-set F1 %.4f (tp=%d fp=%d fn=%d tn=%d)", f1, counts.tp, counts.fp, counts.fn, counts.tn)
    return 0


def cmd_predict_bot(args: argparse.Namespace) -> int:
    model = botml.load_model(args.model)
    rows = _read_features_csv(Path(args.features))
    import numpy as np

    X = np.asarray([r.features.values() for r in rows], dtype=float)
    probabilities = model.predict_proba(X)
    write_csv(
        args.output,
        "ctikit.bot-predictions",
        ["author_id", "probability", "predicted_bot"],
        [(r.author_id, float(p), int(p >= 0.5)) for r, p in zip(rows, probabilities)],
    )
    return 0


def cmd_explain(args: argparse.Namespace) -> int:
    import numpy as np

    model = botml.load_model(args.model)
    rows = _read_features_csv(Path(args.features))
    X = np.asarray([r.features.values() for r in rows], dtype=float)

    if args.method == "perm":
        if not args.scores:
            raise PipelineError("explain", "missing_input", "--scores is required for --method perm")
        scores = _read_botness_csv(args.scores)
        labeled = botml.label_accounts(rows, scores)
        _, y = botml.matrix_from(labeled)
        ranked = explain_mod.permutation_importance(model, X, y, repeats=10, seed=args.seed)
        write_csv(args.output, "ctikit.importance", ["feature", "importance"], ranked)
        return 0

    index = 0
    if args.instance:
        ids = [r.author_id for r in rows]
        if args.instance not in ids:
            raise PipelineError("explain", "missing_instance", f"author {args.instance!r} not in features file")
        index = ids.index(args.instance)
    if args.method == "linear":
        explanation = explain_mod.linear_contributions(
            model, X[index], X, instance_id=rows[index].author_id
        )
    else:
        explanation = explain_mod.lime_explain(
            model, X[index], seed=args.seed, instance_id=rows[index].author_id
        )
    write_csv(
        args.output,
        "ctikit.instance-explanation",
        ["instance_id", "scale", "feature", "contribution"],
        [
            (explanation.instance_id, explanation.scale, feature, value)
            for feature, value in explanation.ranked()
        ],
    )
    return 0


def cmd_run(args: argparse.Namespace) -> int:
    overrides = {"output_dir": args.outdir, "seed": args.seed, "provider": args.provider}
    config = PipelineConfig.from_file(args.config, overrides=overrides)
    outdir = run_pipeline(config)
    print(f"pipeline complete: {outdir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
