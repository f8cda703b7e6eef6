"""End-to-end pipeline: config file, sequential resumable stages, and a
deterministic artifact tree.

Stages communicate only through files in the output directory, so each one
can be re-run individually; a manifest of input digests decides when a stage
may be skipped. Two runs with the same config, seeds, and warm cache produce
byte-identical artifacts.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Callable, Optional

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:
    import tomli as tomllib

from . import botml
from . import explain as explain_mod
from . import relevance as relevance_mod
from .artifacts import read_csv, read_jsonl, sha256_file, write_csv, write_jsonl
from .enrich import (
    FixtureProvider,
    LiveProvider,
    RequestsTransport,
    ServiceId,
    Verdict,
    VerdictCache,
    enrich_dataset,
)
from .extract import DEFAULT_TLDS, ExclusionList, dedup_iocs, extract_iocs, load_tld_file
from .features import FEATURE_NAMES, FeatureVector, Timeline, compute_features
from .ingest import filter_corpus, load_archive
from .model import AccountProfile, IocFamily, IocRecord, PostRecord, canonical_json
from .preprocess import preprocess
from .reliability import (
    DEFAULT_TIMELINESS_BASELINES,
    malicious_service_sets,
    monthly_tally,
    overlap,
    prop_bot,
    reliability_counts,
    round2,
    timeliness,
)

log = logging.getLogger(__name__)


class PipelineError(Exception):
    """Aborts the run; carries the failing stage and a machine-readable code."""

    def __init__(self, stage: str, code: str, message: str) -> None:
        self.stage = stage
        self.code = code
        super().__init__(f"[stage={stage} code={code}] {message}")


@dataclass
class PipelineConfig:
    posts: str = ""
    accounts: str = ""
    botness_scores: str = ""
    relevance_labels: str = ""
    relevance_model: str = ""
    lang: str = "en"
    exclusions: str = ""
    tlds: str = ""
    services: list[str] = field(default_factory=lambda: [s.value for s in ServiceId])
    provider: str = "fixture"
    fixture_dir: str = ""
    cache_dir: str = ""
    relevance_threshold: float = 0.5
    botness_threshold: float = 0.95
    bot_model_kind: str = "random_forest"
    bot_k_features: int = 0  # 0 selects all features
    bot_n_trees: int = 100
    bot_max_depth: int = 20
    seed: int = 0
    output_dir: str = "out"
    base_dir: str = "."  # directory the config file lives in; anchors relative paths

    @classmethod
    def from_file(cls, path: str, overrides: Optional[dict[str, Any]] = None) -> "PipelineConfig":
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
        known = set(cls.__dataclass_fields__) - {"base_dir"}
        unknown = set(data) - known
        if unknown:
            raise PipelineError("config", "unknown_key", f"unknown config keys: {sorted(unknown)}")
        merged = dict(data)
        for key, value in (overrides or {}).items():
            if value is not None:
                merged[key] = value
        return cls(**merged, base_dir=str(Path(path).resolve().parent))

    def resolve(self, value: str) -> str:
        if not value:
            return value
        path = Path(value)
        return str(path if path.is_absolute() else Path(self.base_dir) / path)

    def service_ids(self) -> list[ServiceId]:
        try:
            return [ServiceId(s) for s in self.services]
        except ValueError as exc:
            raise PipelineError("config", "bad_service", str(exc)) from exc

    def validate(self) -> None:
        if not self.posts:
            raise PipelineError("config", "missing_input", "config key 'posts' is required")
        for key in ("posts", "accounts", "botness_scores", "relevance_labels", "exclusions", "tlds"):
            value = self.resolve(getattr(self, key))
            if value and not os.path.exists(value):
                raise PipelineError("config", "missing_input", f"{key} path does not exist: {value}")
        if self.provider not in ("fixture", "live"):
            raise PipelineError("config", "bad_provider", f"provider must be fixture or live, got {self.provider!r}")
        if self.provider == "fixture":
            fixture_dir = self.resolve(self.fixture_dir)
            if not fixture_dir or not os.path.isdir(fixture_dir):
                raise PipelineError(
                    "config", "missing_fixture_dir", f"fixture provider needs fixture_dir, got {fixture_dir!r}"
                )
        model_path = self.resolve(self.relevance_model)
        if not (model_path and os.path.exists(model_path)) and not self.resolve(self.relevance_labels):
            raise PipelineError(
                "config",
                "missing_input",
                "either relevance_model (existing file) or relevance_labels is required",
            )
        self.service_ids()


@dataclass
class StageContext:
    config: PipelineConfig
    outdir: Path
    transport: Optional[Any] = None
    env: Optional[dict[str, str]] = None

    def path(self, name: str) -> Path:
        return self.outdir / name


def _config_digest(config: PipelineConfig) -> str:
    import hashlib

    # Location-independent: moving the tree must not invalidate the manifest.
    payload = {k: v for k, v in asdict(config).items() if k not in ("base_dir", "output_dir")}
    return hashlib.sha256(canonical_json(payload)).hexdigest()


class Manifest:
    """Input digests per stage. Paths under the output directory are stored
    relative to it so two runs into different directories compare equal."""

    def __init__(self, path: Path) -> None:
        self.path = path
        self.outdir = path.parent.resolve()
        self.data: dict[str, Any] = {}
        if path.is_file():
            try:
                self.data = json.loads(path.read_text("utf-8"))
            except ValueError:
                self.data = {}

    def _label(self, file: str | Path) -> str:
        resolved = Path(file).resolve()
        try:
            return str(resolved.relative_to(self.outdir))
        except ValueError:
            return str(resolved)

    def digests(self, files: list[str]) -> dict[str, str]:
        return {self._label(f): sha256_file(f) for f in files if os.path.isfile(f)}

    def can_skip(self, stage: str, inputs: dict[str, str], outputs: list[Path]) -> bool:
        entry = self.data.get(stage)
        if not entry or entry.get("inputs") != inputs:
            return False
        return all(p.exists() for p in outputs)

    def record(self, stage: str, inputs: dict[str, str], outputs: list[Path]) -> None:
        self.data[stage] = {"inputs": inputs, "outputs": [self._label(p) for p in outputs]}
        self.path.write_text(json.dumps(self.data, indent=2, sort_keys=True) + "\n", "utf-8")


def run_pipeline(
    config: PipelineConfig,
    transport: Optional[Any] = None,
    env: Optional[dict[str, str]] = None,
) -> Path:
    """Execute every stage in order; returns the artifact directory.

    Raises PipelineError naming the failing stage. Partial artifacts are
    left in place for resume.
    """
    config.validate()
    outdir = Path(config.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    ctx = StageContext(config=config, outdir=outdir, transport=transport, env=env)
    manifest = Manifest(outdir / "manifest.json")
    cfg_digest = _config_digest(config)

    plan: list[tuple[str, Callable[[StageContext], None], list[str], list[str]]] = [
        ("ingest", _stage_ingest, [config.resolve(config.posts)], ["posts.jsonl", "ingest_stats.json"]),
        ("preprocess", _stage_preprocess, [str(outdir / "posts.jsonl")], ["tokens.jsonl"]),
        (
            "relevance",
            _stage_relevance,
            [str(outdir / "tokens.jsonl")]
            + [p for p in (config.resolve(config.relevance_labels), config.resolve(config.relevance_model)) if p],
            ["text_model.json", "relevant.jsonl"],
        ),
        (
            "extract",
            _stage_extract,
            [str(outdir / "posts.jsonl"), str(outdir / "relevant.jsonl")]
            + ([config.resolve(config.exclusions)] if config.exclusions else []),
            ["iocs.jsonl"],
        ),
        ("enrich", _stage_enrich, [str(outdir / "iocs.jsonl")], ["verdicts.jsonl", "enrich_failures.jsonl"]),
        (
            "metrics",
            _stage_metrics,
            [str(outdir / "iocs.jsonl"), str(outdir / "verdicts.jsonl")],
            [
                "correctness.csv",
                "timeliness_records.csv",
                "timeliness_summary.csv",
                "overlap.csv",
                "monthly.csv",
                "metrics_summary.txt",
            ],
        ),
        (
            "features",
            _stage_features,
            [str(outdir / "posts.jsonl"), config.resolve(config.accounts)],
            ["features.csv"],
        ),
        (
            "botml",
            _stage_botml,
            [str(outdir / "features.csv"), config.resolve(config.botness_scores)],
            ["bot_model.json", "bot_predictions.csv"],
        ),
        (
            "propbot",
            _stage_propbot,
            [str(outdir / "iocs.jsonl"), str(outdir / "verdicts.jsonl"), str(outdir / "bot_predictions.csv")],
            ["propbot.json"],
        ),
        (
            "explain",
            _stage_explain,
            [str(outdir / "bot_model.json"), str(outdir / "features.csv"), config.resolve(config.botness_scores)],
            ["importance.csv", "instance_explanation.csv"],
        ),
        (
            "summary",
            _stage_summary,
            [
                str(outdir / "ingest_stats.json"),
                str(outdir / "correctness.csv"),
                str(outdir / "timeliness_summary.csv"),
                str(outdir / "propbot.json"),
            ],
            ["summary.txt"],
        ),
    ]

    for name, runner, input_files, output_names in plan:
        outputs = [outdir / out for out in output_names]
        inputs = manifest.digests(input_files)
        inputs["__config__"] = cfg_digest
        if manifest.can_skip(name, inputs, outputs):
            log.info("stage %s: up to date, skipped", name)
            continue
        log.info("stage %s: running", name)
        try:
            runner(ctx)
        except PipelineError:
            raise
        except Exception as exc:
            raise PipelineError(name, "stage_failed", str(exc)) from exc
        missing = [str(p) for p in outputs if not p.exists()]
        if missing:
            raise PipelineError(name, "missing_output", f"stage did not produce: {missing}")
        manifest.record(name, manifest.digests(input_files) | {"__config__": cfg_digest}, outputs)
    return outdir


def _stage_ingest(ctx: StageContext) -> None:
    posts = load_archive(ctx.config.resolve(ctx.config.posts), strict=True)
    retained, stats = filter_corpus(posts, lang=ctx.config.lang)
    write_jsonl(ctx.path("posts.jsonl"), "ctikit.posts", (p.to_dict() for p in retained))
    ctx.path("ingest_stats.json").write_bytes(canonical_json(stats.to_dict()) + b"\n")


def _stage_preprocess(ctx: StageContext) -> None:
    rows = (
        {"post_id": data["post_id"], "tokens": preprocess(data["text"])}
        for data in read_jsonl(ctx.path("posts.jsonl"))
    )
    write_jsonl(ctx.path("tokens.jsonl"), "ctikit.tokens", rows)


def _stage_relevance(ctx: StageContext) -> None:
    config = ctx.config
    tokens = {row["post_id"]: row["tokens"] for row in read_jsonl(ctx.path("tokens.jsonl"))}

    model_path = config.resolve(config.relevance_model)
    if model_path and os.path.exists(model_path):
        model = relevance_mod.load_model(model_path)
    else:
        labeled = []
        for row in read_jsonl(config.resolve(config.relevance_labels)):
            post_id = row["post_id"]
            if post_id in tokens:
                labeled.append(
                    relevance_mod.LabeledTokenSeq(
                        post_id=post_id, tokens=tuple(tokens[post_id]), label=int(row["label"])
                    )
                )
        model = relevance_mod.train_text(
            labeled, relevance_mod.TextConfig(seed=config.seed)
        )
    relevance_mod.save_model(model, str(ctx.path("text_model.json")))

    rows = []
    for post_id in sorted(tokens):
        score = model.score(tokens[post_id])
        rows.append(
            {
                "post_id": post_id,
                "score": score,
                "relevant": score >= config.relevance_threshold,
            }
        )
    write_jsonl(ctx.path("relevant.jsonl"), "ctikit.relevance", rows)


def _stage_extract(ctx: StageContext) -> None:
    config = ctx.config
    relevant_ids = {row["post_id"] for row in read_jsonl(ctx.path("relevant.jsonl")) if row["relevant"]}
    exclusions = (
        ExclusionList.from_file(config.resolve(config.exclusions))
        if config.exclusions
        else ExclusionList()
    )
    tlds = load_tld_file(config.resolve(config.tlds)) if config.tlds else DEFAULT_TLDS
    records: list[IocRecord] = []
    for data in read_jsonl(ctx.path("posts.jsonl")):
        if data["post_id"] not in relevant_ids:
            continue
        post = PostRecord.from_dict(data)
        records.extend(extract_iocs(post, exclusions=exclusions, tlds=tlds))
    unique = dedup_iocs(records)
    write_jsonl(ctx.path("iocs.jsonl"), "ctikit.iocs", (r.to_dict() for r in unique))


def enrich_files(
    iocs_path: Path,
    verdicts_path: Path,
    failures_path: Path,
    services: list[ServiceId],
    provider: Any,
    cache: VerdictCache,
) -> None:
    iocs = [IocRecord.from_dict(d) for d in read_jsonl(iocs_path)]
    verdicts, failures = enrich_dataset(iocs, services, provider, cache=cache)
    write_jsonl(verdicts_path, "ctikit.verdicts", (v.to_dict() for v in verdicts))
    write_jsonl(failures_path, "ctikit.enrich-failures", (f.to_dict() for f in failures))


def build_provider(
    config: PipelineConfig, transport: Optional[Any] = None, env: Optional[dict[str, str]] = None
) -> Any:
    if config.provider == "fixture":
        return FixtureProvider(config.resolve(config.fixture_dir))
    return LiveProvider(
        transport=transport or RequestsTransport(),
        services=config.service_ids(),
        env=env if env is not None else dict(os.environ),
    )


def _stage_enrich(ctx: StageContext) -> None:
    config = ctx.config
    cache_dir = config.resolve(config.cache_dir) if config.cache_dir else str(ctx.path("cache"))
    enrich_files(
        ctx.path("iocs.jsonl"),
        ctx.path("verdicts.jsonl"),
        ctx.path("enrich_failures.jsonl"),
        config.service_ids(),
        build_provider(config, transport=ctx.transport, env=ctx.env),
        VerdictCache(cache_dir),
    )


def metrics_files(
    iocs_path: Path, verdicts_path: Path, outdir: Path, services: set[ServiceId]
) -> None:
    iocs = [IocRecord.from_dict(d) for d in read_jsonl(iocs_path)]
    verdicts = [Verdict.from_dict(d) for d in read_jsonl(verdicts_path)]
    outdir.mkdir(parents=True, exist_ok=True)

    counts = reliability_counts(iocs, verdicts)
    rows = []
    for family in list(IocFamily) + [None]:
        if family not in counts:
            continue
        c = counts[family]
        pct = round2(c.n_mal / c.n_ioc * 100.0) if c.n_ioc else 0.0
        rows.append((family.value if family else "total", c.n_ioc, c.n_mal, pct))
    write_csv(
        outdir / "correctness.csv",
        "ctikit.correctness",
        ["ioc_type", "n_ioc", "n_malicious", "pct_malicious"],
        rows,
    )

    record_rows = []
    summary_rows = []
    for family, baselines in DEFAULT_TIMELINESS_BASELINES.items():
        for baseline in baselines:
            if baseline not in services:
                continue
            family_iocs = [r for r in iocs if r.ioc_type.family is family]
            if not family_iocs:
                continue
            records, summary = timeliness(verdicts, family_iocs, baseline)
            for record in records:
                record_rows.append(
                    (
                        family.value,
                        baseline.value,
                        record.ioc_value,
                        record.t_twitter.isoformat(),
                        record.t_tis.isoformat(),
                        record.delta_days,
                    )
                )
            summary_rows.append(
                (
                    family.value,
                    baseline.value,
                    summary.compared.get(family, 0),
                    summary.earlier.get(family, 0),
                    round2(summary.pct_earlier(family)),
                    summary.skipped_no_date.get(family, 0),
                )
            )
    write_csv(
        outdir / "timeliness_records.csv",
        "ctikit.timeliness-records",
        ["ioc_type", "baseline", "ioc_value", "twitter_date", "tis_date", "delta_days"],
        record_rows,
    )
    write_csv(
        outdir / "timeliness_summary.csv",
        "ctikit.timeliness-summary",
        ["ioc_type", "baseline", "compared", "earlier", "pct_earlier", "skipped_no_date"],
        summary_rows,
    )

    table = overlap(verdicts)
    write_csv(
        outdir / "overlap.csv",
        "ctikit.overlap",
        ["ioc_type", "services", "exclusive_count"],
        table.to_rows(),
    )
    write_csv(
        outdir / "monthly.csv", "ctikit.monthly", ["month", "ioc_type", "count"], monthly_tally(iocs)
    )

    lines = ["indicator reliability metrics", "-" * 30, "", "correctness (% flagged by any service):"]
    for ioc_type, n_ioc, n_mal, pct in rows:
        lines.append(f"  {ioc_type:<8} {n_mal}/{n_ioc} = {pct}%")
    if summary_rows:
        lines.append("")
        lines.append("timeliness (posted before the baseline first saw it):")
        for ioc_type, baseline, compared, earlier, pct, skipped in summary_rows:
            lines.append(
                f"  {ioc_type:<8} vs {baseline:<8} {earlier}/{compared} earlier ({pct}%), "
                f"{skipped} without dates"
            )
    nonzero = [(f, label, count) for f, label, count in table.to_rows() if count]
    if nonzero:
        lines.append("")
        lines.append("overlap (exclusive intersections with at least one indicator):")
        for family, label, count in nonzero:
            lines.append(f"  {family:<8} {label:<24} {count}")
    (outdir / "metrics_summary.txt").write_text("\n".join(lines) + "\n", "utf-8")


def _stage_metrics(ctx: StageContext) -> None:
    metrics_files(
        ctx.path("iocs.jsonl"),
        ctx.path("verdicts.jsonl"),
        ctx.outdir,
        set(ctx.config.service_ids()),
    )

def features_files(posts_path: Path, accounts_path: str, out_csv: Path) -> None:
    posts = [PostRecord.from_dict(d) for d in read_jsonl(posts_path)]
    accounts = {
        a["author_id"]: AccountProfile.from_dict(a) for a in read_jsonl(accounts_path)
    }
    by_author: dict[str, list] = {}
    for post in posts:
        by_author.setdefault(post.author_id, []).append(post)

    timelines = []
    for author_id in sorted(by_author):
        account = accounts.get(author_id)
        if account is None:
            log.warning("no profile for author %s; skipped", author_id)
            continue
        timelines.append(Timeline(account=account, posts=tuple(by_author[author_id])))
    _write_feature_csv(timelines, {p.source_label for p in posts}, out_csv)


def features_from_timelines(timelines_path: Path, out_csv: Path) -> None:
    """Alternative input shape: one JSONL row per account with its posts."""
    timelines = []
    for row in read_jsonl(timelines_path):
        posts = tuple(
            sorted(
                (PostRecord.from_dict(p) for p in row["posts"]),
                key=lambda p: (p.created_at, p.post_id),
            )
        )
        timelines.append(Timeline(account=AccountProfile.from_dict(row["account"]), posts=posts))
    timelines.sort(key=lambda t: t.account.author_id)
    sources = {p.source_label for t in timelines for p in t.posts}
    _write_feature_csv(timelines, sources, out_csv)


def _write_feature_csv(timelines: list[Timeline], corpus_sources: set[str], out_csv: Path) -> None:
    rows = []
    for timeline in timelines:
        vector = compute_features(timeline, corpus_sources)
        rows.append([timeline.account.author_id, *vector.values()])
    write_csv(out_csv, "ctikit.features", ["author_id", *FEATURE_NAMES], rows)


def _stage_features(ctx: StageContext) -> None:
    features_files(
        ctx.path("posts.jsonl"),
        ctx.config.resolve(ctx.config.accounts),
        ctx.path("features.csv"),
    )


def _read_features_csv(path: Path) -> list[botml.AccountFeatures]:
    header, rows = read_csv(path)
    if header[:1] != ["author_id"] or tuple(header[1:]) != FEATURE_NAMES:
        raise ValueError(f"{path} does not carry the 47 canonical feature columns")
    out = []
    for row in rows:
        values = [float(v) for v in row[1:]]
        out.append(botml.AccountFeatures(author_id=row[0], features=FeatureVector(*values)))
    return out


def _read_botness_csv(path: str) -> dict[str, float]:
    header, rows = read_csv(path)
    if header != ["author_id", "botness"]:
        raise ValueError(f"{path} must have header author_id,botness")
    return {row[0]: float(row[1]) for row in rows}


def _stage_botml(ctx: StageContext) -> None:
    config = ctx.config
    rows = _read_features_csv(ctx.path("features.csv"))
    scores = _read_botness_csv(config.resolve(config.botness_scores))
    labeled = botml.label_accounts(rows, scores, threshold=config.botness_threshold)

    X, y = botml.matrix_from(labeled)
    train_config = botml.TrainConfig(
        k_features=config.bot_k_features or None,
        n_trees=config.bot_n_trees,
        max_depth=config.bot_max_depth,
    )
    model = botml.train_classifier(
        botml.ModelKind(config.bot_model_kind), X, y, config=train_config, seed=config.seed
    )
    botml.save_model(model, str(ctx.path("bot_model.json")))

    probabilities = model.predict_proba(X)
    prediction_rows = [
        (row.author_id, float(p), int(p >= 0.5))
        for row, p in zip(labeled, probabilities)
    ]
    write_csv(
        ctx.path("bot_predictions.csv"),
        "ctikit.bot-predictions",
        ["author_id", "probability", "predicted_bot"],
        prediction_rows,
    )


def _stage_propbot(ctx: StageContext) -> None:
    iocs = [IocRecord.from_dict(d) for d in read_jsonl(ctx.path("iocs.jsonl"))]
    verdicts = [Verdict.from_dict(d) for d in read_jsonl(ctx.path("verdicts.jsonl"))]
    _, rows = read_csv(ctx.path("bot_predictions.csv"))
    bot_authors = {row[0] for row in rows if row[2] == "1"}

    flagged = malicious_service_sets(verdicts)
    n_total = sum(1 for r in iocs if r.key in flagged)
    n_bot = sum(1 for r in iocs if r.key in flagged and r.user_name in bot_authors)
    result = {
        "n_bot_malicious": n_bot,
        "n_total_malicious": n_total,
        "prop_bot_pct": round2(prop_bot(n_bot, n_total)) if n_total else None,
    }
    ctx.path("propbot.json").write_bytes(canonical_json(result) + b"\n")


def _stage_explain(ctx: StageContext) -> None:
    config = ctx.config
    model = botml.load_model(str(ctx.path("bot_model.json")))
    rows = _read_features_csv(ctx.path("features.csv"))
    scores = _read_botness_csv(config.resolve(config.botness_scores))
    labeled = botml.label_accounts(rows, scores, threshold=config.botness_threshold)
    X, y = botml.matrix_from(labeled)

    importance = explain_mod.permutation_importance(model, X, y, repeats=5, seed=config.seed)
    write_csv(
        ctx.path("importance.csv"), "ctikit.importance", ["feature", "importance"], importance
    )

    instance = min(range(len(labeled)), key=lambda i: labeled[i].author_id)
    if model.kind is botml.ModelKind.LOGISTIC_REGRESSION:
        explanation = explain_mod.linear_contributions(
            model, X[instance], X, instance_id=labeled[instance].author_id
        )
    else:
        explanation = explain_mod.lime_explain(
            model, X[instance], n_samples=500, seed=config.seed, instance_id=labeled[instance].author_id
        )
    write_csv(
        ctx.path("instance_explanation.csv"),
        "ctikit.instance-explanation",
        ["instance_id", "scale", "feature", "contribution"],
        [
            (explanation.instance_id, explanation.scale, feature, value)
            for feature, value in explanation.ranked()
        ],
    )


def _stage_summary(ctx: StageContext) -> None:
    stats = json.loads(ctx.path("ingest_stats.json").read_text("utf-8"))
    _, correctness_rows = read_csv(ctx.path("correctness.csv"))
    _, timeliness_rows = read_csv(ctx.path("timeliness_summary.csv"))
    propbot_data = json.loads(ctx.path("propbot.json").read_text("utf-8"))

    lines = ["ctikit pipeline summary", "=" * 23, ""]
    lines.append(
        "ingest: read {total_read}, retained {retained} "
        "(lang -{non_matching_lang_dropped}, retweets -{retweets_dropped}, "
        "duplicates -{duplicates_dropped})".format(**stats)
    )
    lines.append("")
    lines.append("correctness (% of indicators any service flags):")
    for ioc_type, n_ioc, n_mal, pct in correctness_rows:
        lines.append(f"  {ioc_type:<8} {n_mal}/{n_ioc} = {pct}%")
    lines.append("")
    if timeliness_rows:
        lines.append("timeliness (posted before the baseline's first-seen date):")
        for ioc_type, baseline, compared, earlier, pct, skipped in timeliness_rows:
            lines.append(
                f"  {ioc_type:<8} vs {baseline:<8} {earlier}/{compared} earlier ({pct}%), "
                f"{skipped} without dates"
            )
        lines.append("")
    if propbot_data["prop_bot_pct"] is not None:
        lines.append(
            "automated accounts: {n_bot_malicious}/{n_total_malicious} malicious indicators "
            "({prop_bot_pct}%)".format(**propbot_data)
        )
    else:
        lines.append("automated accounts: no malicious indicators to attribute")
    lines.append("")
    ctx.path("summary.txt").write_text("\n".join(lines) + "\n", "utf-8")
