"""Command-line pipeline: ingest -> preprocess -> featurize -> train -> evaluate.

``run`` executes the whole chain and writes a report directory; the stage
subcommands expose the same steps individually so expensive stages can be
cached as files. Every run emits a manifest (config echo, content hashes of
the inputs, seeds, corpus counts) that suffices to reproduce the report
byte for byte apart from the created_at key.
"""

from __future__ import annotations

import argparse
import dataclasses
import datetime
import hashlib
import json
import os
import sys
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from . import __version__
from . import corpus, encoder_interface, evaluation, features, models, preprocess, report

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INGEST = 3
EXIT_PREPROCESS = 4
EXIT_FEATURE = 5
EXIT_TRAIN = 6
EXIT_EVALUATE = 7

FEATURE_CHOICES = ("word_bigram", "char_4gram", "embeddings", "scores")
MODEL_CHOICES = ("logistic", "mlp", "embedding_head", "external_scores")

_NGRAM_FEATURES = ("word_bigram", "char_4gram")
_NGRAM_MODELS = ("logistic", "mlp")


class ConfigError(Exception):
    """Raised before any file is read when the configuration is invalid."""


class StageFailure(Exception):
    """An OSError inside a stage, tagged with the stage's exit code."""

    def __init__(self, stage_name: str, exit_code: int, message: str):
        super().__init__(message)
        self.stage_name = stage_name
        self.exit_code = exit_code


@contextmanager
def _stage(name: str, exit_code: int):
    """Tag file-system errors with the stage they occurred in."""
    try:
        yield
    except OSError as exc:
        raise StageFailure(name, exit_code, str(exc)) from exc


@dataclasses.dataclass
class ExperimentConfig:
    users: str
    out: str
    tweets: str | None = None
    format: str = "csv"
    source: str = corpus.SOURCE_TWEETS
    feature: str = "word_bigram"
    model: str = "logistic"
    embeddings: str | None = None
    scores: str | None = None
    folds: int = 10
    epochs: int = 5
    learning_rate: float | None = None
    batch_size: int = 32
    l2_penalty: float = 1e-4
    hidden_units: int = 64
    seed: int = 0
    threshold: float = 0.5
    train_fraction: float = 0.8
    stratified: bool = True
    cv_full: bool = False
    min_df: int | None = None
    weighting: str = features.WEIGHT_TFIDF
    min_chars: int = 5
    lemmatize: bool = True
    workers: int = 0

    def validate(self) -> None:
        if not self.users:
            raise ConfigError("a users file is required")
        if not self.out:
            raise ConfigError("an output directory is required")
        if self.format not in ("csv", "jsonl"):
            raise ConfigError(f"format must be csv or jsonl, got {self.format!r}")
        if self.source not in corpus.SOURCES:
            raise ConfigError(f"source must be one of {corpus.SOURCES}, got {self.source!r}")
        if self.feature not in FEATURE_CHOICES:
            raise ConfigError(
                f"feature must be one of {FEATURE_CHOICES}, got {self.feature!r}"
            )
        if self.model not in MODEL_CHOICES:
            raise ConfigError(f"model must be one of {MODEL_CHOICES}, got {self.model!r}")
        if (self.feature == "scores") != (self.model == "external_scores"):
            raise ConfigError("feature=scores pairs only with model=external_scores")
        if (self.feature == "embeddings") != (self.model == "embedding_head"):
            raise ConfigError("feature=embeddings pairs only with model=embedding_head")
        if self.feature == "embeddings" and not self.embeddings:
            raise ConfigError("feature=embeddings requires --embeddings")
        if self.feature == "scores" and not self.scores:
            raise ConfigError("feature=scores requires --scores")
        if self.folds < 2:
            raise ConfigError(f"folds must be >= 2, got {self.folds}")
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if not 0.0 < self.threshold < 1.0:
            raise ConfigError(f"threshold must be in (0,1), got {self.threshold}")
        if not 0.0 < self.train_fraction < 1.0:
            raise ConfigError(
                f"train fraction must be in (0,1), got {self.train_fraction}"
            )
        if self.learning_rate is not None and self.learning_rate <= 0:
            raise ConfigError(f"learning rate must be > 0, got {self.learning_rate}")
        if self.min_df is not None and self.min_df < 1:
            raise ConfigError(f"min_df must be >= 1, got {self.min_df}")
        if self.weighting not in features.WEIGHTINGS:
            raise ConfigError(
                f"weighting must be one of {features.WEIGHTINGS}, got {self.weighting!r}"
            )
        if self.min_chars < 1:
            raise ConfigError(f"min_chars must be >= 1, got {self.min_chars}")
        if self.seed < 0:
            raise ConfigError(f"seed must be an unsigned integer, got {self.seed}")
        if self.batch_size < 1:
            raise ConfigError(f"batch size must be >= 1, got {self.batch_size}")
        if self.l2_penalty < 0:
            raise ConfigError(f"l2 penalty must be >= 0, got {self.l2_penalty}")
        if self.hidden_units < 1:
            raise ConfigError(f"hidden units must be >= 1, got {self.hidden_units}")

    @property
    def resolved_learning_rate(self) -> float:
        if self.learning_rate is not None:
            return self.learning_rate
        return 0.05 if self.model == "mlp" else 0.1

    @property
    def resolved_min_df(self) -> int:
        if self.min_df is not None:
            return self.min_df
        return 2 if self.feature == "word_bigram" else 1

    @property
    def resolved_workers(self) -> int:
        return self.workers if self.workers > 0 else (os.cpu_count() or 1)

    def train_config(self) -> models.TrainConfig:
        return models.TrainConfig(
            epochs=self.epochs,
            learning_rate=self.resolved_learning_rate,
            batch_size=self.batch_size,
            l2_penalty=self.l2_penalty,
            seed=self.seed,
        )

    def featurizer_config(self) -> features.FeaturizerConfig:
        if self.feature == "word_bigram":
            return features.word_bigram_config(self.resolved_min_df, self.weighting)
        if self.feature == "char_4gram":
            return features.char_fourgram_config(self.resolved_min_df, self.weighting)
        raise ConfigError(f"feature {self.feature!r} has no n-gram featurizer")

    def preprocess_config(self) -> preprocess.PreprocessConfig:
        return preprocess.default_config(
            min_chars=self.min_chars, apply_lemmatization=self.lemmatize
        )

    def split_spec(self) -> corpus.SplitSpec:
        return corpus.SplitSpec(
            train_fraction=self.train_fraction, seed=self.seed, stratified=self.stratified
        )

    def to_dict(self) -> dict:
        echo = dataclasses.asdict(self)
        echo["learning_rate"] = self.resolved_learning_rate
        echo["min_df"] = self.resolved_min_df
        return echo


_CONFIG_FIELDS = {f.name for f in dataclasses.fields(ExperimentConfig)}
_FIELD_DEFAULTS = {
    f.name: (None if f.default is dataclasses.MISSING else f.default)
    for f in dataclasses.fields(ExperimentConfig)
}
_BOOL_FIELDS = {"stratified", "cv_full", "lemmatize"}
_INT_FIELDS = {
    "folds", "epochs", "batch_size", "hidden_units", "seed", "min_df",
    "min_chars", "workers",
}
_FLOAT_FIELDS = {"learning_rate", "l2_penalty", "threshold", "train_fraction"}


def _coerce_config_value(key: str, raw: str):
    if key in _BOOL_FIELDS:
        lowered = raw.strip().lower()
        if lowered in ("true", "1", "yes", "on"):
            return True
        if lowered in ("false", "0", "no", "off"):
            return False
        raise ConfigError(f"config key {key}: expected a boolean, got {raw!r}")
    if key in _INT_FIELDS:
        try:
            return int(raw)
        except ValueError as exc:
            raise ConfigError(f"config key {key}: expected an integer, got {raw!r}") from exc
    if key in _FLOAT_FIELDS:
        try:
            return float(raw)
        except ValueError as exc:
            raise ConfigError(f"config key {key}: expected a number, got {raw!r}") from exc
    return raw


def load_config_file(path) -> dict:
    """Parse a KEY=VALUE config file; # starts a comment line."""
    values: dict = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        key, sep, raw = stripped.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(f"{path}: line {line_no}: expected KEY=VALUE")
        if key not in _CONFIG_FIELDS:
            raise ConfigError(f"{path}: line {line_no}: unknown config key {key!r}")
        values[key] = _coerce_config_value(key, raw.strip())
    return values


def _experiment_config_from_args(args: argparse.Namespace, file_values: dict | None = None) -> ExperimentConfig:
    """Merge precedence: explicit flag > config-file value > built-in default.

    A flag left at its default is indistinguishable from an omitted one, so
    the config file wins for it.
    """
    file_values = file_values or {}

    def pick(name: str, arg_value):
        if arg_value != _FIELD_DEFAULTS[name]:
            return arg_value
        return file_values.get(name, arg_value)

    return ExperimentConfig(
        users=pick("users", args.users),
        out=pick("out", args.out),
        tweets=pick("tweets", args.tweets),
        format=pick("format", args.format),
        source=pick("source", args.source),
        feature=pick("feature", args.feature),
        model=pick("model", args.model),
        embeddings=pick("embeddings", args.embeddings),
        scores=pick("scores", args.scores),
        folds=pick("folds", args.folds),
        epochs=pick("epochs", args.epochs),
        learning_rate=pick("learning_rate", args.learning_rate),
        batch_size=pick("batch_size", args.batch_size),
        l2_penalty=pick("l2_penalty", args.l2_penalty),
        hidden_units=pick("hidden_units", args.hidden_units),
        seed=pick("seed", args.seed),
        threshold=pick("threshold", args.threshold),
        train_fraction=pick("train_fraction", args.split),
        stratified=pick("stratified", not args.no_stratify),
        cv_full=pick("cv_full", args.cv_full),
        min_df=pick("min_df", args.min_df),
        weighting=pick("weighting", args.weighting),
        min_chars=pick("min_chars", args.min_chars),
        lemmatize=pick("lemmatize", not args.no_lemmatize),
        workers=pick("workers", args.workers),
    )


def _sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def _utc_now() -> str:
    return datetime.datetime.now(datetime.timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%fZ")


def _ngram_trainer(cfg: ExperimentConfig):
    fcfg = cfg.featurizer_config()

    def trainer(train_items, train_labels, tcfg):
        vocab = features.build_vocabulary(train_items, fcfg)
        pairs = [
            (features.vectorize(doc, vocab, fcfg), label)
            for doc, label in zip(train_items, train_labels)
        ]
        if cfg.model == "logistic":
            model = models.train_logistic(pairs, tcfg)
        else:
            model = models.train_mlp(pairs, cfg.hidden_units, tcfg)

        def scorer(items):
            matrix = features.stack_vectors(
                [features.vectorize(doc, vocab, fcfg) for doc in items]
            )
            return models.predict_proba_batch(model, matrix)

        trainer.last_model = model
        trainer.last_vocabulary = vocab
        return scorer

    return trainer


def _head_trainer():
    def trainer(train_items, train_labels, tcfg):
        pairs = list(zip(train_items, train_labels))
        model = models.train_embedding_head(pairs, tcfg)

        def scorer(items):
            matrix = np.array([np.asarray(v, dtype=float) for v in items])
            return models.predict_proba_batch(model, matrix)

        trainer.last_model = model
        return scorer

    return trainer


def _roc_point_rows(roc: evaluation.RocCurve) -> list:
    return [
        [fpr, tpr, None if t == float("inf") else t]
        for (fpr, tpr), t in zip(roc.points, roc.thresholds)
    ]


def _scored_section(scores, labels, threshold: float) -> dict:
    matrix = evaluation.confusion(scores, labels, threshold)
    metrics = evaluation.metrics_from_confusion(matrix)
    section = {
        "confusion": matrix.to_dict(),
        "metrics": metrics.to_dict(),
        "auc": None,
        "roc_points": None,
    }
    if len(set(labels)) == 2:
        roc = evaluation.roc_curve(scores, labels)
        section["auc"] = roc.auc
        section["roc_points"] = _roc_point_rows(roc)
    return section


def run_experiment(cfg: ExperimentConfig) -> dict:
    """Execute the full pipeline and write the report directory.

    Returns the dictionary that was written to report.json.
    """
    cfg.validate()
    with _stage("config", EXIT_CONFIG):
        out_dir = Path(cfg.out)
        out_dir.mkdir(parents=True, exist_ok=True)

    with _stage("ingest", EXIT_INGEST):
        users = corpus.load_users(cfg.users, cfg.tweets, format=cfg.format)
        dataset = corpus.build_documents(users, cfg.source)

    with _stage("preprocess", EXIT_PREPROCESS):
        pcfg = cfg.preprocess_config()
        cleaned = preprocess.preprocess_corpus(
            dataset.documents, pcfg, workers=cfg.resolved_workers
        )
        kept = [doc for doc in cleaned if not doc.dropped]
        drop_reasons = {reason: 0 for reason in preprocess.DROP_REASONS}
        for doc in cleaned:
            if doc.dropped:
                drop_reasons[doc.drop_reason] += 1
        if not kept:
            raise preprocess.PreprocessError("every document was dropped by preprocessing")
        preprocess.write_clean_corpus(cleaned, out_dir / "cleaned.jsonl")

    counts = {
        "users_total": len(users),
        "users_without_source": len(users) - len(dataset.documents),
        "documents_in": len(dataset.documents),
        "dropped": sum(drop_reasons.values()),
        "dropped_by_reason": drop_reasons,
        "used": len(kept),
    }

    report_dict = _evaluate_cleaned(cfg, kept, counts, out_dir)

    manifest = {
        "created_at": report_dict["created_at"],
        "tool_version": __version__,
        "config": cfg.to_dict(),
        "inputs": _input_hashes(cfg),
        "counts": counts,
    }
    with _stage("evaluate", EXIT_EVALUATE):
        report.write_report_json(manifest, out_dir / "manifest.json")
    return report_dict


def _input_hashes(cfg: ExperimentConfig) -> dict:
    hashes = {}
    with _stage("config", EXIT_CONFIG):
        for key, path in (
            ("users", cfg.users),
            ("tweets", cfg.tweets),
            ("embeddings", cfg.embeddings),
            ("scores", cfg.scores),
        ):
            if path:
                hashes[key] = {"path": str(path), "sha256": _sha256(path)}
    return hashes


def _evaluate_cleaned(cfg: ExperimentConfig, kept, counts: dict, out_dir: Path) -> dict:
    """Shared evaluation tail used by both ``run`` and ``evaluate``."""
    threshold = cfg.threshold
    tcfg = cfg.train_config()
    config_echo = cfg.to_dict()
    config_echo.pop("out")  # keep report bytes independent of the target dir
    report_dict = {
        "created_at": _utc_now(),
        "tool_version": __version__,
        "config": config_echo,
        "counts": counts,
        "cv": None,
        "holdout": None,
        "external": None,
    }

    if cfg.feature == "scores":
        with _stage("feature", EXIT_FEATURE):
            score_set = encoder_interface.load_scores(cfg.scores)
            aligned = encoder_interface.align(kept, score_set)
        scores = [score for _, score in aligned.pairs]
        labels = [doc.label for doc, _ in aligned.pairs]
        external = _scored_section(scores, labels, threshold)
        external.update(
            {
                "model_name": score_set.model_name,
                "aligned": len(aligned.pairs),
                "unmatched_documents": aligned.unmatched_documents,
                "unmatched_entries": aligned.unmatched_entries,
            }
        )
        report_dict["external"] = external
        with _stage("evaluate", EXIT_EVALUATE):
            report.write_confusion_csv(external["confusion"], out_dir / "confusion.csv")
            if external["roc_points"] is not None:
                report.write_roc_csv(external["roc_points"], out_dir / "roc.csv")
            report.write_report_json(report_dict, out_dir / "report.json")
        return report_dict

    if cfg.feature == "embeddings":
        with _stage("feature", EXIT_FEATURE):
            embedding_set = encoder_interface.load_embeddings(cfg.embeddings)
            aligned = encoder_interface.align(kept, embedding_set)
        items = [vector for _, vector in aligned.pairs]
        labels = [doc.label for doc, _ in aligned.pairs]
        counts["aligned"] = len(aligned.pairs)
        counts["unmatched_documents"] = aligned.unmatched_documents
        counts["unmatched_entries"] = aligned.unmatched_entries
        trainer = _head_trainer()
    else:
        items = kept
        labels = [doc.label for doc in kept]
        trainer = _ngram_trainer(cfg)

    if cfg.cv_full:
        cv_items, cv_labels = items, labels
        holdout_items = holdout_labels = None
    else:
        train_idx, test_idx = _split_indices(labels, cfg.split_spec())
        cv_items = [items[i] for i in train_idx]
        cv_labels = [labels[i] for i in train_idx]
        holdout_items = [items[i] for i in test_idx]
        holdout_labels = [labels[i] for i in test_idx]

    cv_report = evaluation.cross_validate(
        cv_items,
        cv_labels,
        trainer,
        k=cfg.folds,
        cfg=tcfg,
        threshold=threshold,
        stratified=cfg.stratified,
    )
    report_dict["cv"] = cv_report.to_dict()

    final_model = None
    vocabulary = None
    if holdout_items is not None:
        scorer = trainer(cv_items, cv_labels, tcfg)
        final_model = trainer.last_model
        vocabulary = getattr(trainer, "last_vocabulary", None)
        holdout_scores = np.asarray(scorer(holdout_items), dtype=float)
        report_dict["holdout"] = _scored_section(holdout_scores, holdout_labels, threshold)

    with _stage("evaluate", EXIT_EVALUATE):
        if final_model is not None:
            models.save_model(
                final_model,
                out_dir / "model.json",
                config=tcfg,
                extra={"feature": cfg.feature, "model": cfg.model},
            )
        if vocabulary is not None:
            features.write_vocabulary(vocabulary, out_dir / "vocabulary.tsv")
        if cv_report.pooled_confusion is not None:
            report.write_confusion_csv(
                cv_report.pooled_confusion.to_dict(), out_dir / "confusion.csv"
            )
        if cv_report.pooled_roc is not None:
            report.write_roc_csv(
                report_dict["cv"]["pooled"]["roc_points"], out_dir / "roc.csv"
            )
        report.write_report_json(report_dict, out_dir / "report.json")
    return report_dict


def _split_indices(labels, spec: corpus.SplitSpec):
    """Index-level split that defers to the Dataset splitter for the policy."""
    placeholder = [
        corpus.Document(user_id=str(i), label=label, source=corpus.SOURCE_BIO, text="x")
        for i, label in enumerate(labels)
    ]
    counts = {label: 0 for label in corpus.LABELS}
    for label in labels:
        counts[label] += 1
    ds = corpus.Dataset(documents=tuple(placeholder), class_counts=counts)
    train_ds, test_ds = corpus.train_test_split(ds, spec)
    return (
        [int(doc.user_id) for doc in train_ds.documents],
        [int(doc.user_id) for doc in test_ds.documents],
    )


# ---------------------------------------------------------------- subcommands


def cmd_run(args: argparse.Namespace) -> int:
    if args.manifest:
        with _stage("config", EXIT_CONFIG):
            manifest = report.load_report_json(args.manifest)
        config_echo = dict(manifest.get("config", {}))
        if args.out:
            config_echo["out"] = args.out
        cfg = ExperimentConfig(
            **{k: v for k, v in config_echo.items() if k in _CONFIG_FIELDS}
        )
        cfg.validate()
        for name, entry in manifest.get("inputs", {}).items():
            with _stage("config", EXIT_CONFIG):
                digest = _sha256(entry["path"])
            if digest != entry["sha256"]:
                raise ConfigError(
                    f"input {name} at {entry['path']} does not match the manifest hash"
                )
    else:
        file_values = load_config_file(args.config) if args.config else None
        cfg = _experiment_config_from_args(args, file_values)
    report_dict = run_experiment(cfg)
    used = report_dict["counts"]["used"]
    print(f"report written to {cfg.out} ({used} documents evaluated)")
    return EXIT_OK


def cmd_ingest(args: argparse.Namespace) -> int:
    with _stage("ingest", EXIT_INGEST):
        users = corpus.load_users(args.users, args.tweets, format=args.format)
        dataset = corpus.build_documents(users, args.source)
        corpus.write_documents_jsonl(dataset, args.out)
    print(
        f"{len(dataset.documents)} documents "
        f"({dataset.class_counts[corpus.DIAGNOSED]} diagnosed, "
        f"{dataset.class_counts[corpus.CONTROL]} control) -> {args.out}"
    )
    return EXIT_OK


def cmd_preprocess(args: argparse.Namespace) -> int:
    with _stage("preprocess", EXIT_PREPROCESS):
        dataset = corpus.read_documents_jsonl(args.input)
        pcfg = preprocess.default_config(
            min_chars=args.min_chars, apply_lemmatization=not args.no_lemmatize
        )
        workers = args.workers if args.workers > 0 else (os.cpu_count() or 1)
        cleaned = preprocess.preprocess_corpus(dataset.documents, pcfg, workers=workers)
        preprocess.write_clean_corpus(cleaned, args.out)
    kept = sum(1 for doc in cleaned if not doc.dropped)
    print(f"{kept} kept, {len(cleaned) - kept} dropped -> {args.out}")
    return EXIT_OK


def _feature_config_from_args(args: argparse.Namespace) -> features.FeaturizerConfig:
    if args.feature == "word_bigram":
        min_df = args.min_df if args.min_df is not None else 2
        return features.word_bigram_config(min_df, args.weighting)
    if args.feature == "char_4gram":
        min_df = args.min_df if args.min_df is not None else 1
        return features.char_fourgram_config(min_df, args.weighting)
    raise ConfigError(f"feature {args.feature!r} is not an n-gram featurizer")


def cmd_featurize(args: argparse.Namespace) -> int:
    fcfg = _feature_config_from_args(args)
    out_dir = Path(args.out)
    with _stage("feature", EXIT_FEATURE):
        docs = [d for d in preprocess.read_clean_corpus(args.input) if not d.dropped]
        if not docs:
            raise features.FeatureError("no kept documents to featurize")
        vocab = features.build_vocabulary(docs, fcfg)
        out_dir.mkdir(parents=True, exist_ok=True)
        features.write_vocabulary(vocab, out_dir / "vocabulary.tsv")
        vectors = [features.vectorize(d, vocab, fcfg) for d in docs]
        features.write_vectors_csv(
            [d.user_id for d in docs], vectors, out_dir / "vectors.csv"
        )
    print(f"{vocab.dimension} terms over {len(docs)} documents -> {out_dir}")
    return EXIT_OK


def cmd_train(args: argparse.Namespace) -> int:
    out_dir = Path(args.out)
    tcfg = models.TrainConfig(
        epochs=args.epochs,
        learning_rate=args.learning_rate
        if args.learning_rate is not None
        else (0.05 if args.model == "mlp" else 0.1),
        batch_size=args.batch_size,
        l2_penalty=args.l2_penalty,
        seed=args.seed,
    )
    with _stage("preprocess", EXIT_PREPROCESS):
        docs = [d for d in preprocess.read_clean_corpus(args.input) if not d.dropped]
        labels = [d.label for d in docs]
    with _stage("train", EXIT_TRAIN):
        out_dir.mkdir(parents=True, exist_ok=True)
    vocabulary = None
    if args.model in _NGRAM_MODELS:
        fcfg = _feature_config_from_args(args)
        vocabulary = features.build_vocabulary(docs, fcfg)
        pairs = [
            (features.vectorize(d, vocabulary, fcfg), label)
            for d, label in zip(docs, labels)
        ]
        if args.model == "logistic":
            model = models.train_logistic(pairs, tcfg)
        else:
            model = models.train_mlp(pairs, args.hidden_units, tcfg)
    else:
        if not args.embeddings:
            raise ConfigError("model=embedding_head requires --embeddings")
        with _stage("feature", EXIT_FEATURE):
            embedding_set = encoder_interface.load_embeddings(args.embeddings)
        aligned = encoder_interface.align(docs, embedding_set)
        pairs = [(vector, doc.label) for doc, vector in aligned.pairs]
        model = models.train_embedding_head(pairs, tcfg)
    with _stage("train", EXIT_TRAIN):
        if vocabulary is not None:
            features.write_vocabulary(vocabulary, out_dir / "vocabulary.tsv")
        models.save_model(
            model, out_dir / "model.json", config=tcfg, extra={"model": args.model}
        )
    print(f"model ({args.model}, dimension {model.dimension}) -> {out_dir / 'model.json'}")
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace) -> int:
    cfg = _experiment_config_from_args(args)
    cfg.validate()
    out_dir = Path(cfg.out)
    with _stage("config", EXIT_CONFIG):
        out_dir.mkdir(parents=True, exist_ok=True)
    with _stage("preprocess", EXIT_PREPROCESS):
        cleaned = preprocess.read_clean_corpus(args.input)
    kept = [doc for doc in cleaned if not doc.dropped]
    if not kept:
        raise preprocess.PreprocessError("no kept documents in the cleaned corpus")
    counts = {
        "documents_in": len(cleaned),
        "dropped": len(cleaned) - len(kept),
        "used": len(kept),
    }
    _evaluate_cleaned(cfg, kept, counts, out_dir)
    print(f"report written to {out_dir}")
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    with _stage("evaluate", EXIT_EVALUATE):
        report_dict = report.load_report_json(args.input)
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        cv_section = report_dict.get("cv") or {}
        candidates = [
            cv_section.get("pooled"),
            report_dict.get("holdout"),
            report_dict.get("external"),
        ]
        section = next((s for s in candidates if s), None)
        if section is None:
            raise evaluation.EvaluationError(
                f"{args.input}: report carries no evaluation section to render"
            )
        report.write_confusion_csv(section["confusion"], out_dir / "confusion.csv")
        report.render_confusion_figure(section["confusion"], out_dir / "confusion.svg")
        rendered = [out_dir / "confusion.csv", out_dir / "confusion.svg"]
        if section.get("roc_points"):
            report.write_roc_csv(section["roc_points"], out_dir / "roc.csv")
            report.render_roc_figure(
                section["roc_points"], section.get("auc"), out_dir / "roc.svg"
            )
            rendered += [out_dir / "roc.csv", out_dir / "roc.svg"]
    print("rendered " + ", ".join(str(p) for p in rendered))
    return EXIT_OK


# ---------------------------------------------------------------- parser


def _add_experiment_flags(sub: argparse.ArgumentParser, with_inputs: bool) -> None:
    if with_inputs:
        sub.add_argument("--users", help="users file (user_id,label,bio)")
        sub.add_argument("--tweets", help="tweets file (user_id,text)")
        sub.add_argument("--format", default="csv", choices=("csv", "jsonl"),
                         help="input file format (default: %(default)s)")
        sub.add_argument("--source", default=corpus.SOURCE_TWEETS, choices=corpus.SOURCES,
                         help="document source (default: %(default)s)")
    sub.add_argument("--feature", default="word_bigram", choices=FEATURE_CHOICES,
                     help="feature kind (default: %(default)s)")
    sub.add_argument("--model", default="logistic", choices=MODEL_CHOICES,
                     help="classifier (default: %(default)s)")
    sub.add_argument("--embeddings", help="embedding JSONL (feature=embeddings)")
    sub.add_argument("--scores", help="score JSONL (feature=scores)")
    sub.add_argument("--folds", type=int, default=10,
                     help="cross-validation folds (default: %(default)s)")
    sub.add_argument("--epochs", type=int, default=5,
                     help="training epochs (default: %(default)s)")
    sub.add_argument("--learning-rate", type=float, default=None,
                     help="step size (default: 0.1, or 0.05 for mlp)")
    sub.add_argument("--batch-size", type=int, default=32,
                     help="mini-batch size (default: %(default)s)")
    sub.add_argument("--l2-penalty", type=float, default=1e-4,
                     help="L2 penalty on weights (default: %(default)s)")
    sub.add_argument("--hidden-units", type=int, default=64,
                     help="MLP hidden width (default: %(default)s)")
    sub.add_argument("--seed", type=int, default=0,
                     help="seed for splits, folds, and training (default: %(default)s)")
    sub.add_argument("--threshold", type=float, default=0.5,
                     help="decision threshold (default: %(default)s)")
    sub.add_argument("--split", type=float, default=0.8,
                     help="train fraction for the holdout split (default: %(default)s)")
    sub.add_argument("--no-stratify", action="store_true",
                     help="disable stratified splitting and folding")
    sub.add_argument("--cv-full", action="store_true",
                     help="cross-validate the full dataset instead of the train split")
    sub.add_argument("--min-df", type=int, default=None,
                     help="vocabulary df floor (default: 2 word_bigram, 1 char_4gram)")
    sub.add_argument("--weighting", default=features.WEIGHT_TFIDF,
                     choices=features.WEIGHTINGS,
                     help="term weighting (default: %(default)s)")
    sub.add_argument("--min-chars", type=int, default=5,
                     help="minimum joined-token length (default: %(default)s)")
    sub.add_argument("--no-lemmatize", action="store_true",
                     help="skip lemmatization")
    sub.add_argument("--workers", type=int, default=0,
                     help="parallel workers; 0 means all cores (default: %(default)s)")
    sub.add_argument("--out", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="textscreen",
        description="Screen per-user social-media text for a diagnosed/control signal.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)

    run_parser = subparsers.add_parser(
        "run", help="full pipeline: ingest, preprocess, featurize, train, evaluate"
    )
    _add_experiment_flags(run_parser, with_inputs=True)
    run_parser.add_argument("--config", help="KEY=VALUE config file; flags override it")
    run_parser.add_argument("--manifest", help="rerun from a previous manifest.json")
    run_parser.set_defaults(func=cmd_run)

    ingest_parser = subparsers.add_parser("ingest", help="load users and write documents JSONL")
    ingest_parser.add_argument("--users", required=True, help="users file (user_id,label,bio)")
    ingest_parser.add_argument("--tweets", help="tweets file (user_id,text)")
    ingest_parser.add_argument("--format", default="csv", choices=("csv", "jsonl"),
                               help="input file format (default: %(default)s)")
    ingest_parser.add_argument("--source", default=corpus.SOURCE_TWEETS,
                               choices=corpus.SOURCES,
                               help="document source (default: %(default)s)")
    ingest_parser.add_argument("--out", required=True, help="output documents JSONL")
    ingest_parser.set_defaults(func=cmd_ingest)

    pre_parser = subparsers.add_parser("preprocess", help="clean a documents JSONL")
    pre_parser.add_argument("--input", required=True, help="documents JSONL from ingest")
    pre_parser.add_argument("--out", required=True, help="output cleaned JSONL")
    pre_parser.add_argument("--min-chars", type=int, default=5,
                            help="minimum joined-token length (default: %(default)s)")
    pre_parser.add_argument("--no-lemmatize", action="store_true", help="skip lemmatization")
    pre_parser.add_argument("--workers", type=int, default=0,
                            help="parallel workers; 0 means all cores (default: %(default)s)")
    pre_parser.set_defaults(func=cmd_preprocess)

    feat_parser = subparsers.add_parser("featurize", help="build vocabulary and vectors")
    feat_parser.add_argument("--input", required=True, help="cleaned JSONL from preprocess")
    feat_parser.add_argument("--feature", default="word_bigram",
                             choices=_NGRAM_FEATURES,
                             help="feature kind (default: %(default)s)")
    feat_parser.add_argument("--min-df", type=int, default=None,
                             help="vocabulary df floor (default: 2 word_bigram, 1 char_4gram)")
    feat_parser.add_argument("--weighting", default=features.WEIGHT_TFIDF,
                             choices=features.WEIGHTINGS,
                             help="term weighting (default: %(default)s)")
    feat_parser.add_argument("--out", required=True, help="output directory")
    feat_parser.set_defaults(func=cmd_featurize)

    train_parser = subparsers.add_parser("train", help="fit one model on a cleaned corpus")
    train_parser.add_argument("--input", required=True, help="cleaned JSONL from preprocess")
    train_parser.add_argument("--feature", default="word_bigram",
                              choices=_NGRAM_FEATURES,
                              help="feature kind for logistic/mlp (default: %(default)s)")
    train_parser.add_argument("--model", default="logistic",
                              choices=("logistic", "mlp", "embedding_head"),
                              help="classifier (default: %(default)s)")
    train_parser.add_argument("--embeddings", help="embedding JSONL (embedding_head)")
    train_parser.add_argument("--min-df", type=int, default=None,
                              help="vocabulary df floor (default: 2 word_bigram, 1 char_4gram)")
    train_parser.add_argument("--weighting", default=features.WEIGHT_TFIDF,
                              choices=features.WEIGHTINGS,
                              help="term weighting (default: %(default)s)")
    train_parser.add_argument("--hidden-units", type=int, default=64,
                              help="MLP hidden width (default: %(default)s)")
    train_parser.add_argument("--epochs", type=int, default=5,
                              help="training epochs (default: %(default)s)")
    train_parser.add_argument("--learning-rate", type=float, default=None,
                              help="step size (default: 0.1, or 0.05 for mlp)")
    train_parser.add_argument("--batch-size", type=int, default=32,
                              help="mini-batch size (default: %(default)s)")
    train_parser.add_argument("--l2-penalty", type=float, default=1e-4,
                              help="L2 penalty on weights (default: %(default)s)")
    train_parser.add_argument("--seed", type=int, default=0,
                              help="training seed (default: %(default)s)")
    train_parser.add_argument("--out", required=True, help="output directory")
    train_parser.set_defaults(func=cmd_train)

    eval_parser = subparsers.add_parser("evaluate", help="cross-validate a cleaned corpus")
    eval_parser.add_argument("--input", required=True, help="cleaned JSONL from preprocess")
    _add_experiment_flags(eval_parser, with_inputs=False)
    eval_parser.set_defaults(func=cmd_evaluate, users="-", tweets=None,
                             format="csv", source=corpus.SOURCE_TWEETS)

    report_parser = subparsers.add_parser("report", help="render figures from a report.json")
    report_parser.add_argument("--input", required=True, help="report.json from run/evaluate")
    report_parser.add_argument("--out", required=True, help="output directory")
    report_parser.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error in config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except StageFailure as exc:
        print(f"error in {exc.stage_name}: {exc}", file=sys.stderr)
        return exc.exit_code
    except corpus.CorpusError as exc:
        print(f"error in ingest: {exc}", file=sys.stderr)
        return EXIT_INGEST
    except preprocess.PreprocessError as exc:
        print(f"error in preprocess: {exc}", file=sys.stderr)
        return EXIT_PREPROCESS
    except (features.FeatureError, encoder_interface.EncoderFileError) as exc:
        print(f"error in feature: {exc}", file=sys.stderr)
        return EXIT_FEATURE
    except models.ModelError as exc:
        print(f"error in train: {exc}", file=sys.stderr)
        return EXIT_TRAIN
    except evaluation.EvaluationError as exc:
        print(f"error in evaluate: {exc}", file=sys.stderr)
        return EXIT_EVALUATE


if __name__ == "__main__":
    sys.exit(main())
