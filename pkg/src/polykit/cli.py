"""Command-line entry point.

Subcommands: compile, eval, buckets, diagnose, sig, report. Exit codes:
0 success, 1 validation/usage error, 2 unreadable or malformed data.
Set POLYKIT_NO_COLOR to disable ANSI colors on diagnostics.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from . import __version__
from .buckets import bucket_performance
from .config import RunConfig, apply_overrides, config_hash, load_config
from .diagnosis import improvement_matrix, pairwise_delta
from .errors import DataError, ValidationError
from .features import applicable_features, compute_feature, dataset_feature
from .ingest import DatasetDescriptor, read_samples, subsample
from .languages import family_of
from .predictions import (
    PredictionRecord,
    join_and_decode,
    read_predictions,
    single_model_id,
)
from .prompting import compile_pairs, write_pairs
from .reports import (
    BUCKETING_METHOD,
    error_text,
    fmt_delta,
    fmt_percent,
    fmt_value,
    write_json,
    write_tsv,
)
from .stats import wilcoxon_signed_rank
from .tasks import Sample, task_kind
from .templates import Template, load_registry, select_templates

PRIMARY_METRIC = {"f1_em": "f1", "accuracy": "accuracy"}


def _metrics_for(task: str) -> list[str]:
    metric = task_kind(task).metric
    if metric == "f1_em":
        return ["f1", "em"]
    if metric == "accuracy":
        return ["accuracy"]
    return []


def _load_run(args) -> RunConfig:
    if not args.config:
        raise ValidationError("--config is required for this command")
    config = load_config(args.config)
    config = apply_overrides(
        config,
        seed=getattr(args, "seed", None),
        out_dir=getattr(args, "out", None),
        regime=getattr(args, "regime", None),
    )
    config.validate()
    return config


def _meta(config: RunConfig, **extra) -> dict:
    meta = {
        "toolkit": f"polykit {__version__}",
        "seed": config.seed,
        "config_hash": config_hash(config),
        "regime": config.regime.tag,
        "bucketing": BUCKETING_METHOD,
    }
    meta.update(extra)
    return meta


def _out_dir(config: RunConfig) -> Path:
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _selection_by_language(
    config: RunConfig, registry: list[Template], samples: list[Sample]
) -> dict[tuple[str, str], Template]:
    """(dataset, sample language) -> template under the configured regime."""
    selection: dict[tuple[str, str], Template] = {}
    for lang in sorted({s.language for s in samples}):
        per_dataset = select_templates(
            registry,
            config.regime.uniformity,
            config.regime.language_policy,
            lang,
            datasets=sorted({s.dataset for s in samples if s.language == lang}),
        )
        for dataset, template in per_dataset.items():
            selection[(dataset, lang)] = template
    return selection


def _compile_samples(
    config: RunConfig, registry: list[Template], samples: list[Sample]
) -> list:
    selection = _selection_by_language(config, registry, samples)
    by_key: dict[tuple[str, str], list[int]] = {}
    for index, sample in enumerate(samples):
        by_key.setdefault((sample.dataset, sample.language), []).append(index)
    pairs = [None] * len(samples)
    for key in sorted(by_key):
        indexes = by_key[key]
        template = selection[key]
        for index, pair in zip(
            indexes, compile_pairs([samples[i] for i in indexes], {key[0]: template})
        ):
            pairs[index] = pair
    return pairs


def _read_eval_samples(config: RunConfig, split: str) -> list[Sample]:
    samples: list[Sample] = []
    for descriptor in config.datasets:
        if split not in descriptor.split_paths:
            continue
        if not task_kind(descriptor.task).evaluable:
            continue
        samples.extend(read_samples(descriptor.split_paths[split], descriptor))
    if not samples:
        raise ValidationError(f"no evaluable samples found for split {split!r}")
    return samples


def _decode_against(
    config: RunConfig, samples: list[Sample], records: list[PredictionRecord]
) -> list[PredictionRecord]:
    registry = load_registry(config.registry_path())
    selection = _selection_by_language(config, registry, samples)

    def template_for(sample: Sample) -> Template:
        return selection[(sample.dataset, sample.language)]

    return join_and_decode(records, samples, template_for)


def _score_by_language(
    records: list[PredictionRecord], samples: list[Sample]
) -> dict[tuple[str, str, str], float]:
    """(dataset, metric, language) -> score fraction."""
    from .buckets import score_prediction

    samples_by_id = {s.id: s for s in samples}
    groups: dict[tuple[str, str], list[PredictionRecord]] = {}
    for record in records:
        sample = samples_by_id[record.sample_id]
        groups.setdefault((sample.dataset, sample.language), []).append(record)
    scores: dict[tuple[str, str, str], float] = {}
    for (dataset, language), members in groups.items():
        task = samples_by_id[members[0].sample_id].task
        for metric in _metrics_for(task):
            values = [
                score_prediction(r, samples_by_id[r.sample_id], metric) for r in members
            ]
            scores[(dataset, metric, language)] = math.fsum(values) / len(values)
    return scores


def _overall_scores(
    by_language: dict[tuple[str, str, str], float]
) -> dict[tuple[str, str], float]:
    """Unweighted mean over languages per (dataset, metric)."""
    groups: dict[tuple[str, str], list[float]] = {}
    for (dataset, metric, _), value in by_language.items():
        groups.setdefault((dataset, metric), []).append(value)
    return {key: math.fsum(vals) / len(vals) for key, vals in groups.items()}


def cmd_compile(args) -> int:
    config = _load_run(args)
    registry = load_registry(config.registry_path())
    out = _out_dir(config)
    splits = [s.strip() for s in args.splits.split(",") if s.strip()]
    for descriptor in config.datasets:
        for split in splits:
            path = descriptor.split_paths.get(split)
            if path is None:
                continue
            samples = read_samples(path, descriptor)
            if split in config.sampled_splits:
                samples = subsample(samples, config.sampling_policy(descriptor.role))
            pairs = _compile_samples(config, registry, samples)
            target = out / f"{descriptor.name}.{split}.pairs.jsonl"
            header = _meta(config, dataset=descriptor.name, split=split, count=len(pairs))
            write_pairs(pairs, target, header=header)
            print(f"{descriptor.name}\t{split}\t{len(pairs)}\t{target}")
    return 0


def cmd_eval(args) -> int:
    config = _load_run(args)
    records = read_predictions(args.predictions)
    model = single_model_id(records, args.model_id)
    records = [r for r in records if r.model_id == model]
    samples = _read_eval_samples(config, args.split)
    decoded = _decode_against(config, samples, records)
    by_language = _score_by_language(decoded, samples)
    overall = _overall_scores(by_language)
    out = _out_dir(config)
    language_rows = [
        (dataset, language, metric, fmt_percent(score))
        for (dataset, metric, language), score in sorted(by_language.items())
    ]
    write_tsv(
        out / f"scores_{model}_by_language.tsv",
        _meta(config, model=model, split=args.split),
        ["dataset", "language", "metric", "score"],
        language_rows,
    )
    overall_rows = [
        (dataset, metric, fmt_percent(score)) for (dataset, metric), score in sorted(overall.items())
    ]
    average = math.fsum(overall.values()) / len(overall)
    overall_rows.append(("avg", "mean", fmt_percent(average)))
    write_tsv(
        out / f"scores_{model}_overall.tsv",
        _meta(config, model=model, split=args.split),
        ["dataset", "metric", "score"],
        overall_rows,
    )
    for dataset, metric, score in overall_rows:
        print(f"{dataset}\t{metric}\t{score}")
    return 0


def _feature_list(config: RunConfig, task: str) -> list[str]:
    names = applicable_features(task)
    if config.features:
        names = [n for n in names if n in config.features]
    return names


def cmd_buckets(args) -> int:
    config = _load_run(args)
    records = read_predictions(args.predictions)
    model = single_model_id(records, args.model_id)
    records = [r for r in records if r.model_id == model]
    samples = _read_eval_samples(config, args.split)
    decoded = _decode_against(config, samples, records)
    by_dataset: dict[str, list[PredictionRecord]] = {}
    samples_by_id = {s.id: s for s in samples}
    for record in decoded:
        by_dataset.setdefault(samples_by_id[record.sample_id].dataset, []).append(record)
    rows = []
    documents = {}
    for dataset in sorted(by_dataset):
        dataset_samples = [s for s in samples if s.dataset == dataset]
        task = dataset_samples[0].task
        for feature in _feature_list(config, task):
            for metric in _metrics_for(task):
                report = bucket_performance(
                    by_dataset[dataset],
                    dataset_samples,
                    feature,
                    metric,
                    use_entity_heuristic=config.entity_heuristic,
                )
                documents.setdefault(dataset, {}).setdefault(feature, {})[metric] = {
                    "degenerate": report.degenerate,
                    "overall": fmt_percent(report.overall_score),
                    "buckets": [
                        {
                            "bucket": b.label,
                            "lo": b.lo,
                            "hi": b.hi,
                            "count": b.count,
                            "score": None if b.score is None else fmt_percent(b.score),
                        }
                        for b in report.buckets
                    ],
                }
                for b in report.buckets:
                    rows.append(
                        (
                            dataset,
                            feature,
                            metric,
                            b.label,
                            b.lo,
                            b.hi,
                            b.count,
                            None if b.score is None else fmt_percent(b.score),
                            "degenerate" if report.degenerate else "",
                        )
                    )
    out = _out_dir(config)
    meta = _meta(config, model=model, split=args.split)
    write_tsv(
        out / f"buckets_{model}.tsv",
        meta,
        ["dataset", "feature", "metric", "bucket", "lo", "hi", "count", "score", "flag"],
        rows,
    )
    write_json(out / f"buckets_{model}.json", {"header": meta, "datasets": documents})
    print(f"wrote bucket report for {model} ({len(rows)} rows)")
    return 0


def cmd_diagnose(args) -> int:
    config = _load_run(args)
    records_1 = read_predictions(args.predictions)
    model_1 = single_model_id(records_1, args.model_id)
    records_1 = [r for r in records_1 if r.model_id == model_1]
    records_2 = read_predictions(args.baseline)
    model_2 = single_model_id(records_2, args.baseline_model_id)
    records_2 = [r for r in records_2 if r.model_id == model_2]
    if model_1 == model_2:
        model_1, model_2 = f"{model_1}#1", f"{model_2}#2"
    samples = _read_eval_samples(config, args.split)
    decoded_1 = _decode_against(config, samples, records_1)
    decoded_2 = _decode_against(config, samples, records_2)
    lang_1 = _score_by_language(decoded_1, samples)
    lang_2 = _score_by_language(decoded_2, samples)
    overall_1 = {f"{d}:{m}": v * 100 for (d, m), v in _overall_scores(lang_1).items()}
    overall_2 = {f"{d}:{m}": v * 100 for (d, m), v in _overall_scores(lang_2).items()}
    overall_report = pairwise_delta(overall_1, overall_2, model_1, model_2)

    samples_by_id = {s.id: s for s in samples}
    datasets = sorted({s.dataset for s in samples})
    per_language = {}
    for dataset in datasets:
        task = samples_by_id[next(s.id for s in samples if s.dataset == dataset)].task
        metric = PRIMARY_METRIC[task_kind(task).metric]
        map_1 = {
            lang: v * 100
            for (d, m, lang), v in lang_1.items()
            if d == dataset and m == metric
        }
        map_2 = {
            lang: v * 100
            for (d, m, lang), v in lang_2.items()
            if d == dataset and m == metric
        }
        per_language[dataset] = pairwise_delta(map_1, map_2, model_1, model_2).as_dict()

    feature_sections = {}
    by_dataset_1: dict[str, list[PredictionRecord]] = {}
    by_dataset_2: dict[str, list[PredictionRecord]] = {}
    for record in decoded_1:
        by_dataset_1.setdefault(samples_by_id[record.sample_id].dataset, []).append(record)
    for record in decoded_2:
        by_dataset_2.setdefault(samples_by_id[record.sample_id].dataset, []).append(record)
    for dataset in datasets:
        dataset_samples = [s for s in samples if s.dataset == dataset]
        task = dataset_samples[0].task
        metric = PRIMARY_METRIC[task_kind(task).metric]
        section = {}
        for feature in _feature_list(config, task):
            report_1 = bucket_performance(
                by_dataset_1[dataset], dataset_samples, feature, metric,
                use_entity_heuristic=config.entity_heuristic,
            )
            report_2 = bucket_performance(
                by_dataset_2[dataset], dataset_samples, feature, metric,
                use_entity_heuristic=config.entity_heuristic,
            )
            map_1 = {
                f"{feature}:{b.label}": b.score * 100
                for b in report_1.buckets
                if b.score is not None
            }
            map_2 = {
                f"{feature}:{b.label}": b.score * 100
                for b in report_2.buckets
                if b.score is not None
            }
            section[feature] = pairwise_delta(map_1, map_2, model_1, model_2).as_dict()
        feature_sections[dataset] = section

    matrix_1 = {}
    matrix_2 = {}
    for (dataset, metric, lang), value in lang_1.items():
        task = next(s.task for s in samples if s.dataset == dataset)
        if metric == PRIMARY_METRIC[task_kind(task).metric]:
            matrix_1[(dataset, lang)] = value * 100
    for (dataset, metric, lang), value in lang_2.items():
        task = next(s.task for s in samples if s.dataset == dataset)
        if metric == PRIMARY_METRIC[task_kind(task).metric]:
            matrix_2[(dataset, lang)] = value * 100
    matrix = improvement_matrix(matrix_2, matrix_1)  # deltas of model over baseline

    out = _out_dir(config)
    meta = _meta(config, model_1=model_1, model_2=model_2, split=args.split)
    document = {
        "header": meta,
        "overall": overall_report.as_dict(),
        "per_language": per_language,
        "feature_buckets": feature_sections,
    }
    write_json(out / f"diagnosis_{model_1}_vs_{model_2}.json", document)
    write_tsv(
        out / f"delta_matrix_{model_1}_vs_{model_2}.tsv",
        meta,
        ["family", "language", *matrix.datasets],
        [
            [family, lang] + [None if d is None else fmt_delta(d) for d in row]
            for (family, lang), row in zip(matrix.rows, matrix.deltas)
        ],
    )
    print(f"overall delta ({model_1} - {model_2}): {fmt_delta(overall_report.overall_delta)}")
    for key in sorted(overall_report.deltas):
        print(f"{key}\t{fmt_delta(overall_report.deltas[key])}")
    return 0


def _read_score_tsv(path: str) -> dict[tuple[str, str, str], float]:
    scores: dict[tuple[str, str, str], float] = {}
    lines = Path(path).read_text("utf-8").splitlines()
    rows = [ln for ln in lines if ln and not ln.startswith("#")]
    if not rows:
        raise DataError(f"{path}: no score rows")
    header = rows[0].split("\t")
    expected = ["dataset", "language", "metric", "score"]
    if header != expected:
        raise DataError(f"{path}: expected columns {expected}, got {header}")
    for row in rows[1:]:
        dataset, language, metric, score = row.split("\t")
        scores[(dataset, metric, language)] = float(score)
    return scores


def _pair_scores(
    a: dict[tuple[str, str, str], float],
    b: dict[tuple[str, str, str], float],
    pairing: str,
) -> tuple[list[float], list[float], list[str]]:
    if set(a) != set(b):
        raise ValidationError(
            f"score files cover different cells ({len(a)} vs {len(b)}); cannot pair"
        )

    def axis_key(key: tuple[str, str, str]) -> str:
        dataset, metric, language = key
        if pairing == "language":
            return language
        if pairing == "dataset":
            return f"{dataset}:{metric}"
        return f"{dataset}:{metric}:{language}"

    groups_a: dict[str, list[float]] = {}
    groups_b: dict[str, list[float]] = {}
    for key, value in a.items():
        groups_a.setdefault(axis_key(key), []).append(value)
    for key, value in b.items():
        groups_b.setdefault(axis_key(key), []).append(value)
    labels = sorted(groups_a)
    x = [math.fsum(groups_a[k]) / len(groups_a[k]) for k in labels]
    y = [math.fsum(groups_b[k]) / len(groups_b[k]) for k in labels]
    return x, y, labels


def cmd_sig(args) -> int:
    a = _read_score_tsv(args.scores_a)
    b = _read_score_tsv(args.scores_b)
    x, y, labels = _pair_scores(a, b, args.pairing)
    result = wilcoxon_signed_rank(x, y, alternative=args.alternative)
    print(
        f"pairing={args.pairing} n_effective={result.n_effective} "
        f"W={fmt_value(result.statistic)} p={result.p_value:.6g} method={result.method}"
        + (" (degenerate: all differences zero)" if result.degenerate else "")
    )
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        document = {
            "header": {
                "toolkit": f"polykit {__version__}",
                "pairing": args.pairing,
                "alternative": args.alternative,
                "scores_a": str(args.scores_a),
                "scores_b": str(args.scores_b),
            },
            "labels": labels,
            "statistic": result.statistic,
            "p_value": result.p_value,
            "n_effective": result.n_effective,
            "degenerate": result.degenerate,
            "method": result.method,
        }
        write_json(out / f"sig_{args.pairing}.json", document)
    return 0


def cmd_report(args) -> int:
    config = _load_run(args)
    records = read_predictions(args.predictions)
    model = single_model_id(records, args.model_id)
    records = [r for r in records if r.model_id == model]
    samples = _read_eval_samples(config, args.split)
    decoded = _decode_against(config, samples, records)
    by_language = _score_by_language(decoded, samples)
    overall = _overall_scores(by_language)
    datasets = sorted({s.dataset for s in samples})
    features_doc = {}
    for dataset in datasets:
        dataset_samples = [s for s in samples if s.dataset == dataset]
        task = dataset_samples[0].task
        entry = {}
        for feature in _feature_list(config, task):
            entry[feature] = {
                "mean": dataset_feature(dataset_samples, feature),
                "by_language": dataset_feature(dataset_samples, feature, by_language=True),
            }
        features_doc[dataset] = entry
    fallback_count = sum(1 for r in decoded if r.fallback_used)
    document = {
        "header": _meta(config, model=model, split=args.split),
        "scores": {
            "by_language": {
                f"{d}:{m}:{lang}": fmt_percent(v)
                for (d, m, lang), v in sorted(by_language.items())
            },
            "overall": {f"{d}:{m}": fmt_percent(v) for (d, m), v in sorted(overall.items())},
            "average": fmt_percent(math.fsum(overall.values()) / len(overall)),
        },
        "dataset_features": features_doc,
        "decode_fallbacks": fallback_count,
    }
    out = _out_dir(config)
    write_json(out / f"report_{model}.json", document)
    print(f"wrote report for {model}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polykit",
        description="Prompted dataset compilation and interpretable multilingual evaluation.",
    )
    parser.add_argument("--version", action="version", version=f"polykit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", required=config_required, help="TOML run configuration")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--out", default=None, help="override the output directory")
        p.add_argument(
            "--regime",
            default=None,
            help="override regime, e.g. unifiedxcross or diversified-v2xin",
        )
        p.add_argument("--split", default="test", help="which split to evaluate (default test)")

    p = sub.add_parser("compile", help="compile samples into prompted pairs")
    common(p)
    p.add_argument("--splits", default="test", help="comma-separated splits (default test)")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("eval", help="score a prediction file")
    common(p)
    p.add_argument("--predictions", required=True)
    p.add_argument("--model-id", default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("buckets", help="per-feature four-bucket performance")
    common(p)
    p.add_argument("--predictions", required=True)
    p.add_argument("--model-id", default=None)
    p.set_defaults(func=cmd_buckets)

    p = sub.add_parser("diagnose", help="pairwise model comparison")
    common(p)
    p.add_argument("--predictions", required=True, help="model under test (M1)")
    p.add_argument("--baseline", required=True, help="baseline predictions (M2)")
    p.add_argument("--model-id", default=None)
    p.add_argument("--baseline-model-id", default=None)
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("sig", help="signed-rank significance test over two score tables")
    p.add_argument("--scores-a", required=True, help="per-language score TSV (model A)")
    p.add_argument("--scores-b", required=True, help="per-language score TSV (model B)")
    p.add_argument("--pairing", choices=["language", "dataset", "cell"], default="language")
    p.add_argument(
        "--alternative", choices=["two-sided", "greater", "less"], default="two-sided"
    )
    p.add_argument("--out", default=None, help="directory for the JSON result")
    p.set_defaults(func=cmd_sig)

    p = sub.add_parser("report", help="full JSON report (scores + dataset features)")
    common(p)
    p.add_argument("--predictions", required=True)
    p.add_argument("--model-id", default=None)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(error_text(f"error: {exc}"), file=sys.stderr)
        return 1
    except (DataError, OSError) as exc:
        print(error_text(f"error: {exc}"), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
