"""polykit: prompted text-to-text dataset compilation and interpretable
multilingual evaluation over externally produced model predictions."""

from .buckets import BucketReport, bucket_performance, bucketize
from .diagnosis import DiagnosisReport, improvement_matrix, pairwise_delta
from .features import applicable_features, compute_feature, dataset_feature
from .ingest import (
    DatasetDescriptor,
    SamplingPolicy,
    read_samples,
    subsample,
    write_samples,
)
from .languages import Language, family_of, lookup_language
from .metrics import (
    accuracy,
    exact_match,
    f1_score,
    normalize_and_tokenize,
    sentence_bleu,
)
from .predictions import PredictionRecord, join_and_decode, read_predictions
from .prompting import (
    PromptedPair,
    compile_pairs,
    decode_prediction,
    render,
)
from .stats import WilcoxonResult, wilcoxon_signed_rank
from .tasks import Sample, TaskKind, task_kind
from .templates import Template, load_registry, parse_segments, select_templates

__version__ = "0.1.0"

__all__ = [
    "BucketReport",
    "DatasetDescriptor",
    "DiagnosisReport",
    "Language",
    "PredictionRecord",
    "PromptedPair",
    "Sample",
    "SamplingPolicy",
    "TaskKind",
    "Template",
    "WilcoxonResult",
    "accuracy",
    "applicable_features",
    "bucket_performance",
    "bucketize",
    "compile_pairs",
    "compute_feature",
    "dataset_feature",
    "decode_prediction",
    "exact_match",
    "f1_score",
    "family_of",
    "improvement_matrix",
    "join_and_decode",
    "load_registry",
    "lookup_language",
    "normalize_and_tokenize",
    "pairwise_delta",
    "parse_segments",
    "read_predictions",
    "read_samples",
    "render",
    "select_templates",
    "sentence_bleu",
    "subsample",
    "task_kind",
    "wilcoxon_signed_rank",
    "write_samples",
    "__version__",
]
