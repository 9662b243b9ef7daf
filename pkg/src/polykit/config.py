"""Run configuration: one TOML file, command line wins on conflicts."""

from __future__ import annotations

import hashlib
import json
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import DataError, ValidationError
from .ingest import (
    DEFAULT_EXPANDING_PER_LANGUAGE,
    DEFAULT_TARGET_PER_LANGUAGE,
    DatasetDescriptor,
    SamplingPolicy,
)
from .features import feature_spec
from .templates import bundled_registry_path, parse_uniformity

DEFAULT_SEED = 2024


@dataclass(frozen=True)
class Regime:
    uniformity: str = "unified"  # unified | diversified-v1..v5
    language_policy: str = "cross"  # cross | in

    def __post_init__(self):
        _, group = parse_uniformity(self.uniformity)
        if group > 5:
            raise ValidationError(f"uniformity {self.uniformity!r}: groups run v1..v5")
        if self.language_policy not in ("cross", "in"):
            raise ValidationError(f"bad language policy {self.language_policy!r}")

    @property
    def tag(self) -> str:
        return f"{self.uniformity}x{self.language_policy}"


def parse_regime(value: str) -> Regime:
    """Parse a '<uniformity>x<policy>' tag, e.g. unifiedxcross, diversified-v2xin."""
    head, sep, policy = value.rpartition("x")
    if not sep or not head:
        raise ValidationError(f"bad regime {value!r} (expected <uniformity>x<policy>)")
    return Regime(uniformity=head, language_policy=policy)


@dataclass(frozen=True)
class RunConfig:
    seed: int = DEFAULT_SEED
    out_dir: str = "out"
    template_registry: str = "builtin"
    regime: Regime = field(default_factory=Regime)
    target_per_language: int = DEFAULT_TARGET_PER_LANGUAGE
    expanding_per_language: int = DEFAULT_EXPANDING_PER_LANGUAGE
    sampled_splits: tuple[str, ...] = ("train",)
    features: tuple[str, ...] = ()  # empty = every applicable feature
    entity_heuristic: bool = False
    percent: bool = True
    datasets: tuple[DatasetDescriptor, ...] = ()

    def registry_path(self) -> Path:
        if self.template_registry == "builtin":
            return bundled_registry_path()
        return Path(self.template_registry)

    def sampling_policy(self, role: str) -> SamplingPolicy:
        n = self.target_per_language if role == "target" else self.expanding_per_language
        return SamplingPolicy(per_language_n=n, seed=self.seed)

    def dataset(self, name: str) -> DatasetDescriptor:
        for descriptor in self.datasets:
            if descriptor.name == name:
                return descriptor
        raise ValidationError(f"dataset {name!r} is not configured")

    def validate(self) -> None:
        if not self.datasets:
            raise ValidationError("config declares no datasets")
        if not self.registry_path().is_file():
            raise ValidationError(f"template registry not found: {self.registry_path()}")
        for descriptor in self.datasets:
            for split, path in descriptor.split_paths.items():
                if not Path(path).is_file():
                    raise ValidationError(
                        f"dataset {descriptor.name!r} split {split!r}: no such file {path}"
                    )
        for name in self.features:
            feature_spec(name)
        names = [d.name for d in self.datasets]
        if len(set(names)) != len(names):
            raise ValidationError("duplicate dataset names in config")


def _resolve(base: Path, value: str) -> str:
    path = Path(value)
    return str(path if path.is_absolute() else (base / path))


def load_config(path: str | Path) -> RunConfig:
    """Read a TOML run configuration; relative data paths are taken
    relative to the config file."""
    path = Path(path)
    try:
        raw = tomllib.loads(path.read_text("utf-8"))
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise DataError(f"cannot read config {path}: {exc}") from None
    base = path.parent
    regime_raw = raw.get("regime", {})
    regime = Regime(
        uniformity=regime_raw.get("uniformity", "unified"),
        language_policy=regime_raw.get("language_policy", "cross"),
    )
    sampling = raw.get("sampling", {})
    datasets = []
    for entry in raw.get("datasets", []):
        splits = {
            split: _resolve(base, p) for split, p in entry.get("splits", {}).items()
        }
        datasets.append(
            DatasetDescriptor(
                name=entry["name"],
                task=entry["task"],
                role=entry.get("role", "target"),
                languages=tuple(entry.get("languages", ())),
                split_paths=splits,
            )
        )
    registry = raw.get("template_registry", "builtin")
    if registry != "builtin":
        registry = _resolve(base, registry)
    return RunConfig(
        seed=int(raw.get("seed", DEFAULT_SEED)),
        out_dir=raw.get("out_dir", "out"),
        template_registry=registry,
        regime=regime,
        target_per_language=int(sampling.get("target_per_language", DEFAULT_TARGET_PER_LANGUAGE)),
        expanding_per_language=int(
            sampling.get("expanding_per_language", DEFAULT_EXPANDING_PER_LANGUAGE)
        ),
        sampled_splits=tuple(sampling.get("apply_to_splits", ("train",))),
        features=tuple(raw.get("features", {}).get("names", ())),
        entity_heuristic=bool(raw.get("features", {}).get("entity_heuristic", False)),
        percent=bool(raw.get("percent", True)),
        datasets=tuple(datasets),
    )


def apply_overrides(
    config: RunConfig,
    seed: int | None = None,
    out_dir: str | None = None,
    regime: str | None = None,
) -> RunConfig:
    if seed is not None:
        config = replace(config, seed=seed)
    if out_dir is not None:
        config = replace(config, out_dir=out_dir)
    if regime is not None:
        config = replace(config, regime=parse_regime(regime))
    return config


def config_hash(config: RunConfig) -> str:
    """Stable digest of everything that shapes output content (out_dir excluded)."""
    payload = {
        "seed": config.seed,
        "template_registry": str(config.registry_path()),
        "regime": config.regime.tag,
        "target_per_language": config.target_per_language,
        "expanding_per_language": config.expanding_per_language,
        "sampled_splits": list(config.sampled_splits),
        "features": list(config.features),
        "entity_heuristic": config.entity_heuristic,
        "percent": config.percent,
        "datasets": [
            {
                "name": d.name,
                "task": d.task,
                "role": d.role,
                "languages": list(d.languages),
                "splits": dict(sorted(d.split_paths.items())),
            }
            for d in config.datasets
        ],
    }
    blob = json.dumps(payload, sort_keys=True, ensure_ascii=False).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()[:16]
