"""Experiment configuration: sectioned key-value files with strict keys.

Each INI section maps onto one dataclass; unknown sections or keys raise
:class:`ConfigError` naming the offender. Values are coerced to the type of
the field default.
"""
from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .autoenc import DEFAULT_LAMBDA
from .synth import SynthSpec

METHODS = ("dylink2vec", "cn", "aa", "jaccard", "katz", "jack",
           "ts-cn-adj", "ts-aa-adj", "ts-j-adj", "ts-pa-adj")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class DataConfig:
    # "synth" builds the network from the [synth] section
    source: str = "synth"
    path: str = ""
    # edge-list ingestion
    window_length: float = 1.0
    min_active_snapshots: int = 0
    min_degree: int = 0


@dataclass(frozen=True)
class EmbeddingConfig:
    l: int = 100
    lam: float = DEFAULT_LAMBDA
    sigma: float = 2.0
    max_iters: int = 100
    tol: float = 1e-6
    init_scale: float = 0.0  # 0 selects sqrt(6 / (k + l))
    step_policy: str = "backtrack"


@dataclass(frozen=True)
class ClassifierConfig:
    kind: str = "adaboost"
    rounds: int = 100
    steps: int = 500
    rate: float = 0.5


@dataclass(frozen=True)
class SamplerSection:
    ratio: float = 1.0


@dataclass(frozen=True)
class EvalConfig:
    ndcg_k: int = 50
    # enumerate every pair up to this many vertices, else sample
    max_all_pairs_n: int = 2000
    sample_pairs: int = 200000


@dataclass(frozen=True)
class BaselineConfig:
    katz_beta: float = 0.005
    katz_max_len: int = 5
    # collapsed window for topological scores is [topo_from, t]
    topo_from: int = 2


@dataclass(frozen=True)
class ExperimentSection:
    seed: int = 0
    methods: str = ",".join(METHODS)
    train_from: int = 1
    # hold out the last snapshot of the data as the forecast target
    holdout: bool = True
    out: str = "out"


@dataclass(frozen=True)
class ExperimentConfig:
    data: DataConfig = field(default_factory=DataConfig)
    synth: SynthSpec = field(default_factory=SynthSpec)
    embedding: EmbeddingConfig = field(default_factory=EmbeddingConfig)
    classifier: ClassifierConfig = field(default_factory=ClassifierConfig)
    sampler: SamplerSection = field(default_factory=SamplerSection)
    evaluation: EvalConfig = field(default_factory=EvalConfig)
    baselines: BaselineConfig = field(default_factory=BaselineConfig)
    experiment: ExperimentSection = field(default_factory=ExperimentSection)

    @property
    def seed(self) -> int:
        return self.experiment.seed

    @property
    def methods(self) -> list[str]:
        return [m.strip() for m in self.experiment.methods.split(",") if m.strip()]

    def with_values(self, **sections: dict[str, Any]) -> "ExperimentConfig":
        """Copy with per-section overrides, e.g. ``with_values(sampler={"ratio": 3})``."""
        updates = {}
        for name, values in sections.items():
            if name not in SECTIONS:
                raise ConfigError(f"unknown config section [{name}]")
            current = getattr(self, name)
            for key in values:
                if key not in _field_types(type(current)):
                    raise ConfigError(f"unknown config key '{key}' in section [{name}]")
            updates[name] = dataclasses.replace(current, **values)
        return dataclasses.replace(self, **updates)

    def validate(self) -> "ExperimentConfig":
        for m in self.methods:
            if m not in METHODS:
                raise ConfigError(f"unknown method '{m}'; expected any of {', '.join(METHODS)}")
        if self.classifier.kind not in ("adaboost", "logistic"):
            raise ConfigError(f"unknown classifier kind '{self.classifier.kind}'")
        if self.data.source not in ("synth", "edges", "snapshots"):
            raise ConfigError(f"unknown data source '{self.data.source}'")
        return self


SECTIONS = {f.name: f for f in dataclasses.fields(ExperimentConfig)}


def _field_types(cls) -> dict[str, type]:
    inst = cls()
    return {f.name: type(getattr(inst, f.name)) for f in dataclasses.fields(cls)}


def _coerce(section: str, key: str, raw: str, kind: type):
    try:
        if kind is bool:
            low = raw.strip().lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        return kind(raw.strip())
    except ValueError:
        raise ConfigError(f"[{section}] {key}: cannot parse {raw!r} as {kind.__name__}") from None


def _coerce_sections(raw: dict[str, dict[str, str]]) -> dict[str, dict[str, Any]]:
    out: dict[str, dict[str, Any]] = {}
    for name, items in raw.items():
        if name not in SECTIONS:
            raise ConfigError(f"unknown config section [{name}]")
        types = _field_types(SECTIONS[name].default_factory)
        vals = {}
        for key, value in items.items():
            if key not in types:
                raise ConfigError(f"unknown config key '{key}' in section [{name}]")
            vals[key] = _coerce(name, key, value, types[key])
        out[name] = vals
    return out


def apply_overrides(cfg: ExperimentConfig, raw: dict[str, dict[str, str]]) -> ExperimentConfig:
    """Apply string-valued ``{section: {key: value}}`` overrides with full checking."""
    try:
        return cfg.with_values(**_coerce_sections(raw)).validate()
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def parse_config(text: str) -> ExperimentConfig:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None
    return apply_overrides(ExperimentConfig(), {name: dict(cp.items(name)) for name in cp.sections()})


def load_config(path: str | Path | None) -> ExperimentConfig:
    if path is None:
        return ExperimentConfig()
    return parse_config(Path(path).read_text(encoding="utf-8"))


def format_config(cfg: ExperimentConfig) -> str:
    lines = []
    for name in SECTIONS:
        sec = getattr(cfg, name)
        lines.append(f"[{name}]")
        for f in dataclasses.fields(sec):
            lines.append(f"{f.name} = {getattr(sec, f.name)}")
        lines.append("")
    return "\n".join(lines)


def describe_defaults() -> str:
    """Every section and key with its default, for ``--help``."""
    out = []
    for name in SECTIONS:
        sec = SECTIONS[name].default_factory()
        keys = ", ".join(f"{f.name}={getattr(sec, f.name)}" for f in dataclasses.fields(sec))
        out.append(f"[{name}] {keys}")
    return "\n".join(out)
