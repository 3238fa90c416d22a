"""Run configuration: one YAML file drives every pipeline stage."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

from ..corpus import PoolConfig
from ..errors import ConfigError
from ..evaluator import TrainingConfig
from ..gateway import Gateway, HTTPBackend, ResponseCache, ScriptedBackend
from ..metrics import EstimatorSettings
from ..selection import BoostParams


@dataclass
class DatasetSpec:
    path: str
    task: str
    schema: str  # answer schema kind


@dataclass
class BackendConfig:
    kind: str = "scripted"  # scripted | http
    seed: int = 0
    embed_dimension: int = 32
    base_url: str = ""
    model: str = ""
    embed_model: str = "text-embedding-3-large"
    scoring_model: str | None = None
    api_key_env: str = "PROMPTGAUGE_API_KEY"
    max_in_flight: int = 4
    rate_per_second: float | None = None


@dataclass
class OptimizeConfig:
    max_iterations: int = 3
    top_k_metrics: int = 2
    initial_template: str = "zero_shot_cot"


@dataclass
class BenchmarkConfig:
    temperature: float = 0.0
    n_executions: int = 1
    max_tokens: int = 256


@dataclass
class SelectionConfig:
    threshold: float = 0.10
    include_embeddings: bool = True
    boost: BoostParams = field(default_factory=BoostParams)


@dataclass
class RunConfig:
    seed: int
    datasets: list[DatasetSpec]
    split_policy: str = "50/50"  # or "100/100"
    pool: PoolConfig = field(default_factory=PoolConfig)
    estimator: EstimatorSettings = field(default_factory=EstimatorSettings)
    selection: SelectionConfig = field(default_factory=SelectionConfig)
    evaluator: TrainingConfig = field(default_factory=TrainingConfig)
    evaluator_prefix: str | None = None
    optimize: OptimizeConfig = field(default_factory=OptimizeConfig)
    benchmark: BenchmarkConfig = field(default_factory=BenchmarkConfig)
    backend: BackendConfig = field(default_factory=BackendConfig)
    out_dir: str = "out"
    cache_dir: str | None = None
    replay_dir: str | None = None

    def settings_dict(self) -> dict:
        """Everything that affects pipeline outputs; used for manifest hashing."""
        return {
            "seed": self.seed,
            "datasets": [d.__dict__ for d in self.datasets],
            "split_policy": self.split_policy,
            "pool": {**self.pool.__dict__, "styles": list(self.pool.styles)},
            "estimator": self.estimator.__dict__,
            "selection": {
                "threshold": self.selection.threshold,
                "include_embeddings": self.selection.include_embeddings,
                "boost": self.selection.boost.__dict__,
            },
            "evaluator": self.evaluator.__dict__,
            "evaluator_prefix": self.evaluator_prefix,
            "optimize": self.optimize.__dict__,
            "benchmark": self.benchmark.__dict__,
            "backend": self.backend.__dict__,
            "replay": bool(self.replay_dir),
        }


def _expect(mapping: dict, key: str, context: str):
    if key not in mapping:
        raise ConfigError(f"missing required config field '{key}' in {context}")
    return mapping[key]


def load_config(
    path: str | Path,
    seed: int | None = None,
    replay_dir: str | None = None,
    out_dir: str | None = None,
) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    raw = yaml.safe_load(path.read_text(encoding="utf-8")) or {}

    if seed is None:
        if "seed" not in raw:
            raise ConfigError("seed is mandatory (set it in the config or pass --seed)")
        seed = int(raw["seed"])

    datasets = []
    for i, entry in enumerate(raw.get("datasets", [])):
        datasets.append(
            DatasetSpec(
                path=_expect(entry, "path", f"datasets[{i}]"),
                task=_expect(entry, "task", f"datasets[{i}]"),
                schema=_expect(entry, "schema", f"datasets[{i}]"),
            )
        )
    if not datasets:
        raise ConfigError("config must list at least one dataset")

    pool_raw = dict(raw.get("pool", {}))
    if "styles" in pool_raw:
        pool_raw["styles"] = tuple(pool_raw["styles"])
    selection_raw = dict(raw.get("selection", {}))
    boost = BoostParams(**selection_raw.pop("boost", {}))

    config = RunConfig(
        seed=seed,
        datasets=datasets,
        split_policy=raw.get("split_policy", "50/50"),
        pool=PoolConfig(**pool_raw),
        estimator=EstimatorSettings(**raw.get("estimator", {})),
        selection=SelectionConfig(boost=boost, **selection_raw),
        evaluator=TrainingConfig(**{**raw.get("evaluator", {}), "seed": seed}),
        evaluator_prefix=raw.get("evaluator_prefix"),
        optimize=OptimizeConfig(**raw.get("optimize", {})),
        benchmark=BenchmarkConfig(**raw.get("benchmark", {})),
        backend=BackendConfig(**raw.get("backend", {})),
        out_dir=out_dir or raw.get("out_dir", "out"),
        cache_dir=raw.get("cache_dir"),
        replay_dir=replay_dir or raw.get("replay_dir"),
    )
    validate_config(config)
    return config


def validate_config(config: RunConfig) -> None:
    if config.split_policy not in ("50/50", "100/100"):
        raise ConfigError(f"unknown split policy: {config.split_policy}")
    for spec in config.datasets:
        if not Path(spec.path).exists():
            raise ConfigError(f"dataset path does not exist: {spec.path}")
    if config.replay_dir and not Path(config.replay_dir).exists():
        raise ConfigError(f"replay dir does not exist: {config.replay_dir}")
    if config.backend.kind not in ("scripted", "http"):
        raise ConfigError(f"unknown backend kind: {config.backend.kind}")
    if config.backend.kind == "http" and not config.replay_dir and not config.backend.base_url:
        raise ConfigError("http backend needs base_url")


def build_gateway(config: RunConfig) -> Gateway:
    """Replay dir wins when set: read-only store, zero network."""
    if config.replay_dir:
        return Gateway.replay(
            config.replay_dir,
            max_in_flight=config.backend.max_in_flight,
            rate_per_second=config.backend.rate_per_second,
        )
    if config.backend.kind == "scripted":
        backend = ScriptedBackend(
            seed=config.backend.seed, embed_dimension=config.backend.embed_dimension
        )
    else:
        backend = HTTPBackend(
            base_url=config.backend.base_url,
            model=config.backend.model,
            embed_model=config.backend.embed_model,
            embed_dimension=config.backend.embed_dimension,
            scoring_model=config.backend.scoring_model,
            api_key_env=config.backend.api_key_env,
        )
    cache = ResponseCache(config.cache_dir) if config.cache_dir else None
    return Gateway(
        backend,
        cache,
        max_in_flight=config.backend.max_in_flight,
        rate_per_second=config.backend.rate_per_second,
    )
