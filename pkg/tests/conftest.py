from pathlib import Path

import pytest

from promptgauge.gateway import Gateway, ResponseCache, ScriptedBackend

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture
def scripted_gateway(tmp_path) -> Gateway:
    backend = ScriptedBackend(seed=11)
    cache = ResponseCache(tmp_path / "cache")
    return Gateway(backend, cache)


@pytest.fixture
def uncached_gateway() -> Gateway:
    return Gateway(ScriptedBackend(seed=11))


def make_run_config(tmp_path, **overrides):
    """Small end-to-end config against the bundled toy datasets."""
    from promptgauge.corpus import PoolConfig
    from promptgauge.evaluator import TrainingConfig
    from promptgauge.harness import BackendConfig, BenchmarkConfig, DatasetSpec, RunConfig
    from promptgauge.harness.config import OptimizeConfig, SelectionConfig
    from promptgauge.metrics import EstimatorSettings
    from promptgauge.selection import BoostParams

    defaults = dict(
        seed=7,
        datasets=[
            DatasetSpec(path=str(DATA_DIR / "toy_parity.jsonl"), task="toy_parity", schema="yes_no"),
            DatasetSpec(path=str(DATA_DIR / "toy_pick.jsonl"), task="toy_pick", schema="multiple_choice"),
        ],
        split_policy="50/50",
        pool=PoolConfig(styles=("step_by_step", "verification"), n_recombinations=2),
        estimator=EstimatorSettings(n_samples=10, temperature=0.7, max_tokens=128),
        evaluator=TrainingConfig(epochs=60, learning_rate=0.05, outer_every=5, seed=7),
        optimize=OptimizeConfig(max_iterations=3, top_k_metrics=2),
        benchmark=BenchmarkConfig(temperature=0.7, n_executions=3),
        backend=BackendConfig(kind="scripted", seed=3, embed_dimension=16),
        selection=SelectionConfig(boost=BoostParams(n_rounds=20, max_depth=3)),
        out_dir=str(tmp_path / "out"),
        cache_dir=str(tmp_path / "cache"),
    )
    defaults.update(overrides)
    return RunConfig(**defaults)
