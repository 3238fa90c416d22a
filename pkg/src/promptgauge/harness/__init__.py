from .config import (
    BackendConfig,
    BenchmarkConfig,
    DatasetSpec,
    OptimizeConfig,
    RunConfig,
    SelectionConfig,
    build_gateway,
    load_config,
    validate_config,
)
from .ingest import assign_splits, ingest, read_query_file
from .stages import (
    DEPENDENCIES,
    PipelineRunner,
    STAGE_ORDER,
    StageResult,
    file_sha256,
    read_jsonl,
    write_json,
    write_jsonl,
)

__all__ = [
    "BackendConfig",
    "BenchmarkConfig",
    "DEPENDENCIES",
    "DatasetSpec",
    "OptimizeConfig",
    "PipelineRunner",
    "RunConfig",
    "STAGE_ORDER",
    "SelectionConfig",
    "StageResult",
    "assign_splits",
    "build_gateway",
    "file_sha256",
    "ingest",
    "load_config",
    "read_jsonl",
    "read_query_file",
    "validate_config",
    "write_json",
    "write_jsonl",
]
