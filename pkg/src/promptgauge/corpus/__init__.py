from .pool import (
    LLMStyle,
    PoolConfig,
    PoolResult,
    PromptCandidate,
    Query,
    Recombination,
    STYLE_TAGS,
    StaticTemplate,
    build_pool,
    decompose_request,
    generate_static,
    generate_styled,
    parse_segments,
    recombine,
    rephrase_request,
    styled_request,
)
from .templates import DEFAULT_TEMPLATES, TemplateRegistry

__all__ = [
    "DEFAULT_TEMPLATES",
    "LLMStyle",
    "PoolConfig",
    "PoolResult",
    "PromptCandidate",
    "Query",
    "Recombination",
    "STYLE_TAGS",
    "StaticTemplate",
    "TemplateRegistry",
    "build_pool",
    "decompose_request",
    "generate_static",
    "generate_styled",
    "parse_segments",
    "recombine",
    "rephrase_request",
    "styled_request",
]
