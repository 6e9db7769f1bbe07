"""Retrieval-augmented consultation: prompt composition, session service
and the HTTP API."""

from .prompting import ConsultPromptConfig, compose_inference_prompt
from .service import (
    BatchResponse,
    ConsultService,
    ConsultSession,
    ConsultTurn,
    InMemorySessionStore,
    JsonlSessionStore,
    run_condition_batch,
)

__all__ = [
    "BatchResponse",
    "ConsultPromptConfig",
    "ConsultService",
    "ConsultSession",
    "ConsultTurn",
    "InMemorySessionStore",
    "JsonlSessionStore",
    "compose_inference_prompt",
    "run_condition_batch",
]
