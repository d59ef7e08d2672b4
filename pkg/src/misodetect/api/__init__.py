"""HTTP service: FastAPI app factory, model registry, job queue and the
published JSON schemas for every endpoint body/response."""

from .app import create_app
from .jobs import ExplainJob, JobManager
from .registry import (
    ALLOWED_MODEL_IDS,
    ModelRegistry,
    ModelRegistryEntry,
    ServerConfig,
    load_server_config,
)
from .stub import StubModel, make_stub_registry

__all__ = [
    "ALLOWED_MODEL_IDS",
    "ExplainJob",
    "JobManager",
    "ModelRegistry",
    "ModelRegistryEntry",
    "ServerConfig",
    "StubModel",
    "create_app",
    "load_server_config",
    "make_stub_registry",
]
