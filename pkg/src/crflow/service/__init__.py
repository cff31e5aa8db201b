"""FastAPI service wrapping the solver core."""

from .app import app

__all__ = ["app"]
