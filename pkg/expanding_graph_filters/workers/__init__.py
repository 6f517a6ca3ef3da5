"""Workers package."""

from .base import RunExecutor, RunTask
from .pool import AsyncRunPool

__all__ = [
    "AsyncRunPool",
    "RunExecutor",
    "RunTask",
]
