"""Console entry point; the implementation lives in io_cli."""

from __future__ import annotations

from .io_cli import cli, main

__all__ = ["cli", "main"]
