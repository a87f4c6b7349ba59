"""Monetary policy, sentiment, and identification toolkit.

Submodules are imported lazily so that the command line entry point can pin
BLAS threading environment variables before numpy is first loaded.
"""
from __future__ import annotations

import importlib

__version__ = "0.1.0"

_SUBMODULES = (
    "analysis",
    "cli",
    "errors",
    "figures",
    "gmm",
    "identify",
    "io",
    "leakage",
    "model",
    "posterior",
    "projections",
    "reduced",
    "regression",
    "synthdata",
    "textmetrics",
)

__all__ = list(_SUBMODULES) + ["__version__"]


def __getattr__(name: str):
    if name in _SUBMODULES:
        return importlib.import_module(f".{name}", __name__)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")


def __dir__() -> list[str]:
    return sorted(__all__)
