"""Kernel backend selection.

The compiled extension is preferred when it imported cleanly.  Set
``CBO_BACKEND=python`` to force the numpy fallback, or ``CBO_BACKEND=compiled``
to fail loudly when the extension is missing.
"""

from __future__ import annotations

import os
from types import ModuleType
from typing import Optional, Union

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

__all__ = ["available", "get", "default_name"]


def available() -> list[str]:
    names = ["python"]
    if _compiled is not None:
        names.insert(0, "compiled")
    return names


def default_name() -> str:
    choice = os.environ.get("CBO_BACKEND", "auto").strip().lower() or "auto"
    if choice == "auto":
        return "compiled" if _compiled is not None else "python"
    return choice


def get(backend: Optional[Union[str, ModuleType]] = None) -> ModuleType:
    """Resolve a backend name (or pass a module through unchanged)."""
    if isinstance(backend, ModuleType):
        return backend
    name = default_name() if backend is None else backend.lower()
    if name == "python":
        return _kernels_py
    if name == "compiled":
        if _compiled is None:
            raise ImportError("compiled kernels are not built; reinstall the package")
        return _compiled
    raise ValueError(f"unknown backend {backend!r}; choose from {available()}")
