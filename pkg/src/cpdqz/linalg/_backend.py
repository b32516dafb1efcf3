"""Selects the compiled QZ kernels when available, the pure-Python ones otherwise.

Set ``CPDQZ_PURE_PYTHON=1`` to force the fallback.
"""
import importlib
import os

from . import _qz_py


def load(name: str):
    """Return the kernel module called ``name`` (``"compiled"`` or ``"python"``)."""
    if name == "python":
        return _qz_py
    if name == "compiled":
        return importlib.import_module("cpdqz.linalg._compiled")
    raise ValueError(f"unknown backend {name!r}")


def available() -> list[str]:
    names = ["python"]
    try:
        load("compiled")
    except ImportError:
        pass
    else:
        names.insert(0, "compiled")
    return names


if os.environ.get("CPDQZ_PURE_PYTHON", "") not in ("", "0"):
    kernels = _qz_py
    BACKEND = "python"
else:
    try:
        kernels = load("compiled")
        BACKEND = "compiled"
    except ImportError:
        kernels = _qz_py
        BACKEND = "python"
