"""Kernel backend selection.

The compiled Cython kernel is used when it imports; otherwise the numpy
implementation takes over.  Set ``KINEMETRICA_BACKEND=python`` to force the
fallback (``compiled`` to insist on the extension).
"""

from __future__ import annotations

import os

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

_choice = os.environ.get("KINEMETRICA_BACKEND", "auto").lower()
if _choice == "compiled" and _compiled is None:
    raise ImportError("KINEMETRICA_BACKEND=compiled but kinemetrica._kernels is not built")

if _compiled is not None and _choice != "python":
    NAME = "compiled"
    tally_graph = _compiled.tally_graph
else:
    NAME = "python"
    tally_graph = _kernels_py.tally_graph


def available() -> list[str]:
    return ["python"] + (["compiled"] if _compiled is not None else [])


def get(name: str):
    """The ``tally_graph`` function of a named backend."""
    if name == "python":
        return _kernels_py.tally_graph
    if name == "compiled":
        if _compiled is None:
            raise ImportError("compiled kernel is not built")
        return _compiled.tally_graph
    raise ValueError(f"unknown backend {name!r}")
