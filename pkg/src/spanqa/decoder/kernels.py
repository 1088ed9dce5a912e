"""Chart kernel selection: the compiled extension when importable, otherwise
the pure-Python version. ``SPANQA_PURE_PYTHON=1`` forces the fallback."""
import os

from . import _chart_py

try:
    if os.environ.get("SPANQA_PURE_PYTHON") == "1":
        raise ImportError("pure Python kernels requested")
    from . import _chart as _compiled
except ImportError:
    _compiled = None

BACKEND = "cython" if _compiled is not None else "python"
fill_chart = (_compiled or _chart_py).fill_chart
fill_chart_python = _chart_py.fill_chart
fill_chart_compiled = _compiled.fill_chart if _compiled is not None else None
