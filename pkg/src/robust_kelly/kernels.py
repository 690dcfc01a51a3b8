"""Backend selection for the hot numerical kernels.

Prefers the compiled extension; falls back to the numpy implementation
when the extension is unavailable or ``ROBUST_KELLY_PURE_PYTHON`` is set.
``BACKEND`` records which one was picked.
"""

import os

if os.environ.get("ROBUST_KELLY_PURE_PYTHON"):
    from . import _kernels_py as _impl

    BACKEND = "python"
else:
    try:
        from . import _kernels_cy as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        from . import _kernels_py as _impl

        BACKEND = "python"

growth_vector = _impl.growth_vector
box_fill = _impl.box_fill
project_simplex = _impl.project_simplex
ball_worst = _impl.ball_worst

__all__ = ["BACKEND", "growth_vector", "box_fill", "project_simplex", "ball_worst"]
