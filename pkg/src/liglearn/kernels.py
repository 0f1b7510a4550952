"""Backend selection for the hot scan kernels.

The compiled extension (liglearn._core) is used when it was built; otherwise,
or when LIGLEARN_PURE_PYTHON=1 is set, the numpy fallback takes over.  Both
backends expose the same two functions with identical results.
"""
import os

from . import _kernels_np

if os.environ.get("LIGLEARN_PURE_PYTHON", "0") not in ("", "0"):
    _impl = _kernels_np
    BACKEND = "numpy"
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]
        BACKEND = "compiled"
    except ImportError:
        _impl = _kernels_np
        BACKEND = "numpy"


def equilibria_ids(W, b, tol=0.0):
    """Sorted indices of all pure-strategy Nash equilibria of the game (W, b)."""
    return _impl.equilibria_ids(W, b, float(tol))


def hyperplane_hits(w, b, tol=0.0):
    """Number of hypercube vertices lying on the slab |w.x - b| <= tol."""
    return _impl.hyperplane_hits(w, float(b), float(tol))
