"""Hot numeric kernels with two interchangeable backends.

``AFFINEKIT_NUMBA=0`` forces the pure-numpy path; otherwise numba is used when
it imports. Both backends expose the same functions; ``get_backend`` returns
either explicitly (tests and the benchmark compare them).

Every reduction is a fixed pairwise tree, so results do not depend on thread
count.
"""
import os

from . import _numpy

_flag = os.environ.get("AFFINEKIT_NUMBA", "1").strip().lower()
NUMBA_REQUESTED = _flag not in ("0", "false", "no", "off")

try:
    from . import _numba
    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _numba = None
    HAS_NUMBA = False

BACKEND = "numba" if (NUMBA_REQUESTED and HAS_NUMBA) else "numpy"


def get_backend(name: str | None = None):
    name = name or BACKEND
    if name == "numba":
        if not HAS_NUMBA:
            raise RuntimeError("numba backend requested but numba is unavailable")
        return _numba
    if name == "numpy":
        return _numpy
    raise ValueError(f"unknown backend {name!r}")


def set_threads(n: int) -> int:
    """Validate a worker-thread count. Kernels are serial (no ``prange``);
    parallelism comes from running RNG batches concurrently."""
    return max(1, int(n))


_impl = get_backend()
pairwise_sum = _impl.pairwise_sum
transported_trapezoid = _impl.transported_trapezoid
grid_sum = _impl.grid_sum
kks_area = _impl.kks_area
pair_liouville_density = _impl.pair_liouville_density
binned_counts = _impl.binned_counts

__all__ = ["BACKEND", "HAS_NUMBA", "get_backend", "set_threads", "pairwise_sum",
           "transported_trapezoid", "grid_sum", "kks_area", "pair_liouville_density",
           "binned_counts"]
