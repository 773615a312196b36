"""Optional numba compilation; the kernels also run as plain Python."""

try:
    import numba

    jit = numba.njit(cache=True, nogil=True)
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba

    def jit(f):
        return f

    HAVE_NUMBA = False
