"""Optional compiled inner loop for the filter banks (numba, if installed)."""

try:
    import numba
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None

if numba is not None:
    @numba.njit(cache=True)
    def advance_and_history(V, left, right, sign, b, a, s1, s2, h):
        """Update all section states with node voltages V, then refill the history h.

        ``V`` and ``h`` carry one trailing ground slot, which stays zero in V.
        """
        h[:] = 0.0
        for k in range(len(left)):
            u = V[left[k]] - sign[k] * V[right[k]]
            y = b[k, 0] * u + s1[k]
            n1 = b[k, 1] * u - a[k, 1] * y + s2[k]
            s2[k] = b[k, 2] * u - a[k, 2] * y
            s1[k] = n1
            h[left[k]] += n1
            h[right[k]] -= sign[k] * n1
else:
    advance_and_history = None
