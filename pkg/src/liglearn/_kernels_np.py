"""Pure numpy fallback for the compiled scan kernels.

Scans the joint-action space in index blocks so memory stays bounded at any
n up to the enumeration cap.  Results are identical to liglearn._core (the
test suite checks parity on random games).
"""
import numpy as np

_BLOCK = 1 << 16


def _block_vertices(start, stop, n):
    idx = np.arange(start, stop, dtype=np.int64)
    if n == 0:
        return idx, np.zeros((len(idx), 0), dtype=np.float64)
    bits = (idx[:, None] >> np.arange(n, dtype=np.int64)) & 1
    return idx, (bits * 2 - 1).astype(np.float64)


def equilibria_ids(W, b, tol):
    """Sorted int64 indices of all pure-strategy Nash equilibria.

    Bit i of an index is set iff player i plays +1.
    """
    W = np.ascontiguousarray(W, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    n = W.shape[0]
    total = 1 << n
    hits = []
    for start in range(0, total, _BLOCK):
        idx, X = _block_vertices(start, min(start + _BLOCK, total), n)
        S = X @ W.T - b
        ok = (X * S >= -tol).all(axis=1)
        hits.append(idx[ok])
    return np.concatenate(hits) if hits else np.empty(0, dtype=np.int64)


def hyperplane_hits(w, b, tol):
    """Number of vertices x in {-1,+1}^d with |w . x - b| <= tol."""
    w = np.ascontiguousarray(w, dtype=np.float64)
    d = w.shape[0]
    total = 1 << d
    cnt = 0
    for start in range(0, total, _BLOCK):
        _, X = _block_vertices(start, min(start + _BLOCK, total), d)
        vals = X @ w - b
        cnt += int((np.abs(vals) <= tol).sum())
    return cnt
