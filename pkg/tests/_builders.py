"""Small game/dataset builders shared across test modules."""
import numpy as np

from liglearn.games import InfluenceGame


def coordination_game(n, pairs):
    """Zero-threshold game with +1 symmetric edges on the given pairs."""
    W = np.zeros((n, n))
    for i, j in pairs:
        W[i, j] = W[j, i] = 1.0
    return InfluenceGame(W=W, b=np.zeros(n))


def random_game(rng, n, integer=False, scale=1.0):
    """Dense random game; integer=True draws weights in [-2, 2]."""
    if integer:
        W = rng.integers(-2, 3, (n, n)).astype(np.float64)
        b = rng.integers(-2, 3, n).astype(np.float64)
    else:
        W = rng.normal(size=(n, n)) * scale
        b = rng.normal(size=n) * scale
    np.fill_diagonal(W, 0.0)
    return InfluenceGame(W=W, b=b)
