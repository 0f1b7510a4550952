"""Linear influence games: representation and exact equilibrium computation.

An n-player linear influence game G = (W, b) gives player i the payoff
x_i * (w_i . x_{-i} - b_i) for a joint action x in {-1,+1}^n, where w_i is
row i of W with a structurally zero diagonal.  A joint action is a
pure-strategy Nash equilibrium (PSNE) iff every player's payoff is
non-negative; ties (payoff exactly zero) count as equilibria, so both
actions are best responses on the boundary.

Joint actions are canonically encoded as n-bit integers, bit i set iff
player i plays +1, which makes equilibrium sets plain sorted integer arrays
and keeps 2^n scans exact and fast.
"""
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import CapacityError

#: Hard cap for exhaustive 2^n scans (~33M joint actions).
ENUMERATION_CAP = 25

#: Default tolerance for float games; use tol=0 with integer weights.
DEFAULT_TOL = 1e-9


# ---------------------------------------------------------------------------
# joint action encoding
# ---------------------------------------------------------------------------

def encode_action(x):
    """Encode a {-1,+1} action vector as its n-bit integer index."""
    x = np.asarray(x)
    bits = np.flatnonzero(x > 0)
    return int(np.sum(1 << bits.astype(np.int64))) if bits.size else 0


def encode_actions(X):
    """Encode an (m, n) matrix of {-1,+1} actions as int64 indices."""
    X = np.asarray(X)
    n = X.shape[1]
    weights = (np.int64(1) << np.arange(n, dtype=np.int64))
    return ((X > 0).astype(np.int64) @ weights)


def decode_actions(indices, n):
    """Decode int64 indices into an (m, n) int8 matrix over {-1,+1}."""
    idx = np.asarray(indices, dtype=np.int64).reshape(-1)
    if n == 0:
        return np.zeros((idx.size, 0), dtype=np.int8)
    bits = (idx[:, None] >> np.arange(n, dtype=np.int64)) & 1
    return (bits * 2 - 1).astype(np.int8)


def decode_action(index, n):
    """Decode a single index into a length-n {-1,+1} int8 vector."""
    return decode_actions([index], n)[0]


def validate_actions(X, n=None):
    """Validate and return an (m, n) int8 matrix with entries exactly +-1."""
    X = np.asarray(X)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2:
        raise ValueError(f"expected a 2-D action array, got shape {X.shape}")
    if n is not None and X.shape[1] != n:
        raise ValueError(f"expected {n} players, got {X.shape[1]}")
    if X.shape[1] < 1:
        raise ValueError("need at least one player")
    out = X.astype(np.int8, copy=True)
    if not np.isin(out, (-1, 1)).all() or not np.array_equal(out, X):
        raise ValueError("actions must be exactly -1 or +1")
    return out


# ---------------------------------------------------------------------------
# game types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PlayerRow:
    """One player's influence weights (diagonal slot removed) and threshold."""

    w: np.ndarray
    b: float

    def influence(self, x_minus_i):
        """Influence function value w . x_{-i} - b."""
        return float(np.asarray(x_minus_i, dtype=np.float64) @ self.w - self.b)


@dataclass(frozen=True)
class InfluenceGame:
    """A linear influence game (W, b) with diag(W) = 0 and finite entries."""

    W: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        W = np.array(self.W, dtype=np.float64)
        b = np.array(self.b, dtype=np.float64).reshape(-1)
        if W.ndim != 2 or W.shape[0] != W.shape[1]:
            raise ValueError(f"W must be square, got shape {W.shape}")
        if W.shape[0] != b.shape[0]:
            raise ValueError("W and b disagree on the player count")
        if W.shape[0] < 1:
            raise ValueError("need at least one player")
        if not (np.isfinite(W).all() and np.isfinite(b).all()):
            raise ValueError("game entries must be finite")
        if np.any(np.diag(W) != 0):
            raise ValueError("diag(W) must be exactly zero")
        W.flags.writeable = False
        b.flags.writeable = False
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "b", b)

    @property
    def n(self):
        return self.W.shape[0]

    def row(self, i):
        """Player i's (w_i, b_i) with the diagonal slot removed."""
        mask = np.arange(self.n) != i
        return PlayerRow(w=self.W[i, mask].copy(), b=float(self.b[i]))

    def margins(self, X):
        """Per-player influence values f_i(x_{-i}) = w_i . x_{-i} - b_i.

        X is an (m, n) matrix of {-1,+1} actions; returns an (m, n) float
        array.  The zero diagonal makes X @ W.T drop each player's own action.
        """
        X = np.asarray(X, dtype=np.float64)
        return X @ self.W.T - self.b


def zero_game(n):
    """The trivial game W=0, b=0 whose every joint action is an equilibrium."""
    return InfluenceGame(W=np.zeros((n, n)), b=np.zeros(n))


@dataclass(frozen=True)
class EquilibriaSet:
    """An explicit equilibrium set: n plus sorted unique action indices.

    Also the representation of a "general game" identified only by its
    equilibria, as used by the sample-picking learner.
    """

    n: int
    members: np.ndarray

    def __post_init__(self):
        members = np.array(self.members, dtype=np.int64).reshape(-1)
        members = np.unique(members)
        if self.n < 1:
            raise ValueError("need at least one player")
        if members.size and (members[0] < 0 or members[-1] >= (1 << self.n)):
            raise ValueError("member index out of range for n players")
        members.flags.writeable = False
        object.__setattr__(self, "members", members)

    @classmethod
    def from_actions(cls, X, n=None):
        X = validate_actions(X, n)
        return cls(n=X.shape[1], members=np.unique(encode_actions(X)))

    def __len__(self):
        return int(self.members.size)

    def __contains__(self, item):
        idx = item if np.isscalar(item) else encode_action(item)
        pos = np.searchsorted(self.members, idx)
        return bool(pos < self.members.size and self.members[pos] == idx)

    def contains(self, indices):
        """Vectorized membership test for an int64 index array."""
        idx = np.asarray(indices, dtype=np.int64)
        pos = np.searchsorted(self.members, idx)
        pos = np.minimum(pos, max(self.members.size - 1, 0))
        if self.members.size == 0:
            return np.zeros(idx.shape, dtype=bool)
        return self.members[pos] == idx

    def actions(self):
        """Members decoded to an (|NE|, n) int8 matrix."""
        return decode_actions(self.members, self.n)

    def proportion(self):
        """|NE| / 2^n."""
        return self.members.size / float(1 << self.n)

    def is_trivial(self):
        return self.members.size in (0, 1 << self.n)


# ---------------------------------------------------------------------------
# equilibrium computation
# ---------------------------------------------------------------------------

def is_equilibrium(game, x, tol=DEFAULT_TOL):
    """True iff x_i (w_i . x_{-i} - b_i) >= -tol for every player."""
    if tol < 0:
        raise ValueError("tol must be non-negative")
    x = validate_actions(x, game.n)[0]
    margins = game.margins(x[None, :])[0]
    return bool((x * margins >= -tol).all())


def is_equilibrium_many(game, X, tol=DEFAULT_TOL):
    """Vectorized equilibrium test for an (m, n) matrix of actions."""
    if tol < 0:
        raise ValueError("tol must be non-negative")
    X = np.asarray(X, dtype=np.float64)
    if X.shape[1] != game.n:
        raise ValueError(f"expected {game.n} players, got {X.shape[1]}")
    return (X * game.margins(X) >= -tol).all(axis=1)


def enumerate_equilibria(game, tol=DEFAULT_TOL, cap=ENUMERATION_CAP):
    """Exhaustive scan of all 2^n joint actions.

    Returns the full equilibrium set; raises CapacityError above the cap so
    callers fall back to Monte Carlo estimation explicitly.
    """
    if game.n > cap:
        raise CapacityError(f"n={game.n} exceeds the enumeration cap {cap}")
    if tol < 0:
        raise ValueError("tol must be non-negative")
    ids = kernels.equilibria_ids(game.W, game.b, tol)
    return EquilibriaSet(n=game.n, members=ids)


def true_proportion(game, tol=DEFAULT_TOL, cap=ENUMERATION_CAP):
    """True proportion of equilibria |NE(G)| / 2^n."""
    return enumerate_equilibria(game, tol=tol, cap=cap).proportion()


def hyperplane_vertex_count(w, b, tol=0.0, cap=ENUMERATION_CAP):
    """Number of hypercube vertices with |w . x - b| <= tol.

    With a single non-indifferent player i this gives the exact equilibrium
    count 2^{n-1} + (vertices of the (n-1)-cube on player i's hyperplane).
    """
    w = np.asarray(w, dtype=np.float64).reshape(-1)
    if w.size > cap:
        raise CapacityError(f"d={w.size} exceeds the enumeration cap {cap}")
    if tol < 0:
        raise ValueError("tol must be non-negative")
    return kernels.hyperplane_hits(w, b, tol)
