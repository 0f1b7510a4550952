"""Generative mixture model over joint actions.

A model (G, q) emits an equilibrium of G uniformly at random with
probability q and a non-equilibrium uniformly with probability 1-q:

    p(x) = q [x in NE] / |NE|  +  (1-q) [x not in NE] / (2^n - |NE|).

Trivial games (|NE| in {0, 2^n}) force q to 0 resp. 1 and collapse to the
uniform PMF.  The average log-likelihood of a dataset reduces to

    KL(pi_hat || pi) - KL(pi_hat || q) - n ln 2

in nats, where pi = |NE|/2^n is the true proportion of equilibria and
pi_hat the empirical one; the optimal mixture weight for a dataset is
q_hat = min(pi_hat, 1 - 1/(2m)).
"""
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidModelError
from .games import (
    DEFAULT_TOL,
    EquilibriaSet,
    InfluenceGame,
    decode_actions,
    encode_actions,
    enumerate_equilibria,
    is_equilibrium_many,
    validate_actions,
)

LN2 = math.log(2.0)


# ---------------------------------------------------------------------------
# datasets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class JointActionDataset:
    """m observed joint actions over n players, with a frequency view.

    The derived unique actions are sorted by (count desc, index asc), the
    canonical order consumed by the sample-picking learner.
    """

    actions: np.ndarray

    def __post_init__(self):
        X = validate_actions(self.actions)
        if X.shape[0] < 1:
            raise ValueError("need at least one sample")
        X.flags.writeable = False
        object.__setattr__(self, "actions", X)
        idx = encode_actions(X)
        uniq, counts = np.unique(idx, return_counts=True)
        order = np.lexsort((uniq, -counts))
        for name, val in (("_indices", idx), ("_unique", uniq[order]),
                          ("_counts", counts[order])):
            val.flags.writeable = False
            object.__setattr__(self, name, val)

    @classmethod
    def from_indices(cls, indices, n):
        return cls(actions=decode_actions(indices, n))

    @property
    def m(self):
        return self.actions.shape[0]

    @property
    def n(self):
        return self.actions.shape[1]

    def action_indices(self):
        """Encoded index of every sample, in dataset order."""
        return self._indices

    def frequency_view(self):
        """(unique indices, counts) sorted by count desc, index asc."""
        return self._unique, self._counts


# ---------------------------------------------------------------------------
# mixture model
# ---------------------------------------------------------------------------

def _resolve_equilibria(game, tol=DEFAULT_TOL):
    if isinstance(game, EquilibriaSet):
        return game
    if isinstance(game, InfluenceGame):
        return enumerate_equilibria(game, tol=tol)
    raise TypeError(f"expected InfluenceGame or EquilibriaSet, got {type(game)!r}")


@dataclass(frozen=True)
class MixtureModel:
    """A game (influence game or explicit equilibrium set) paired with q.

    strict=True (default) enforces the validity rules: empty NE forces q=0,
    full NE forces q=1, and non-trivial games need 0 < q < 1.  strict=False
    admits boundary q on non-trivial games; the result is still a proper PMF
    (it just assigns zero mass to one class) and is meant for evaluation
    code such as KL computations on learned models.
    """

    game: object
    q: float
    strict: bool = field(default=True, compare=False)

    def __post_init__(self):
        q = float(self.q)
        if not 0.0 <= q <= 1.0:
            raise InvalidModelError(f"q={q} outside [0, 1]")
        eqset = _resolve_equilibria(self.game)
        k, total = len(eqset), 1 << eqset.n
        if k == 0 and q != 0.0:
            raise InvalidModelError("empty equilibrium set forces q=0")
        if k == total and q != 1.0:
            raise InvalidModelError("full equilibrium set forces q=1")
        if self.strict and 0 < k < total and not 0.0 < q < 1.0:
            raise InvalidModelError(
                f"non-trivial game needs 0 < q < 1, got q={q}")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "_eqset", eqset)

    @property
    def n(self):
        return self._eqset.n

    @property
    def equilibria(self):
        return self._eqset

    def is_trivial(self):
        return self._eqset.is_trivial()

    def class_masses(self):
        """(per-equilibrium mass, per-non-equilibrium mass).

        Trivial models are uniform; boundary q on a non-trivial game zeroes
        one class.
        """
        k, total = len(self._eqset), 1 << self.n
        if k in (0, total):
            u = 1.0 / total
            return u, u
        return self.q / k, (1.0 - self.q) / (total - k)


def pmf(model, x):
    """Mixture probability of a joint action (vector or integer index)."""
    eqset = model.equilibria
    k, total = len(eqset), 1 << model.n
    if 0 < k < total and model.q in (0.0, 1.0):
        raise InvalidModelError("q on the boundary with a non-trivial game")
    p_eq, p_non = model.class_masses()
    idx = x if np.isscalar(x) else None
    if idx is None:
        idx = int(encode_actions(validate_actions(x, model.n))[0])
    if not 0 <= idx < total:
        raise ValueError(f"action index {idx} out of range")
    return p_eq if idx in eqset else p_non


def sample(model, seed, m):
    """m i.i.d. draws from the mixture; deterministic given the seed.

    With probability q an equilibrium is drawn uniformly, otherwise a
    non-equilibrium is drawn uniformly (by rejection against the NE set).
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    eqset = model.equilibria
    k, total = len(eqset), 1 << model.n
    if 0 < k < total and model.q in (0.0, 1.0):
        raise InvalidModelError("q on the boundary with a non-trivial game")
    rng = np.random.default_rng(seed)
    take_eq = rng.random(m) < model.q
    idx = np.empty(m, dtype=np.int64)
    n_eq = int(take_eq.sum())
    if n_eq:
        idx[take_eq] = eqset.members[rng.integers(0, k, size=n_eq)]
    pending = np.flatnonzero(~take_eq)
    while pending.size:
        cand = rng.integers(0, total, size=pending.size)
        reject = eqset.contains(cand)
        idx[pending[~reject]] = cand[~reject]
        pending = pending[reject]
    return JointActionDataset.from_indices(idx, model.n)


def empirical_proportion(game, dataset, tol=DEFAULT_TOL):
    """Fraction of dataset samples that are equilibria of the game."""
    if isinstance(game, EquilibriaSet):
        if game.n != dataset.n:
            raise ValueError("player counts disagree")
        hits = game.contains(dataset.action_indices())
    else:
        hits = is_equilibrium_many(game, dataset.actions, tol=tol)
    return float(hits.mean())


# ---------------------------------------------------------------------------
# likelihood pieces
# ---------------------------------------------------------------------------

def kl_bernoulli(p1, p2):
    """KL(Bernoulli(p1) || Bernoulli(p2)) in nats, with 0 log 0 = 0.

    Returns +inf when p2 sits on the boundary away from p1, a sentinel
    rather than an exception so maximization code can compare totally.
    """
    if not 0.0 <= p1 <= 1.0:
        raise ValueError(f"p1={p1} outside [0, 1]")
    if not 0.0 <= p2 <= 1.0:
        raise ValueError(f"p2={p2} outside [0, 1]")
    if (p2 == 0.0 and p1 > 0.0) or (p2 == 1.0 and p1 < 1.0):
        return math.inf
    total = 0.0
    if p1 > 0.0:
        total += p1 * math.log(p1 / p2)
    if p1 < 1.0:
        total += (1.0 - p1) * math.log((1.0 - p1) / (1.0 - p2))
    return total


def optimal_q(pi_hat, m):
    """Closed-form optimal mixture weight min(pi_hat, 1 - 1/(2m))."""
    if m < 1:
        raise ValueError("m must be >= 1")
    if not 0.0 <= pi_hat <= 1.0:
        raise ValueError(f"pi_hat={pi_hat} outside [0, 1]")
    return min(float(pi_hat), 1.0 - 1.0 / (2.0 * m))


def loglik_from_proportions(pi_hat, pi, q, n):
    """Average log-likelihood from the three proportions, in nats.

    Valid for non-trivial pi in (0, 1); boundary q values propagate the
    +-inf sentinel of kl_bernoulli (a model that zeroes observed mass
    scores -inf, never raises).
    """
    if not 0.0 < pi < 1.0:
        raise ValueError(f"pi={pi} must lie strictly inside (0, 1)")
    return kl_bernoulli(pi_hat, pi) - kl_bernoulli(pi_hat, q) - n * LN2


def avg_log_likelihood(game, q, dataset, tol=DEFAULT_TOL):
    """Average log-likelihood of the dataset under the mixture (game, q).

    Equals the direct average of log pmf over the samples.  Trivial games
    return exactly -n ln 2 (uniform PMF), ignoring q.
    """
    eqset = _resolve_equilibria(game, tol=tol)
    if eqset.n != dataset.n:
        raise ValueError("player counts disagree")
    if eqset.is_trivial():
        return -eqset.n * LN2
    if not 0.0 <= q <= 1.0:
        raise InvalidModelError(f"q={q} outside [0, 1]")
    pi_hat = empirical_proportion(eqset, dataset)
    return loglik_from_proportions(pi_hat, eqset.proportion(), q, eqset.n)


def kl_bounds(pi_hat, pi):
    """Bracketing bounds (lower, upper) for KL(pi_hat || pi) in nats.

    Requires 0 < pi < pi_hat <= 1; the bounds are
    (-pi_hat ln pi - ln 2, -pi_hat ln pi), strict on the open region
    pi_hat < 1 and attained at pi_hat = 1 by the upper bound.
    """
    if not (0.0 < pi < pi_hat <= 1.0):
        raise ValueError(f"need 0 < pi < pi_hat <= 1, got pi={pi}, pi_hat={pi_hat}")
    upper = -pi_hat * math.log(pi)
    return upper - LN2, upper
