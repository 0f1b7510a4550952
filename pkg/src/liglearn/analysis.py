"""Evaluation metrics, generalization and true-proportion bounds, influence.

Everything here is a pure function of models, sets, or scalar parameters:
exact KL between two mixtures (four closed-form cells instead of a 2^n
scan), equilibrium-set precision/recall, the sample-complexity slack of the
generalization bound, the (3/4)^n / delta Markov bound on the true
proportion of equilibria with its Monte Carlo verification, and the
normalized influence scores of a trained game.
"""
import math
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError
from .games import InfluenceGame, true_proportion
from .mixture import LN2, MixtureModel, avg_log_likelihood, empirical_proportion, optimal_q

#: model_kl_exact needs both equilibrium sets enumerated.
KL_CAP = 20

#: monte_carlo_expected_pi enumerates 2^n actions per trial.
MC_CAP = 12


@dataclass(frozen=True)
class EvalMetrics:
    """Comparison of a learned mixture against the generating one.

    kl_to_truth may carry the +inf sentinel (learned model assigning zero
    mass where the truth is positive); display clipping is the report
    writer's concern, not this container's.
    """

    kl_to_truth: float
    precision: float
    recall: float
    ne_count: int
    pi_hat: float
    test_loglik: float

    def __post_init__(self):
        if not 0.0 <= self.precision <= 1.0:
            raise ValueError("precision outside [0, 1]")
        if not 0.0 <= self.recall <= 1.0:
            raise ValueError("recall outside [0, 1]")
        if self.ne_count < 0:
            raise ValueError("ne_count must be >= 0")


@dataclass(frozen=True)
class BoundReport:
    """Generalization-bound slack for a sample size, with the capacity term."""

    n: int
    m: int
    delta: float
    q_bar: float
    bound_value: float
    vc_term: float

    def __post_init__(self):
        if self.bound_value < 0.0:
            raise ValueError("bound_value must be >= 0")


def _cell(count, p_truth, p_learned):
    """count * p_truth * log(p_truth / p_learned) with the 0 log 0 = 0 and
    positive-over-zero = +inf conventions."""
    if count == 0 or p_truth == 0.0:
        return 0.0
    if p_learned == 0.0:
        return math.inf
    return count * p_truth * math.log(p_truth / p_learned)


def model_kl_exact(truth, learned):
    """KL(truth || learned) in nats between two mixtures over {-1,+1}^n.

    Both PMFs are constant on each of the four cells cut by the two
    equilibrium sets, so the 2^n-term sum collapses to four products.
    Returns +inf when the learned model assigns zero mass somewhere the
    truth does not.
    """
    if truth.n != learned.n:
        raise ValueError(f"player counts disagree: {truth.n} vs {learned.n}")
    n = truth.n
    if n > KL_CAP:
        raise CapacityError(f"n={n} exceeds the exact-KL cap {KL_CAP}")
    total = 1 << n
    t_set, l_set = truth.equilibria, learned.equilibria
    both = np.intersect1d(t_set.members, l_set.members,
                          assume_unique=True).size
    t_only = len(t_set) - both
    l_only = len(l_set) - both
    rest = total - both - t_only - l_only
    pt_eq, pt_non = truth.class_masses()
    pl_eq, pl_non = learned.class_masses()
    return (_cell(both, pt_eq, pl_eq) + _cell(t_only, pt_eq, pl_non)
            + _cell(l_only, pt_non, pl_eq) + _cell(rest, pt_non, pl_non))


def equilibrium_precision_recall(truth, learned):
    """(precision, recall) of a learned equilibrium set.

    precision = |learned and truth| / |learned|, 1 for an empty learned set
    (no false inclusions); recall = |learned and truth| / |truth|, 1 for an
    empty truth (nothing to miss).  Total on all set pairs.
    """
    if truth.n != learned.n:
        raise ValueError(f"player counts disagree: {truth.n} vs {learned.n}")
    both = np.intersect1d(truth.members, learned.members,
                          assume_unique=True).size
    precision = both / len(learned) if len(learned) else 1.0
    recall = both / len(truth) if len(truth) else 1.0
    return precision, recall


def evaluate_model(truth, learned, test):
    """Full metric row for a learned mixture: exact KL to the truth,
    equilibrium precision/recall, learned-set size, empirical proportion on
    the test set, and the test average log-likelihood at the learned q."""
    kl = model_kl_exact(truth, learned)
    precision, recall = equilibrium_precision_recall(
        truth.equilibria, learned.equilibria)
    pi_hat = empirical_proportion(learned.equilibria, test)
    test_ll = avg_log_likelihood(learned.equilibria, learned.q, test)
    return EvalMetrics(kl_to_truth=kl, precision=precision, recall=recall,
                       ne_count=len(learned.equilibria), pi_hat=pi_hat,
                       test_loglik=test_ll)


def generalization_bound(n, m, delta, q_bar):
    """Slack of the finite-sample log-likelihood guarantee.

    slack = (log max(2m, 1/(1-q_bar)) + n log 2)
            * sqrt((2/m) (n^3 log 2 + log(4/delta)))

    in nats, with vc_term = n^3 log 2 the capacity contribution (the number
    of distinct influence games is at most 2^(n^3)).
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must be in (0, 1)")
    if not 0.0 < q_bar < 1.0:
        raise ValueError("q_bar must be in (0, 1)")
    vc_term = n ** 3 * LN2
    scale = math.log(max(2.0 * m, 1.0 / (1.0 - q_bar))) + n * LN2
    slack = scale * math.sqrt((2.0 / m) * (vc_term + math.log(4.0 / delta)))
    return BoundReport(n=n, m=m, delta=delta, q_bar=q_bar,
                       bound_value=slack, vc_term=vc_term)


def tpe_bound(n, delta):
    """Markov bound: with probability >= 1 - delta over a random game,
    the true proportion of equilibria is at most (3/4)^n / delta."""
    if not 0.0 < delta <= 1.0:
        raise ValueError("delta must be in (0, 1]")
    return 0.75 ** n / delta


def _default_draw(rng, n):
    """Standard-normal rows and biases; continuous, so ties have
    probability zero and the per-trial proportion is exact at tol=0."""
    W = rng.standard_normal((n, n))
    np.fill_diagonal(W, 0.0)
    return W, rng.standard_normal(n)


def monte_carlo_expected_pi(n, weight_dist_spec=None, trials=200, seed=0):
    """Mean true proportion of equilibria over random games, with a 99% CI.

    weight_dist_spec: None or "normal" for i.i.d. standard-normal rows, or
    a callable (rng, n) -> (W, b).  Returns (mean, ci) where ci is the
    normal-approximation 99% half-width 2.576 * sigma / sqrt(trials).
    """
    if n > MC_CAP:
        raise CapacityError(f"n={n} exceeds the Monte Carlo cap {MC_CAP}")
    if trials < 2:
        raise ValueError("trials must be >= 2")
    if weight_dist_spec is None or weight_dist_spec == "normal":
        draw = _default_draw
    elif callable(weight_dist_spec):
        draw = weight_dist_spec
    else:
        raise ValueError(f"unknown weight distribution {weight_dist_spec!r}")
    rng = np.random.default_rng(seed)
    pis = np.empty(trials)
    for t in range(trials):
        W, b = draw(rng, n)
        pis[t] = true_proportion(InfluenceGame(W=W, b=b), tol=0.0)
    mean = float(pis.mean())
    sigma = float(pis.std(ddof=1))
    return mean, 2.576 * sigma / math.sqrt(trials)


def influence_scores(game):
    """Per-player influence and bias magnitude of a trained game.

    Each row (w_i, b_i) is normalized by ||w_i||_1 + |b_i| so rows live on
    a common scale; the influence of player j is the total normalized
    weight sum_i |w_ij| others place on j, and bias_i = |b_i| after
    normalization.  A fully zero row has no defined direction: run
    fix_degenerate on the training result first.
    """
    W = np.asarray(game.W, dtype=np.float64)
    b = np.asarray(game.b, dtype=np.float64)
    norms = np.abs(W).sum(axis=1) + np.abs(b)
    dead = np.flatnonzero(norms == 0.0)
    if dead.size:
        raise ValueError(
            f"player rows {dead.tolist()} are entirely zero; apply "
            f"fix_degenerate before computing influence scores")
    What = W / norms[:, None]
    bhat = np.abs(b) / norms
    return np.abs(What).sum(axis=0), bhat
