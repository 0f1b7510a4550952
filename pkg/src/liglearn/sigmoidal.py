"""Sigmoidal smoothing of the equilibrium indicator, and gradient ascent.

The hard membership [x in NE(G)] = prod_i [x_i f_i(x) >= 0] is replaced by
prod_i H(x_i f_i(x)) with the shifted sigmoid

    H(z) = (1 + tanh(z / beta - atanh(1 - 2 alpha^(1/n)))) / 2,

whose shift makes H(0)^n = alpha: a fully indifferent action keeps a small
but nonzero smoothed membership, so the all-zero game is not a spurious
optimum.  Two ascent objectives share this membership:

* empirical: the smoothed fraction of samples that are equilibria.
* likelihood: the smoothed mixture average log-likelihood, which needs the
  smoothed equilibrium proportion over all 2^n joint actions (n <= 15).

At sharp beta the sigmoid saturates to exact 0/1 in float64.  The gradient
uses H' = 2 H (1-H) / beta, which is then exactly zero, so saturated
samples contribute nothing; log coefficients that blow up in the same
regime always multiply those exact zeros and are guarded to zero, keeping
value and gradient finite without approximation.
"""
import math
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, NumericError
from .games import DEFAULT_TOL, InfluenceGame, decode_actions
from .mixture import (
    LN2,
    avg_log_likelihood,
    empirical_proportion,
    optimal_q,
)

#: Likelihood mode sums smoothed membership over all 2^n joint actions.
LIKELIHOOD_CAP = 15


@dataclass(frozen=True)
class SigmoidParams:
    """Shifted-sigmoid shape: steepness beta and indifference level alpha.

    The shift is chosen so that n indifferent players give a smoothed
    membership of exactly alpha; construction is validated to 1e-12.
    """

    alpha: float = 0.1
    beta: float = 0.001
    n: int = 1

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha={self.alpha} outside (0, 1)")
        if not self.beta > 0.0:
            raise ValueError(f"beta={self.beta} must be positive")
        if self.n < 1:
            raise ValueError(f"n={self.n} must be >= 1")
        h0 = 0.5 * (1.0 + math.tanh(-self.shift))
        if abs(h0 ** self.n - self.alpha) > 1e-12:
            raise ValueError("sigmoid shift fails H(0)^n = alpha to 1e-12")

    @property
    def shift(self):
        return math.atanh(1.0 - 2.0 * self.alpha ** (1.0 / self.n))


def sigmoid_h(z, p):
    """Shifted sigmoid H(z), elementwise over z; strictly increasing."""
    return 0.5 * (1.0 + np.tanh(np.asarray(z, dtype=np.float64) / p.beta
                                - p.shift))


def _membership_pieces(W, b, X, p):
    """Smoothed membership products and their building blocks.

    Returns (M, H, T) where M[l] = prod_i H(z_li) for z_li = x_li f_i(x_l),
    H is the (m, n) sigmoid matrix and T = H'(Z) * leave-one-out * X is the
    per-entry gradient factor (T.T @ X accumulates dM/dW).
    """
    Z = X * (X @ W.T - b)
    H = sigmoid_h(Z, p)
    m, n = H.shape
    left = np.cumprod(H, axis=1)
    right = np.cumprod(H[:, ::-1], axis=1)[:, ::-1]
    loo = np.empty_like(H)
    loo[:, 0] = 1.0
    loo[:, 1:] = left[:, :-1]
    loo[:, :-1] *= right[:, 1:]
    M = left[:, -1]
    Hp = 2.0 * H * (1.0 - H) / p.beta
    T = Hp * loo * X
    return M, H, T


def smooth_membership(W, b, X, p):
    """prod_i H(x_i f_i(x)) for every row of X."""
    return _membership_pieces(np.asarray(W, dtype=np.float64),
                              np.asarray(b, dtype=np.float64), X, p)[0]


def _mean_and_grad(W, b, X, p):
    """Mean smoothed membership over rows of X, with its (W, b) gradient."""
    M, _, T = _membership_pieces(W, b, X, p)
    count = X.shape[0]
    gW = T.T @ X / count
    np.fill_diagonal(gW, 0.0)
    gb = -T.sum(axis=0) / count
    return float(M.mean()), gW, gb


def _guard(c):
    """Replace a non-finite log coefficient by 0.

    Exact, not a fix-up: the coefficient is non-finite only when the
    matching smoothed proportion saturated to exactly 0 or 1, and then
    every gradient entry it multiplies is exactly zero as well.
    """
    return c if math.isfinite(c) else 0.0


def smooth_objective(W, b, q, dataset, p, mode):
    """Value and (W, b) gradient of the smooth part of an ascent objective.

    mode="empirical": the smoothed empirical proportion of equilibria.
    mode="likelihood": the smoothed mixture average log-likelihood, summing
    the smoothed true proportion over all 2^n joint actions (n <= 15); pass
    q=None to use the closed-form q_hat = min(pi_hat_smooth, 1 - 1/(2m)).

    The L1 penalty and its subgradient belong to the trainer, not here.
    Returns (value, (grad_W, grad_b)).
    """
    W = np.asarray(W, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    X = dataset.actions.astype(np.float64)
    n, m = dataset.n, dataset.m
    if mode == "empirical":
        value, gW, gb = _mean_and_grad(W, b, X, p)
        return value, (gW, gb)
    if mode != "likelihood":
        raise ValueError(f"unknown mode {mode!r}")
    if n > LIKELIHOOD_CAP:
        raise CapacityError(
            f"likelihood mode sums over 2^n actions; n={n} exceeds "
            f"{LIKELIHOOD_CAP}")

    pi_hat, gW_hat, gb_hat = _mean_and_grad(W, b, X, p)
    X_all = decode_actions(np.arange(1 << n, dtype=np.int64), n).astype(
        np.float64)
    pi_s, gW_pi, gb_pi = _mean_and_grad(W, b, X_all, p)
    if q is None:
        q = optimal_q(pi_hat, m)
    q = float(q)
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q={q} outside [0, 1]")

    # np.float64 arithmetic: saturated proportions yield inf/nan for the
    # guard instead of raising on log(0) or 0/0
    with np.errstate(divide="ignore", invalid="ignore"):
        ph, ps, qs = np.float64(pi_hat), np.float64(pi_s), np.float64(q)

        def xlogy(a, y):
            return float(a * np.log(y)) if a != 0.0 else 0.0

        value = (xlogy(ph, qs) - xlogy(ph, ps)
                 + xlogy(1.0 - ph, 1.0 - qs)
                 - xlogy(1.0 - ph, 1.0 - ps) - n * LN2)
        c_hat = _guard(float(np.log(qs) - np.log(ps)
                             - np.log1p(-qs) + np.log1p(-ps)))
        c_pi = _guard(float((1.0 - ph) / (1.0 - ps) - ph / ps))
    gW = c_hat * gW_hat + c_pi * gW_pi
    gb = c_hat * gb_hat + c_pi * gb_pi
    return value, (gW, gb)


@dataclass(frozen=True)
class SmoothTrainConfig:
    """Ascent hyperparameters: L1 strength, step, iteration and restart
    budget, seed, and the objective-improvement stopping tolerance."""

    rho: float = 0.0
    step: float = 0.1
    max_iters: int = 200
    seed: int = 0
    tol_obj: float = 1e-9
    restarts: int = 5

    def __post_init__(self):
        if self.rho < 0.0:
            raise ValueError("rho must be >= 0")
        if not self.step > 0.0:
            raise ValueError("step must be positive")
        if self.max_iters < 1 or self.restarts < 1:
            raise ValueError("max_iters and restarts must be >= 1")


_MAX_HALVINGS = 30


@dataclass(frozen=True)
class RestartTrace:
    """One restart's accepted penalized objective values (non-decreasing
    under backtracking) and its final iterate."""

    values: np.ndarray
    W: np.ndarray
    b: np.ndarray


def _true_score(W, b, dataset, tol):
    """Unsmoothed average log-likelihood with the closed-form q_hat."""
    game = InfluenceGame(W=W.copy(), b=b.copy())
    pi_hat = empirical_proportion(game, dataset, tol=tol)
    q_hat = optimal_q(pi_hat, dataset.m)
    return game, q_hat, avg_log_likelihood(game, q_hat, dataset, tol=tol), pi_hat


def _improves(score, pi_hat, best):
    """True score decides; numeric ties go to higher empirical coverage.

    Exact ties are real: an equilibrium set covering half the action space
    and its complement induce identical mixtures (with complementary q), but
    only the higher-coverage one satisfies q > pi.
    """
    if best is None:
        return True
    if math.isclose(score, best[0], rel_tol=1e-12, abs_tol=1e-12):
        return pi_hat > best[3]
    return score > best[0]


def train_sigmoidal(dataset, config, mode, p=None, tol=DEFAULT_TOL):
    """Gradient ascent on a smoothed objective with an L1 penalty on W.

    Runs config.restarts ascents from uniform [-0.1, 0.1] initializations.
    Each iteration takes a fixed step along the smooth gradient plus the
    sign subgradient of -rho ||W||_1, halving the step up to 30 times until
    the penalized objective does not decrease; the per-restart trace of
    accepted values is therefore non-decreasing.  The returned game is the
    iterate with the best true (unsmoothed) average log-likelihood across
    all restarts (ties to higher empirical coverage), with its closed-form
    q_hat.

    Returns (InfluenceGame, q, trace) where trace holds one RestartTrace
    (accepted objective values plus the final iterate) per restart.
    """
    n = dataset.n
    if p is None:
        p = SigmoidParams(n=n)
    rng = np.random.default_rng(config.seed)
    best = None
    trace = []

    for _ in range(config.restarts):
        W = rng.uniform(-0.1, 0.1, size=(n, n))
        np.fill_diagonal(W, 0.0)
        b = rng.uniform(-0.1, 0.1, size=n)

        def penalized(W, b):
            value, (gW, gb) = smooth_objective(W, b, None, dataset, p, mode)
            if not math.isfinite(value):
                raise NumericError("non-finite smoothed objective",
                                   W=W.copy(), b=b.copy())
            return value - config.rho * np.abs(W).sum(), gW, gb

        cur, gW, gb = penalized(W, b)
        values = [cur]
        game, q_hat, score, pi_hat = _true_score(W, b, dataset, tol)
        if _improves(score, pi_hat, best):
            best = (score, game, q_hat, pi_hat)

        step = config.step
        for _ in range(config.max_iters):
            gW_pen = gW - config.rho * np.sign(W)
            trial = step
            for _ in range(_MAX_HALVINGS + 1):
                W2 = W + trial * gW_pen
                np.fill_diagonal(W2, 0.0)
                b2 = b + trial * gb
                nxt, gW2, gb2 = penalized(W2, b2)
                if nxt >= cur:
                    break
                trial *= 0.5
            else:
                break
            step = trial
            W, b, gW, gb = W2, b2, gW2, gb2
            improved = nxt - cur
            cur = nxt
            values.append(cur)
            game, q_hat, score, pi_hat = _true_score(W, b, dataset, tol)
            if _improves(score, pi_hat, best):
                best = (score, game, q_hat, pi_hat)
            if improved <= config.tol_obj:
                break
        trace.append(RestartTrace(values=np.array(values), W=W.copy(),
                                  b=b.copy()))

    return best[1], best[2], trace
