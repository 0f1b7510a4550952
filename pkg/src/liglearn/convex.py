"""Convex loss-minimization learners.

The hard constraint "every sample is an equilibrium" relaxes to minimizing
per-sample losses of the margins z_li = x_li (w_i . x_{l,-i} - b_i):

* independent: sum_i loss(z_li), one convex problem per player
  (1-norm SVM via a linear program, or L1-regularized logistic regression
  via proximal gradient);
* simultaneous hinge: a single linear program with one shared slack per
  sample, solved together with its dual for a strong-duality certificate;
* simultaneous logistic: the smooth upper bound log(1 + sum_i exp(-z_i))
  minimized by accelerated proximal gradient.

Only W is L1-penalized, never b.  The diagonal of W is excluded from the
variables, not merely penalized, so every result has diag(W) = 0 exactly.

A player whose returned (w_i, b_i) is numerically zero is flagged
degenerate (absolute indifference); when the zero solution attains an LP
optimum the solver's arbitrary optimal vertex is canonicalized to exact
zero so the flag is deterministic.  fix_degenerate applies the standard
repair: pin b_i to the sign opposite the player's majority action.
"""
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from .errors import NumericError
from .games import InfluenceGame

METHODS = ("ind_svm", "sim_svm", "ind_logistic", "sim_logistic")

#: A solution entry at or below this magnitude counts as exactly zero when
#: flagging absolutely-indifferent players.
DEGENERATE_ATOL = 1e-8


@dataclass(frozen=True)
class ConvexTrainConfig:
    """Loss/penalty selection and solver tolerances."""

    rho: float = 0.01
    method: str = "sim_logistic"
    max_iters: int = 5000
    tol_grad: float = 1e-6
    tol_feas: float = 1e-7
    seed: int = 0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        if self.rho < 0.0:
            raise ValueError("rho must be >= 0")
        if self.tol_grad <= 0.0 or self.tol_feas <= 0.0:
            raise ValueError("tolerances must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")


@dataclass(frozen=True)
class TrainResult:
    """A trained game with solver diagnostics.

    dual_objective is populated only by the simultaneous hinge trainer
    (its strong-duality certificate); converged=False signals the iteration
    budget ran out, with the final stationarity residual preserved.
    """

    game: InfluenceGame
    per_player_degenerate: np.ndarray
    objective: float
    dual_objective: float = None
    iterations: int = 0
    converged: bool = True
    residual: float = 0.0

    def duality_gap(self):
        """|primal - dual| when a dual certificate exists, else None."""
        if self.dual_objective is None:
            return None
        return abs(self.objective - self.dual_objective)


# ---------------------------------------------------------------------------
# losses
# ---------------------------------------------------------------------------

def simul_logistic_loss(z):
    """log(1 + sum_i exp(-z_i)), shifted by max(-z_i, 0) against overflow.

    A smooth upper bound of the worst per-player logistic loss max_i
    log(1 + exp(-z_i)); with a single entry it is exactly that loss.
    """
    z = np.asarray(z, dtype=np.float64)
    shift = max(0.0, float((-z).max()))
    return shift + np.log(np.exp(-shift) + np.exp(-z - shift).sum())


def _sim_logistic_rows(Z):
    """Row losses of log(1 + sum_i exp(-Z_li)) and the softmax-like ratios
    r_li = exp(-Z_li) / (1 + sum_j exp(-Z_lj)) used by the gradient."""
    shift = np.maximum(0.0, (-Z).max(axis=1, keepdims=True))
    expz = np.exp(-Z - shift)
    denom = np.exp(-shift) + expz.sum(axis=1, keepdims=True)
    losses = shift[:, 0] + np.log(denom[:, 0])
    return losses, expz / denom


def _margins(W, b, X):
    """z_li = x_li (w_i . x_{l,-i} - b_i); the diagonal of W is zero so the
    full inner product equals the leave-self-out one."""
    return X * (X @ W.T - b)


def _logistic_rows(Z):
    """Elementwise log(1 + exp(-z)) and sigma(-z), overflow-safe."""
    losses = np.logaddexp(0.0, -Z)
    ratios = 0.5 * (1.0 - np.tanh(0.5 * Z))
    return losses, ratios


def hinge_objective(W, b, dataset, rho):
    """(1/m) sum_l max(0, max_i (1 - z_li)) + rho ||W||_1, evaluated
    directly from the solution (the shared-slack LP objective with slacks
    eliminated)."""
    X = dataset.actions.astype(np.float64)
    Z = _margins(np.asarray(W, float), np.asarray(b, float), X)
    worst = np.maximum(0.0, (1.0 - Z).max(axis=1))
    return float(worst.mean() + rho * np.abs(W).sum())


# ---------------------------------------------------------------------------
# proximal-gradient machinery (orthant split solved as soft-thresholding)
# ---------------------------------------------------------------------------

def _l1_residual(gW, gb, W, rho, square):
    """Inf-norm of the minimal-norm subgradient of smooth + rho ||W||_1."""
    at_zero = W == 0.0
    res_W = np.where(at_zero,
                     np.maximum(0.0, np.abs(gW) - rho),
                     np.abs(gW + rho * np.sign(W)))
    if square:
        np.fill_diagonal(res_W, 0.0)
    return max(float(res_W.max()), float(np.abs(gb).max()))


def _fista(value_grad, shape_W, n_b, rho, max_iters, tol_grad, square=False):
    """Accelerated proximal gradient from the zero start.

    value_grad(W, b) -> (smooth value, grad_W, grad_b).  The prox is
    soft-thresholding on W only (b unpenalized); the Lipschitz estimate
    grows by backtracking.  square=True pins the diagonal of a full W
    matrix to zero (the simultaneous trainers); per-player rows exclude the
    self-weight by construction.  Starting at zero keeps degenerate players
    at exactly zero: their gradient vanishes and the threshold holds them.
    Returns (W, b, iterations, converged, residual).
    """
    W = np.zeros(shape_W)
    b = np.zeros(n_b)
    Wy, by = W.copy(), b.copy()
    t = 1.0
    L = 1.0
    fy, gW, gb = value_grad(Wy, by)
    res = _l1_residual(gW, gb, W, rho, square)
    if res <= tol_grad:
        return W, b, 0, True, res
    for it in range(1, max_iters + 1):
        while True:
            stepped = Wy - gW / L
            W2 = np.sign(stepped) * np.maximum(np.abs(stepped) - rho / L, 0.0)
            if square:
                np.fill_diagonal(W2, 0.0)
            b2 = by - gb / L
            f2 = value_grad(W2, b2)[0]
            dW, db = W2 - Wy, b2 - by
            quad = (fy + (gW * dW).sum() + (gb * db).sum()
                    + 0.5 * L * ((dW * dW).sum() + (db * db).sum()))
            if f2 <= quad + 1e-12 * max(1.0, abs(f2)):
                break
            L *= 2.0
        t2 = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        Wy = W2 + ((t - 1.0) / t2) * (W2 - W)
        by = b2 + ((t - 1.0) / t2) * (b2 - b)
        W, b, t = W2, b2, t2
        fx, gxW, gxb = value_grad(W, b)
        res = _l1_residual(gxW, gxb, W, rho, square)
        if res <= tol_grad:
            return W, b, it, True, res
        fy, gW, gb = value_grad(Wy, by)
    return W, b, max_iters, False, res


# ---------------------------------------------------------------------------
# independent learners
# ---------------------------------------------------------------------------

def _player_svm_lp(Xo, xi, rho, m):
    """Per-player 1-norm SVM as a linear program.

    Variables [w+ (d), w- (d), b, xi_1..xi_m]: minimize rho sum(w+ + w-)
    + (1/m) sum xi subject to x_i (w . x_{-i} - b) >= 1 - xi_l, xi >= 0.
    Returns (w, b, objective, iterations).
    """
    d = Xo.shape[1]
    signed = xi[:, None] * Xo
    A = np.hstack([-signed, signed, xi[:, None], -np.eye(m)])
    c = np.concatenate([np.full(2 * d, rho), [0.0], np.full(m, 1.0 / m)])
    bounds = [(0, None)] * (2 * d) + [(None, None)] + [(0, None)] * m
    res = linprog(c, A_ub=A, b_ub=-np.ones(m), bounds=bounds, method="highs")
    if not res.success:
        raise NumericError(f"player SVM LP failed: {res.message}")
    u = res.x
    return u[:d] - u[d:2 * d], u[2 * d], float(res.fun), int(res.nit)


def train_independent(dataset, config):
    """Per-player convex fit: 1-norm SVM or L1 logistic regression.

    Each player i independently minimizes (1/m) sum_l loss(z_li)
    + rho ||w_i||_1 with b_i unpenalized.  The reported objective is the
    sum over players.  A player whose solution is numerically zero is
    flagged degenerate; an SVM player whose LP optimum is attained by the
    zero solution is canonicalized to exact zero first.
    """
    if config.method not in ("ind_svm", "ind_logistic"):
        raise ValueError(f"train_independent got method {config.method!r}")
    X = dataset.actions.astype(np.float64)
    m, n = X.shape
    W = np.zeros((n, n))
    b = np.zeros(n)
    iters = 0
    converged = True
    residual = 0.0

    for i in range(n):
        others = np.arange(n) != i
        Xo = X[:, others]
        xi = X[:, i]
        if config.method == "ind_logistic":
            def value_grad(Wf, bf, Xo=Xo, xi=xi):
                z = xi * (Xo @ Wf[0] - bf[0])
                losses, ratios = _logistic_rows(z[:, None])
                coef = ratios[:, 0] * xi
                gw = -(coef @ Xo) / m
                return (float(losses.mean()),
                        gw[None, :], np.array([coef.mean()]))

            wrow, brow, it, ok, resid = _fista(
                value_grad, (1, Xo.shape[1]), 1, config.rho,
                config.max_iters, config.tol_grad)
            W[i, others] = wrow[0]
            b[i] = brow[0]
            iters = max(iters, it)
            converged = converged and ok
            residual = max(residual, resid)
        else:
            w, bi, obj, it = _player_svm_lp(Xo, xi, config.rho, m)
            if obj >= 1.0 - config.tol_feas:
                w, bi = np.zeros_like(w), 0.0
            W[i, others] = w
            b[i] = bi
            iters = max(iters, it)

    Z = _margins(W, b, X)
    if config.method == "ind_logistic":
        losses = _logistic_rows(Z)[0]
    else:
        losses = np.maximum(0.0, 1.0 - Z)
    objective = float(losses.sum(axis=1).mean() + config.rho * np.abs(W).sum())
    flat = np.hstack([W, b[:, None]])
    degenerate = np.abs(flat).max(axis=1) <= DEGENERATE_ATOL
    return TrainResult(game=InfluenceGame(W=W, b=b),
                       per_player_degenerate=degenerate,
                       objective=objective, iterations=iters,
                       converged=converged, residual=residual)


# ---------------------------------------------------------------------------
# simultaneous hinge (primal and dual linear programs)
# ---------------------------------------------------------------------------

def _offdiag_cols(n):
    """(row, col) pairs of the off-diagonal W entries, row-major order."""
    pairs = [(i, j) for i in range(n) for j in range(n) if j != i]
    return np.array(pairs, dtype=np.int64)


def _sim_hinge_primal(X, rho):
    """Shared-slack hinge LP: variables [W+ (nd), W- (nd), b (n), xi (m)],
    one constraint per (sample, player)."""
    m, n = X.shape
    d = n - 1
    pairs = _offdiag_cols(n)
    nd = len(pairs)

    rows, cols, vals = [], [], []
    base_row = 0
    for i in range(n):
        sel = np.flatnonzero(pairs[:, 0] == i)
        js = pairs[sel, 1]
        signed = X[:, i, None] * X[:, js]
        r = (base_row + np.arange(m))[:, None].repeat(len(js), axis=1)
        rows.append(r.ravel())
        cols.append(np.tile(sel, m))
        vals.append(-signed.ravel())
        rows.append(r.ravel())
        cols.append(np.tile(sel + nd, m))
        vals.append(signed.ravel())
        rows.append(base_row + np.arange(m))
        cols.append(np.full(m, 2 * nd + i))
        vals.append(X[:, i])
        rows.append(base_row + np.arange(m))
        cols.append(2 * nd + n + np.arange(m))
        vals.append(np.full(m, -1.0))
        base_row += m

    A = sp.coo_matrix(
        (np.concatenate(vals),
         (np.concatenate(rows), np.concatenate(cols))),
        shape=(n * m, 2 * nd + n + m)).tocsr()
    c = np.concatenate([np.full(2 * nd, rho), np.zeros(n),
                        np.full(m, 1.0 / m)])
    bounds = ([(0, None)] * (2 * nd) + [(None, None)] * n
              + [(0, None)] * m)
    return A, c, bounds, pairs, nd


def _sim_hinge_dual(X, rho):
    """Dual LP over multipliers alpha_li >= 0 (columns ordered player-major:
    alpha[i*m + l]): maximize sum alpha subject to
    |sum_l alpha_li x_li x_lj| <= rho per (i, j != i),
    sum_l alpha_li x_li = 0 per i, and sum_i alpha_li <= 1/m per l."""
    m, n = X.shape
    pairs = _offdiag_cols(n)
    nvar = n * m

    rows, cols, vals = [], [], []
    r = 0
    for i, j in pairs:
        coef = X[:, i] * X[:, j]
        for sgn in (1.0, -1.0):
            rows.append(np.full(m, r))
            cols.append(i * m + np.arange(m))
            vals.append(sgn * coef)
            r += 1
    for l in range(m):
        rows.append(np.full(n, r))
        cols.append(np.arange(n) * m + l)
        vals.append(np.ones(n))
        r += 1
    A_ub = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(r, nvar)).tocsr()
    b_ub = np.concatenate([np.full(2 * len(pairs), rho), np.full(m, 1.0 / m)])

    rows, cols, vals = [], [], []
    for i in range(n):
        rows.append(np.full(m, i))
        cols.append(i * m + np.arange(m))
        vals.append(X[:, i].astype(np.float64))
    A_eq = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n, nvar)).tocsr()
    return A_ub, b_ub, A_eq


def train_simultaneous_hinge(dataset, config):
    """Shared-slack hinge LP with an independently solved dual certificate.

    Solves the primal (W as an orthant split, free b, one slack per sample)
    and the dual over per-(sample, player) multipliers as separate linear
    programs; strong duality makes the two optimal values agree, which the
    caller can check via duality_gap().  If the zero game attains the LP
    optimum the solution is canonicalized to exact zero.
    """
    if config.method != "sim_svm":
        raise ValueError(f"train_simultaneous_hinge got {config.method!r}")
    X = dataset.actions.astype(np.float64)
    m, n = X.shape

    A, c, bounds, pairs, nd = _sim_hinge_primal(X, config.rho)
    res = linprog(c, A_ub=A, b_ub=-np.ones(n * m), bounds=bounds,
                  method="highs")
    if not res.success:
        raise NumericError(f"simultaneous hinge primal LP failed "
                           f"(status {res.status}): {res.message}")
    u = res.x
    W = np.zeros((n, n))
    W[pairs[:, 0], pairs[:, 1]] = u[:nd] - u[nd:2 * nd]
    b = u[2 * nd:2 * nd + n].copy()
    if res.fun >= 1.0 - config.tol_feas:
        W = np.zeros((n, n))
        b = np.zeros(n)

    A_ub, b_ub, A_eq = _sim_hinge_dual(X, config.rho)
    dres = linprog(-np.ones(n * m), A_ub=A_ub, b_ub=b_ub,
                   A_eq=A_eq, b_eq=np.zeros(n), bounds=[(0, None)] * (n * m),
                   method="highs")
    if not dres.success:
        raise NumericError(f"simultaneous hinge dual LP failed "
                           f"(status {dres.status}): {dres.message}")
    dual_obj = -float(dres.fun)

    objective = hinge_objective(W, b, dataset, config.rho)
    flat = np.hstack([W, b[:, None]])
    degenerate = np.abs(flat).max(axis=1) <= DEGENERATE_ATOL
    gap = abs(objective - dual_obj)
    return TrainResult(game=InfluenceGame(W=W, b=b),
                       per_player_degenerate=degenerate,
                       objective=objective, dual_objective=dual_obj,
                       iterations=int(res.nit) + int(dres.nit),
                       converged=gap <= config.tol_feas * (1.0 + abs(objective)),
                       residual=gap)


# ---------------------------------------------------------------------------
# simultaneous logistic
# ---------------------------------------------------------------------------

def sim_logistic_smooth(W, b, X):
    """Smooth part (1/m) sum_l log(1 + sum_i exp(-z_li)) of the
    simultaneous logistic objective, with its (W, b) gradient (diagonal
    zeroed to stay in the feasible subspace)."""
    m = X.shape[0]
    Z = _margins(W, b, X)
    losses, R = _sim_logistic_rows(Z)
    T = R * X
    gW = -(T.T @ X) / m
    np.fill_diagonal(gW, 0.0)
    gb = T.mean(axis=0)
    return float(losses.mean()), gW, gb


def train_simultaneous_logistic(dataset, config):
    """Minimizes (1/m) sum_l log(1 + sum_i exp(-z_li)) + rho ||W||_1 by
    accelerated proximal gradient; convexity makes the optimal value
    seed-independent."""
    if config.method != "sim_logistic":
        raise ValueError(f"train_simultaneous_logistic got {config.method!r}")
    X = dataset.actions.astype(np.float64)
    m, n = X.shape

    def value_grad(W, b):
        return sim_logistic_smooth(W, b, X)

    W, b, iters, converged, residual = _fista(
        value_grad, (n, n), n, config.rho, config.max_iters, config.tol_grad,
        square=True)
    losses = _sim_logistic_rows(_margins(W, b, X))[0]
    objective = float(losses.mean() + config.rho * np.abs(W).sum())
    flat = np.hstack([W, b[:, None]])
    degenerate = np.abs(flat).max(axis=1) <= DEGENERATE_ATOL
    return TrainResult(game=InfluenceGame(W=W, b=b),
                       per_player_degenerate=degenerate,
                       objective=objective, iterations=iters,
                       converged=converged, residual=residual)


# ---------------------------------------------------------------------------
# degeneracy
# ---------------------------------------------------------------------------

def detect_degenerate(dataset, player, method):
    """Exact data condition for a zero solution in the independent losses.

    True iff every pairwise agreement count sum_l [x_i x_j = 1] and the
    marginal count sum_l [x_i = 1] equal m/2 exactly; odd m is never
    degenerate.  The condition characterizes the independent losses only,
    so simultaneous methods are rejected (their flag is the numerically
    zero solution).
    """
    if method not in ("ind_svm", "ind_logistic"):
        raise ValueError(
            "exact degeneracy conditions apply to independent methods only; "
            "simultaneous trainers flag players whose solution is zero")
    X = dataset.actions
    m, n = X.shape
    if not 0 <= player < n:
        raise ValueError(f"player {player} out of range for n={n}")
    if m % 2:
        return False
    half = m // 2
    xi = X[:, player]
    if int((xi == 1).sum()) != half:
        return False
    for j in range(n):
        if j == player:
            continue
        if int((xi * X[:, j] == 1).sum()) != half:
            return False
    return True


def fix_degenerate(result, dataset):
    """Repair absolutely-indifferent players of a trained game.

    Every flagged player whose row is still zero gets b_i = +1 if their
    actions were mostly -1, else b_i = -1 (exact half-half also -1), making
    +1 resp. -1 the unique best response regardless of the others.
    """
    W = result.game.W.copy()
    b = result.game.b.copy()
    X = dataset.actions
    changed = False
    for i in np.flatnonzero(result.per_player_degenerate):
        row = np.abs(W[i]).max()
        if max(row, abs(b[i])) > DEGENERATE_ATOL:
            continue
        b[i] = 1.0 if X[:, i].sum() < 0 else -1.0
        changed = True
    if not changed:
        return result.game
    return InfluenceGame(W=W, b=b)
