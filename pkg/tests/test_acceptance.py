"""End-to-end acceptance checks, one test per numbered criterion.

Each test states its requirement in the docstring and is written against
the public API plus a handful of documented internals; tolerances are
pinned in the assertions.  The terminal summary prints one PASS/FAIL line
per criterion (see conftest.py).
"""
import itertools
import math

import numpy as np
import pytest

from _builders import coordination_game
from liglearn import exact, experiment, sigmoidal
from liglearn.analysis import (
    equilibrium_precision_recall,
    model_kl_exact,
)
from liglearn.convex import (
    METHODS,
    ConvexTrainConfig,
    detect_degenerate,
    fix_degenerate,
    sim_logistic_smooth,
    simul_logistic_loss,
    train_independent,
    train_simultaneous_hinge,
    train_simultaneous_logistic,
)
from liglearn.games import (
    EquilibriaSet,
    InfluenceGame,
    encode_actions,
    enumerate_equilibria,
    hyperplane_vertex_count,
    true_proportion,
)
from liglearn.mixture import (
    LN2,
    JointActionDataset,
    MixtureModel,
    avg_log_likelihood,
    empirical_proportion,
    kl_bernoulli,
    kl_bounds,
    loglik_from_proportions,
    optimal_q,
    pmf,
    sample,
)

CONVEX_TRAINERS = {
    "ind_svm": train_independent,
    "ind_logistic": train_independent,
    "sim_svm": train_simultaneous_hinge,
    "sim_logistic": train_simultaneous_logistic,
}


def test_criterion_01_census_n4():
    """The number of distinct n=4 equilibrium sets realizable by influence
    games is exactly 23706.  On disagreement, emit both the tie-aware and
    strict threshold-labeling counts instead of failing silently."""
    census = exact.enumerate_influence_games(4)
    if census.count != 23706:
        table = exact.enumerate_ltfs(3)
        pytest.fail(
            f"census count {census.count} != 23706 "
            f"(d=3 threshold labelings: tie-aware {table.count}, "
            f"strict {table.strict_count()})")
    assert census.count == 23706


def test_criterion_02_pmf_normalization():
    """Sum of pmf over all joint actions is 1 within 1e-12 for 100 random
    non-trivial mixtures with n <= 10."""
    rng = np.random.default_rng(2)
    for _ in range(100):
        n = int(rng.integers(1, 11))
        total = 1 << n
        k = int(rng.integers(1, total))
        members = rng.choice(total, size=k, replace=False)
        model = MixtureModel(game=EquilibriaSet(n=n, members=members),
                             q=float(rng.uniform(0.05, 0.95)))
        mass = math.fsum(pmf(model, idx) for idx in range(total))
        assert abs(mass - 1.0) <= 1e-12


def test_criterion_03_trivial_likelihood():
    """The zero game (every action an equilibrium) scores -n ln 2 exactly
    on any dataset."""
    rng = np.random.default_rng(3)
    for n in (1, 2, 5, 12):
        zero = InfluenceGame(W=np.zeros((n, n)), b=np.zeros(n))
        for m in (1, 7, 40):
            ds = JointActionDataset(rng.choice([-1, 1], size=(m, n)))
            assert avg_log_likelihood(zero, 1.0, ds) == -n * LN2


def test_criterion_04_likelihood_identity():
    """The two-proportion likelihood formula equals the direct average of
    log pmf over the samples, within 1e-10, on 100 random triples."""
    rng = np.random.default_rng(4)
    for _ in range(100):
        n = int(rng.integers(1, 7))
        total = 1 << n
        k = int(rng.integers(1, total))
        members = rng.choice(total, size=k, replace=False)
        eqset = EquilibriaSet(n=n, members=members)
        q = float(rng.uniform(0.05, 0.95))
        model = MixtureModel(game=eqset, q=q)
        m = int(rng.integers(1, 41))
        ds = JointActionDataset(rng.choice([-1, 1], size=(m, n)))
        direct = np.mean([math.log(pmf(model, int(idx)))
                          for idx in encode_actions(ds.actions)])
        assert avg_log_likelihood(eqset, q, ds) == pytest.approx(
            direct, abs=1e-10)


def test_criterion_05_kl_bracketing():
    """-pi_hat ln(pi) - ln 2 < KL(pi_hat || pi) < -pi_hat ln(pi) strictly,
    across a 50x50 grid with 0 < pi < pi_hat < 1; at pi_hat = 1 the upper
    bound is attained with equality."""
    checked = 0
    for pi_hat in np.linspace(0.02, 0.99, 50):
        for pi in np.linspace(0.005, 0.985, 50):
            if not 0.0 < pi < pi_hat:
                continue
            kl = kl_bernoulli(pi_hat, pi)
            lower = -pi_hat * math.log(pi) - LN2
            upper = -pi_hat * math.log(pi)
            assert lower < kl < upper
            lo, hi = kl_bounds(pi_hat, pi)
            assert lo == pytest.approx(lower) and hi == pytest.approx(upper)
            checked += 1
    assert checked > 1000
    for pi in (0.1, 0.5, 0.9):
        assert kl_bernoulli(1.0, pi) == pytest.approx(-math.log(pi), abs=1e-12)


def test_criterion_06_single_active_player():
    """With exactly one non-indifferent player, |NE| equals 2^(n-1) plus
    the number of hypercube vertices on that player's hyperplane, and the
    proportion lies in [0.5, 0.75].  500 random integer-weight games."""
    rng = np.random.default_rng(6)
    for _ in range(500):
        n = int(rng.integers(2, 11))
        active = int(rng.integers(0, n))
        while True:
            w = rng.integers(-2, 3, size=n).astype(np.float64)
            w[active] = 0.0
            bi = float(rng.integers(-2, 3))
            if np.any(w != 0.0) or bi != 0.0:
                break
        W = np.zeros((n, n))
        W[active] = w
        b = np.zeros(n)
        b[active] = bi
        game = InfluenceGame(W=W, b=b)
        ne = enumerate_equilibria(game, tol=0.0)
        on_plane = hyperplane_vertex_count(np.delete(w, active), bi, tol=0.0)
        assert len(ne) == 2 ** (n - 1) + on_plane
        pi = len(ne) / 2 ** n
        assert 0.5 <= pi <= 0.75


def test_criterion_07_expected_proportion_mc():
    """Monte Carlo at n=5 with continuous i.i.d. rows: the mean proportion
    of equilibria sits between (1/2)^5 and (3/4)^5 within 3 standard
    errors, and the Markov-bound violation rate at delta=0.25 stays below
    delta plus 3 standard errors."""
    rng = np.random.default_rng(7)
    n, trials, delta = 5, 500, 0.25
    pis = np.empty(trials)
    for t in range(trials):
        W = rng.standard_normal((n, n))
        np.fill_diagonal(W, 0.0)
        game = InfluenceGame(W=W, b=rng.standard_normal(n))
        pis[t] = true_proportion(game, tol=0.0)
    mean = pis.mean()
    se = pis.std(ddof=1) / math.sqrt(trials)
    assert 0.5 ** n - 3 * se <= mean <= 0.75 ** n + 3 * se
    violation_rate = float(np.mean(pis > 0.75 ** n / delta))
    se_rate = math.sqrt(delta * (1 - delta) / trials)
    assert violation_rate <= delta + 3 * se_rate


def test_criterion_08_gradient_checks():
    """Analytic gradients match central finite differences: both smoothed
    ascent objectives within 1e-4 relative and the simultaneous logistic
    smooth part within 1e-5 relative, on 20 random instances each."""
    rng = np.random.default_rng(8)
    eps = 1e-6

    def check(value_grad, W, b, tol):
        _, gW, gb = value_grad(W, b)
        scale = 1.0
        for i in range(W.shape[0]):
            for j in range(W.shape[1]):
                if i == j:
                    continue
                Wp, Wm = W.copy(), W.copy()
                Wp[i, j] += eps
                Wm[i, j] -= eps
                fd = (value_grad(Wp, b)[0] - value_grad(Wm, b)[0]) / (2 * eps)
                assert abs(gW[i, j] - fd) <= tol * max(scale, abs(fd))
        for i in range(b.size):
            bp, bm = b.copy(), b.copy()
            bp[i] += eps
            bm[i] -= eps
            fd = (value_grad(W, bp)[0] - value_grad(W, bm)[0]) / (2 * eps)
            assert abs(gb[i] - fd) <= tol * max(scale, abs(fd))

    for mode in ("empirical", "likelihood"):
        for _ in range(20):
            n, m = 3, 8
            ds = JointActionDataset(rng.choice([-1, 1], size=(m, n)))
            p = sigmoidal.SigmoidParams(alpha=0.1, beta=0.05, n=n)
            q = 0.7 if mode == "likelihood" else None
            W = rng.uniform(-0.2, 0.2, (n, n))
            np.fill_diagonal(W, 0.0)
            b = rng.uniform(-0.2, 0.2, n)

            def vg(Wx, bx, ds=ds, p=p, q=q, mode=mode):
                value, (gW, gb) = sigmoidal.smooth_objective(
                    Wx, bx, q, ds, p, mode)
                return value, gW, gb

            check(vg, W, b, tol=1e-4)

    for _ in range(20):
        n, m = 4, 10
        X = rng.choice([-1.0, 1.0], size=(m, n))
        W = rng.normal(size=(n, n)) * 0.5
        np.fill_diagonal(W, 0.0)
        b = rng.normal(size=n) * 0.5
        check(lambda Wx, bx, X=X: sim_logistic_smooth(Wx, bx, X),
              W, b, tol=1e-5)


def test_criterion_09_strong_duality():
    """The shared-slack hinge trainer closes its primal/dual gap to 1e-6
    relative on 20 random instances with n <= 6, m <= 20."""
    rng = np.random.default_rng(9)
    for _ in range(20):
        n = int(rng.integers(2, 7))
        m = int(rng.integers(4, 21))
        ds = JointActionDataset(rng.choice([-1, 1], size=(m, n)))
        rho = float(rng.uniform(0.001, 0.5))
        result = train_simultaneous_hinge(
            ds, ConvexTrainConfig(rho=rho, method="sim_svm"))
        assert result.dual_objective is not None
        assert result.duality_gap() <= 1e-6 * (1.0 + abs(result.objective))


def test_criterion_10_shared_loss_bounds():
    """The shared logistic loss is bracketed by the worst per-player loss
    and its log-sum-exp (claim i), stays below the per-player sum
    (claim ii), on 1000 random vectors; at z_i = log n the log-sum-exp
    side exceeds the sum, equivalent to n+1 > (1+1/n)^n (claim iii)."""
    rng = np.random.default_rng(10)
    for _ in range(1000):
        n = int(rng.integers(2, 11))
        z = rng.normal(size=n) * float(rng.uniform(0.5, 3.0))
        per = np.logaddexp(0.0, -z)
        val = simul_logistic_loss(z)
        logsum = math.log(np.exp(per).sum())
        assert per.max() <= val + 1e-12
        assert val < logsum
        assert logsum <= per.max() + math.log(n) + 1e-12
        assert val < per.sum()
    for n in range(2, 21):
        z = np.full(n, math.log(n))
        per = np.logaddexp(0.0, -z)
        assert math.log(np.exp(per).sum()) > per.sum()
        assert n + 1.0 > (1.0 + 1.0 / n) ** n


def _fit_convex(method, ds, rho, seed):
    cfg = ConvexTrainConfig(rho=rho, method=method, seed=seed)
    result = CONVEX_TRAINERS[method](ds, cfg)
    game = fix_degenerate(result, ds)
    eqset = enumerate_equilibria(game)
    return eqset, optimal_q(empirical_proportion(eqset, ds), ds.m)


def _as_mixture(eqset, q):
    k, total = len(eqset), 1 << eqset.n
    if k == 0:
        q = 0.0
    elif k == total:
        q = 1.0
    return MixtureModel(game=eqset, q=q, strict=False)


def test_criterion_11_high_signal_recovery():
    """Stand-in ground truths at signal q_g = 0.9.

    (a) n=4, two coordination pairs (4 equilibria, proportion 0.25), m=50,
    50 repetitions: every convex learner reaches equilibrium precision =
    recall = 1 in at least 90% of repetitions, and its mean empirical
    proportion lands within 0.05 of 0.9.

    (b) n=9-style truth (three coordination pairs plus a three-player
    chain, 16 equilibria): mean exact KL to the truth over 20 seeds is no
    worse for the simultaneous logistic fit than for the smoothed
    proportion ascent."""
    truth4 = coordination_game(4, [(0, 1), (2, 3)])
    set4 = enumerate_equilibria(truth4, tol=0.0)
    assert set4.members.tolist() == [0, 3, 12, 15]
    model4 = MixtureModel(game=set4, q=0.9)

    # penalty pinned inside the plateau (0.05..0.1) where recovery
    # saturates for all four learners; weaker penalties under-prune the
    # 1-norm SVM, stronger ones start emptying the simultaneous fits
    reps = 50
    perfect = {m: 0 for m in METHODS}
    pi_hats = {m: [] for m in METHODS}
    for rep in range(reps):
        ds = sample(model4, seed=1100 + rep, m=50)
        for method in METHODS:
            eqset, _ = _fit_convex(method, ds, rho=0.05, seed=rep)
            precision, recall = equilibrium_precision_recall(set4, eqset)
            if precision == 1.0 and recall == 1.0:
                perfect[method] += 1
            pi_hats[method].append(empirical_proportion(eqset, ds))
    for method in METHODS:
        assert perfect[method] >= 0.9 * reps, (
            f"{method}: exact recovery in {perfect[method]}/{reps} reps")
        assert abs(np.mean(pi_hats[method]) - 0.9) <= 0.05, method

    truth9 = coordination_game(9, [(0, 1), (2, 3), (4, 5), (6, 7), (7, 8)])
    set9 = enumerate_equilibria(truth9, tol=0.0)
    assert len(set9) == 16  # 2^3 pair states x 2 chain states
    model9 = MixtureModel(game=set9, q=0.9)
    kl_logistic, kl_ascent = [], []
    for s in range(20):
        ds = sample(model9, seed=2200 + s, m=100)
        eqset, q = _fit_convex("sim_logistic", ds, rho=0.01, seed=s)
        kl_logistic.append(model_kl_exact(model9, _as_mixture(eqset, q)))
        game, q2, _ = sigmoidal.train_sigmoidal(
            ds, sigmoidal.SmoothTrainConfig(rho=0.01, seed=s),
            mode="empirical")
        eqset2 = enumerate_equilibria(game)
        kl_ascent.append(model_kl_exact(model9, _as_mixture(eqset2, q2)))
    assert np.mean(kl_logistic) <= np.mean(kl_ascent) + 1e-12


def test_criterion_12_sample_picking_optimality():
    """On 200 random tiny datasets (n <= 3, m <= 6), the frequency-prefix
    scan attains the maximum likelihood over ALL subsets of the observed
    unique actions (including the empty set's uniform fallback)."""
    rng = np.random.default_rng(12)

    def subset_loglik(subset, ds):
        n, m = ds.n, ds.m
        pi = len(subset) / 2 ** n
        if pi in (0.0, 1.0):
            return -n * LN2
        idx = encode_actions(ds.actions)
        pi_hat = float(np.isin(idx, list(subset)).mean())
        return loglik_from_proportions(pi_hat, pi, optimal_q(pi_hat, m), n)

    for _ in range(200):
        n = int(rng.integers(1, 4))
        m = int(rng.integers(1, 7))
        ds = JointActionDataset(rng.choice([-1, 1], size=(m, n)))
        result = exact.sample_picking(ds)
        uniq = np.unique(encode_actions(ds.actions)).tolist()
        best = -n * LN2
        for r in range(1, len(uniq) + 1):
            for subset in itertools.combinations(uniq, r):
                best = max(best, subset_loglik(subset, ds))
        assert result.loglik == pytest.approx(best, abs=1e-12)


def test_criterion_13_degeneracy_pipeline():
    """Balanced datasets trip the exact degeneracy test; the repair leaves
    no absolutely-indifferent player and sets each threshold against the
    player's majority action (exact half-half resolving to b = -1)."""
    full2 = JointActionDataset(
        np.array(list(itertools.product([-1, 1], repeat=2))))
    full3 = JointActionDataset(
        np.array(list(itertools.product([-1, 1], repeat=3))))
    for ds in (full2, full3):
        for method in ("ind_svm", "ind_logistic"):
            for i in range(ds.n):
                assert detect_degenerate(ds, i, method)
            result = train_independent(
                ds, ConvexTrainConfig(rho=0.01, method=method))
            assert bool(np.all(result.per_player_degenerate))
            game = fix_degenerate(result, ds)
            rows = np.abs(np.hstack([game.W, game.b[:, None]])).max(axis=1)
            assert bool(np.all(rows > 0.0))
            # every column is an exact tie here
            assert game.b.tolist() == [-1.0] * ds.n

    skewed = JointActionDataset(
        np.array([[-1, 1], [-1, 1], [-1, 1], [1, -1]]))
    from liglearn.convex import TrainResult
    zero = TrainResult(
        game=InfluenceGame(W=np.zeros((2, 2)), b=np.zeros(2)),
        per_player_degenerate=np.array([True, True]), objective=0.0)
    fixed = fix_degenerate(zero, skewed)
    # majority -1 -> b = +1 (forces -1); majority +1 -> b = -1 (forces +1)
    assert fixed.b.tolist() == [1.0, -1.0]
    assert enumerate_equilibria(fixed).members.tolist() == [2]


def test_criterion_14_determinism(tmp_path):
    """Rerunning an experiment config with the same seed produces
    byte-identical JSON, on both data sources."""
    synth = tmp_path / "synth.cfg"
    synth.write_text(
        "data = synthetic\n"
        "methods = sample_picking, exhaustive, sigmoidal_likelihood, sim_svm\n"
        "rho_grid = 0.01, 0.1\n"
        "seed = 5\n"
        "synthetic.n = 3\n"
        "synthetic.density = 1.0\n"
        "synthetic.p_plus = 1.0\n"
        "synthetic.m_train = 30\n"
        "synthetic.m_val = 10\n"
        "synthetic.m_test = 10\n")
    votes_csv = tmp_path / "votes.csv"
    rng = np.random.default_rng(14)
    lines = ["A,B,C,E", "D,R,D,I"]
    for _ in range(24):
        lines.append(",".join(
            "yea" if v else "nay" for v in rng.integers(0, 2, 4)))
    votes_csv.write_text("\n".join(lines) + "\n")
    votes = tmp_path / "votes.cfg"
    votes.write_text(
        f"data = votes\nvotes_file = {votes_csv}\n"
        "methods = sample_picking, ind_svm\nrho_grid = 0.05\nseed = 3\n")
    for cfg_path in (synth, votes):
        first = experiment.run_experiment(
            experiment.parse_config(str(cfg_path))).to_json()
        second = experiment.run_experiment(
            experiment.parse_config(str(cfg_path))).to_json()
        assert first == second, f"rerun of {cfg_path.name} differed"
