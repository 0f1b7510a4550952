"""End-to-end experiment pipeline.

Generates synthetic games and samples (or ingests voting records), runs the
selected learners across a regularization grid, selects rho per repetition
by validation average log-likelihood, and emits deterministic JSON and CSV
reports.  All randomness flows from the config seed through named
SeedSequence channels, so identical configs produce byte-identical reports
(opt-in timing fields are the one documented exception).
"""
import csv
import io
import json
import math
import time
from dataclasses import dataclass, asdict

import numpy as np

from . import convex, exact, sigmoidal
from .analysis import equilibrium_precision_recall, model_kl_exact
from .games import (
    EquilibriaSet,
    InfluenceGame,
    enumerate_equilibria,
    true_proportion,
)
from .mixture import (
    JointActionDataset,
    MixtureModel,
    avg_log_likelihood,
    empirical_proportion,
    optimal_q,
    sample,
)

SCHEMA_VERSION = 1

#: Metrics that need |NE| (likelihood, KL, counts) are reported only up to
#: this many players; above it they are emitted as null.
NE_METRICS_CAP = 20

#: Display clip for the +inf KL sentinel and the -inf log-likelihood
#: sentinel so report tables stay numeric; a flag records the clip.
KL_CLIP = 1e6

METHOD_NAMES = (
    "sample_picking",
    "exhaustive",
    "sigmoidal_likelihood",
    "sigmoidal_empirical",
    "ind_svm",
    "ind_logistic",
    "sim_svm",
    "sim_logistic",
)

#: These learners have no regularization path; their rows carry rho=null.
RHO_FREE = ("sample_picking", "exhaustive")

VOTE_TOKENS = {"yea": 1, "nay": -1, "abstain": -1, "absent": -1}

PARTY_LABELS = ("D", "R", "I")


def default_rho_grid():
    """Ten log-spaced points spanning [1e-4, 1] plus 0.0006 (the published
    real-data setting), sorted ascending."""
    pts = set(float(x) for x in np.logspace(-4.0, 0.0, 10))
    pts.add(0.0006)
    return tuple(sorted(pts))


def _derive_seed(*parts):
    """Stable 32-bit seed from a tuple of ints/strings."""
    ints = tuple(p if isinstance(p, int) else abs(hash_str(p)) for p in parts)
    return int(np.random.SeedSequence(ints).generate_state(1)[0])


def hash_str(s):
    """Deterministic string hash (builtin hash is salted per process)."""
    h = 2166136261
    for ch in s.encode():
        h = ((h ^ ch) * 16777619) & 0xFFFFFFFF
    return h


# ---------------------------------------------------------------------------
# synthetic generation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SyntheticSpec:
    """Ground-truth sampler settings; biases are always zero."""

    n: int
    density: float = 0.5
    p_plus: float = 0.5
    q_g: float = 0.9
    m_train: int = 100
    m_val: int = 50
    m_test: int = 50
    repetitions: int = 1
    seed: int = 0

    def __post_init__(self):
        for name in ("density", "p_plus", "q_g"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        for name in ("m_train", "m_val", "m_test", "repetitions"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")


def _draw_game(spec, attempt):
    rng = np.random.default_rng(
        np.random.SeedSequence((spec.seed, attempt, 0xA11CE)))
    mask = rng.random((spec.n, spec.n)) < spec.density
    signs = np.where(rng.random((spec.n, spec.n)) < spec.p_plus, 1.0, -1.0)
    W = np.where(mask, signs, 0.0)
    np.fill_diagonal(W, 0.0)
    return InfluenceGame(W=W, b=np.zeros(spec.n))


def gen_synthetic(spec):
    """Ground-truth game plus per-repetition (train, val, test) splits.

    Off-diagonal weights are present independently with probability
    density, +1 with probability p_plus else -1, and b = 0.  A trivial
    draw (every action or no action an equilibrium) is redrawn with the
    next attempt number, up to 100 attempts.  Each repetition samples
    fresh disjoint splits from the mixture at q_g; everything is a pure
    function of spec.seed.
    """
    truth = None
    for attempt in range(100):
        cand = _draw_game(spec, attempt)
        pi = true_proportion(cand, tol=0.0)
        if 0.0 < pi < 1.0:
            truth = cand
            break
    if truth is None:
        raise RuntimeError(
            "100 consecutive synthetic draws were trivial games; "
            "density/p_plus make non-trivial truths too rare")
    model = MixtureModel(game=truth, q=spec.q_g)
    splits = []
    for rep in range(spec.repetitions):
        parts = []
        for channel, m in enumerate(
                (spec.m_train, spec.m_val, spec.m_test)):
            seq = np.random.SeedSequence((spec.seed, rep, channel, 0xDA7A))
            parts.append(sample(model, seq, m))
        splits.append(tuple(parts))
    return truth, splits


# ---------------------------------------------------------------------------
# votes ingestion
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VotesTable:
    """Joint actions parsed from a roll-call CSV, with column metadata."""

    dataset: JointActionDataset
    names: tuple
    parties: tuple = None


def _stratified_pick(parties, k, seed):
    """k column indices, party proportions preserved by largest-remainder
    rounding; selection within a party is a seeded uniform draw.  Returns
    sorted original indices."""
    order = []
    groups = {}
    for idx, p in enumerate(parties):
        if p not in groups:
            groups[p] = []
            order.append(p)
        groups[p].append(idx)
    total = len(parties)
    quotas = {p: k * len(groups[p]) / total for p in order}
    take = {p: math.floor(quotas[p]) for p in order}
    leftover = k - sum(take.values())
    by_remainder = sorted(
        order, key=lambda p: (-(quotas[p] - take[p]), order.index(p)))
    for p in by_remainder[:leftover]:
        take[p] += 1
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0x5EA7)))
    chosen = []
    for p in order:
        pool = groups[p]
        pick = rng.choice(len(pool), size=take[p], replace=False)
        chosen.extend(pool[i] for i in pick)
    return sorted(chosen)


def ingest_votes(path, senator_subset=None, seed=0):
    """Parse a roll-call CSV into joint actions.

    Layout: a header row of voter names; an optional second row of party
    labels (every token one of D/R/I); then one row per vote event with
    tokens yea/nay/abstain/absent (case-insensitive), where yea maps to +1
    and everything else to -1.  senator_subset keeps that many columns by
    party-stratified sampling (largest-remainder quotas, seeded draw).
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        table = [[cell.strip() for cell in row] for row in reader if row]
    if not table:
        raise ValueError(f"{path}: empty votes file")
    names = tuple(table[0])
    n_all = len(names)
    body = table[1:]
    parties = None
    if body and all(tok in PARTY_LABELS for tok in body[0]):
        if len(body[0]) != n_all:
            raise ValueError(
                f"{path}: line 2: party row has {len(body[0])} entries, "
                f"expected {n_all}")
        parties = tuple(body[0])
        body = body[1:]
    if not body:
        raise ValueError(f"{path}: no vote rows")

    first_vote_line = 3 if parties else 2
    rows = np.empty((len(body), n_all), dtype=np.int64)
    for r, row in enumerate(body):
        line = first_vote_line + r
        if len(row) != n_all:
            raise ValueError(
                f"{path}: line {line}: expected {n_all} votes, got {len(row)}")
        for c, tok in enumerate(row):
            try:
                rows[r, c] = VOTE_TOKENS[tok.lower()]
            except KeyError:
                raise ValueError(
                    f"{path}: line {line}: unknown vote token {tok!r} "
                    f"(expected one of {sorted(VOTE_TOKENS)})") from None

    keep = range(n_all)
    if senator_subset is not None:
        if not 1 <= senator_subset <= n_all:
            raise ValueError(
                f"senator_subset={senator_subset} outside 1..{n_all}")
        if senator_subset < n_all:
            if parties is None:
                raise ValueError(
                    "stratified subsampling needs a party row")
            keep = _stratified_pick(parties, senator_subset, seed)
    keep = list(keep)
    return VotesTable(
        dataset=JointActionDataset(rows[:, keep]),
        names=tuple(names[i] for i in keep),
        parties=tuple(parties[i] for i in keep) if parties else None)


# ---------------------------------------------------------------------------
# config
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentConfig:
    """Resolved experiment settings (see parse_config for the file keys)."""

    data: str
    methods: tuple
    rho_grid: tuple = None
    seed: int = 0
    timing: bool = False
    synthetic: SyntheticSpec = None
    votes_file: str = None
    votes_subset: int = None

    def __post_init__(self):
        if self.data not in ("synthetic", "votes"):
            raise ValueError("data must be synthetic or votes")
        if not self.methods:
            raise ValueError("at least one method required")
        for mth in self.methods:
            if mth not in METHOD_NAMES:
                raise ValueError(
                    f"unknown method {mth!r}; choose from {METHOD_NAMES}")
        if self.data == "synthetic" and self.synthetic is None:
            raise ValueError("synthetic data source needs synthetic.* keys")
        if self.data == "votes" and not self.votes_file:
            raise ValueError("votes data source needs votes_file")
        if self.rho_grid is not None and not self.rho_grid:
            raise ValueError("rho_grid must not be empty")

    def grid(self):
        return self.rho_grid if self.rho_grid is not None else default_rho_grid()


_INT_KEYS = {"seed", "votes_subset", "synthetic.n", "synthetic.m_train",
             "synthetic.m_val", "synthetic.m_test",
             "synthetic.repetitions", "synthetic.seed"}
_FLOAT_KEYS = {"synthetic.density", "synthetic.p_plus", "synthetic.q_g"}


def parse_config(path):
    """Read a flat key = value config file.

    Keys: data (synthetic|votes); methods (comma list); rho_grid (comma
    floats or "default"); seed; timing (on|off); votes_file; votes_subset;
    synthetic.n, synthetic.density, synthetic.p_plus, synthetic.q_g,
    synthetic.m_train, synthetic.m_val, synthetic.m_test,
    synthetic.repetitions, synthetic.seed.  '#' starts a comment.
    """
    raw = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            if "=" not in body:
                raise ValueError(f"{path}: line {lineno}: expected key = value")
            key, _, val = body.partition("=")
            key, val = key.strip(), val.strip()
            if key in raw:
                raise ValueError(f"{path}: line {lineno}: duplicate key {key}")
            raw[key] = val

    known = ({"data", "methods", "rho_grid", "timing", "votes_file"}
             | _INT_KEYS | _FLOAT_KEYS)
    for key in raw:
        if key not in known:
            raise ValueError(f"{path}: unknown config key {key!r}")

    kwargs = {}
    syn = {}
    for key, val in raw.items():
        if key.startswith("synthetic."):
            field_name = key.split(".", 1)[1]
            syn[field_name] = (int(val) if key in _INT_KEYS else float(val))
        elif key == "methods":
            kwargs["methods"] = tuple(
                tok.strip() for tok in val.split(",") if tok.strip())
        elif key == "rho_grid":
            if val.lower() != "default":
                kwargs["rho_grid"] = tuple(
                    float(tok) for tok in val.split(",") if tok.strip())
        elif key == "timing":
            if val.lower() not in ("on", "off"):
                raise ValueError(f"{path}: timing must be on or off")
            kwargs["timing"] = val.lower() == "on"
        elif key in _INT_KEYS:
            kwargs[key] = int(val)
        else:
            kwargs[key] = val
    if syn:
        kwargs["synthetic"] = SyntheticSpec(**syn)
    return ExperimentConfig(**kwargs)


# ---------------------------------------------------------------------------
# method invocation
# ---------------------------------------------------------------------------

def select_rho(val_logliks):
    """The rho with the best validation log-likelihood; exact ties go to
    the larger rho (the sparser model)."""
    if not val_logliks:
        raise ValueError("empty validation map")
    return max(val_logliks.items(), key=lambda kv: (kv[1], kv[0]))[0]


def _fit(method, train, rho, seed, census_cache):
    """Train one method; returns (EquilibriaSet, q, game-or-None).

    Convex trainers finish with the standard degeneracy repair so every
    player constrains the learned equilibria; their q is the closed-form
    optimum of the training coverage.
    """
    n = train.n
    if method == "sample_picking":
        res = exact.sample_picking(train)
        return res.equilibria, res.q, None
    if method == "exhaustive":
        if n not in census_cache:
            census_cache[n] = exact.enumerate_influence_games(n)
        res = exact.exhaustive_mle_influence(train, census_cache[n])
        return res.equilibria, res.q, None
    if method in ("sigmoidal_likelihood", "sigmoidal_empirical"):
        mode = "likelihood" if method.endswith("likelihood") else "empirical"
        cfg = sigmoidal.SmoothTrainConfig(rho=rho, seed=seed)
        game, q, _ = sigmoidal.train_sigmoidal(train, cfg, mode)
        return enumerate_equilibria(game), q, game
    cfg = convex.ConvexTrainConfig(rho=rho, method=method, seed=seed)
    if method in ("ind_svm", "ind_logistic"):
        result = convex.train_independent(train, cfg)
    elif method == "sim_svm":
        result = convex.train_simultaneous_hinge(train, cfg)
    else:
        result = convex.train_simultaneous_logistic(train, cfg)
    game = convex.fix_degenerate(result, train)
    eqset = enumerate_equilibria(game)
    q = optimal_q(empirical_proportion(eqset, train), train.m)
    return eqset, q, game


def _coerce_q(eqset, q):
    """Mixture validity: an empty set forces q=0, a full set q=1."""
    if len(eqset) == 0:
        return 0.0
    if len(eqset) == (1 << eqset.n):
        return 1.0
    return min(max(float(q), 0.0), 1.0)


def _clip(value, flag_key, row):
    """Replace an infinite metric by the display clip and flag the row."""
    if value == math.inf:
        row[flag_key] = True
        return KL_CLIP
    if value == -math.inf:
        row[flag_key] = True
        return -KL_CLIP
    return value


def _score_row(eqset, q, test, truth_model, *, train):
    """Test-split metrics for one trained model; None where unavailable."""
    n = test.n
    row = {}
    row["pi_hat_test"] = empirical_proportion(eqset, test)
    row["pi_hat_train"] = empirical_proportion(eqset, train)
    if n <= NE_METRICS_CAP:
        row["ne_count"] = len(eqset)
        pi = eqset.proportion()
        row["pi"] = pi
        row["upsilon_violation"] = bool(row["pi_hat_train"] < pi)
        row["test_loglik"] = _clip(
            avg_log_likelihood(eqset, q, test), "loglik_clipped", row)
        if truth_model is not None:
            learned = MixtureModel(game=eqset, q=_coerce_q(eqset, q),
                                   strict=False)
            row["kl_to_truth"] = _clip(
                model_kl_exact(truth_model, learned), "kl_clipped", row)
            prec, rec = equilibrium_precision_recall(
                truth_model.equilibria, eqset)
            row["precision"] = prec
            row["recall"] = rec
    else:
        row["ne_count"] = None
        row["pi"] = None
        row["test_loglik"] = None
        if truth_model is not None:
            row["kl_to_truth"] = None
            row["precision"] = None
            row["recall"] = None
    return row


def _val_score(eqset, val):
    """Validation average log-likelihood with the closed-form q for the
    validation coverage; trivial sets score exactly -n ln 2."""
    pi_hat = empirical_proportion(eqset, val)
    q_hat = optimal_q(pi_hat, val.m)
    return avg_log_likelihood(eqset, q_hat, val)


# ---------------------------------------------------------------------------
# the pipeline
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentReport:
    """Deterministic result document: per-(method, rho, rep) rows,
    selected rho per (method, rep), and per-method aggregates."""

    document: dict

    def to_json(self):
        return json.dumps(self.document, sort_keys=True, indent=2) + "\n"

    def write_json(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json())

    def rows(self):
        return self.document["rows"]

    def write_csv(self, path):
        """Flat mirror keyed (method, rho, rep, metric)."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["method", "rho", "rep", "metric", "value"])
        flat = []
        for row in self.document["rows"]:
            for key, value in row.items():
                if key in ("method", "rho", "rep"):
                    continue
                flat.append((row["method"],
                             "" if row["rho"] is None else repr(row["rho"]),
                             row["rep"], key,
                             "" if value is None else value))
        for entry in sorted(flat, key=lambda e: (e[0], e[1], e[2], e[3])):
            writer.writerow(entry)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(buf.getvalue())


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    return obj


def _votes_splits(dataset, rep):
    """Six-fold rotation: the samples split into contiguous thirds (the
    last third absorbs the remainder) and repetition r assigns the thirds
    to (train, val, test) by the r-th permutation in lexicographic order."""
    m = dataset.m
    cut1, cut2 = m // 3, 2 * (m // 3)
    thirds = [np.arange(0, cut1), np.arange(cut1, cut2),
              np.arange(cut2, m)]
    perms = [(0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)]
    ti, vi, si = perms[rep]
    X = dataset.actions
    return (JointActionDataset(X[thirds[ti]]),
            JointActionDataset(X[thirds[vi]]),
            JointActionDataset(X[thirds[si]]))


def _party_influence(game, parties):
    """Total normalized influence between party blocks: entry (a, b) sums
    |w_ij| over voters i in a, j in b after the per-row normalization."""
    from .analysis import influence_scores  # row-zero check lives there

    influence_scores(game)  # validates no zero rows
    W = np.abs(game.W)
    norms = W.sum(axis=1) + np.abs(game.b)
    What = W / norms[:, None]
    labels = sorted(set(parties))
    out = {}
    for a in labels:
        ia = [i for i, p in enumerate(parties) if p == a]
        for b in labels:
            jb = [j for j, p in enumerate(parties) if p == b]
            out[f"{a}->{b}"] = float(What[np.ix_(ia, jb)].sum())
    return out


def run_experiment(config):
    """Full pipeline for a parsed ExperimentConfig; returns the report.

    For every repetition and method: train across the rho grid on the
    train split, score each fit on the validation split (the two-proportion
    likelihood with the closed-form q), select rho (ties to larger), and carry test
    metrics for every grid point so the selection is re-checkable from the
    rows alone.  Errors gain (method, rho, rep) context.
    """
    grid = list(config.grid())
    truth_model = None
    names = parties = None

    if config.data == "synthetic":
        truth, splits = gen_synthetic(config.synthetic)
        truth_model = MixtureModel(game=truth, q=config.synthetic.q_g)
        reps = config.synthetic.repetitions
    else:
        table = ingest_votes(config.votes_file,
                             senator_subset=config.votes_subset,
                             seed=config.seed)
        names, parties = table.names, table.parties
        reps = 6
        splits = [_votes_splits(table.dataset, r) for r in range(reps)]

    census_cache = {}
    rows = []
    selected = []
    fits_at_selected = {}
    for rep in range(reps):
        train, val, test = splits[rep]
        for mi, method in enumerate(config.methods):
            rho_points = [None] if method in RHO_FREE else grid
            per_rho = {}
            for ri, rho in enumerate(rho_points):
                seed = _derive_seed(config.seed, rep, mi, ri)
                t0 = time.perf_counter()
                try:
                    eqset, q, game = _fit(method, train, rho or 0.0, seed,
                                          census_cache)
                except Exception as err:
                    raise RuntimeError(
                        f"method={method} rho={rho} rep={rep}: {err}") from err
                elapsed = time.perf_counter() - t0
                row = {"method": method, "rho": rho, "rep": rep}
                row["val_loglik"] = _clip(
                    _val_score(eqset, val), "val_loglik_clipped", row)
                row.update(_score_row(eqset, q, test, truth_model,
                                      train=train))
                if config.timing:
                    row["seconds"] = elapsed
                rows.append(row)
                if rho is not None:
                    per_rho[rho] = row["val_loglik"]
                fits_at_selected[(method, rep, rho)] = (eqset, q, game)
            if per_rho:
                best = select_rho(per_rho)
                selected.append(
                    {"method": method, "rep": rep, "rho": best})
            else:
                selected.append({"method": method, "rep": rep, "rho": None})

    metric_keys = ("kl_to_truth", "precision", "recall", "pi_hat_test",
                   "test_loglik", "ne_count")
    by_selected = {}
    for sel in selected:
        key = (sel["method"], sel["rep"], sel["rho"])
        for row in rows:
            if (row["method"], row["rep"], row["rho"]) == key:
                by_selected.setdefault(sel["method"], []).append(row)
    aggregates = []
    for method in config.methods:
        chosen = by_selected.get(method, [])
        for metric in metric_keys:
            vals = [r[metric] for r in chosen
                    if metric in r and r[metric] is not None]
            if not vals:
                continue
            arr = np.asarray(vals, dtype=np.float64)
            aggregates.append({
                "method": method, "metric": metric,
                "mean": float(arr.mean()),
                "std": float(arr.std(ddof=1)) if arr.size > 1 else 0.0,
            })

    party_rows = None
    if parties is not None:
        party_rows = []
        for sel in selected:
            fit = fits_at_selected.get(
                (sel["method"], sel["rep"], sel["rho"]))
            if fit is None or fit[2] is None:
                continue
            try:
                blocks = _party_influence(fit[2], parties)
            except ValueError:
                continue
            party_rows.append({"method": sel["method"], "rep": sel["rep"],
                               "blocks": blocks})

    doc = {
        "schema_version": SCHEMA_VERSION,
        "config": {
            "data": config.data,
            "methods": list(config.methods),
            "rho_grid": grid,
            "seed": config.seed,
            "timing": config.timing,
            "synthetic": (asdict(config.synthetic)
                          if config.synthetic else None),
            "votes_file": config.votes_file,
            "votes_subset": config.votes_subset,
        },
        "truth": None,
        "names": list(names) if names else None,
        "parties": list(parties) if parties else None,
        "rows": sorted(_jsonable(rows), key=lambda r: (
            r["method"], r["rep"],
            -1.0 if r["rho"] is None else r["rho"])),
        "selected": sorted(_jsonable(selected), key=lambda s: (
            s["method"], s["rep"])),
        "aggregates": _jsonable(aggregates),
        "party_influence": _jsonable(party_rows),
    }
    if truth_model is not None and truth_model.n <= NE_METRICS_CAP:
        doc["truth"] = {
            "n": truth_model.n,
            "ne_count": len(truth_model.equilibria),
            "pi": truth_model.equilibria.proportion(),
            "q_g": truth_model.q,
        }
    return ExperimentReport(document=doc)
