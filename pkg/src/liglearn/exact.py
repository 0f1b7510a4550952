"""Exact maximum-likelihood learners.

Two exact strategies at desk scale:

* sample_picking: the observed-actions-only scan.  Sorted by frequency, the
  k most frequent unique samples form the candidate equilibrium set NE_k;
  the k maximizing the mixture average log-likelihood wins.  Only observed
  joint actions can enter the set, which is optimal because admitting an
  unobserved action costs likelihood without covering any sample.

* exhaustive search over the census of influence games: every distinct
  equilibrium set realizable by an n-player linear influence game, n <= 4.
  Per player, the best-response behavior is exactly a tie-aware sign
  labeling of w_i . x_{-i} - b_i over the (n-1)-cube, so the census is the
  set of distinct intersections of per-player acceptance sets, built by
  incremental intersection with deduplication.

Tie-aware labelings are enumerated over integer weights.  The closed-form
bound ceil((d+1)^((d+1)/2) / 2^d) covers every strict labeling but provably
misses tie patterns from d=3 up, so enumeration grows the bound until the
labeling count is stable on two consecutive bounds and records the verified
bound.
"""
import math
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError
from .games import EquilibriaSet, InfluenceGame
from .mixture import LN2, loglik_from_proportions, optimal_q

#: Census / LTF enumeration cap: d <= 4 inputs per labeling, n <= 4 players.
LTF_DIM_CAP = 4

_CENSUS_MAGIC = "# liglearn census v1"


# ---------------------------------------------------------------------------
# sample picking
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PickResult:
    """A learned general game: equilibrium set, mixture weight, likelihood."""

    equilibria: EquilibriaSet
    q: float
    loglik: float


def sample_picking(dataset):
    """Exact MLE over general games identified by observed joint actions.

    Scans k = 1..U prefixes of the frequency-sorted unique samples,
    evaluating the average log-likelihood at pi = k/2^n and
    q_hat = min(coverage, 1 - 1/(2m)).  Frequency ties are already broken
    by ascending action index in the dataset's frequency view; likelihood
    ties keep the smaller k.
    """
    uniq, counts = dataset.frequency_view()
    n, m = dataset.n, dataset.m
    total = float(2 ** n)
    coverage = np.cumsum(counts) / m
    best = None
    for k in range(1, uniq.size + 1):
        pi = k / total
        pi_hat = float(coverage[k - 1])
        q = optimal_q(pi_hat, m)
        if pi >= 1.0:
            ll = -n * LN2
        else:
            ll = loglik_from_proportions(pi_hat, pi, q, n)
        if best is None or ll > best[0]:
            best = (ll, k, q)
    ll, k, q = best
    return PickResult(
        equilibria=EquilibriaSet(n=n, members=np.sort(uniq[:k])),
        q=q,
        loglik=ll,
    )


# ---------------------------------------------------------------------------
# tie-aware LTF enumeration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LtfTable:
    """All tie-aware sign labelings of the d-cube realizable as sign(w.y - b).

    labels is an (L, 2^d) int8 matrix over {-1, 0, +1}; vertex v has
    coordinate j equal to +1 iff bit j of v is set.  signatures hold the
    base-3 key sum_v (label_v + 1) 3^v and witnesses one realizing integer
    (w, b) per labeling.  weight_bound is the verified stable enumeration
    bound; formula_bound the closed-form starting point.
    """

    d: int
    labels: np.ndarray
    signatures: np.ndarray
    witnesses: np.ndarray
    weight_bound: int
    formula_bound: int

    @property
    def count(self):
        return self.labels.shape[0]

    def strict_count(self):
        """Labelings without any tie vertex."""
        return int((self.labels != 0).all(axis=1).sum())


def cube_vertices(d):
    """(2^d, d) int64 matrix of {-1,+1} vertices, bit j of the row index
    giving coordinate j."""
    if d == 0:
        return np.zeros((1, 0), dtype=np.int64)
    idx = np.arange(1 << d, dtype=np.int64)
    return (((idx[:, None] >> np.arange(d, dtype=np.int64)) & 1) * 2 - 1)


def ltf_formula_bound(d):
    """Closed-form integer weight bound ceil((d+1)^((d+1)/2) / 2^d)."""
    return math.ceil((d + 1) ** ((d + 1) / 2) / 2 ** d)


def _labelings_at_bound(d, bound):
    """Distinct labelings plus one witness each, enumerated over the box."""
    Y = cube_vertices(d)
    rng = np.arange(-bound, bound + 1, dtype=np.int64)
    grids = np.meshgrid(*([rng] * (d + 1)), indexing="ij")
    WB = np.stack([g.ravel() for g in grids], axis=1)
    vals = WB[:, :d] @ Y.T - WB[:, d:]
    labels = np.sign(vals).astype(np.int8)
    powers = 3 ** np.arange(1 << d, dtype=np.int64)
    sigs = (labels.astype(np.int64) + 1) @ powers
    order = np.argsort(sigs, kind="stable")
    sigs_sorted = sigs[order]
    first = np.ones(sigs_sorted.size, dtype=bool)
    first[1:] = sigs_sorted[1:] != sigs_sorted[:-1]
    keep = order[first]
    return sigs_sorted[first], labels[keep], WB[keep]


def enumerate_ltfs(d, cap=LTF_DIM_CAP):
    """Enumerate every tie-aware LTF labeling of the d-cube, d <= cap.

    Grows the integer weight box from the closed-form bound until the count
    of distinct labelings stabilizes on two consecutive bounds.
    """
    if d > cap:
        raise CapacityError(f"d={d} exceeds the LTF enumeration cap {cap}")
    if d < 0:
        raise ValueError("d must be non-negative")
    b0 = ltf_formula_bound(d)
    sigs, labels, wits = _labelings_at_bound(d, b0)
    bound = b0
    while True:
        sigs2, labels2, wits2 = _labelings_at_bound(d, bound + 1)
        if sigs2.size == sigs.size:
            break
        bound += 1
        sigs, labels, wits = sigs2, labels2, wits2
    return LtfTable(d=d, labels=labels, signatures=sigs, witnesses=wits,
                    weight_bound=bound, formula_bound=b0)


# ---------------------------------------------------------------------------
# influence-game census
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GameCensus:
    """Every equilibrium set realizable by an n-player influence game.

    masks is a sorted uint32 array (bit x set iff joint action x is an
    equilibrium); witnesses holds one realizing integer game per mask,
    flattened as W row-major followed by b.
    """

    n: int
    masks: np.ndarray
    witnesses: np.ndarray
    weight_bound: int

    @property
    def count(self):
        return int(self.masks.size)

    def member(self, k):
        """Equilibrium set of census entry k."""
        mask = int(self.masks[k])
        ids = [x for x in range(1 << self.n) if (mask >> x) & 1]
        return EquilibriaSet(n=self.n, members=np.array(ids, dtype=np.int64))

    def witness(self, k):
        """One influence game realizing census entry k (integer weights)."""
        n = self.n
        flat = self.witnesses[k]
        W = flat[: n * n].reshape(n, n).astype(np.float64)
        return InfluenceGame(W=W, b=flat[n * n:].astype(np.float64))


def _minus_i_index(x_idx, i):
    """Index of x_{-i} in the (n-1)-cube: drop bit i, shift higher bits down."""
    return ((x_idx >> (i + 1)) << i) | (x_idx & ((1 << i) - 1))


def _acceptance_masks(table, i, n):
    """Per labeling of player i, the uint32 mask of accepted joint actions.

    Player i accepts x iff x_i matches the labeling weakly: label >= 0 for
    x_i = +1, label <= 0 for x_i = -1 (a tie accepts both actions).
    Returns (distinct masks, labeling row realizing each mask).
    """
    xs = np.arange(1 << n, dtype=np.int64)
    plus = ((xs >> i) & 1).astype(bool)
    sub = _minus_i_index(xs, i)
    sig_at = table.labels[:, sub]
    ok = np.where(plus[None, :], sig_at >= 0, sig_at <= 0)
    weights = (np.uint32(1) << xs.astype(np.uint32))
    masks = (ok.astype(np.uint32) * weights[None, :]).sum(axis=1, dtype=np.uint32)
    uniq, rows = np.unique(masks, return_index=True)
    return uniq, rows


def _dedup_first(masks, parents, labs):
    """Keep, per distinct mask, the lexicographically least (parent, lab)."""
    order = np.lexsort((labs, parents, masks))
    m_sorted = masks[order]
    first = np.ones(m_sorted.size, dtype=bool)
    first[1:] = m_sorted[1:] != m_sorted[:-1]
    keep = order[first]
    return masks[keep], parents[keep], labs[keep]


def enumerate_influence_games(n, chunk=4096):
    """Census of all distinct equilibrium sets of n-player influence games.

    Builds per-player acceptance-set families from the tie-aware labelings
    of the (n-1)-cube and intersects them incrementally, deduplicating after
    every player; each surviving set keeps back-pointers so one integer
    witness game is reconstructed per census member.
    """
    if n > LTF_DIM_CAP:
        raise CapacityError(f"n={n} exceeds the census cap {LTF_DIM_CAP}")
    if n < 1:
        raise ValueError("n must be >= 1")
    table = enumerate_ltfs(n - 1)
    fams = [_acceptance_masks(table, i, n) for i in range(n)]

    cur = fams[0][0]
    choice_parents = [np.arange(cur.size, dtype=np.int64)]
    choice_labs = [np.arange(cur.size, dtype=np.int64)]
    for fam_masks, _ in fams[1:]:
        pieces_m, pieces_p, pieces_l = [], [], []
        for start in range(0, cur.size, chunk):
            blk = cur[start:start + chunk]
            prod = np.bitwise_and.outer(blk, fam_masks)
            flat = prod.ravel()
            par = (np.arange(blk.size, dtype=np.int64)[:, None]
                   + start).repeat(fam_masks.size).ravel()
            lab = np.tile(np.arange(fam_masks.size, dtype=np.int64), blk.size)
            m, p, l = _dedup_first(flat, par, lab)
            pieces_m.append(m)
            pieces_p.append(p)
            pieces_l.append(l)
        cur, parents, labs = _dedup_first(
            np.concatenate(pieces_m),
            np.concatenate(pieces_p),
            np.concatenate(pieces_l))
        choice_parents.append(parents)
        choice_labs.append(labs)

    # walk back-pointers to per-player labeling choices, then build witnesses
    count = cur.size
    lab_choice = np.empty((count, n), dtype=np.int64)
    ptr = np.arange(count, dtype=np.int64)
    for stage in range(n - 1, -1, -1):
        lab_choice[:, stage] = choice_labs[stage][ptr]
        ptr = choice_parents[stage][ptr]

    witnesses = np.zeros((count, n * n + n), dtype=np.int64)
    for i in range(n):
        rows = fams[i][1][lab_choice[:, i]]
        wb = table.witnesses[rows]
        others = [j for j in range(n) if j != i]
        for pos, j in enumerate(others):
            witnesses[:, i * n + j] = wb[:, pos]
        witnesses[:, n * n + i] = wb[:, n - 1]

    return GameCensus(n=n, masks=cur, witnesses=witnesses,
                      weight_bound=table.weight_bound)


def save_census(census, path):
    """Write a census cache: header (n, count, weight bound) plus one line
    per member with the mask in hex and the witness integers."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"{_CENSUS_MAGIC}\n")
        fh.write(f"n={census.n}\n")
        fh.write(f"count={census.count}\n")
        fh.write(f"weight_bound={census.weight_bound}\n")
        for mask, wit in zip(census.masks, census.witnesses):
            ints = " ".join(str(v) for v in wit)
            fh.write(f"{int(mask):04x} {ints}\n")


def load_census(path):
    """Read a census cache written by save_census, validating the header."""
    with open(path, encoding="ascii") as fh:
        magic = fh.readline().strip()
        if magic != _CENSUS_MAGIC:
            raise ValueError(f"{path}: not a census cache (header {magic!r})")
        header = {}
        for _ in range(3):
            key, _, val = fh.readline().strip().partition("=")
            header[key] = int(val)
        n, count = header["n"], header["count"]
        masks = np.empty(count, dtype=np.uint32)
        witnesses = np.empty((count, n * n + n), dtype=np.int64)
        for k in range(count):
            parts = fh.readline().split()
            if len(parts) != 1 + n * n + n:
                raise ValueError(f"{path}: malformed member line {k}")
            masks[k] = int(parts[0], 16)
            witnesses[k] = [int(v) for v in parts[1:]]
        if fh.readline().strip():
            raise ValueError(f"{path}: trailing data after {count} members")
    if np.any(np.diff(masks.astype(np.int64)) <= 0):
        raise ValueError(f"{path}: masks not strictly increasing")
    return GameCensus(n=n, masks=masks, witnesses=witnesses,
                      weight_bound=header["weight_bound"])


# ---------------------------------------------------------------------------
# exhaustive MLE over the census
# ---------------------------------------------------------------------------

_POPCOUNT16 = np.array([bin(v).count("1") for v in range(1 << 16)],
                       dtype=np.int64)


def exhaustive_mle_influence(dataset, census=None):
    """Best influence-game equilibrium set for the dataset, by census scan.

    Scores every census member by the mixture average log-likelihood with
    the closed-form q_hat (trivial members score exactly -n ln 2); ties go
    to the smaller equilibrium set, then lexicographically smaller sorted
    member indices.
    """
    n, m = dataset.n, dataset.m
    if census is None:
        census = enumerate_influence_games(n)
    if census.n != n:
        raise ValueError(f"census is for n={census.n}, dataset has n={n}")
    total = 1 << n
    masks = census.masks.astype(np.int64)
    sizes = _POPCOUNT16[masks]
    uniq, counts = dataset.frequency_view()
    inside = ((masks[:, None] >> uniq[None, :]) & 1).astype(bool)
    pi_hat = (inside * counts[None, :]).sum(axis=1) / m
    pi = sizes / total

    lls = np.empty(masks.size, dtype=np.float64)
    qs = np.empty(masks.size, dtype=np.float64)
    for k in range(masks.size):
        qs[k] = optimal_q(float(pi_hat[k]), m)
        if sizes[k] in (0, total):
            lls[k] = -n * LN2
        else:
            lls[k] = loglik_from_proportions(
                float(pi_hat[k]), float(pi[k]), qs[k], n)

    best_ll = lls.max()
    tied = np.flatnonzero(lls == best_ll)
    if tied.size > 1:
        smallest = sizes[tied].min()
        tied = tied[sizes[tied] == smallest]
        bits = np.arange(total, dtype=np.int64)
        winner = min(
            (tuple(np.flatnonzero((masks[t] >> bits) & 1)), int(t))
            for t in tied)[1]
    else:
        winner = int(tied[0])

    ids = np.flatnonzero((masks[winner] >> np.arange(total, dtype=np.int64)) & 1)
    return PickResult(
        equilibria=EquilibriaSet(n=n, members=ids.astype(np.int64)),
        q=float(qs[winner]),
        loglik=float(lls[winner]),
    )
