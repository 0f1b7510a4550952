"""Command-line front end.

Subcommands: gen (synthetic game + splits to a directory), census
(enumerate distinct equilibrium sets and cache them), train (one learner
on a CSV of joint actions or a votes file), experiment (full config-driven
pipeline with JSON/CSV reports), bounds (sample-complexity and trivial
pure-strategy bounds).
"""
import argparse
import json
import os
import sys

import numpy as np

from . import analysis, exact, experiment
from .games import enumerate_equilibria
from .mixture import JointActionDataset, avg_log_likelihood


def _dataset_from_args(args):
    if (args.actions is None) == (args.votes is None):
        raise SystemExit("provide exactly one of --actions or --votes")
    if args.actions is not None:
        X = np.atleast_2d(np.loadtxt(args.actions, delimiter=",", dtype=np.int64))
        return JointActionDataset(X)
    table = experiment.ingest_votes(args.votes, senator_subset=args.subset,
                                    seed=args.seed)
    return table.dataset


def _emit(doc):
    json.dump(experiment._jsonable(doc), sys.stdout, sort_keys=True, indent=2)
    sys.stdout.write("\n")


def _cmd_gen(args):
    spec = experiment.SyntheticSpec(
        n=args.n, density=args.density, p_plus=args.p_plus, q_g=args.q,
        m_train=args.m_train, m_val=args.m_val, m_test=args.m_test,
        repetitions=args.reps, seed=args.seed)
    truth, splits = experiment.gen_synthetic(spec)
    os.makedirs(args.out, exist_ok=True)
    doc = {"n": truth.n, "W": truth.W.tolist(), "b": truth.b.tolist(),
           "q_g": spec.q_g}
    if truth.n <= experiment.NE_METRICS_CAP:
        doc["ne"] = enumerate_equilibria(truth, tol=0.0).members.tolist()
    with open(os.path.join(args.out, "truth.json"), "w") as fh:
        json.dump(experiment._jsonable(doc), fh, sort_keys=True, indent=2)
        fh.write("\n")
    for rep, (train, val, test) in enumerate(splits):
        for name, ds in (("train", train), ("val", val), ("test", test)):
            path = os.path.join(args.out, f"rep{rep}_{name}.csv")
            np.savetxt(path, ds.actions, fmt="%d", delimiter=",")
    print(f"wrote truth.json and {3 * len(splits)} split files to {args.out}")


def _cmd_census(args):
    if os.path.exists(args.out) and not args.force:
        census = exact.load_census(args.out)
        source = "loaded"
    else:
        census = exact.enumerate_influence_games(args.n)
        exact.save_census(census, args.out)
        source = "enumerated"
    if census.n != args.n:
        raise SystemExit(
            f"{args.out} holds a census for n={census.n}, not n={args.n}")
    table = exact.enumerate_ltfs(args.n - 1) if args.n >= 1 else None
    _emit({
        "n": census.n, "count": census.count, "source": source,
        "weight_bound": census.weight_bound,
        "ltf_labelings_tie_aware": table.count if table else None,
        "ltf_labelings_strict": table.strict_count() if table else None,
    })


def _cmd_train(args):
    ds = _dataset_from_args(args)
    cache = {}
    eqset, q, game = experiment._fit(args.method, ds, args.rho, args.seed,
                                     cache)
    doc = {"method": args.method, "rho": args.rho, "q": q,
           "m": ds.m, "n": ds.n,
           "avg_loglik": avg_log_likelihood(eqset, q, ds)
           if ds.n <= experiment.NE_METRICS_CAP else None}
    if game is not None:
        doc["W"] = game.W.tolist()
        doc["b"] = game.b.tolist()
    if ds.n <= experiment.NE_METRICS_CAP:
        doc["ne_count"] = len(eqset)
        doc["ne"] = eqset.members.tolist()
    _emit(doc)


def _cmd_experiment(args):
    report = experiment.run_experiment(experiment.parse_config(args.config))
    report.write_json(args.json)
    written = [args.json]
    if args.csv:
        report.write_csv(args.csv)
        written.append(args.csv)
    print("wrote " + " and ".join(written))


def _cmd_bounds(args):
    doc = {
        "n": args.n, "m": args.m, "delta": args.delta, "q_bar": args.q_bar,
        "generalization": vars(analysis.generalization_bound(
            args.n, args.m, args.delta, args.q_bar)),
        "trivial_pure_equilibria": analysis.tpe_bound(args.n, args.delta),
    }
    if args.mc_trials:
        mean, ci = analysis.monte_carlo_expected_pi(
            args.n, trials=args.mc_trials, seed=args.mc_seed)
        doc["expected_pi_mc"] = {"mean": mean, "ci_half_width": ci,
                                 "trials": args.mc_trials}
    _emit(doc)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="liglearn",
        description="Learn linear influence games from joint binary actions")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic game and splits")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--density", type=float, default=0.5)
    p.add_argument("--p-plus", type=float, default=0.5)
    p.add_argument("--q", type=float, default=0.9)
    p.add_argument("--m-train", type=int, default=100)
    p.add_argument("--m-val", type=int, default=50)
    p.add_argument("--m-test", type=int, default=50)
    p.add_argument("--reps", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("census",
                       help="enumerate distinct equilibrium sets for n players")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out", required=True, help="cache file path")
    p.add_argument("--force", action="store_true",
                   help="re-enumerate even if the cache exists")
    p.set_defaults(func=_cmd_census)

    p = sub.add_parser("train", help="fit one learner to a dataset")
    p.add_argument("--actions", help="CSV of comma-separated +-1 rows")
    p.add_argument("--votes", help="roll-call CSV (yea/nay/abstain/absent)")
    p.add_argument("--subset", type=int, default=None,
                   help="stratified voter subsample size")
    p.add_argument("--method", required=True,
                   choices=experiment.METHOD_NAMES)
    p.add_argument("--rho", type=float, default=0.01)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("experiment", help="run a config-driven experiment")
    p.add_argument("--config", required=True)
    p.add_argument("--json", required=True, help="JSON report path")
    p.add_argument("--csv", default=None, help="optional CSV mirror path")
    p.set_defaults(func=_cmd_experiment)

    p = sub.add_parser("bounds", help="sample-complexity and triviality bounds")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--q-bar", type=float, default=0.9)
    p.add_argument("--mc-trials", type=int, default=0,
                   help="Monte Carlo trials for expected equilibrium proportion")
    p.add_argument("--mc-seed", type=int, default=0)
    p.set_defaults(func=_cmd_bounds)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (ValueError, RuntimeError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
