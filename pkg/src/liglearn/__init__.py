"""Learning linear influence games from joint binary actions.

A linear influence game couples n binary players through an influence
matrix W (zero diagonal) and thresholds b; its pure-strategy equilibria
are the joint actions every player weakly prefers to keep.  The package
models observed behavior as a mixture that spreads mass q uniformly over
equilibria and 1-q over the rest, and learns (W, b) from samples by exact
enumeration, smoothed likelihood ascent, or convex surrogates, with
closed-form evaluation metrics and a reproducible experiment harness.

Equilibrium scans use a compiled core when available; set
LIGLEARN_PURE_PYTHON=1 to force the numpy fallback (see
liglearn.kernels.BACKEND for the active choice).
"""
from .analysis import (
    BoundReport,
    EvalMetrics,
    equilibrium_precision_recall,
    evaluate_model,
    generalization_bound,
    influence_scores,
    model_kl_exact,
    monte_carlo_expected_pi,
    tpe_bound,
)
from .convex import (
    ConvexTrainConfig,
    TrainResult,
    detect_degenerate,
    fix_degenerate,
    hinge_objective,
    simul_logistic_loss,
    train_independent,
    train_simultaneous_hinge,
    train_simultaneous_logistic,
)
from .errors import CapacityError, InvalidModelError, NumericError
from .exact import (
    GameCensus,
    LtfTable,
    PickResult,
    enumerate_influence_games,
    enumerate_ltfs,
    exhaustive_mle_influence,
    load_census,
    ltf_formula_bound,
    sample_picking,
    save_census,
)
from .experiment import (
    ExperimentConfig,
    ExperimentReport,
    SyntheticSpec,
    VotesTable,
    gen_synthetic,
    ingest_votes,
    parse_config,
    run_experiment,
    select_rho,
)
from .games import (
    DEFAULT_TOL,
    ENUMERATION_CAP,
    EquilibriaSet,
    InfluenceGame,
    decode_actions,
    encode_actions,
    enumerate_equilibria,
    hyperplane_vertex_count,
    is_equilibrium,
    is_equilibrium_many,
    true_proportion,
    zero_game,
)
from .kernels import BACKEND
from .mixture import (
    JointActionDataset,
    MixtureModel,
    avg_log_likelihood,
    empirical_proportion,
    kl_bernoulli,
    kl_bounds,
    optimal_q,
    pmf,
    sample,
)
from .sigmoidal import (
    SigmoidParams,
    SmoothTrainConfig,
    sigmoid_h,
    smooth_membership,
    smooth_objective,
    train_sigmoidal,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BoundReport",
    "CapacityError",
    "ConvexTrainConfig",
    "DEFAULT_TOL",
    "ENUMERATION_CAP",
    "EquilibriaSet",
    "EvalMetrics",
    "ExperimentConfig",
    "ExperimentReport",
    "GameCensus",
    "InfluenceGame",
    "InvalidModelError",
    "JointActionDataset",
    "LtfTable",
    "MixtureModel",
    "NumericError",
    "PickResult",
    "SigmoidParams",
    "SmoothTrainConfig",
    "SyntheticSpec",
    "TrainResult",
    "VotesTable",
    "avg_log_likelihood",
    "decode_actions",
    "detect_degenerate",
    "empirical_proportion",
    "encode_actions",
    "enumerate_equilibria",
    "enumerate_influence_games",
    "enumerate_ltfs",
    "equilibrium_precision_recall",
    "evaluate_model",
    "exhaustive_mle_influence",
    "fix_degenerate",
    "gen_synthetic",
    "generalization_bound",
    "hinge_objective",
    "hyperplane_vertex_count",
    "influence_scores",
    "ingest_votes",
    "is_equilibrium",
    "is_equilibrium_many",
    "kl_bernoulli",
    "kl_bounds",
    "load_census",
    "ltf_formula_bound",
    "model_kl_exact",
    "monte_carlo_expected_pi",
    "optimal_q",
    "parse_config",
    "pmf",
    "run_experiment",
    "sample",
    "sample_picking",
    "save_census",
    "select_rho",
    "sigmoid_h",
    "simul_logistic_loss",
    "smooth_membership",
    "smooth_objective",
    "train_independent",
    "train_sigmoidal",
    "train_simultaneous_hinge",
    "train_simultaneous_logistic",
    "true_proportion",
    "zero_game",
]
