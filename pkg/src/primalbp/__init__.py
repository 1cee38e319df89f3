"""Loopy belief propagation as reparameterization of a hypergraph Gibbs model,
with brute-force oracles and numerical checks of the Bethe log-partition
function's stationary points."""

from .bp_engine import BpConfig, BpResult, bp_update_pair, is_fixed_point, run_bp
from .calculus import (
    dual_stationarity_check,
    finite_diff_gradient,
    grad_bethe_wrt_alpha,
    grad_bethe_wrt_theta,
    hessian_block,
    saddle_probe,
)
from .exact_oracle import entropy_exact, is_acyclic, kl_exact, log_partition_exact, marginals_exact
from .local import (
    beliefs,
    bethe_entropy,
    bethe_log_partition,
    bethe_objective,
    check_local_polytope,
    local_logZ_edge,
    local_logZ_var,
    residual,
)
from .model import (
    ConstantShift,
    Hypergraph,
    Model,
    ModelError,
    PairVector,
    TableVector,
    apply_elementary_reparam,
    apply_reparam,
    build_model,
    energy,
    incidence_pairs,
)
from .modelfile import parse_model, read_model, serialize_model, write_model

__version__ = "0.1.0"
