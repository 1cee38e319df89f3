"""Numerical checks of the BP/Bethe identities on a single model.

Each check returns ``(results, verdicts)``: ``results`` holds the measured
numbers, ``verdicts`` maps a check name to pass/fail. Thresholds are fixed
module constants so that reports are comparable across runs.
"""
from __future__ import annotations

import numpy as np

from .bp_engine import BpConfig, run_bp
from .calculus import (
    alpha_gradient_chain_rule,
    bethe_along_alpha,
    bethe_along_theta,
    dual_stationarity_check,
    finite_diff_gradient,
    grad_bethe_wrt_alpha,
    grad_bethe_wrt_theta,
    hessian_block,
    hessian_block_fd,
    residual_from_alpha_gradient,
    saddle_probe,
)
from .exact_oracle import (
    DEFAULT_CAP,
    entropy_exact,
    kl_exact,
    log_partition_exact,
    marginals_exact,
)
from .generators import random_theta
from .local import beliefs, bethe_entropy, bethe_log_partition, residual
from .model import ConstantShift, Model, PairVector, TableVector, apply_reparam, energy

GRADIENT_REL_TOL = 1e-6
CHAIN_RULE_TOL = 1e-10
STATIONARY_GRAD_TOL = 1e-9
HESSIAN_ABS_TOL = 1e-6
FENCHEL_TOL = 1e-9
CONJUGACY_GRAD_TOL = 1e-8
DUAL_TOL = 1e-5
DUAL_DIRECTIONS = 20
REPARAM_TOL = 1e-9
ENERGY_TOL = 1e-12
ENERGY_STATE_LIMIT = 2**12

CHECKS = ("gradient", "alpha-gradient", "hessian", "saddle", "fenchel", "dual", "reparam")


def relative_error(approx, exact) -> float:
    """max|approx - exact| / max|exact|, falling back to absolute error when exact ~ 0."""
    approx = np.asarray(approx, dtype=float)
    exact = np.asarray(exact, dtype=float)
    err = float(np.max(np.abs(approx - exact))) if exact.size else 0.0
    scale = float(np.max(np.abs(exact))) if exact.size else 0.0
    return err / scale if scale > 1e-8 else err


def _fixed_point(model: Model, config: BpConfig):
    result = run_bp(model, config)
    info = {
        "bp_status": result.status,
        "bp_sweeps": result.sweeps_used,
        "bp_final_residual": result.final_residual,
    }
    return result, info


def check_gradient(model, config, seed, cap=DEFAULT_CAP):
    results, verdicts = {}, {}
    analytic = grad_bethe_wrt_theta(model).flat()
    numeric = finite_diff_gradient(bethe_along_theta(model), model.theta.flat())
    results["theta_gradient_relative_error"] = relative_error(analytic, numeric)
    verdicts["theta_gradient_matches_fd"] = results["theta_gradient_relative_error"] <= GRADIENT_REL_TOL
    if cap is None or model.graph.state_space_size <= cap:
        g = model.graph
        fd_exact = finite_diff_gradient(
            lambda flat: log_partition_exact(Model(TableVector.from_flat(g, flat)), cap),
            model.theta.flat(),
        )
        results["exact_gradient_vs_marginals"] = float(
            np.max(np.abs(fd_exact - marginals_exact(model, cap).flat()))
        )
        verdicts["exact_gradient_is_marginals"] = results["exact_gradient_vs_marginals"] <= GRADIENT_REL_TOL
    return results, verdicts


def check_alpha_gradient(model, config, seed, cap=DEFAULT_CAP):
    results, verdicts = {}, {}
    grad = grad_bethe_wrt_alpha(model)
    flat = grad.flat()
    numeric = finite_diff_gradient(bethe_along_alpha(model), np.zeros(flat.size))
    results["alpha_gradient_relative_error"] = relative_error(flat, numeric)
    verdicts["alpha_gradient_matches_fd"] = results["alpha_gradient_relative_error"] <= GRADIENT_REL_TOL
    chain = alpha_gradient_chain_rule(model).flat()
    results["chain_rule_route_difference"] = float(np.max(np.abs(chain - flat))) if flat.size else 0.0
    verdicts["chain_rule_route_agrees"] = results["chain_rule_route_difference"] <= CHAIN_RULE_TOL

    gamma = residual(model)
    results["max_abs_residual"] = gamma.max_abs()
    results["max_abs_alpha_gradient"] = grad.max_abs()
    rebuilt = residual_from_alpha_gradient(model, grad)
    results["residual_reconstruction_error"] = max(
        (float(np.max(np.abs(t - gamma[p]))) for p, t in rebuilt.items()), default=0.0
    )
    verdicts["residual_recoverable_from_gradient"] = results["residual_reconstruction_error"] <= CHAIN_RULE_TOL

    result, info = _fixed_point(model, config)
    results.update(info)
    verdicts["bp_converged"] = result.converged
    if result.converged:
        results["fixed_point_max_abs_alpha_gradient"] = grad_bethe_wrt_alpha(result.final_model).max_abs()
        verdicts["stationary_at_fixed_point"] = (
            results["fixed_point_max_abs_alpha_gradient"] <= STATIONARY_GRAD_TOL
        )
    return results, verdicts


def check_hessian(model, config, seed, cap=DEFAULT_CAP):
    results, verdicts = {}, {}
    result, info = _fixed_point(model, config)
    results.update(info)
    verdicts["bp_converged"] = result.converged
    if not result.converged:
        return results, verdicts
    fp = result.final_model
    g = fp.graph
    worst = 0.0
    blocks = 0
    for v in range(g.num_vars):
        if g.degrees[v] < 2:
            continue
        for x_v in range(g.domain_sizes[v]):
            closed = hessian_block(fp, v, x_v, config.tolerance).matrix
            worst = max(worst, float(np.max(np.abs(closed - hessian_block_fd(fp, v, x_v)))))
            blocks += 1
    results["hessian_blocks_checked"] = blocks
    results["hessian_max_abs_error"] = worst
    verdicts["hessian_matches_fd"] = worst <= HESSIAN_ABS_TOL
    return results, verdicts


def check_saddle(model, config, seed, cap=DEFAULT_CAP):
    results, verdicts = {}, {}
    result, info = _fixed_point(model, config)
    results.update(info)
    verdicts["bp_converged"] = result.converged
    if not result.converged:
        return results, verdicts
    report = saddle_probe(result.final_model, config.tolerance)
    results["saddle_verdict"] = report.verdict
    results["qualifying_blocks"] = len(report.entries)
    eig_err = 0.0
    for e in report.entries:
        block = hessian_block(result.final_model, e.variable, e.state, config.tolerance)
        c, n = block.off_diagonal, e.degree
        expected = np.sort(np.array([c * (n - 1)] + [-c] * (n - 1)))
        eig_err = max(eig_err, float(np.max(np.abs(block.eigenvalues() - expected))))
    results["probes"] = [
        {
            "variable": e.variable,
            "state": e.state,
            "degree": e.degree,
            "belief": e.belief,
            "negative_direction_value": e.negative_direction_value,
            "positive_direction_value": e.positive_direction_value,
            "verdict": e.verdict,
        }
        for e in report.entries
    ]
    results["eigenvalue_structure_error"] = eig_err
    verdicts["no_local_extremum"] = report.verdict in ("indefinite", "no qualifying blocks")
    verdicts["eigenvalue_structure"] = eig_err <= 1e-12
    return results, verdicts


def check_fenchel(model, config, seed, cap=DEFAULT_CAP):
    results, verdicts = {}, {}
    mu = beliefs(model)
    f_bethe = bethe_log_partition(model)
    results["kl_form_gap"] = f_bethe - bethe_entropy(mu, "kl") - model.theta.dot(mu)
    results["counting_form_gap"] = f_bethe - bethe_entropy(mu, "counting") - model.theta.dot(mu)
    verdicts["kl_form_identity"] = abs(results["kl_form_gap"]) <= FENCHEL_TOL

    result, info = _fixed_point(model, config)
    results.update(info)
    verdicts["bp_converged"] = result.converged
    if result.converged:
        fp = result.final_model
        mu_fp = beliefs(fp)
        results["fixed_point_counting_form_gap"] = (
            bethe_log_partition(fp) - bethe_entropy(mu_fp, "counting") - fp.theta.dot(mu_fp)
        )
        results["fixed_point_gradient_minus_beliefs"] = grad_bethe_wrt_theta(fp).max_abs_diff(mu_fp)
        verdicts["counting_form_identity_at_fixed_point"] = (
            abs(results["fixed_point_counting_form_gap"]) <= FENCHEL_TOL
        )
        verdicts["gradient_equals_beliefs_at_fixed_point"] = (
            results["fixed_point_gradient_minus_beliefs"] <= CONJUGACY_GRAD_TOL
        )

    if cap is None or model.graph.state_space_size <= cap:
        rng = np.random.default_rng(seed)
        other = Model(random_theta(model.graph, rng))
        m_other = marginals_exact(other, cap)
        gap = log_partition_exact(model, cap) - entropy_exact(other, cap) - model.theta.dot(m_other)
        kl = kl_exact(other, model, cap)
        results["exact_fenchel_gap"] = gap
        results["exact_fenchel_gap_minus_kl"] = gap - kl
        verdicts["exact_fenchel_inequality"] = gap >= -1e-10
        verdicts["exact_fenchel_gap_is_kl"] = abs(gap - kl) <= FENCHEL_TOL
    return results, verdicts


def check_dual(model, config, seed, cap=DEFAULT_CAP):
    results, verdicts = {}, {}
    result, info = _fixed_point(model, config)
    results.update(info)
    verdicts["bp_converged"] = result.converged
    if not result.converged:
        return results, verdicts
    dev = dual_stationarity_check(result.final_model, config.tolerance, DUAL_DIRECTIONS, seed, cap)
    results["dual_max_deviation"] = dev
    results["directions"] = DUAL_DIRECTIONS
    verdicts["dual_stationary"] = dev <= DUAL_TOL
    return results, verdicts


def check_reparam(model, config, seed, cap=DEFAULT_CAP):
    results, verdicts = {}, {}
    g = model.graph
    rng = np.random.default_rng(seed)
    alpha = PairVector.from_flat(g, rng.normal(size=PairVector.zeros(g).flat().size))
    beta = ConstantShift(rng.normal(size=g.num_vars), rng.normal(size=g.num_edges))
    moved = apply_reparam(model, alpha)
    shifted = apply_reparam(model, None, beta)

    results["beliefs_shift_invariance"] = beliefs(shifted).max_abs_diff(beliefs(model))
    verdicts["beliefs_invariant_to_constant_shift"] = results["beliefs_shift_invariance"] <= ENERGY_TOL
    back = apply_reparam(apply_reparam(model, alpha, beta), -alpha, ConstantShift(-beta.var, -beta.edge))
    results["roundtrip_theta_error"] = back.theta.max_abs_diff(model.theta)
    verdicts["reparam_roundtrip"] = results["roundtrip_theta_error"] <= ENERGY_TOL

    if cap is None or g.state_space_size <= cap:
        f0 = log_partition_exact(model, cap)
        results["log_partition_change"] = abs(log_partition_exact(moved, cap) - f0)
        results["marginals_change"] = marginals_exact(moved, cap).max_abs_diff(marginals_exact(model, cap))
        results["constant_shift_error"] = abs(log_partition_exact(shifted, cap) - f0 - beta.total)
        verdicts["log_partition_invariant"] = results["log_partition_change"] <= REPARAM_TOL
        verdicts["marginals_invariant"] = results["marginals_change"] <= REPARAM_TOL
        verdicts["constant_shift_adds_sum_beta"] = results["constant_shift_error"] <= 1e-10
    if g.state_space_size <= ENERGY_STATE_LIMIT:
        results["max_energy_change"] = max(
            abs(energy(moved, x) - energy(model, x)) for x in g.assignments()
        )
        verdicts["energy_preserved"] = results["max_energy_change"] <= ENERGY_TOL
    return results, verdicts


_DISPATCH = {
    "gradient": check_gradient,
    "alpha-gradient": check_alpha_gradient,
    "hessian": check_hessian,
    "saddle": check_saddle,
    "fenchel": check_fenchel,
    "dual": check_dual,
    "reparam": check_reparam,
}


def run_check(what: str, model: Model, config: BpConfig, seed: int, cap=DEFAULT_CAP):
    try:
        fn = _DISPATCH[what]
    except KeyError:
        raise ValueError(f"unknown check {what!r}; choose from {CHECKS}") from None
    return fn(model, config, seed, cap)
