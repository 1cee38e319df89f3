"""Local distributions, beliefs and the Bethe quantities built from them.

Every variable v and every hyperedge a carries its own small Gibbs
distribution; beliefs are those distributions, and the Bethe log-partition
function and Bethe entropy are the same counting-number-weighted sums
(1 - n_v for variables, 1 for hyperedges) of local log-partition functions
and local entropies respectively.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import Model, ModelError, PairVector, TableVector
from .numerics import logsumexp

BeliefVector = TableVector

NORMALIZATION_TOL = 1e-9


def local_logZ_var(model: Model, v: int) -> float:
    return float(logsumexp(model.unary[v]))


def edge_logits(model: Model, a: int) -> np.ndarray:
    """theta_a(x_a) + sum_{v in a} theta_v(x_v) as an array over X_a."""
    g = model.graph
    out = model.higher[a].copy()
    for v in g.hyperedges[a]:
        out = out + g.expand(model.unary[v], a, v)
    return out


def local_logZ_edge(model: Model, a: int) -> float:
    return float(logsumexp(edge_logits(model, a)))


def _softmax(x: np.ndarray) -> np.ndarray:
    return np.exp(x - logsumexp(x))


def beliefs(model: Model) -> BeliefVector:
    """The local Gibbs distributions p^v and p^a, i.e. mu = m~(theta)."""
    g = model.graph
    unary = tuple(_softmax(t) for t in model.unary)
    higher = tuple(_softmax(edge_logits(model, a)) for a in range(g.num_edges))
    return TableVector(g, unary, higher)


def residual(model: Model, mu: BeliefVector | None = None) -> PairVector:
    """gamma = A mu: marginal of mu_a on v minus mu_v, per incidence pair.

    Zero everywhere exactly at BP fixed points. ``mu`` defaults to the
    beliefs of ``model``.
    """
    if mu is None:
        mu = beliefs(model)
    return _residual_of(mu)


def _residual_of(mu: TableVector) -> PairVector:
    g = mu.graph
    return PairVector(
        g,
        {(a, v): g.marginalize_to(mu.higher[a], a, v) - mu.unary[v] for a, v in g.incidence_pairs},
    )


def bethe_log_partition(model: Model) -> float:
    """F~(theta) = sum_v (1 - n_v) F^v + sum_a F^a."""
    g = model.graph
    total = sum((1 - g.degrees[v]) * local_logZ_var(model, v) for v in range(g.num_vars))
    total += sum(local_logZ_edge(model, a) for a in range(g.num_edges))
    return float(total)


def _check_belief_tables(mu: TableVector) -> None:
    for kind, tables in (("variable", mu.unary), ("hyperedge", mu.higher)):
        for i, t in enumerate(tables):
            if np.any(t <= 0):
                raise ModelError(f"{kind} {i}: belief table has non-positive entries")
            s = float(t.sum())
            if abs(s - 1.0) > NORMALIZATION_TOL:
                raise ModelError(f"{kind} {i}: belief table sums to {s!r}, not 1")


def _neg_entropy_terms(t: np.ndarray) -> float:
    return float(np.sum(t * np.log(t)))


def bethe_entropy(mu: BeliefVector, form: str = "counting") -> float:
    """Bethe entropy of strictly positive, normalized beliefs.

    ``form="counting"`` gives sum_v (1 - n_v) H^v + sum_a H^a, where H^a
    uses only the hyperedge table (variables have counting number zero
    inside a hyperedge). ``form="kl"`` gives sum_v H^v - sum_a J^a with
    J^a = KL(mu_a || prod_{v in a} mu_v). The two agree when A mu = 0.
    """
    _check_belief_tables(mu)
    g = mu.graph
    h_var = [-_neg_entropy_terms(t) for t in mu.unary]
    if form == "counting":
        total = sum((1 - g.degrees[v]) * h for v, h in enumerate(h_var))
        total += sum(-_neg_entropy_terms(t) for t in mu.higher)
    elif form == "kl":
        total = sum(h_var)
        for a, t in enumerate(mu.higher):
            log_prod = sum(g.expand(np.log(mu.unary[v]), a, v) for v in g.hyperedges[a])
            total -= float(np.sum(t * (np.log(t) - log_prod)))
    else:
        raise ValueError(f"unknown entropy form {form!r}; use 'counting' or 'kl'")
    return float(total)


def bethe_objective(model: Model, mu: BeliefVector) -> float:
    """theta . mu + H~(mu); the negative Bethe free energy."""
    return model.theta.dot(mu) + bethe_entropy(mu, "counting")


@dataclass(frozen=True)
class PolytopeReport:
    normalization_violation: float
    marginalization_violation: float
    positivity_violation: float
    tol: float

    @property
    def ok(self) -> bool:
        return max(
            self.normalization_violation,
            self.marginalization_violation,
            self.positivity_violation,
        ) <= self.tol


def check_local_polytope(mu: TableVector, tol: float = 1e-12) -> PolytopeReport:
    """Largest violations of B mu = 1, A mu = 0 and mu >= 0."""
    norm = max((abs(float(t.sum()) - 1.0) for t in mu.tables()), default=0.0)
    marg = _residual_of(mu).max_abs()
    pos = max((max(0.0, -float(t.min())) for t in mu.tables()), default=0.0)
    return PolytopeReport(norm, marg, pos, tol)


def tangent_violations(nu: TableVector) -> tuple[float, float]:
    """Largest violations of A nu = 0 and B nu = 0 for a candidate direction."""
    norm = max((abs(float(t.sum())) for t in nu.tables()), default=0.0)
    return _residual_of(nu).max_abs(), norm
