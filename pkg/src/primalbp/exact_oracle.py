"""Exact quantities of the Gibbs distribution by full state-space enumeration.

Everything here is ground truth for the Bethe/BP side and is only meant for
desk-scale models. The joint log-potential is materialized as one dense
array with one axis per variable (row-major, variable 0 slowest).
"""
from __future__ import annotations

import numpy as np

from .model import Hypergraph, Model, ModelError, TableVector
from .numerics import logsumexp

DEFAULT_CAP = 10**7

ExactMarginals = TableVector


class StateSpaceTooLarge(ValueError):
    def __init__(self, size: int, cap: int):
        super().__init__(f"state space has {size} states, above the enumeration cap {cap}")
        self.size = size
        self.cap = cap


def _check_cap(graph: Hypergraph, cap: int | None) -> None:
    size = graph.state_space_size
    if cap is not None and size > cap:
        raise StateSpaceTooLarge(size, cap)


def joint_energy(model: Model, cap: int | None = DEFAULT_CAP) -> np.ndarray:
    """Energy theta . phi(x) of every joint state as an array of shape domain_sizes.

    Pass ``cap=None`` to lift the enumeration limit.
    """
    g = model.graph
    _check_cap(g, cap)
    n = g.num_vars
    out = np.zeros(g.domain_sizes)
    for v, t in enumerate(model.unary):
        shape = [1] * n
        shape[v] = g.domain_sizes[v]
        out += t.reshape(shape)
    for a, edge in enumerate(g.hyperedges):
        shape = [1] * n
        for u in edge:
            shape[u] = g.domain_sizes[u]
        out += model.higher[a].reshape(shape)
    return out


def log_partition_exact(model: Model, cap: int | None = DEFAULT_CAP) -> float:
    """F(theta), the log-sum-exp of the energy over all joint states."""
    return float(logsumexp(joint_energy(model, cap)))


def _log_probs(model: Model, cap: int | None) -> np.ndarray:
    e = joint_energy(model, cap)
    return e - logsumexp(e)


def _marginals_from_probs(graph: Hypergraph, p: np.ndarray) -> TableVector:
    n = graph.num_vars
    unary = [p.sum(axis=tuple(u for u in range(n) if u != v)) for v in range(n)]
    higher = [p.sum(axis=tuple(u for u in range(n) if u not in edge)) for edge in graph.hyperedges]
    return TableVector(graph, tuple(unary), tuple(higher))


def marginals_exact(model: Model, cap: int | None = DEFAULT_CAP) -> ExactMarginals:
    """True variable and hyperedge marginals mu = m(theta)."""
    return _marginals_from_probs(model.graph, np.exp(_log_probs(model, cap)))


def entropy_exact(model: Model, cap: int | None = DEFAULT_CAP) -> float:
    """-sum_x p(x) log p(x) in nats."""
    logp = _log_probs(model, cap)
    p = np.exp(logp)
    # 0 log 0 = 0
    return float(-np.sum(np.where(p > 0, p * logp, 0.0)))


def kl_exact(model_p: Model, model_q: Model, cap: int | None = DEFAULT_CAP) -> float:
    """KL(p || q) between the Gibbs distributions of two models on one hypergraph."""
    if model_p.graph != model_q.graph:
        raise ModelError("kl_exact needs two models with identical structure and domains")
    logp = _log_probs(model_p, cap)
    logq = _log_probs(model_q, cap)
    p = np.exp(logp)
    return float(np.sum(np.where(p > 0, p * (logp - logq), 0.0)))


def is_acyclic(model: Model | Hypergraph) -> bool:
    """True iff the bipartite variable/hyperedge incidence graph has no cycle."""
    g = model.graph if isinstance(model, Model) else model
    parent = list(range(g.num_vars + g.num_edges))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for a, edge in enumerate(g.hyperedges):
        node = g.num_vars + a
        for v in edge:
            ra, rv = find(node), find(v)
            if ra == rv:
                return False
            parent[ra] = rv
    return True
