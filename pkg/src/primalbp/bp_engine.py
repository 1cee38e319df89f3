"""Serial belief propagation as a sequence of elementary reparameterizations.

No messages are stored. Updating the incidence pair (a, v) moves a unary
function alpha_av from variable v into hyperedge a so that the marginal of
the hyperedge belief on v becomes equal to the variable belief. The free
additive constant in alpha_av is fixed by requiring
logsumexp(alpha_av) = log d_v. On runs that converge this keeps theta
bounded; on oscillating runs the per-update constants accumulate, so theta
drifts by per-table constants that leave every belief unchanged.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .local import residual
from .model import Hypergraph, Model, TableVector
from .numerics import logsumexp

CONVERGED = "converged"
MAX_SWEEPS_REACHED = "max_sweeps_reached"

SCHEDULES = ("round_robin", "random")


class BpNumericalError(ArithmeticError):
    def __init__(self, sweep: int):
        super().__init__(f"non-finite theta after sweep {sweep}")
        self.sweep = sweep


@dataclass(frozen=True)
class BpConfig:
    tolerance: float = 1e-9
    max_sweeps: int = 1000
    schedule: str = "round_robin"
    seed: int | None = None
    damping: float = 0.0

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError(f"tolerance must be positive, got {self.tolerance}")
        if int(self.max_sweeps) < 1:
            raise ValueError(f"max_sweeps must be >= 1, got {self.max_sweeps}")
        if self.schedule not in SCHEDULES:
            raise ValueError(f"unknown schedule {self.schedule!r}; choose from {SCHEDULES}")
        if self.schedule == "random" and self.seed is None:
            raise ValueError("the random schedule needs a seed")
        if not 0.0 <= self.damping < 1.0:
            raise ValueError(f"damping must lie in [0, 1), got {self.damping}")


@dataclass(frozen=True, eq=False)
class BpResult:
    final_model: Model
    status: str
    sweeps_used: int
    final_residual: float
    residual_trace: tuple[float, ...] = field(default=())

    @property
    def converged(self) -> bool:
        return self.status == CONVERGED


def pair_alpha(graph: Hypergraph, unary, higher, a: int, v: int) -> np.ndarray:
    """alpha_av that makes the pair (a, v) consistent, normalized to logsumexp = log d_v."""
    axis = graph.axis_of(a, v)
    logits = higher[a]
    for u in graph.hyperedges[a]:
        if u != v:
            logits = logits + graph.expand(unary[u], a, u)
    others = tuple(i for i in range(logits.ndim) if i != axis)
    m = logsumexp(logits, axis=others)
    c = math.log(graph.domain_sizes[v]) - logsumexp(-m)
    return c - m


def bp_update_pair(model: Model, a: int, v: int, damping: float = 0.0) -> Model:
    """One serial BP step on the incidence pair (a, v)."""
    g = model.graph
    g.check_pair(a, v)
    alpha = pair_alpha(g, model.unary, model.higher, a, v) * (1.0 - damping)
    unary = list(model.unary)
    higher = list(model.higher)
    unary[v] = unary[v] - alpha
    higher[a] = higher[a] + g.expand(alpha, a, v)
    return Model(TableVector(g, tuple(unary), tuple(higher)))


def _max_residual(graph: Hypergraph, unary, higher) -> float:
    return residual(Model(TableVector(graph, tuple(unary), tuple(higher)))).max_abs()


def run_bp(model: Model, config: BpConfig | None = None) -> BpResult:
    """Sweep over incidence pairs until max|gamma| <= tolerance or max_sweeps.

    The residual is checked once, after each complete sweep. Identical
    (model, config) inputs give bit-identical results.
    """
    config = config or BpConfig()
    g = model.graph
    pairs = list(g.incidence_pairs)
    unary = [t.copy() for t in model.unary]
    higher = [t.copy() for t in model.higher]
    rng = np.random.default_rng(config.seed) if config.schedule == "random" else None
    keep = 1.0 - config.damping

    trace = []
    status = MAX_SWEEPS_REACHED
    res = math.inf
    for sweep in range(1, int(config.max_sweeps) + 1):
        order = pairs if rng is None else [pairs[i] for i in rng.permutation(len(pairs))]
        for a, v in order:
            alpha = pair_alpha(g, unary, higher, a, v)
            if keep != 1.0:
                alpha = alpha * keep
            unary[v] -= alpha
            higher[a] += g.expand(alpha, a, v)
        if not all(np.all(np.isfinite(t)) for t in unary + higher):
            raise BpNumericalError(sweep)
        res = _max_residual(g, unary, higher)
        trace.append(res)
        if res <= config.tolerance:
            status = CONVERGED
            break

    final = Model(TableVector(g, tuple(unary), tuple(higher)))
    return BpResult(final, status, len(trace), res, tuple(trace))


def is_fixed_point(model: Model, tol: float) -> bool:
    return residual(model).max_abs() <= tol
