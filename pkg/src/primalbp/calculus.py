"""Derivatives of the Bethe log-partition function and their numerical checks.

Gradients with respect to alpha are always taken at alpha = 0 against the
current theta; reparameterize first to differentiate elsewhere.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .exact_oracle import DEFAULT_CAP, marginals_exact
from .local import beliefs, bethe_entropy, bethe_log_partition, residual
from .model import Model, ModelError, PairVector, TableVector, apply_reparam

FIRST_ORDER_STEP = 1e-5
SECOND_ORDER_STEP = 1e-4


class NotAtFixedPoint(ValueError):
    """The requested quantity is only defined at a BP fixed point."""


def grad_bethe_wrt_theta(model: Model) -> TableVector:
    """dF~/dtheta: mu_v + sum_{a ni v} gamma_av for variables, mu_a for hyperedges."""
    mu = beliefs(model)
    gamma = residual(model, mu)
    g = model.graph
    unary = []
    for v in range(g.num_vars):
        t = mu.unary[v].copy()
        for a in g.edges_of[v]:
            t += gamma[(a, v)]
        unary.append(t)
    return TableVector(g, tuple(unary), mu.higher)


def grad_bethe_wrt_alpha(model: Model) -> PairVector:
    """dF~(theta + alpha A)/dalpha_av(x_v) at alpha = 0, i.e. -sum_{b ni v, b != a} gamma_bv."""
    gamma = residual(model)
    g = model.graph
    totals = [np.zeros(d) for d in g.domain_sizes]
    for (a, v), t in gamma.tables.items():
        totals[v] = totals[v] + t
    return PairVector(g, {(a, v): -(totals[v] - gamma[(a, v)]) for a, v in g.incidence_pairs})


def alpha_gradient_chain_rule(model: Model, theta_grad: TableVector | None = None) -> PairVector:
    """The alpha-gradient assembled from the theta-gradient by the chain rule.

    Component (a, v, x_v) is sum_{x_a \\ v} dF~/dtheta_a(x_a) - dF~/dtheta_v(x_v).
    """
    if theta_grad is None:
        theta_grad = grad_bethe_wrt_theta(model)
    g = model.graph
    return PairVector(
        g,
        {
            (a, v): g.marginalize_to(theta_grad.higher[a], a, v) - theta_grad.unary[v]
            for a, v in g.incidence_pairs
        },
    )


def residual_from_alpha_gradient(model: Model, grad: PairVector) -> dict[tuple[int, int], np.ndarray]:
    """Solve the per-(v, x_v) linear system that maps gamma to the alpha-gradient.

    With g_a = -(S - gamma_a) and S = sum_b gamma_b, summing over the n_v
    incident hyperedges gives S = -sum_a g_a / (n_v - 1), so gamma is
    recoverable whenever n_v >= 2. Pairs with n_v = 1 are omitted: their
    gradient is identically zero and carries no information.
    """
    g = model.graph
    out = {}
    for v in range(g.num_vars):
        edges = g.edges_of[v]
        n = len(edges)
        if n < 2:
            continue
        s = -sum(grad[(a, v)] for a in edges) / (n - 1)
        for a in edges:
            out[(a, v)] = grad[(a, v)] + s
    return out


def bethe_along_alpha(model: Model) -> Callable[[np.ndarray], float]:
    """alpha (flat, in incidence order) -> F~(theta + alpha A)."""
    g = model.graph

    def f(alpha_flat):
        return bethe_log_partition(apply_reparam(model, PairVector.from_flat(g, alpha_flat)))

    return f


def bethe_along_theta(model: Model) -> Callable[[np.ndarray], float]:
    """theta (flat) -> F~(theta) on the hypergraph of ``model``."""
    g = model.graph
    return lambda flat: bethe_log_partition(Model(TableVector.from_flat(g, flat)))


def finite_diff_gradient(f: Callable[[np.ndarray], float], point, step: float = FIRST_ORDER_STEP) -> np.ndarray:
    """Central differences (f(x + s e_i) - f(x - s e_i)) / 2s for every coordinate."""
    if not step > 0:
        raise ValueError(f"step must be positive, got {step}")
    x = np.array(point, dtype=float)
    grad = np.empty(x.size)
    for i in range(x.size):
        old = x[i]
        x[i] = old + step
        fp = f(x)
        x[i] = old - step
        fm = f(x)
        x[i] = old
        if not (np.isfinite(fp) and np.isfinite(fm)):
            raise ArithmeticError(f"non-finite function value at coordinate {i}")
        grad[i] = (fp - fm) / (2 * step)
    return grad


def finite_diff_second(
    f: Callable[[np.ndarray], float], point, i: int, j: int, step: float = SECOND_ORDER_STEP
) -> float:
    """Central second difference approximating d^2 f / dx_i dx_j."""
    x = np.array(point, dtype=float)

    def at(di, dj):
        y = x.copy()
        y[i] += di
        y[j] += dj
        val = f(y)
        if not np.isfinite(val):
            raise ArithmeticError(f"non-finite function value near coordinates ({i}, {j})")
        return val

    h = step
    if i == j:
        return (at(h, 0) - 2 * f(x) + at(-h, 0)) / h**2
    return (at(h, h) - at(h, -h) - at(-h, h) + at(-h, -h)) / (4 * h**2)


@dataclass(frozen=True, eq=False)
class HessianBlock:
    """Second derivatives of F~(theta + alpha A) over alpha_av(x_v), alpha_bv(x_v) for a, b ni v."""

    variable: int
    state: int
    edges: tuple[int, ...]
    belief: float
    matrix: np.ndarray

    @property
    def off_diagonal(self) -> float:
        return (self.belief - 1.0) * self.belief

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)


def _require_fixed_point(model: Model, tol: float) -> float:
    res = residual(model).max_abs()
    if res > tol:
        raise NotAtFixedPoint(f"max|gamma| = {res:.3e} exceeds the fixed-point tolerance {tol:.3e}")
    return res


def hessian_block(model: Model, v: int, x_v: int, fixed_point_tol: float = 1e-9) -> HessianBlock:
    """Closed-form partial Hessian at a fixed point: zero diagonal, (mu_v - 1) mu_v elsewhere."""
    g = model.graph
    if not 0 <= v < g.num_vars or not 0 <= x_v < g.domain_sizes[v]:
        raise ModelError(f"no state {x_v} of variable {v}")
    if g.degrees[v] < 1:
        raise ModelError(f"variable {v} is in no hyperedge")
    _require_fixed_point(model, fixed_point_tol)
    p = float(beliefs(model).unary[v][x_v])
    n = g.degrees[v]
    c = (p - 1.0) * p
    matrix = c * (np.ones((n, n)) - np.eye(n))
    return HessianBlock(v, x_v, g.edges_of[v], p, matrix)


def hessian_block_fd(model: Model, v: int, x_v: int, step: float = SECOND_ORDER_STEP) -> np.ndarray:
    """The same block by central second differences of F~(theta + alpha A)."""
    g = model.graph
    f = bethe_along_alpha(model)
    proto = PairVector.zeros(g)
    idx = [proto.offset(a, v, x_v) for a in g.edges_of[v]]
    origin = np.zeros(proto.flat().size)
    n = len(idx)
    out = np.empty((n, n))
    for r in range(n):
        for s in range(r, n):
            out[r, s] = out[s, r] = finite_diff_second(f, origin, idx[r], idx[s], step)
    return out


@dataclass(frozen=True)
class ProbeEntry:
    variable: int
    state: int
    degree: int
    belief: float
    negative_direction_value: float
    positive_direction_value: float

    @property
    def verdict(self) -> str:
        neg, pos = self.negative_direction_value, self.positive_direction_value
        if neg <= -1e-12 and pos >= 1e-12:
            return "indefinite"
        return "inconclusive"


@dataclass(frozen=True)
class SaddleReport:
    entries: tuple[ProbeEntry, ...]

    @property
    def verdict(self) -> str:
        if not self.entries:
            return "no qualifying blocks"
        if all(e.verdict == "indefinite" for e in self.entries):
            return "indefinite"
        return "inconclusive"


def saddle_probe(model: Model, fixed_point_tol: float = 1e-9) -> SaddleReport:
    """Evaluate u'Hu (u = all ones) and w'Hw (w = e_1 - e_2) on every block with n_v >= 2."""
    _require_fixed_point(model, fixed_point_tol)
    g = model.graph
    entries = []
    for v in range(g.num_vars):
        n = g.degrees[v]
        if n < 2:
            continue
        for x_v in range(g.domain_sizes[v]):
            block = hessian_block(model, v, x_v, fixed_point_tol)
            u = np.ones(n)
            w = np.zeros(n)
            w[0], w[1] = 1.0, -1.0
            entries.append(
                ProbeEntry(
                    v, x_v, n, block.belief,
                    float(u @ block.matrix @ u),
                    float(w @ block.matrix @ w),
                )
            )
    return SaddleReport(tuple(entries))


def tangent_directions(model: Model, num: int, seed: int, cap: int | None = DEFAULT_CAP) -> list[TableVector]:
    """Directions nu = m(theta_1) - m(theta_2) with random theta_1, theta_2.

    Both terms are exact marginal vectors, so A nu = 0 and B nu = 0 hold up
    to rounding.
    """
    g = model.graph
    rng = np.random.default_rng(seed)
    size = TableVector.zeros(g).size
    out = []
    for _ in range(num):
        m1 = marginals_exact(Model(TableVector.from_flat(g, rng.normal(size=size))), cap)
        m2 = marginals_exact(Model(TableVector.from_flat(g, rng.normal(size=size))), cap)
        out.append(m1 - m2)
    return out


def directional_entropy_derivative(mu: TableVector, nu: TableVector, step: float = FIRST_ORDER_STEP) -> float:
    """Central difference of the counting-form Bethe entropy along nu.

    The step is shrunk by factors of 10 until mu +/- step * nu stays positive.
    """
    lo = min(float(t.min()) for t in mu.tables())
    reach = max(nu.max_abs(), 1e-300)
    while step * reach >= lo:
        step /= 10
        if step < 1e-12:
            raise ArithmeticError("mu +/- step * nu is not positive even at the minimal step")
    return (bethe_entropy(mu + nu * step) - bethe_entropy(mu - nu * step)) / (2 * step)


def dual_stationarity_check(
    model: Model,
    fixed_point_tol: float = 1e-9,
    num_directions: int = 20,
    seed: int = 0,
    cap: int | None = DEFAULT_CAP,
    require_fixed_point: bool = True,
) -> float:
    """max over sampled tangent directions nu of |grad_nu H~(mu) + theta . nu| at mu = m~(theta).

    ``require_fixed_point=False`` skips the residual precondition. The
    deviation is then still small: beliefs are log-affine in theta, so the
    directional identity holds for any theta, and only the feasibility of mu
    (A mu = 0) distinguishes fixed points.
    """
    if require_fixed_point:
        _require_fixed_point(model, fixed_point_tol)
    mu = beliefs(model)
    worst = 0.0
    for nu in tangent_directions(model, num_directions, seed, cap):
        dev = abs(directional_entropy_derivative(mu, nu) + model.theta.dot(nu))
        worst = max(worst, dev)
    return worst
