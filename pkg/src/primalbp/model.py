"""Hypergraph Gibbs models in the log domain and their reparameterizations.

A model is a hypergraph (variables with finite domains, hyperedges of
arity >= 2) together with a parameter vector theta holding one unary
log-potential table per variable and one table per hyperedge. Hyperedge
tables are stored as arrays whose axes follow the ascending variable order
of the hyperedge, so the flattened layout is row-major with the last
variable fastest.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Sequence

import numpy as np

logger = logging.getLogger(__name__)

Pair = tuple[int, int]  # (hyperedge index, variable index)


class ModelError(ValueError):
    """Raised for malformed models, tables or assignments."""


def _frozen(arr) -> np.ndarray:
    out = np.array(arr, dtype=float)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class Hypergraph:
    """Variables, their domain sizes and the hyperedges over them."""

    domain_sizes: tuple[int, ...]
    hyperedges: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        sizes = tuple(int(d) for d in self.domain_sizes)
        edges = tuple(tuple(int(u) for u in e) for e in self.hyperedges)
        object.__setattr__(self, "domain_sizes", sizes)
        object.__setattr__(self, "hyperedges", edges)
        if not sizes:
            raise ModelError("a model needs at least one variable")
        for v, d in enumerate(sizes):
            if d < 1:
                raise ModelError(f"variable {v}: domain size {d} < 1")
        seen = {}
        for a, edge in enumerate(edges):
            if len(edge) < 2:
                raise ModelError(f"hyperedge {a}: arity {len(edge)} < 2")
            for u in edge:
                if not 0 <= u < len(sizes):
                    raise ModelError(f"hyperedge {a}: variable index {u} out of range")
            if any(x >= y for x, y in zip(edge, edge[1:])):
                raise ModelError(f"hyperedge {a}: variables {edge} are not strictly ascending")
            if edge in seen:
                raise ModelError(f"hyperedge {a}: duplicate of hyperedge {seen[edge]}")
            seen[edge] = a

    @property
    def num_vars(self) -> int:
        return len(self.domain_sizes)

    @property
    def num_edges(self) -> int:
        return len(self.hyperedges)

    @cached_property
    def edges_of(self) -> tuple[tuple[int, ...], ...]:
        """Indices of the hyperedges incident to each variable."""
        incident = [[] for _ in self.domain_sizes]
        for a, edge in enumerate(self.hyperedges):
            for u in edge:
                incident[u].append(a)
        return tuple(tuple(x) for x in incident)

    @cached_property
    def degrees(self) -> tuple[int, ...]:
        """n_v, the number of hyperedges containing each variable."""
        return tuple(len(x) for x in self.edges_of)

    @cached_property
    def incidence_pairs(self) -> tuple[Pair, ...]:
        return tuple((a, v) for a, edge in enumerate(self.hyperedges) for v in edge)

    def edge_shape(self, a: int) -> tuple[int, ...]:
        return tuple(self.domain_sizes[u] for u in self.hyperedges[a])

    def axis_of(self, a: int, v: int) -> int:
        try:
            return self.hyperedges[a].index(v)
        except ValueError:
            raise ModelError(f"variable {v} is not in hyperedge {a}") from None

    def check_pair(self, a: int, v: int) -> None:
        if not 0 <= a < self.num_edges:
            raise ModelError(f"hyperedge index {a} out of range")
        self.axis_of(a, v)

    def expand(self, table: np.ndarray, a: int, v: int) -> np.ndarray:
        """Reshape a table over X_v so it broadcasts against the table of hyperedge a."""
        shape = [1] * len(self.hyperedges[a])
        shape[self.axis_of(a, v)] = self.domain_sizes[v]
        return np.reshape(table, shape)

    def marginalize_to(self, edge_table: np.ndarray, a: int, v: int) -> np.ndarray:
        """Sum a hyperedge table over every variable except v."""
        axis = self.axis_of(a, v)
        others = tuple(i for i in range(edge_table.ndim) if i != axis)
        return edge_table.sum(axis=others)

    @property
    def state_space_size(self) -> int:
        return int(np.prod(self.domain_sizes, dtype=object))

    def assignments(self) -> Iterator[tuple[int, ...]]:
        """All joint states in row-major order (variable 0 slowest)."""
        return (tuple(int(i) for i in idx) for idx in np.ndindex(*self.domain_sizes))


@dataclass(frozen=True, eq=False)
class TableVector:
    """A vector indexed like theta: one table per variable and per hyperedge.

    Used for log-potentials, beliefs, exact marginals, gradients with
    respect to theta and tangent directions.
    """

    graph: Hypergraph
    unary: tuple[np.ndarray, ...]
    higher: tuple[np.ndarray, ...]

    def __post_init__(self):
        g = self.graph
        if len(self.unary) != g.num_vars:
            raise ModelError(f"expected {g.num_vars} unary tables, got {len(self.unary)}")
        if len(self.higher) != g.num_edges:
            raise ModelError(f"expected {g.num_edges} hyperedge tables, got {len(self.higher)}")
        unary = []
        for v, table in enumerate(self.unary):
            t = np.asarray(table, dtype=float)
            if t.size != g.domain_sizes[v]:
                raise ModelError(
                    f"variable {v}: table has {t.size} entries, expected {g.domain_sizes[v]}"
                )
            unary.append(_frozen(t.reshape(g.domain_sizes[v])))
        higher = []
        for a, table in enumerate(self.higher):
            t = np.asarray(table, dtype=float)
            shape = g.edge_shape(a)
            if t.size != int(np.prod(shape)):
                raise ModelError(
                    f"hyperedge {a}: table has {t.size} entries, expected {int(np.prod(shape))}"
                )
            higher.append(_frozen(t.reshape(shape)))
        object.__setattr__(self, "unary", tuple(unary))
        object.__setattr__(self, "higher", tuple(higher))

    @classmethod
    def zeros(cls, graph: Hypergraph) -> "TableVector":
        return cls(
            graph,
            tuple(np.zeros(d) for d in graph.domain_sizes),
            tuple(np.zeros(graph.edge_shape(a)) for a in range(graph.num_edges)),
        )

    @classmethod
    def from_flat(cls, graph: Hypergraph, flat) -> "TableVector":
        flat = np.asarray(flat, dtype=float)
        unary, higher, pos = [], [], 0
        for d in graph.domain_sizes:
            unary.append(flat[pos:pos + d])
            pos += d
        for a in range(graph.num_edges):
            shape = graph.edge_shape(a)
            n = int(np.prod(shape))
            higher.append(flat[pos:pos + n].reshape(shape))
            pos += n
        if pos != flat.size:
            raise ModelError(f"flat vector has {flat.size} entries, expected {pos}")
        return cls(graph, tuple(unary), tuple(higher))

    def tables(self) -> Iterator[np.ndarray]:
        yield from self.unary
        yield from self.higher

    def flat(self) -> np.ndarray:
        return np.concatenate([t.ravel() for t in self.tables()])

    @property
    def size(self) -> int:
        return sum(t.size for t in self.tables())

    def _zip(self, other: "TableVector", op) -> "TableVector":
        if other.graph != self.graph:
            raise ModelError("table vectors live on different hypergraphs")
        return TableVector(
            self.graph,
            tuple(op(x, y) for x, y in zip(self.unary, other.unary)),
            tuple(op(x, y) for x, y in zip(self.higher, other.higher)),
        )

    def __add__(self, other: "TableVector") -> "TableVector":
        return self._zip(other, np.add)

    def __sub__(self, other: "TableVector") -> "TableVector":
        return self._zip(other, np.subtract)

    def __mul__(self, scalar: float) -> "TableVector":
        return TableVector(
            self.graph,
            tuple(t * scalar for t in self.unary),
            tuple(t * scalar for t in self.higher),
        )

    __rmul__ = __mul__

    def __neg__(self) -> "TableVector":
        return self * -1.0

    def dot(self, other: "TableVector") -> float:
        """Plain inner product sum_i self_i * other_i."""
        if other.graph != self.graph:
            raise ModelError("table vectors live on different hypergraphs")
        return float(sum(np.sum(x * y) for x, y in zip(self.tables(), other.tables())))

    def max_abs(self) -> float:
        return max((float(np.max(np.abs(t))) for t in self.tables()), default=0.0)

    def max_abs_diff(self, other: "TableVector") -> float:
        return (self - other).max_abs()


@dataclass(frozen=True, eq=False)
class PairVector:
    """One table over X_v per incidence pair (a, v) with v in a.

    Holds homogeneous reparameterizations alpha, residuals gamma and
    gradients with respect to alpha.
    """

    graph: Hypergraph
    tables: dict[Pair, np.ndarray]

    def __post_init__(self):
        g = self.graph
        pairs = g.incidence_pairs
        if set(self.tables) != set(pairs):
            missing = set(pairs) - set(self.tables)
            extra = set(self.tables) - set(pairs)
            raise ModelError(f"pair tables mismatch: missing {sorted(missing)}, unexpected {sorted(extra)}")
        tables = {}
        for a, v in pairs:
            t = np.asarray(self.tables[(a, v)], dtype=float)
            if t.size != g.domain_sizes[v]:
                raise ModelError(
                    f"pair ({a}, {v}): table has {t.size} entries, expected {g.domain_sizes[v]}"
                )
            tables[(a, v)] = _frozen(t.reshape(g.domain_sizes[v]))
        object.__setattr__(self, "tables", tables)

    @classmethod
    def zeros(cls, graph: Hypergraph) -> "PairVector":
        return cls(graph, {(a, v): np.zeros(graph.domain_sizes[v]) for a, v in graph.incidence_pairs})

    @classmethod
    def from_flat(cls, graph: Hypergraph, flat) -> "PairVector":
        flat = np.asarray(flat, dtype=float)
        tables, pos = {}, 0
        for a, v in graph.incidence_pairs:
            d = graph.domain_sizes[v]
            tables[(a, v)] = flat[pos:pos + d]
            pos += d
        if pos != flat.size:
            raise ModelError(f"flat vector has {flat.size} entries, expected {pos}")
        return cls(graph, tables)

    def __getitem__(self, pair: Pair) -> np.ndarray:
        return self.tables[pair]

    def flat(self) -> np.ndarray:
        if not self.tables:
            return np.zeros(0)
        return np.concatenate([self.tables[p] for p in self.graph.incidence_pairs])

    def offset(self, a: int, v: int, x_v: int) -> int:
        """Position of component (a, v, x_v) in :meth:`flat`."""
        pos = 0
        for pair in self.graph.incidence_pairs:
            if pair == (a, v):
                return pos + x_v
            pos += self.graph.domain_sizes[pair[1]]
        raise ModelError(f"({a}, {v}) is not an incidence pair")

    def __neg__(self) -> "PairVector":
        return PairVector(self.graph, {p: -t for p, t in self.tables.items()})

    def __mul__(self, scalar: float) -> "PairVector":
        return PairVector(self.graph, {p: t * scalar for p, t in self.tables.items()})

    __rmul__ = __mul__

    def max_abs(self) -> float:
        return max((float(np.max(np.abs(t))) for t in self.tables.values()), default=0.0)


HomogeneousReparam = PairVector
ResidualGamma = PairVector
AlphaGradient = PairVector


@dataclass(frozen=True, eq=False)
class ConstantShift:
    """beta: one constant per variable and one per hyperedge."""

    var: np.ndarray
    edge: np.ndarray

    def __post_init__(self):
        var = _frozen(np.atleast_1d(self.var))
        edge = _frozen(np.reshape(self.edge, -1))
        if not (np.all(np.isfinite(var)) and np.all(np.isfinite(edge))):
            raise ModelError("constant shift has non-finite entries")
        object.__setattr__(self, "var", var)
        object.__setattr__(self, "edge", edge)

    @classmethod
    def zeros(cls, graph: Hypergraph) -> "ConstantShift":
        return cls(np.zeros(graph.num_vars), np.zeros(graph.num_edges))

    @property
    def total(self) -> float:
        return float(self.var.sum() + self.edge.sum())


@dataclass(frozen=True, eq=False)
class Model:
    """An immutable Gibbs model: hypergraph plus finite log-potentials theta."""

    theta: TableVector

    def __post_init__(self):
        for v, t in enumerate(self.theta.unary):
            bad = np.flatnonzero(~np.isfinite(t))
            if bad.size:
                raise ModelError(f"variable {v}: non-finite theta at state {int(bad[0])}")
        for a, t in enumerate(self.theta.higher):
            bad = np.flatnonzero(~np.isfinite(t))
            if bad.size:
                raise ModelError(f"hyperedge {a}: non-finite theta at flat index {int(bad[0])}")

    @property
    def graph(self) -> Hypergraph:
        return self.theta.graph

    @property
    def num_vars(self) -> int:
        return self.graph.num_vars

    @property
    def domain_sizes(self) -> tuple[int, ...]:
        return self.graph.domain_sizes

    @property
    def hyperedges(self) -> tuple[tuple[int, ...], ...]:
        return self.graph.hyperedges

    @property
    def unary(self) -> tuple[np.ndarray, ...]:
        return self.theta.unary

    @property
    def higher(self) -> tuple[np.ndarray, ...]:
        return self.theta.higher

    def with_theta(self, theta: TableVector) -> "Model":
        return Model(theta)

    def degenerate_variables(self) -> list[int]:
        """Variables with a single state; legal but carry no information."""
        return [v for v, d in enumerate(self.domain_sizes) if d == 1]


def build_model(
    num_vars: int,
    domain_sizes: Sequence[int],
    hyperedges: Sequence[Sequence[int]],
    unary: Sequence,
    higher: Sequence,
) -> Model:
    """Validate raw inputs and assemble a :class:`Model`.

    Tables may be given flat (row-major, last variable fastest) or already
    shaped. Raises :class:`ModelError` naming the offending index.
    """
    if int(num_vars) != len(domain_sizes):
        raise ModelError(f"num_vars={num_vars} but {len(domain_sizes)} domain sizes given")
    graph = Hypergraph(tuple(domain_sizes), tuple(tuple(e) for e in hyperedges))
    model = Model(TableVector(graph, tuple(unary), tuple(higher)))
    degenerate = model.degenerate_variables()
    if degenerate:
        logger.warning("variables with domain size 1 (degenerate): %s", degenerate)
    return model


def zero_model(domain_sizes: Sequence[int], hyperedges: Sequence[Sequence[int]]) -> Model:
    graph = Hypergraph(tuple(domain_sizes), tuple(tuple(e) for e in hyperedges))
    return Model(TableVector.zeros(graph))


def incidence_pairs(model: Model) -> list[Pair]:
    """Incidence pairs (a, v): hyperedges in listing order, variables ascending."""
    return list(model.graph.incidence_pairs)


def _check_assignment(graph: Hypergraph, x: Sequence[int]) -> tuple[int, ...]:
    if len(x) != graph.num_vars:
        raise ModelError(f"assignment has {len(x)} entries, expected {graph.num_vars}")
    for v, (xv, d) in enumerate(zip(x, graph.domain_sizes)):
        if not 0 <= int(xv) < d:
            raise ModelError(f"variable {v}: state {xv} outside domain of size {d}")
    return tuple(int(xv) for xv in x)


def energy(model: Model, x: Sequence[int]) -> float:
    """theta . phi(x): the sum of all unary and hyperedge log-potentials at x."""
    x = _check_assignment(model.graph, x)
    total = sum(float(model.unary[v][x[v]]) for v in range(model.num_vars))
    for a, edge in enumerate(model.hyperedges):
        total += float(model.higher[a][tuple(x[u] for u in edge)])
    return total


def apply_elementary_reparam(model: Model, a: int, v: int, alpha_av) -> Model:
    """Move the unary function alpha_av from variable v into hyperedge a."""
    g = model.graph
    g.check_pair(a, v)
    alpha_av = np.asarray(alpha_av, dtype=float)
    if alpha_av.shape != (g.domain_sizes[v],):
        raise ModelError(
            f"pair ({a}, {v}): alpha has shape {alpha_av.shape}, expected ({g.domain_sizes[v]},)"
        )
    if not np.all(np.isfinite(alpha_av)):
        raise ModelError(f"pair ({a}, {v}): non-finite alpha")
    unary = list(model.unary)
    higher = list(model.higher)
    unary[v] = unary[v] - alpha_av
    higher[a] = higher[a] + g.expand(alpha_av, a, v)
    return Model(TableVector(g, tuple(unary), tuple(higher)))


def apply_reparam(
    model: Model,
    alpha: PairVector | None = None,
    beta: ConstantShift | None = None,
) -> Model:
    """theta' = theta + alpha A + beta B."""
    g = model.graph
    unary = [t.copy() for t in model.unary]
    higher = [t.copy() for t in model.higher]
    if alpha is not None:
        if alpha.graph != g:
            raise ModelError("alpha was built for a different hypergraph")
        for (a, v), t in alpha.tables.items():
            unary[v] -= t
            higher[a] += g.expand(t, a, v)
    if beta is not None:
        if beta.var.shape != (g.num_vars,) or beta.edge.shape != (g.num_edges,):
            raise ModelError(
                f"beta has shapes {beta.var.shape}/{beta.edge.shape}, "
                f"expected ({g.num_vars},)/({g.num_edges},)"
            )
        for v in range(g.num_vars):
            unary[v] += beta.var[v]
        for a in range(g.num_edges):
            higher[a] += beta.edge[a]
    return Model(TableVector(g, tuple(unary), tuple(higher)))
