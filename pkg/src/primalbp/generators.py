"""Seeded random models used by the test suites and the theorem checks."""
from __future__ import annotations

import numpy as np

from .model import Hypergraph, Model, TableVector


def random_theta(graph: Hypergraph, rng: np.random.Generator, unary_scale: float = 1.0,
                 edge_scale: float = 1.0) -> TableVector:
    """Uniform entries in [-unary_scale, unary_scale] and [-edge_scale, edge_scale]."""
    unary = tuple(rng.uniform(-unary_scale, unary_scale, size=d) for d in graph.domain_sizes)
    higher = tuple(
        rng.uniform(-edge_scale, edge_scale, size=graph.edge_shape(a)) for a in range(graph.num_edges)
    )
    return TableVector(graph, unary, higher)


def random_hypergraph(rng: np.random.Generator, num_vars: int, num_edges: int,
                      max_domain: int = 3, max_arity: int = 3) -> Hypergraph:
    """Random distinct hyperedges of arity 2..max_arity; may contain cycles."""
    sizes = tuple(int(d) for d in rng.integers(2, max_domain + 1, size=num_vars))
    edges = set()
    attempts = 0
    while len(edges) < num_edges and attempts < 1000:
        attempts += 1
        k = int(rng.integers(2, min(max_arity, num_vars) + 1))
        edges.add(tuple(sorted(int(u) for u in rng.choice(num_vars, size=k, replace=False))))
    return Hypergraph(sizes, tuple(sorted(edges)))


def random_model(rng: np.random.Generator, num_vars: int | None = None, num_edges: int | None = None,
                 max_domain: int = 3, max_arity: int = 3, scale: float = 1.0) -> Model:
    if num_vars is None:
        num_vars = int(rng.integers(2, 6))
    if num_edges is None:
        num_edges = int(rng.integers(1, num_vars + 2))
    graph = random_hypergraph(rng, num_vars, num_edges, max_domain, max_arity)
    return Model(random_theta(graph, rng, scale, scale))


def random_tree_hypergraph(rng: np.random.Generator, num_vars: int, max_domain: int = 3,
                           max_arity: int = 3) -> Hypergraph:
    """A random hyperforest: each new hyperedge shares exactly one variable with the existing ones."""
    sizes = tuple(int(d) for d in rng.integers(2, max_domain + 1, size=num_vars))
    order = [int(u) for u in rng.permutation(num_vars)]
    placed = [order[0]]
    rest = order[1:]
    edges = []
    while rest:
        k = int(rng.integers(2, max_arity + 1))
        k = min(k, len(rest) + 1)
        anchor = placed[int(rng.integers(len(placed)))]
        new = rest[:k - 1]
        rest = rest[k - 1:]
        edges.append(tuple(sorted([anchor] + new)))
        placed.extend(new)
    return Hypergraph(sizes, tuple(edges))


def random_tree_model(rng: np.random.Generator, num_vars: int | None = None, max_domain: int = 4,
                      max_arity: int = 3, scale: float = 1.0) -> Model:
    if num_vars is None:
        num_vars = int(rng.integers(2, 9))
    graph = random_tree_hypergraph(rng, num_vars, max_domain, max_arity)
    return Model(random_theta(graph, rng, scale, scale))


def random_loopy_model(rng: np.random.Generator, num_vars: int | None = None, max_domain: int = 3,
                       chords: int | None = None, unary_scale: float = 0.5,
                       edge_scale: float = 0.3) -> Model:
    """A pairwise ring over all variables plus random chords; every n_v >= 2."""
    if num_vars is None:
        num_vars = int(rng.integers(3, 7))
    if chords is None:
        chords = int(rng.integers(0, 3))
    sizes = tuple(int(d) for d in rng.integers(2, max_domain + 1, size=num_vars))
    edges = {tuple(sorted((i, (i + 1) % num_vars))) for i in range(num_vars)}
    for _ in range(chords):
        u, w = (int(x) for x in rng.choice(num_vars, size=2, replace=False))
        edges.add(tuple(sorted((u, w))))
    graph = Hypergraph(sizes, tuple(sorted(edges)))
    return Model(random_theta(graph, rng, unary_scale, edge_scale))


def grid_hypergraph(rows: int, cols: int, domain: int = 2) -> Hypergraph:
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1))
            if r + 1 < rows:
                edges.append((v, v + cols))
    return Hypergraph((domain,) * (rows * cols), tuple(edges))


def grid_model(rows: int, cols: int, seed: int, coupling: float = 0.2, field: float = 0.5) -> Model:
    """Binary grid; every pairwise table entry in [-coupling, coupling], unary in [-field, field]."""
    rng = np.random.default_rng(seed)
    return Model(random_theta(grid_hypergraph(rows, cols), rng, field, coupling))
