"""Reading and writing the GIBBS-LOG text model format.

::

    GIBBS-LOG 1
    n
    d_0 ... d_{n-1}
    m
    k v_1 ... v_k          # one record per hyperedge, variables ascending
    <n unary tables>       # d_v reals each, natural log
    <m hyperedge tables>   # row-major, last variable fastest

``#`` starts a comment; tokens are whitespace separated and tables may
span lines.
"""
from __future__ import annotations

import math
from typing import Iterator

import numpy as np

from .model import Model, ModelError, build_model

MAGIC = "GIBBS-LOG"
VERSION = "1"


class ModelFileError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class _Tokens:
    def __init__(self, text: str):
        self._items: list[tuple[str, int]] = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            for tok in raw.split("#", 1)[0].split():
                self._items.append((tok, lineno))
        self._pos = 0
        self.last_line = len(text.splitlines())

    def next(self, what: str) -> tuple[str, int]:
        if self._pos >= len(self._items):
            raise ModelFileError(f"unexpected end of file while reading {what}", self.last_line)
        item = self._items[self._pos]
        self._pos += 1
        return item

    def int(self, what: str, minimum: int = 0) -> tuple[int, int]:
        tok, line = self.next(what)
        try:
            val = int(tok)
        except ValueError:
            raise ModelFileError(f"expected integer for {what}, got {tok!r}", line) from None
        if val < minimum:
            raise ModelFileError(f"{what} must be >= {minimum}, got {val}", line)
        return val, line

    def real(self, what: str) -> float:
        tok, line = self.next(what)
        try:
            val = float(tok)
        except ValueError:
            raise ModelFileError(f"expected real for {what}, got {tok!r}", line) from None
        if not math.isfinite(val):
            raise ModelFileError(f"non-finite value {tok!r} in {what}", line)
        return val

    def remaining(self) -> Iterator[tuple[str, int]]:
        return iter(self._items[self._pos:])


def parse_model(text: str) -> Model:
    """Parse GIBBS-LOG text into a validated :class:`Model`."""
    toks = _Tokens(text)
    magic, line = toks.next("header")
    if magic != MAGIC:
        raise ModelFileError(f"expected {MAGIC!r} header, got {magic!r}", line)
    version, line = toks.next("format version")
    if version != VERSION:
        raise ModelFileError(f"unsupported format version {version!r} (expected {VERSION})", line)

    n, _ = toks.int("number of variables", minimum=1)
    sizes = [toks.int(f"domain size of variable {v}", minimum=1)[0] for v in range(n)]
    m, _ = toks.int("number of hyperedges")
    edges = []
    for a in range(m):
        k, line = toks.int(f"arity of hyperedge {a}")
        if k < 2:
            raise ModelFileError(f"hyperedge {a} has arity {k} < 2", line)
        edge = []
        for _ in range(k):
            u, uline = toks.int(f"variable of hyperedge {a}")
            if u >= n:
                raise ModelFileError(f"hyperedge {a}: variable {u} out of range (n = {n})", uline)
            if edge and u <= edge[-1]:
                raise ModelFileError(f"hyperedge {a}: variables must be strictly ascending", uline)
            edge.append(u)
        edges.append(tuple(edge))

    unary = [[toks.real(f"theta of variable {v}") for _ in range(sizes[v])] for v in range(n)]
    higher = []
    for a, edge in enumerate(edges):
        count = int(np.prod([sizes[u] for u in edge]))
        higher.append([toks.real(f"theta of hyperedge {a}") for _ in range(count)])
    for tok, line in toks.remaining():
        raise ModelFileError(f"unexpected trailing token {tok!r}", line)

    try:
        return build_model(n, sizes, edges, unary, higher)
    except ModelError as exc:
        raise ModelFileError(f"invalid model: {exc}") from exc


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def serialize_model(model: Model) -> str:
    g = model.graph
    lines = [f"{MAGIC} {VERSION}", str(g.num_vars), " ".join(map(str, g.domain_sizes)), str(g.num_edges)]
    for edge in g.hyperedges:
        lines.append(" ".join(map(str, (len(edge),) + edge)))
    for v, t in enumerate(model.unary):
        lines.append(" ".join(_fmt(x) for x in t.ravel()) + f"  # theta_{v}")
    for a, t in enumerate(model.higher):
        lines.append(" ".join(_fmt(x) for x in t.ravel()) + f"  # theta_a{a} {g.hyperedges[a]}")
    return "\n".join(lines) + "\n"


def read_model(path) -> Model:
    with open(path, encoding="utf-8") as fh:
        return parse_model(fh.read())


def write_model(model: Model, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_model(model))
