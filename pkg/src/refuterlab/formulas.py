"""Generators for the hard formula families and their combinatorial certificates.

Variable numbering is fixed so that every module agrees bit for bit:

* PHP with ``m`` pigeons and ``n`` holes: ``x_{i,j} = i*n + j + 1``.
* EPHP(n): ``x_{i,h} = i*n + h + 1`` for ``i <= n``, ``h < n``; then
  ``y_{i,j} = n(n+1) + i(n+1) + j + 1`` for ``0 <= j <= n``.  Semantically
  ``y_{i,j} = 1`` iff pigeon ``i`` sits in a hole ``< j``.
* XOR lift of a base variable ``z_i``: ``x_i = 2i - 1`` and ``y_i = 2i``.
* Tseitin: edge ``e`` of the sorted edge list is variable ``e + 1``.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from functools import cached_property
from typing import Hashable, Iterable, Sequence

import networkx as nx

from .matching import saturating_matching
from .resolution import CNF, Clause, clause, cnf_of, php_pair, php_var


@dataclass(frozen=True)
class PhpFormula:
    m: int
    n: int

    def __post_init__(self) -> None:
        if not self.m > self.n >= 1:
            raise ValueError("PHP needs m > n >= 1")

    def x(self, i: int, j: int) -> int:
        return php_var(i, j, self.n)

    def pair(self, v: int) -> tuple[int, int]:
        return php_pair(v, self.n)

    @property
    def nvars(self) -> int:
        return self.m * self.n

    @cached_property
    def cnf(self) -> CNF:
        out = [clause(self.x(i, j) for j in range(self.n)) for i in range(self.m)]
        for j in range(self.n):
            for i, k in itertools.combinations(range(self.m), 2):
                out.append(clause((-self.x(i, j), -self.x(k, j))))
        return tuple(out)


def gen_php(m: int, n: int) -> CNF:
    return PhpFormula(m, n).cnf


@dataclass(frozen=True)
class EphpFormula:
    n: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("EPHP needs n >= 1")

    @property
    def pigeons(self) -> int:
        return self.n + 1

    def x(self, i: int, h: int) -> int:
        return i * self.n + h + 1

    def y(self, i: int, j: int) -> int:
        return self.n * (self.n + 1) + i * (self.n + 1) + j + 1

    @property
    def nvars(self) -> int:
        return self.n * (self.n + 1) + (self.n + 1) ** 2

    def decode(self, v: int) -> tuple[str, int, int]:
        if not 1 <= v <= self.nvars:
            raise ValueError(f"variable {v} is not an EPHP({self.n}) variable")
        base = self.n * (self.n + 1)
        if v <= base:
            i, h = divmod(v - 1, self.n)
            return ("x", i, h)
        i, j = divmod(v - base - 1, self.n + 1)
        return ("y", i, j)

    def pigeon_clauses(self, i: int) -> list[Clause]:
        n = self.n
        out = [clause((-self.y(i, 0),))]
        out += [clause((self.y(i, h), self.x(i, h), -self.y(i, h + 1))) for h in range(n)]
        out.append(clause((self.y(i, n),)))
        return out

    @cached_property
    def cnf(self) -> CNF:
        out: list[Clause] = []
        for i in range(self.pigeons):
            out += self.pigeon_clauses(i)
        for h in range(self.n):
            for i, k in itertools.combinations(range(self.pigeons), 2):
                out.append(clause((-self.x(i, h), -self.x(k, h))))
        return tuple(out)

    def semantic_y(self, holes: Sequence[int | None]) -> dict[int, int]:
        """``y`` values for pigeons placed in ``holes`` (``None`` = unplaced)."""
        out = {}
        for i, h in enumerate(holes):
            if h is None:
                continue
            for j in range(self.n + 1):
                out[self.y(i, j)] = int(h < j)
        return out


def gen_ephp(n: int) -> CNF:
    return EphpFormula(n).cnf


def normalize_graph(G: nx.Graph | Iterable[tuple[int, int]], n_vertices: int | None = None) -> tuple[int, tuple[tuple[int, int], ...]]:
    """Vertex count and sorted edge list over vertices ``0..n-1``."""
    if isinstance(G, nx.Graph):
        if G.is_multigraph():
            raise ValueError("multigraphs are not supported")
        order = sorted(G.nodes())
        index = {v: k for k, v in enumerate(order)}
        edges = sorted(tuple(sorted((index[u], index[v]))) for u, v in G.edges())
        return len(order), tuple(edges)  # type: ignore[return-value]
    edges = sorted(tuple(sorted(e)) for e in G)
    nv = n_vertices if n_vertices is not None else 1 + max((max(e) for e in edges), default=-1)
    return nv, tuple(edges)  # type: ignore[return-value]


@dataclass(frozen=True)
class TseitinFormula:
    n_vertices: int
    edges: tuple[tuple[int, int], ...]
    tau: tuple[int, ...]
    max_degree: int = 6

    def __post_init__(self) -> None:
        if len(self.tau) != self.n_vertices:
            raise ValueError("charge vector length differs from vertex count")
        if len(set(self.edges)) != len(self.edges):
            raise ValueError("parallel edges are not supported")
        if any(u == v for u, v in self.edges):
            raise ValueError("self-loops are not supported")
        if max(self.degrees, default=0) > self.max_degree:
            raise ValueError(f"degree above {self.max_degree} makes the clause blowup too large")

    @cached_property
    def incident(self) -> tuple[tuple[int, ...], ...]:
        inc: list[list[int]] = [[] for _ in range(self.n_vertices)]
        for e, (u, v) in enumerate(self.edges):
            inc[u].append(e)
            inc[v].append(e)
        return tuple(tuple(x) for x in inc)

    @property
    def degrees(self) -> list[int]:
        return [len(x) for x in self.incident]

    @property
    def nvars(self) -> int:
        return len(self.edges)

    def var(self, e: int) -> int:
        return e + 1

    def odd(self) -> bool:
        return sum(self.tau) % 2 == 1

    @cached_property
    def vertex_axioms(self) -> tuple[tuple[Clause, ...], ...]:
        out = []
        for v in range(self.n_vertices):
            inc = self.incident[v]
            cls = []
            for bits in range(1 << len(inc)):
                ys = [(bits >> k) & 1 for k in range(len(inc))]
                if sum(ys) % 2 == self.tau[v]:
                    continue
                cls.append(clause(self.var(e) if y == 0 else -self.var(e) for e, y in zip(inc, ys)))
            out.append(tuple(cls))
        return tuple(out)

    @cached_property
    def axiom_owner(self) -> tuple[int, ...]:
        return tuple(v for v in range(self.n_vertices) for _ in self.vertex_axioms[v])

    @cached_property
    def cnf(self) -> CNF:
        return tuple(c for cls in self.vertex_axioms for c in cls)

    def axiom_offset(self, v: int) -> int:
        return sum(len(self.vertex_axioms[u]) for u in range(v))


def gen_tseitin(G: nx.Graph | Iterable[tuple[int, int]], tau: Sequence[int], regular: bool = True) -> TseitinFormula:
    nv, edges = normalize_graph(G)
    tf = TseitinFormula(nv, edges, tuple(int(t) & 1 for t in tau))
    if regular:
        degs = set(tf.degrees)
        if len(degs) > 1:
            raise ValueError("graph is not regular")
        g = nx.Graph()
        g.add_nodes_from(range(nv))
        g.add_edges_from(edges)
        if nv and not nx.is_connected(g):
            raise ValueError("graph is not connected")
    return tf


def cut_size(edges: Iterable[tuple[int, int]], S: set[int] | frozenset[int]) -> int:
    return sum((u in S) != (v in S) for u, v in edges)


def expansion(G: nx.Graph | Iterable[tuple[int, int]], n_vertices: int | None = None) -> int:
    """Minimum cut over vertex sets with ``ceil(n/3) <= |S| <= floor(2n/3)``."""
    nv, edges = normalize_graph(G, n_vertices)
    if nv > 24:
        raise ValueError("exhaustive expansion is limited to 24 vertices")
    lo, hi = -(-nv // 3), (2 * nv) // 3
    best = None
    for size in range(lo, hi + 1):
        for S in itertools.combinations(range(nv), size):
            c = cut_size(edges, set(S))
            if best is None or c < best:
                best = c
    return 0 if best is None else best


def balanced_min_cut(G: nx.Graph | Iterable[tuple[int, int]], n_vertices: int | None = None) -> tuple[int, frozenset[int]]:
    nv, edges = normalize_graph(G, n_vertices)
    lo, hi = -(-nv // 3), (2 * nv) // 3
    best: tuple[int, frozenset[int]] | None = None
    for size in range(lo, hi + 1):
        for S in itertools.combinations(range(nv), size):
            c = cut_size(edges, set(S))
            if best is None or c < best[0]:
                best = (c, frozenset(S))
    assert best is not None
    return best


def xor_x(i: int) -> int:
    return 2 * i - 1


def xor_y(i: int) -> int:
    return 2 * i


def _pow(v: int, b: int) -> int:
    return v if b else -v


def xor_lift(F: Iterable[Iterable[int]]) -> CNF:
    """Each width-d clause becomes 2^d clauses over ``x_i, y_i``; ``z_i = x_i xor y_i``."""
    out: list[Clause] = []
    for c in cnf_of(F):
        if len(c) > 12:
            raise ValueError("lifting is limited to clauses of width 12")
        for r in range(1 << len(c)):
            lits = []
            for k, lit in enumerate(c):
                i, b = abs(lit), int(lit > 0)
                rk = (r >> k) & 1
                lits.append(_pow(xor_x(i), rk ^ 1))
                lits.append(_pow(xor_y(i), rk ^ b))
            out.append(clause(lits))
    return tuple(out)


def gen_random_kcnf(k: int, n: int, m: int, seed: int) -> CNF:
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= n")
    rng = random.Random(seed)
    out = []
    for _ in range(m):
        vs = rng.sample(range(1, n + 1), k)
        out.append(clause(v if rng.getrandbits(1) else -v for v in vs))
    return tuple(out)


@dataclass(frozen=True)
class HypergraphView:
    n_vertices: int
    edges: tuple[frozenset[int], ...] = field(default_factory=tuple)

    @staticmethod
    def of_cnf(F: Iterable[Iterable[int]], n_vertices: int | None = None) -> "HypergraphView":
        cl = cnf_of(F)
        nv = n_vertices if n_vertices is not None else max((abs(l) for c in cl for l in c), default=0)
        return HypergraphView(nv, tuple(frozenset(abs(l) for l in c) for c in cl))


def boundary(H: HypergraphView, subset: Iterable[int]) -> frozenset[int]:
    """Vertices lying in exactly one of the chosen edges (by edge index)."""
    count: dict[int, int] = {}
    for e in subset:
        for v in H.edges[e]:
            count[v] = count.get(v, 0) + 1
    return frozenset(v for v, c in count.items() if c == 1)


def has_sdr_disjoint(family: Sequence[Iterable[Hashable]], forbidden: Iterable[Hashable] = ()) -> bool:
    bad = set(forbidden)
    sets = [set(s) - bad for s in family]
    right = sorted({x for s in sets for x in s}, key=repr)
    left = list(range(len(sets)))
    return saturating_matching(left, right, lambda i, x: x in sets[i]) is not None


def property_P(H: HypergraphView, a: float) -> bool:
    """Every family of ``m <= a * n`` edges has boundary at least ``m / 2``."""
    if len(H.edges) > 20:
        raise ValueError("property_P enumerates subsets of at most 20 edges")
    limit = min(len(H.edges), int(a * H.n_vertices))
    for m in range(1, limit + 1):
        for fam in itertools.combinations(range(len(H.edges)), m):
            if 2 * len(boundary(H, fam)) < m:
                return False
    return True

