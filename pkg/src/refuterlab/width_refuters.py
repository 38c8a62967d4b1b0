"""Width refuters: cri measures, the one-third/two-thirds walk, and the
reductions between width refuters and reversed Iter.

Walk convention shared by the EPHP, monotone-PHP and Tseitin reductions:
``S(i) = 0`` when node ``i`` is locally invalid, has middle cri, or (monotone
variant) is fat; ``S(i) = i`` when its cri is low; otherwise ``S(i)`` is the
predecessor of larger cri (ties to ``p1``), or ``0`` when that predecessor is
an axiom.  Node ``0`` is always a fixed point, so every Iter solution ``x``
has ``S(x)`` a fixed point below it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Iterable

import numpy as np

from . import gf2
from .formulas import EphpFormula, TseitinFormula, cut_size
from .matching import has_perfect_matching, saturating_matching
from .oracle import BlockOracle
from .pls import IterInstance, IterReduction, PreconditionError, REVERSED
from .resolution import (
    BOTTOM,
    CNF,
    Clause,
    Node,
    RefutationInstance,
    RES,
    WK,
    check_node,
    is_axiom_copy,
    cnf_of,
    is_tautology,
    mono,
    php_pair,
    width_derivable,
)


@dataclass(frozen=True)
class CriResult:
    value: int
    critical_set: frozenset[int]

    @staticmethod
    def of(critical: Iterable[int]) -> "CriResult":
        s = frozenset(critical)
        return CriResult(len(s), s)


EMPTY_CRI = CriResult(0, frozenset())


def _ephp_literals(n: int, c: Clause) -> list[tuple[str, int, int, bool]]:
    ef = EphpFormula(n)
    return [(*ef.decode(abs(lit)), lit > 0) for lit in c]


def cri_ephp(n: int, c: Clause, method: str = "dense") -> CriResult:
    """Pigeons ``l`` with an ``l``-critical assignment falsifying ``c``.

    Holes are 0-indexed and ``y_{i,j} = 1`` iff pigeon ``i`` sits in a hole
    below ``j``, so a literal of ``c`` (which must be false) prunes edges:
    ``x_{i,h}`` removes ``(i,h)``; ``¬x_{i,h}`` forces ``(i,h)``; ``y_{i,j}``
    removes holes ``< j`` and ``¬y_{i,j}`` removes holes ``>= j`` from row ``i``.
    Literals on the unmatched pigeon's ``y`` are unconstrained.
    """
    lits = _ephp_literals(n, c)
    if is_tautology(c):
        return EMPTY_CRI
    if method == "dense":
        return _cri_ephp_dense(n, lits)
    if method == "sparse":
        return _cri_ephp_sparse(n, lits)
    raise ValueError(f"unknown method {method!r}")


def _row_rule(allowed: np.ndarray, kind: str, i: int, j: int, pos: bool) -> None:
    if kind == "x":
        if pos:
            allowed[i, j] = False
        else:
            keep = allowed[i, j]
            allowed[i, :] = False
            allowed[:, j] = False
            allowed[i, j] = keep
    elif pos:
        allowed[i, :j] = False
    else:
        allowed[i, j:] = False


def _cri_ephp_dense(n: int, lits: list[tuple[str, int, int, bool]]) -> CriResult:
    critical = []
    for ell in range(n + 1):
        if any(kind == "x" and i == ell and not pos for kind, i, _, pos in lits):
            continue
        allowed = np.ones((n + 1, n), dtype=bool)
        for kind, i, j, pos in lits:
            if i != ell:
                _row_rule(allowed, kind, i, j, pos)
        if has_perfect_matching(np.delete(allowed, ell, axis=0)):
            critical.append(ell)
    return CriResult.of(critical)


def _cri_ephp_sparse(n: int, lits: list[tuple[str, int, int, bool]]) -> CriResult:
    """Only pigeons mentioned by the clause need an explicit matching search."""
    forced: dict[int, int] = {}
    forced_hole: dict[int, int] = {}
    for kind, i, h, pos in lits:
        if kind == "x" and not pos:
            if forced.get(i, h) != h or forced_hole.get(h, i) != i:
                return EMPTY_CRI
            forced[i] = h
            forced_hole[h] = i
    involved = sorted({i for _, i, _, _ in lits})
    breaks = {0, n}
    for kind, _, j, _ in lits:
        breaks.update((j, j + 1) if kind == "x" else (j,))
    cuts = sorted(b for b in breaks if 0 <= b <= n)

    def ok_edge(ell: int, i: int, h: int) -> bool:
        if h in forced_hole and forced_hole[h] != i:
            return False
        if i in forced and forced[i] != h:
            return False
        for kind, k, j, pos in lits:
            if k != i:
                continue
            if kind == "x" and pos and j == h:
                return False
            if kind == "y" and pos and h < j:
                return False
            if kind == "y" and not pos and h >= j:
                return False
        return True

    def critical_for(ell: int) -> bool:
        if ell in forced:
            return False
        left = [i for i in involved if i != ell]
        cand: list[int] = []
        for lo, hi in zip(cuts, cuts[1:]):
            cand.extend(range(lo, min(hi, lo + len(left) + 1)))
        return saturating_matching(left, cand, lambda i, h: ok_edge(ell, i, h)) is not None

    critical = [ell for ell in involved if critical_for(ell)]
    free = [ell for ell in range(n + 1) if ell not in set(involved)]
    if free and critical_for(free[0]):
        critical.extend(free)
    return CriResult.of(critical)


def cri_mono_php(m: int, n: int, c: Clause) -> CriResult:
    """Pigeons ``l`` admitting a matching of the other pigeons that avoids ``mono(c)``."""
    d = mono(c, n, m)
    base = np.ones((m, n), dtype=bool)
    for lit in d:
        i, j = php_pair(lit, n)
        base[i, j] = False
    critical = []
    for ell in range(m):
        rest = np.delete(base, ell, axis=0)
        if rest.shape[0] == rest.shape[1]:
            ok = has_perfect_matching(rest)
        else:
            ok = saturating_matching(range(rest.shape[0]), range(n), lambda i, j: bool(rest[i, j])) is not None
        if ok:
            critical.append(ell)
    return CriResult.of(critical)


def cri_tseitin(tf: TseitinFormula, c: Clause) -> CriResult:
    """Vertices ``v`` with an assignment falsifying ``c`` and only ``v``'s parity."""
    if any(not 1 <= abs(lit) <= tf.nvars for lit in c):
        raise ValueError("clause mentions a non-edge variable")
    if is_tautology(c):
        return EMPTY_CRI
    critical = []
    for v in range(tf.n_vertices):
        for ax in tf.vertex_axioms[v]:
            fixed: dict[int, int] = {}
            ok = True
            for lit in (*c, *ax):
                e, val = abs(lit) - 1, int(lit < 0)
                if fixed.setdefault(e, val) != val:
                    ok = False
                    break
            if not ok:
                continue
            rows = []
            for u in range(tf.n_vertices):
                if u == v:
                    continue
                mask, rhs = 0, tf.tau[u]
                for e in tf.incident[u]:
                    if e in fixed:
                        rhs ^= fixed[e]
                    else:
                        mask |= 1 << e
                rows.append((mask, rhs))
            if gf2.solvable(rows):
                critical.append(v)
                break
    return CriResult.of(critical)


@dataclass(frozen=True)
class RefuterAnswer:
    """``invalid``: a locally invalid node; ``fat``: a node whose monotone
    width reaches the bound; ``cut``: a balanced vertex set with a small cut;
    ``unjustified``: the walk's argument broke down (never accepted)."""

    kind: str
    node: int
    cut: frozenset[int] | None = None


class ThirdsWalk:
    """Reversed Iter over node indices driven by a subadditive cri measure."""

    def __init__(
        self,
        inst: RefutationInstance,
        n: int,
        cri: Callable[[Clause], CriResult],
        family_answer: Callable[[int, Clause, CriResult], RefuterAnswer],
        fat: Callable[[Clause], bool] | None = None,
    ) -> None:
        if inst.length < 1:
            raise PreconditionError("empty purported refutation")
        self.inst = inst
        self.n = n
        self._cri_fn = cri
        self._cache: dict[Clause, CriResult] = {}
        self.family_answer = family_answer
        self.fat = fat or (lambda c: False)

    def cri(self, c: Clause) -> CriResult:
        if c not in self._cache:
            self._cache[c] = self._cri_fn(c)
        return self._cache[c]

    def middle(self, value: int) -> bool:
        return self.n <= 3 * value <= 2 * self.n

    def high(self, value: int) -> bool:
        return 3 * value > 2 * self.n

    def stop(self, c: Clause) -> bool:
        return self.middle(self.cri(c).value) or self.fat(c)

    def chosen_pred(self, node: Node) -> int:
        if node.tag == WK:
            return node.p1
        c1 = self.cri(self.inst.clause_at(node.p1)).value
        c2 = self.cri(self.inst.clause_at(node.p2)).value  # type: ignore[arg-type]
        return node.p1 if c1 >= c2 else node.p2  # type: ignore[return-value]

    def S(self, i: int) -> int:
        if not check_node(self.inst, i):
            return 0
        node = self.inst.nodes[i]
        if self.stop(node.clause):
            return 0
        if not self.high(self.cri(node.clause).value):
            return i
        p = self.chosen_pred(node)
        return p if p >= 0 else 0

    def map_solution(self, x: int) -> RefuterAnswer:
        if not check_node(self.inst, x):
            return RefuterAnswer("invalid", x)
        node = self.inst.nodes[x]
        if self.stop(node.clause):
            return self.family_answer(x, node.clause, self.cri(node.clause))
        if self.high(self.cri(node.clause).value):
            p = self.chosen_pred(node)
            if p >= 0:
                if not check_node(self.inst, p):
                    return RefuterAnswer("invalid", p)
                pc = self.inst.nodes[p].clause
                if self.stop(pc):
                    return self.family_answer(p, pc, self.cri(pc))
        # subadditivity fails at x, so x cannot be a valid step
        return RefuterAnswer("invalid", x)

    def reduction(self, **info: object) -> IterReduction:
        oracle = BlockOracle(self.inst.length, self.S, "S")
        return IterReduction(IterInstance(oracle, REVERSED), self.map_solution, dict(info))


def _invalid_answer(x: int, c: Clause, cri: CriResult) -> RefuterAnswer:
    return RefuterAnswer("invalid", x)


def ephp_width_cap(n: int) -> int:
    """Nodes may hold fewer than ``n/3`` literals."""
    return math.ceil(n / 3)


def ephp_width_refuter_to_iter(inst: RefutationInstance, n: int, *, allow_small: bool = False, method: str = "dense") -> IterReduction:
    if n < 4 and not allow_small:
        raise PreconditionError("the thirds walk needs n >= 4")
    capped = replace(inst, width_cap=ephp_width_cap(n))
    walk = ThirdsWalk(capped, n, lambda c: cri_ephp(n, c, method), _invalid_answer)
    return walk.reduction(family="ephp", n=n)


def mono_threshold(n: int) -> int:
    """Smallest integer at least ``2n^2/9``."""
    return -(-2 * n * n // 9)


def mono_width_refuter_to_iter(inst: RefutationInstance, n: int, *, allow_small: bool = False) -> IterReduction:
    if n < 4 and not allow_small:
        raise PreconditionError("the thirds walk needs n >= 4")
    W = mono_threshold(n)

    def fat(c: Clause) -> bool:
        return len(mono(c, n)) >= W

    def answer(x: int, c: Clause, cri: CriResult) -> RefuterAnswer:
        return RefuterAnswer("fat", x)

    walk = ThirdsWalk(inst, n, lambda c: cri_mono_php(n + 1, n, c), answer, fat)
    return walk.reduction(family="php-mono", n=n, W=W)


def tseitin_width_refuter_to_iter(tf: TseitinFormula, e: int, inst: RefutationInstance) -> IterReduction:
    if not tf.odd():
        raise PreconditionError("the charge must have odd weight")
    capped = replace(inst, width_cap=e)

    def answer(x: int, c: Clause, cri: CriResult) -> RefuterAnswer:
        return RefuterAnswer("cut", x, cri.critical_set)

    walk = ThirdsWalk(capped, tf.n_vertices, lambda c: cri_tseitin(tf, c), answer)
    return walk.reduction(family="tseitin", e=e)


def verify_invalid_answer(inst: RefutationInstance, ans: RefuterAnswer) -> bool:
    return ans.kind == "invalid" and 0 <= ans.node < inst.length and not check_node(inst, ans.node)


def verify_ephp_answer(inst: RefutationInstance, n: int, ans: RefuterAnswer) -> bool:
    return verify_invalid_answer(replace(inst, width_cap=ephp_width_cap(n)), ans)


def verify_mono_answer(inst: RefutationInstance, n: int, ans: RefuterAnswer) -> bool:
    if ans.kind == "fat":
        return 0 <= ans.node < inst.length and 9 * len(mono(inst.nodes[ans.node].clause, n)) >= 2 * n * n
    return verify_invalid_answer(inst, ans)


def verify_tseitin_answer(tf: TseitinFormula, e: int, inst: RefutationInstance, ans: RefuterAnswer) -> bool:
    if ans.kind == "cut":
        if ans.cut is None:
            return False
        k, nv = len(ans.cut), tf.n_vertices
        return nv <= 3 * k <= 2 * nv and cut_size(tf.edges, ans.cut) < e
    return verify_invalid_answer(replace(inst, width_cap=e), ans)


def iter_to_width_refuter(S: IterInstance, F: Iterable[Iterable[int]], *, max_vars: int = 16, check: bool = True) -> tuple[RefutationInstance, Callable[[int], int]]:
    """Self-loops copy the first axiom; solutions weaken it to ``⊥`` (invalid);
    every other node weakens its successor's ``⊥``."""
    if S.orientation != REVERSED:
        raise PreconditionError("reversed Iter required")
    cnf = cnf_of(F)
    m = len(cnf)
    w0 = max(len(c) for c in cnf)
    if check and width_derivable(cnf, BOTTOM, w0 + 1, max_vars):
        raise PreconditionError(f"F has a refutation of width {w0}")

    def node(i: int) -> Node:
        s = S.succ(i)
        if s == i:
            return Node(cnf[0], WK, -m)
        if s > i or S.succ(s) == s:
            return Node(BOTTOM, WK, -m)
        return Node(BOTTOM, WK, s)

    inst = RefutationInstance(cnf, BlockOracle(S.N, node, "nodes"), w0 + 1)
    return inst, lambda i: i


def universal_width_refuter_to_iter(F: Iterable[Iterable[int]], w0: int, inst: RefutationInstance, *, max_vars: int = 16) -> IterReduction:
    """Walk from a non-derivable clause to a non-derivable predecessor, using
    the brute-force width oracle as the non-uniform advice."""
    cnf = cnf_of(F)
    if width_derivable(cnf, BOTTOM, w0, max_vars):
        raise PreconditionError(f"F has a refutation of width below {w0}")
    m, L = len(cnf), inst.length
    if L < 1:
        raise PreconditionError("empty purported refutation")
    capped = RefutationInstance(cnf, inst.nodes, w0)

    def derivable(c: Clause) -> bool:
        return width_derivable(cnf, c, w0, max_vars)

    def fwd(i: int) -> int:
        return L - 1 if i < L - 1 else 0

    def bad(p: object, i: int) -> bool:
        return not isinstance(p, int) or p >= i or p < -m

    def S(i: int) -> int:
        node = capped.nodes[i]
        if node.tag not in (RES, WK) or (len(node.clause) > w0 - 1 and not is_axiom_copy(capped, node)):
            return fwd(i)
        if i == L - 1 and node.clause != BOTTOM:
            return 0
        if derivable(node.clause):
            return i
        if any(bad(p, i) for p in node.preds()):
            return fwd(i)
        if node.tag == WK:
            return fwd(i) if node.p1 < 0 else node.p1
        if node.p1 >= 0 and not derivable(capped.nodes[node.p1].clause):
            return node.p1
        return fwd(i) if node.p2 < 0 else node.p2  # type: ignore[operator]

    def back(x: int) -> RefuterAnswer:
        return RefuterAnswer("invalid", x)

    return IterReduction(IterInstance(BlockOracle(L, S, "S"), REVERSED), back, {"family": "universal", "w0": w0})
