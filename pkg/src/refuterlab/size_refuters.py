"""Size refuters: restriction codecs, the three memberships in rwPHP(P), and
the layered gadget showing rwPHP(PLS)-hardness.

Counting premises are checked in exact integer arithmetic.  Desk-scale runs
usually violate them; ``checked=False`` builds the instance anyway so the
solution maps can still be exercised.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Any, Callable, Iterable, Sequence

import networkx as nx

from .formulas import TseitinFormula, gen_php, xor_x, xor_y
from .oracle import BlockOracle
from .pls import (
    FORWARD,
    ITER,
    InfeasibleParameters,
    InnerProblem,
    IterInstance,
    IterReduction,
    PreconditionError,
    RwPhpInstance,
    from_mixed_radix,
    to_mixed_radix,
    verify_iter,
)
from .resolution import (
    BOTTOM,
    CNF,
    KILLED,
    Clause,
    Node,
    RES,
    RefutationInstance,
    WK,
    check_node,
    clause,
    cnf_of,
    evaluate,
    invalid_nodes,
    num_vars,
    php_pair,
    php_var,
)
from .width_refuters import RefuterAnswer, cri_mono_php, cri_tseitin, mono_threshold


# ---------------------------------------------------------------------------
# PHP: matching restrictions and the SEQ/BAD codecs


@dataclass(frozen=True)
class MatchingRestriction:
    n: int
    pairs: tuple[tuple[int, int], ...]

    @cached_property
    def pigeon_of_hole(self) -> dict[int, int]:
        return {v: u for u, v in self.pairs}

    @cached_property
    def hole_of_pigeon(self) -> dict[int, int]:
        return dict(self.pairs)

    @cached_property
    def pigeons(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.n + 1) if i not in self.hole_of_pigeon)

    @cached_property
    def holes(self) -> tuple[int, ...]:
        return tuple(h for h in range(self.n) if h not in self.pigeon_of_hole)

    @property
    def n_rest(self) -> int:
        return self.n - len(self.pairs)

    def value(self, var: int) -> int | None:
        i, h = php_pair(var, self.n)
        if i in self.hole_of_pigeon:
            return int(self.hole_of_pigeon[i] == h)
        if h in self.pigeon_of_hole:
            return 0
        return None

    def restrict(self, c: Clause) -> Clause | Any:
        """Restricted clause renamed into the smaller pigeonhole formula."""
        pr = {p: k for k, p in enumerate(self.pigeons)}
        hr = {h: k for k, h in enumerate(self.holes)}
        out = []
        for lit in c:
            val = self.value(abs(lit))
            if val is None:
                i, h = php_pair(abs(lit), self.n)
                v = php_var(pr[i], hr[h], self.n_rest)
                out.append(v if lit > 0 else -v)
            elif bool(val) == (lit > 0):
                return KILLED
        return clause(out)


def _mono_edges(c: Clause, n: int, holes: Sequence[int]) -> set[tuple[int, int]]:
    out = set()
    for lit in c:
        i, h = php_pair(abs(lit), n)
        if lit > 0:
            out.add((i, h))
        else:
            out.update((i, hh) for hh in holes if hh != h)
    return out


def _restrict_edge(c: Clause, n: int, u: int, v: int) -> Clause | Any:
    out = []
    for lit in c:
        i, h = php_pair(abs(lit), n)
        if i == u or h == v:
            val = int(i == u and h == v)
            if bool(val) == (lit > 0):
                return KILLED
        else:
            out.append(lit)
    return tuple(out)


@dataclass(frozen=True)
class PhpCodec:
    """Edge sequences (SEQ) and their compressed codes relative to a clause (BAD)."""

    n: int
    t: int
    W_int: int

    def __post_init__(self) -> None:
        if not 0 <= self.t < self.n:
            raise InfeasibleParameters(f"need 0 <= t < n, got t={self.t}, n={self.n}")
        for j, r in enumerate(self.bad_radices):
            if r <= 0:
                raise InfeasibleParameters(
                    f"BAD factor (n+1-j)(n-j) - W_int = {r} <= 0 at j={j} (n={self.n}, W_int={self.W_int})"
                )

    @property
    def seq_radices(self) -> tuple[int, ...]:
        return tuple((self.n + 1 - j) * (self.n - j) for j in range(self.t))

    @property
    def bad_radices(self) -> tuple[int, ...]:
        return tuple(r - self.W_int for r in self.seq_radices)

    @property
    def seq_size(self) -> int:
        return math.prod(self.seq_radices)

    @property
    def bad_size(self) -> int:
        return math.prod(self.bad_radices)

    def decode(self, s: Sequence[int]) -> MatchingRestriction:
        pigeons, holes = list(range(self.n + 1)), list(range(self.n))
        pairs = []
        for j, sj in enumerate(s):
            if not 0 <= sj < self.seq_radices[j]:
                raise ValueError(f"SEQ digit {sj} out of range at round {j}")
            a, b = divmod(sj, self.n - j)
            pairs.append((pigeons.pop(a), holes.pop(b)))
        return MatchingRestriction(self.n, tuple(pairs))

    def seq_of_pairs(self, pairs: Sequence[tuple[int, int]]) -> tuple[int, ...]:
        pigeons, holes = list(range(self.n + 1)), list(range(self.n))
        out = []
        for j, (u, v) in enumerate(pairs):
            a, b = pigeons.index(u), holes.index(v)
            out.append(a * (self.n - j) + b)
            pigeons.pop(a)
            holes.pop(b)
        return tuple(out)

    def seq_index(self, s: Sequence[int]) -> int:
        return to_mixed_radix(s, self.seq_radices)

    def seq_from_index(self, y: int) -> tuple[int, ...]:
        return from_mixed_radix(y, self.seq_radices)

    def bad_index(self, b: Sequence[int]) -> int:
        return to_mixed_radix(b, self.bad_radices)

    def bad_from_index(self, x: int) -> tuple[int, ...]:
        return from_mixed_radix(x, self.bad_radices)

    def _candidates(self, cur: Clause, pigeons: list[int], holes: list[int]) -> list[tuple[int, int]]:
        mono_e = _mono_edges(cur, self.n, holes)
        return [(u, v) for u in pigeons for v in holes if (u, v) not in mono_e]

    def is_fat_after(self, cur: Clause, holes: Sequence[int]) -> bool:
        return len(_mono_edges(cur, self.n, holes)) >= self.W_int

    def seq_to_bad(self, c: Clause, s: Sequence[int]) -> tuple[int, ...] | None:
        """``None`` unless ``s`` keeps ``c`` alive with monotone width at least ``W_int``."""
        pairs = self.decode(s).pairs
        pigeons, holes = list(range(self.n + 1)), list(range(self.n))
        cur: Clause | Any = tuple(c)
        out = []
        for j, (u, v) in enumerate(pairs):
            cand = self._candidates(cur, pigeons, holes)
            if (u, v) not in cand:
                return None
            b = cand.index((u, v))
            if b >= self.bad_radices[j]:
                return None
            out.append(b)
            cur = _restrict_edge(cur, self.n, u, v)
            if cur is KILLED:
                return None
            pigeons.remove(u)
            holes.remove(v)
        return tuple(out) if self.is_fat_after(cur, holes) else None

    def bad_to_seq(self, c: Clause, b: Sequence[int]) -> tuple[int, ...] | None:
        pigeons, holes = list(range(self.n + 1)), list(range(self.n))
        cur: Clause | Any = tuple(c)
        pairs = []
        for j, bj in enumerate(b):
            if not 0 <= bj < self.bad_radices[j]:
                raise ValueError(f"BAD digit {bj} out of range at round {j}")
            cand = self._candidates(cur, pigeons, holes)
            if bj >= len(cand):
                return None
            u, v = cand[bj]
            cur = _restrict_edge(cur, self.n, u, v)
            if cur is KILLED:
                return None
            pairs.append((u, v))
            pigeons.remove(u)
            holes.remove(v)
        if not self.is_fat_after(cur, holes):
            return None
        return self.seq_of_pairs(pairs)


def seq_decode(s: Sequence[int], n: int, t: int) -> MatchingRestriction:
    return PhpCodec(n, t, 0).decode(s)


def bad_to_seq(c: Clause, b: Sequence[int], n: int, t: int, W_int: int) -> tuple[int, ...] | None:
    return PhpCodec(n, t, W_int).bad_to_seq(c, b)


def seq_to_bad(c: Clause, s: Sequence[int], n: int, t: int, W_int: int) -> tuple[int, ...] | None:
    return PhpCodec(n, t, W_int).seq_to_bad(c, s)


def php_default_W_int(n: int, t: int, L: int) -> int:
    """Smallest integer ``k >= (n+1)^2 (1 - (2L)^(-1/t))``, decided exactly."""
    if t < 1:
        raise InfeasibleParameters("t must be at least 1")
    q = (n + 1) ** 2
    for k in range(q + 1):
        if (q - k) ** t * 2 * L <= q**t:
            return k
    return q


def php_default_params(n: int, L: int) -> tuple[int, int]:
    t = max(1, n // 10)
    return t, php_default_W_int(n, t, L)


@dataclass(frozen=True)
class BoundReport:
    holds: bool
    lhs: int
    rhs: int
    inequality: str
    nonpositive_factors: tuple[int, ...] = ()


def php_union_bound(n: int, t: int, W_int: int, L: int) -> BoundReport:
    """``L * |BAD| <= |SEQ| / 2`` as ``2 L prod(r_j - W) <= prod(r_j)``."""
    seq = [(n + 1 - j) * (n - j) for j in range(t)]
    bad = [r - W_int for r in seq]
    lhs = 2 * L * math.prod(bad)
    rhs = math.prod(seq)
    nonpos = tuple(j for j, r in enumerate(bad) if r <= 0)
    return BoundReport(lhs <= rhs, lhs, rhs, f"2*L*|BAD| = {lhs} <= |SEQ| = {rhs}", nonpos)


def xor_bound(n: int, w: int, L: int) -> BoundReport:
    """``L * 3^w * 4^(n-w) < 0.99 * 4^n`` scaled by 100."""
    lhs = 100 * L * 3**w * 4 ** (n - w)
    rhs = 99 * 4**n
    return BoundReport(lhs < rhs, lhs, rhs, f"100*L*3^w*4^(n-w) = {lhs} < 99*4^n = {rhs}")


def tseitin_radices(n_edges: int, t: int, w: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    nd = 2 * n_edges
    return tuple(nd - 2 * j for j in range(t)), tuple(nd - w - j for j in range(t))


def tseitin_union_bound(n_edges: int, t: int, w: int, L: int) -> BoundReport:
    r, b = tseitin_radices(n_edges, t, w)
    lhs = 2 * L * math.prod(b)
    rhs = math.prod(r)
    nonpos = tuple(j for j, x in enumerate(b) if x <= 0)
    return BoundReport(lhs <= rhs, lhs, rhs, f"2*L*|BAD| = {lhs} <= |R| = {rhs}", nonpos)


def _require(report: BoundReport, checked: bool) -> None:
    if checked and (not report.holds or report.nonpositive_factors):
        extra = f"; non-positive factors at rounds {list(report.nonpositive_factors)}" if report.nonpositive_factors else ""
        raise InfeasibleParameters(f"counting premise fails: {report.inequality}{extra}")


# ---------------------------------------------------------------------------
# Walk over a restricted proof, with validity measured in the original proof


class RestrictedWalk:
    """Thirds walk on ``Π|ρ`` whose entries read node ``i`` and its predecessors.

    Invalid nodes map to ``0``; killed nodes are fixed points; fat or middle
    restricted clauses stop the walk.  Valid unkilled steps only reference
    unkilled predecessors (a fixed pivot turns the step into a weakening), so
    subadditivity holds along the walk.
    """

    def __init__(
        self,
        inst: RefutationInstance,
        restrict: Callable[[Clause], Clause | Any],
        pivot_value: Callable[[int], int | None],
        cri: Callable[[Clause], int],
        fat: Callable[[Clause], bool],
        n_inner: int,
    ) -> None:
        self.inst = inst
        self.restrict = restrict
        self.pivot_value = pivot_value
        self._cri = lru_cache(maxsize=None)(cri)
        self.fat = fat
        self.n = n_inner

    def _stop(self, rc: Clause) -> bool:
        v = self._cri(rc)
        return self.fat(rc) or self.n <= 3 * v <= 2 * self.n

    def _high(self, rc: Clause) -> bool:
        return 3 * self._cri(rc) > 2 * self.n

    def effective_preds(self, node: Node) -> tuple[int, ...]:
        if node.tag == WK:
            return (node.p1,)
        val = self.pivot_value(node.pivot)  # type: ignore[arg-type]
        if val == 1:
            return (node.p2,)  # type: ignore[return-value]
        if val == 0:
            return (node.p1,)
        return (node.p1, node.p2)  # type: ignore[return-value]

    def chosen_pred(self, node: Node) -> int | None:
        best, best_v = None, -1
        for p in self.effective_preds(node):
            rc = self.restrict(self.inst.clause_at(p))
            v = -1 if rc is KILLED else self._cri(rc)
            if v > best_v:
                best, best_v = p, v
        return best

    def S(self, i: int) -> int:
        if not check_node(self.inst, i):
            return 0
        node = self.inst.nodes[i]
        rc = self.restrict(node.clause)
        if rc is KILLED:
            return i
        if self._stop(rc):
            return 0
        if not self._high(rc):
            return i
        p = self.chosen_pred(node)
        return p if p is not None and p >= 0 else 0

    def invalid_witness(self, x: int) -> int:
        """First locally invalid node among ``x``, its chosen predecessor and ``0``."""
        if not check_node(self.inst, x):
            return x
        p = self.chosen_pred(self.inst.nodes[x])
        if p is not None and p >= 0 and not check_node(self.inst, p):
            return p
        if not check_node(self.inst, 0):
            return 0
        return x

    def fat_candidate(self, x: int) -> int | None:
        """Node whose restricted clause stops the walk at solution ``x`` (``x`` or ``0``)."""
        for j in (x, 0):
            rc = self.restrict(self.inst.nodes[j].clause)
            if rc is not KILLED and self._stop(rc):
                return j
        return None

    def iter(self) -> IterInstance:
        return IterInstance(BlockOracle(self.inst.length, self.S, "S"))


@dataclass(frozen=True)
class SizeReduction:
    rw: RwPhpInstance
    map_solution: Callable[[tuple[int, Any]], int]
    info: dict


def php_size_refuter_to_rwphp(
    inst: RefutationInstance,
    n: int,
    t: int | None = None,
    W_int: int | None = None,
    *,
    checked: bool = True,
    allow_small: bool = False,
) -> SizeReduction:
    """Refuter for size-``L`` proofs of PHP with ``n+1`` pigeons into rwPHP(PLS)."""
    L = inst.length
    if t is None or W_int is None:
        dt, dw = php_default_params(n, L)
        t = dt if t is None else t
        W_int = dw if W_int is None else W_int
    codec = PhpCodec(n, t, W_int)
    n_rest = n - t
    if n_rest < 4 and not allow_small:
        # hole axioms have monotone cri 2, which is high below 4 holes
        raise PreconditionError(f"n - t = {n_rest} < 4 makes the restricted walk unsound")
    if checked:
        _require(php_union_bound(n, t, W_int, L), True)
        if W_int > mono_threshold(n_rest):
            raise InfeasibleParameters(f"W_int = {W_int} exceeds the inner fat threshold {mono_threshold(n_rest)}")
    B = codec.bad_size
    M, N = L * B, codec.seq_size

    def f(x: int) -> int:
        i, b = divmod(x, B)
        s = codec.bad_to_seq(inst.nodes[i].clause, codec.bad_from_index(b))
        return 0 if s is None else codec.seq_index(s)

    @lru_cache(maxsize=256)
    def walk(y: int) -> RestrictedWalk:
        rho = codec.decode(codec.seq_from_index(y))
        thr = mono_threshold(n_rest)

        def fat(rc: Clause) -> bool:
            from .resolution import mono

            return len(mono(rc, n_rest)) >= thr

        return RestrictedWalk(
            inst,
            rho.restrict,
            lambda v: rho.value(v) if isinstance(v, int) and 1 <= v <= n * (n + 1) else None,
            lambda rc: cri_mono_php(n_rest + 1, n_rest, rc).value,
            fat,
            n_rest,
        )

    def g(y: int, x: int) -> int:
        j = walk(y).fat_candidate(x)
        if j is None:
            return 0
        b = codec.seq_to_bad(inst.nodes[j].clause, codec.seq_from_index(y))
        return 0 if b is None else j * B + codec.bad_index(b)

    rw = RwPhpInstance(M, N, BlockOracle(M, f, "f"), lambda y: walk(y).iter(), g, ITER, checked=checked)

    def back(sol: tuple[int, Any]) -> int:
        y, x = sol
        return walk(y).invalid_witness(x)

    return SizeReduction(rw, back, {"t": t, "W_int": W_int, "BAD": B, "SEQ": N})


# ---------------------------------------------------------------------------
# XOR lifting


@dataclass(frozen=True)
class XorCodec:
    """Per index ``i`` a choice ``c = 2*sel + v``: ``sel = 1`` fixes ``x_i := v``,
    ``sel = 0`` fixes ``y_i := v``; the other variable stays free."""

    n: int
    w: int

    @property
    def standard_size(self) -> int:
        return 4**self.n

    @property
    def short_size(self) -> int:
        return 3**self.w * 4 ** (self.n - self.w)

    def choices(self, y: int) -> tuple[int, ...]:
        return from_mixed_radix(y, [4] * self.n)

    def standard(self, choices: Sequence[int]) -> int:
        return to_mixed_radix(choices, [4] * self.n)

    @staticmethod
    def fixed_literal_true(i: int, c: int) -> int:
        """The literal made true by choice ``c`` at index ``i``."""
        sel, v = divmod(c, 2)
        var = xor_x(i) if sel else xor_y(i)
        return var if v else -var

    def options(self, lifted: Clause, i: int) -> list[int]:
        s = set(lifted)
        return [c for c in range(4) if self.fixed_literal_true(i, c) not in s]

    def radices(self, lifted: Clause) -> list[int]:
        idx = {(abs(l) + 1) // 2 for l in lifted}
        return [len(self.options(lifted, i)) if i in idx else 4 for i in range(1, self.n + 1)]

    def compressible(self, lifted: Clause) -> bool:
        return math.prod(self.radices(lifted)) <= self.short_size

    def short(self, lifted: Clause, choices: Sequence[int]) -> int | None:
        digits, radices = [], []
        idx = {(abs(l) + 1) // 2 for l in lifted}
        for i in range(1, self.n + 1):
            c = choices[i - 1]
            if i in idx:
                opts = self.options(lifted, i)
                if c not in opts:
                    return None
                digits.append(opts.index(c))
                radices.append(len(opts))
            else:
                digits.append(c)
                radices.append(4)
        return to_mixed_radix(digits, radices)

    def unshort(self, lifted: Clause, code: int) -> tuple[int, ...] | None:
        radices = self.radices(lifted)
        if not 0 <= code < math.prod(radices):
            return None
        digits = from_mixed_radix(code, radices)
        idx = {(abs(l) + 1) // 2 for l in lifted}
        return tuple(
            self.options(lifted, i)[d] if i in idx else d for i, d in zip(range(1, self.n + 1), digits)
        )

    def restrict(self, lifted: Clause, choices: Sequence[int]) -> Clause | Any:
        """Restricted lifted clause expressed over the base variables ``z_i``."""
        out = []
        for lit in lifted:
            var = abs(lit)
            i = (var + 1) // 2
            sel, v = divmod(choices[i - 1], 2)
            fixed = xor_x(i) if sel else xor_y(i)
            if var == fixed:
                if bool(v) == (lit > 0):
                    return KILLED
                continue
            z = i if v == 0 else -i
            out.append(z if lit > 0 else -z)
        return clause(out)

    def pivot_value(self, var: int, choices: Sequence[int]) -> int | None:
        i = (var + 1) // 2
        if not 1 <= i <= self.n:
            return None
        sel, v = divmod(choices[i - 1], 2)
        return v if var == (xor_x(i) if sel else xor_y(i)) else None


def _lift_blocks(base: CNF) -> list[int]:
    out = []
    for k, c in enumerate(base):
        out += [k] * (1 << len(c))
    return out


WIDTH_REFUTER = InnerProblem(
    "width-refuter",
    lambda inst, j: isinstance(j, int) and 0 <= j < inst.length and not check_node(inst, j),
    invalid_nodes,
)


def xorlift_size_refuter_to_rwphp(
    inst: RefutationInstance,
    base_cnf: Iterable[Iterable[int]],
    w: int,
    base: Callable[[RefutationInstance], IterReduction] | None = None,
    *,
    checked: bool = True,
) -> SizeReduction:
    """``inst`` is a purported refutation of the lifted CNF; its axioms must be
    ``xor_lift(base_cnf)`` in generation order."""
    F = cnf_of(base_cnf)
    n = num_vars(F)
    m_base = len(F)
    if not 1 <= w <= n:
        raise PreconditionError(f"need 1 <= w <= n, got w={w}, n={n}")
    codec = XorCodec(n, w)
    L = inst.length
    if checked:
        _require(xor_bound(n, w, L), True)
    blocks = _lift_blocks(F)
    m_lift = len(blocks)
    if inst.m != m_lift:
        raise PreconditionError("axioms are not the lift of the base CNF")
    B = codec.short_size
    M, N = L * B, codec.standard_size

    def f(x: int) -> int:
        i, s = divmod(x, B)
        ch = codec.unshort(inst.nodes[i].clause, s)
        return 0 if ch is None else codec.standard(ch)

    def amap(p: Any) -> Any:
        if isinstance(p, int) and -m_lift <= p < 0:
            return blocks[m_lift + p] - m_base
        return p

    def fat(c: Clause, ch: Sequence[int]) -> bool:
        rc = codec.restrict(c, ch)
        return rc is not KILLED and len(rc) >= w

    def restricted(y: int) -> RefutationInstance:
        ch = codec.choices(y)

        def cut(c: Clause) -> Clause:
            return c[: w - 1] if len(c) >= w else c

        def node(j: int) -> Node:
            nd = inst.nodes[j]
            rc = codec.restrict(nd.clause, ch)
            if rc is KILLED:
                # copy of the nearest surviving earlier clause is locally valid
                for k in range(j - 1, -1, -1):
                    rk = codec.restrict(inst.nodes[k].clause, ch)
                    if rk is not KILLED:
                        return Node(cut(rk), WK, k)
                return Node(F[0], WK, -m_base)
            rc = cut(rc)
            if nd.tag == RES and isinstance(nd.pivot, int):
                val = codec.pivot_value(nd.pivot, ch)
                if val == 1:
                    return Node(rc, WK, amap(nd.p2))
                if val == 0:
                    return Node(rc, WK, amap(nd.p1))
                i = (nd.pivot + 1) // 2
                if 1 <= i <= n:
                    z = codec.restrict((nd.pivot,), ch)
                    if z == (i,):
                        return Node(rc, RES, amap(nd.p1), amap(nd.p2), i)
                    return Node(rc, RES, amap(nd.p2), amap(nd.p1), i)
            if nd.tag == WK:
                return Node(rc, WK, amap(nd.p1))
            return Node(rc, nd.tag, amap(nd.p1), amap(nd.p2), nd.pivot)

        return RefutationInstance(F, BlockOracle(L, node, "nodes"), w)

    restricted_c = lru_cache(maxsize=256)(restricted)
    base_c = lru_cache(maxsize=256)(lambda y: base(restricted_c(y))) if base is not None else None

    def label(y: int, j: int) -> int:
        ch = codec.choices(y)
        if not isinstance(j, int) or not 0 <= j < L:
            return 0
        nd = inst.nodes[j]
        cands = [j] + [p for p in (nd.preds() if nd.tag in (RES, WK) else ()) if isinstance(p, int) and 0 <= p < j]
        for k in cands:
            c = inst.nodes[k].clause
            if fat(c, ch):
                s = codec.short(c, ch)
                return 0 if s is None or s >= B else k * B + s
        return 0

    if base_c is None:
        rw = RwPhpInstance(M, N, BlockOracle(M, f, "f"), restricted_c, label, WIDTH_REFUTER, general=True, checked=checked)

        def back(sol: tuple[int, Any]) -> int:
            return sol[1]

    else:

        def g(y: int, x: int) -> int:
            return label(y, base_c(y).map_solution(x).node)

        rw = RwPhpInstance(M, N, BlockOracle(M, f, "f"), lambda y: base_c(y).iter, g, ITER, general=True, checked=checked)

        def back(sol: tuple[int, Any]) -> int:
            y, x = sol
            return base_c(y).map_solution(x).node

    return SizeReduction(rw, back, {"n": n, "w": w, "short": B, "standard": N})


# ---------------------------------------------------------------------------
# Tseitin


@dataclass(frozen=True)
class TseitinCodec:
    """Literal ``k`` of ``2|E|`` is edge ``k // 2``; even ``k`` sets it to 1, odd to 0."""

    tf: TseitinFormula
    t: int
    w: int

    def __post_init__(self) -> None:
        r, b = tseitin_radices(len(self.tf.edges), self.t, self.w)
        if any(x <= 0 for x in b):
            raise InfeasibleParameters(f"BAD radices {b} must be positive")

    @property
    def seq_radices(self) -> tuple[int, ...]:
        return tseitin_radices(len(self.tf.edges), self.t, self.w)[0]

    @property
    def bad_radices(self) -> tuple[int, ...]:
        return tseitin_radices(len(self.tf.edges), self.t, self.w)[1]

    @staticmethod
    def literal(k: int) -> int:
        e, neg = divmod(k, 2)
        return -(e + 1) if neg else e + 1

    def decode(self, s: Sequence[int]) -> dict[int, int]:
        avail = list(range(2 * len(self.tf.edges)))
        rho: dict[int, int] = {}
        for j, sj in enumerate(s):
            if not 0 <= sj < len(avail):
                raise ValueError(f"R digit {sj} out of range at round {j}")
            k = avail[sj]
            e = k // 2
            rho[e] = 1 - (k % 2)
            avail = [a for a in avail if a // 2 != e]
        return rho

    def _encode_rounds(self, c: Clause, s: Sequence[int]) -> tuple[int, ...] | None:
        lits = set(c)
        if len(lits) < self.w:
            return None
        avail = list(range(2 * len(self.tf.edges)))
        out = []
        for j, sj in enumerate(s):
            k = avail[sj]
            lit = self.literal(k)
            if lit in lits:
                return None
            cand = [a for a in avail if self.literal(a) not in lits]
            b = cand.index(k)
            if b >= self.bad_radices[j]:
                return None
            out.append(b)
            e = k // 2
            avail = [a for a in avail if a // 2 != e]
            lits.discard(-lit)
        return tuple(out)

    def seq_to_bad(self, c: Clause, s: Sequence[int]) -> tuple[int, ...] | None:
        """Defined when ``|c| >= w`` and ``s`` does not kill ``c``."""
        return self._encode_rounds(c, s)

    def bad_to_seq(self, c: Clause, b: Sequence[int]) -> tuple[int, ...] | None:
        lits = set(c)
        if len(lits) < self.w:
            return None
        avail = list(range(2 * len(self.tf.edges)))
        out = []
        for j, bj in enumerate(b):
            if not 0 <= bj < self.bad_radices[j]:
                raise ValueError(f"BAD digit {bj} out of range at round {j}")
            cand = [a for a in avail if self.literal(a) not in lits]
            if bj >= len(cand):
                return None
            k = cand[bj]
            out.append(avail.index(k))
            e = k // 2
            avail = [a for a in avail if a // 2 != e]
            lits.discard(-self.literal(k))
        return tuple(out)

    def seq_index(self, s: Sequence[int]) -> int:
        return to_mixed_radix(s, self.seq_radices)

    def seq_from_index(self, y: int) -> tuple[int, ...]:
        return from_mixed_radix(y, self.seq_radices)

    def bad_index(self, b: Sequence[int]) -> int:
        return to_mixed_radix(b, self.bad_radices)

    def bad_from_index(self, x: int) -> tuple[int, ...]:
        return from_mixed_radix(x, self.bad_radices)


@dataclass(frozen=True)
class TseitinRestriction:
    tf: TseitinFormula
    rho: tuple[tuple[int, int], ...]

    @cached_property
    def assigned(self) -> dict[int, int]:
        return dict(self.rho)

    @cached_property
    def remaining(self) -> tuple[int, ...]:
        return tuple(e for e in range(len(self.tf.edges)) if e not in self.assigned)

    @cached_property
    def formula(self) -> TseitinFormula:
        tau = list(self.tf.tau)
        for e, val in self.assigned.items():
            if val:
                u, v = self.tf.edges[e]
                tau[u] ^= 1
                tau[v] ^= 1
        edges = tuple(self.tf.edges[e] for e in self.remaining)
        return TseitinFormula(self.tf.n_vertices, edges, tuple(tau), self.tf.max_degree)

    def restrict(self, c: Clause) -> Clause | Any:
        rank = {e: k for k, e in enumerate(self.remaining)}
        out = []
        for lit in c:
            e = abs(lit) - 1
            if e in self.assigned:
                if bool(self.assigned[e]) == (lit > 0):
                    return KILLED
            else:
                out.append(rank[e] + 1 if lit > 0 else -(rank[e] + 1))
        return clause(out)

    def value(self, var: Any) -> int | None:
        if not isinstance(var, int):
            return None
        return self.assigned.get(var - 1)


def edge_connectivity(tf: TseitinFormula) -> int:
    g = nx.Graph()
    g.add_nodes_from(range(tf.n_vertices))
    g.add_edges_from(tf.edges)
    return nx.edge_connectivity(g)


def tseitin_size_refuter_to_rwphp(
    tf: TseitinFormula,
    inst: RefutationInstance,
    t: int,
    e_G: int,
    *,
    checked: bool = True,
) -> SizeReduction:
    """Restrict ``t`` literals, then run the Tseitin thirds walk with width bound
    ``w = e(G) - t`` on the restricted graph."""
    if not tf.odd():
        raise PreconditionError("the charge must have odd weight")
    if edge_connectivity(tf) <= t:
        raise PreconditionError("restricting t edges could disconnect the graph")
    w = e_G - t
    if w < 1:
        raise InfeasibleParameters(f"w = e(G) - t = {w} must be positive")
    codec = TseitinCodec(tf, t, w)
    L = inst.length
    if checked:
        _require(tseitin_union_bound(len(tf.edges), t, w, L), True)
    B = math.prod(codec.bad_radices)
    M, N = L * B, math.prod(codec.seq_radices)

    def f(x: int) -> int:
        i, b = divmod(x, B)
        s = codec.bad_to_seq(inst.nodes[i].clause, codec.bad_from_index(b))
        return 0 if s is None else codec.seq_index(s)

    @lru_cache(maxsize=256)
    def walk(y: int) -> RestrictedWalk:
        rest = TseitinRestriction(tf, tuple(sorted(codec.decode(codec.seq_from_index(y)).items())))
        tf2 = rest.formula
        return RestrictedWalk(
            inst,
            rest.restrict,
            rest.value,
            lambda rc: cri_tseitin(tf2, rc).value,
            lambda rc: len(rc) >= w,
            tf.n_vertices,
        )

    def g(y: int, x: int) -> int:
        j = walk(y).fat_candidate(x)
        if j is None:
            return 0
        b = codec.seq_to_bad(inst.nodes[j].clause, codec.seq_from_index(y))
        return 0 if b is None else j * B + codec.bad_index(b)

    rw = RwPhpInstance(M, N, BlockOracle(M, f, "f"), lambda y: walk(y).iter(), g, ITER, checked=checked)

    def back(sol: tuple[int, Any]) -> int:
        y, x = sol
        return walk(y).invalid_witness(x)

    return SizeReduction(rw, back, {"t": t, "w": w, "BAD": B, "R": N})


# ---------------------------------------------------------------------------
# rwPHP(PLS) hardness gadget

C_IMPL = 4


@dataclass(frozen=True)
class GadgetLayout:
    """Index arithmetic of the layered proof.

    Layer ``t`` holds ``k_t`` E-nodes and, when it is a two-row layer
    (``2 k_{t-1} > M``), ``2M`` chains of ``L_it`` D-nodes.  Layers are
    written from ``n`` down to ``0`` after the padding.
    """

    n: int
    M: int
    L_it: int
    size: int

    @cached_property
    def k(self) -> tuple[int, ...]:
        ks = [1]
        for _ in range(self.n):
            ks.append(2 * ks[-1] if 2 * ks[-1] <= self.M else self.M)
        return tuple(ks)

    def two_row(self, t: int) -> bool:
        return t >= 1 and 2 * self.k[t - 1] > self.M

    def layer_size(self, t: int) -> int:
        return self.k[t] + (2 * self.M * self.L_it if self.two_row(t) else 0)

    @cached_property
    def core(self) -> int:
        return sum(self.layer_size(t) for t in range(self.n + 1))

    @cached_property
    def start(self) -> dict[int, int]:
        pos = self.size - self.core
        out = {}
        for t in range(self.n, -1, -1):
            out[t] = pos
            pos += self.layer_size(t)
        return out

    def e_index(self, t: int, i: int) -> int:
        return self.start[t] + i

    def d_index(self, t: int, y: int, a: int) -> int:
        return self.start[t] + self.k[t] + (self.L_it - 1 - a) * 2 * self.M + y

    def locate(self, idx: int) -> tuple:
        if idx < self.size - self.core:
            return ("pad",)
        for t in range(self.n, -1, -1):
            off = idx - self.start[t]
            if 0 <= off < self.layer_size(t):
                if off < self.k[t]:
                    return ("E", t, off)
                q, y = divmod(off - self.k[t], 2 * self.M)
                return ("D", t, y, self.L_it - 1 - q)
        raise IndexError(idx)


def _first_falsified(F: CNF, full: Clause) -> int:
    s = set(full)
    for j, c in enumerate(F):
        if set(c) <= s:
            return j - len(F)
    raise PreconditionError("F is satisfiable")


@dataclass(frozen=True)
class Gadget:
    rw: RwPhpInstance
    F: CNF
    layout: GadgetLayout

    @property
    def m(self) -> int:
        return len(self.F)

    def e_clause(self, t: int, i: int) -> Clause:
        if t == 0:
            return BOTTOM
        if self.layout.two_row(t):
            return self.head_clause(t, self.rw.f[i])
        return clause((*self.e_clause(t - 1, i // 2), t if i % 2 == 0 else -t))

    def head_clause(self, t: int, y: int) -> Clause:
        k = self.layout.k[t - 1]
        y = min(y, 2 * k - 1)
        return clause((*self.e_clause(t - 1, y // 2), t if y % 2 == 0 else -t))

    def pad(self) -> Node:
        return Node(self.F[0], WK, -self.m)

    def node(self, idx: int) -> Node:
        loc = self.layout.locate(idx)
        if loc[0] == "pad":
            return self.pad()
        lay = self.layout
        if loc[0] == "E":
            _, t, i = loc
            c = self.e_clause(t, i)
            if t == lay.n:
                return Node(c, WK, _first_falsified(self.F, c))
            if lay.two_row(t + 1):
                return Node(c, RES, lay.d_index(t + 1, 2 * i, 0), lay.d_index(t + 1, 2 * i + 1, 0), t + 1)
            return Node(c, RES, lay.e_index(t + 1, 2 * i), lay.e_index(t + 1, 2 * i + 1), t + 1)
        _, t, y, a = loc
        S = self.rw.inner(y)
        if verify_iter(S, a):
            return Node(self.head_clause(t, y), WK, lay.e_index(t, self.rw.label(y, a)))
        s = S.succ(a)
        if a != 0 and s == a:
            return self.pad()
        return Node(self.head_clause(t, y), WK, lay.d_index(t, y, s))

    def instance(self) -> RefutationInstance:
        return RefutationInstance(self.F, BlockOracle(self.layout.size, self.node, "gadget"))

    def map_solution(self, idx: int) -> tuple[int, int]:
        loc = self.layout.locate(idx)
        if loc[0] != "D":
            raise ValueError(f"node {idx} is not a chain node; the gadget is valid elsewhere")
        _, t, y, a = loc
        return (y, a)


def gadget_min_size(n: int, L_it: int, M: int, m: int) -> int:
    return C_IMPL * (n * L_it * M + m)


def rwphp_to_size_refuter(rw: RwPhpInstance, F: Iterable[Iterable[int]], s_F: int | None = None) -> tuple[RefutationInstance, Callable[[int], tuple[int, int]], Gadget]:
    """Layered proof of ``F`` whose invalid nodes are rwPHP solutions.

    ``rw`` must have ``N = 2M`` and forward Iter inner instances of one length.
    """
    cnf = cnf_of(F)
    n = num_vars(cnf)
    if rw.N != 2 * rw.M:
        raise PreconditionError("the gadget needs N = 2M")
    lengths = {rw.inner(y).N for y in range(rw.N)}
    if len(lengths) != 1:
        raise PreconditionError("inner Iter instances must share one length")
    L_it = lengths.pop()
    if any(rw.inner(y).orientation != FORWARD for y in range(rw.N)):
        raise PreconditionError("inner instances must be forward Iter")
    need = gadget_min_size(n, L_it, rw.M, len(cnf))
    s_F = need if s_F is None else s_F
    if s_F < need:
        raise PreconditionError(f"s_F = {s_F} below {C_IMPL}*(n*L*M + |F|) = {need}")
    layout = GadgetLayout(n, rw.M, L_it, s_F)
    if layout.core > s_F:
        raise PreconditionError("layout exceeds s_F")
    gad = Gadget(rw, cnf, layout)
    return gad.instance(), gad.map_solution, gad


def materialize_gadget(gad: Gadget) -> list[Node]:
    """Builds the same proof layer by layer, independently of the index arithmetic."""
    lay, rw, F = gad.layout, gad.rw, gad.F
    m = len(F)
    pad = Node(F[0], WK, -m)
    E: dict[int, list[Clause]] = {0: [BOTTOM]}
    heads: dict[int, list[Clause]] = {}
    for t in range(1, lay.n + 1):
        prev = E[t - 1]
        h = [clause((*prev[y // 2], t if y % 2 == 0 else -t)) for y in range(2 * len(prev))]
        if 2 * len(prev) <= rw.M:
            E[t] = h
        else:
            h = h + [h[-1]] * (2 * rw.M - len(h))
            heads[t] = h
            E[t] = [h[rw.f[i]] for i in range(rw.M)]
    out: list[Node] = [pad] * (lay.size - lay.core)
    pos: dict[tuple, int] = {}
    for t in range(lay.n, -1, -1):
        for i, c in enumerate(E[t]):
            pos[("E", t, i)] = len(out)
            if t == lay.n:
                out.append(Node(c, WK, _first_falsified(F, c)))
            elif t + 1 in heads:
                out.append(Node(c, RES, pos[("D", t + 1, 2 * i, 0)], pos[("D", t + 1, 2 * i + 1, 0)], t + 1))
            else:
                out.append(Node(c, RES, pos[("E", t + 1, 2 * i)], pos[("E", t + 1, 2 * i + 1)], t + 1))
        if t in heads:
            for a in range(lay.L_it - 1, -1, -1):
                for y in range(2 * rw.M):
                    S = rw.inner(y)
                    pos[("D", t, y, a)] = len(out)
                    if verify_iter(S, a):
                        out.append(Node(heads[t][y], WK, pos[("E", t, rw.label(y, a))]))
                    elif a != 0 and S.succ(a) == a:
                        out.append(pad)
                    else:
                        out.append(Node(heads[t][y], WK, pos[("D", t, y, S.succ(a))]))
    return out
