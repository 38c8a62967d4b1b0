"""Prover-Delayer games, their compilation to resolution, and refuter problems
over decision-tree reductions.

Inputs of a search problem are bits numbered ``1..n`` (the variables of the
CNF for ``Search(F)``).  Decision trees are explicit :class:`DTree` values;
arbitrary query procedures ``proc(rd)`` are turned into trees, or into their
accepting paths, by replaying them on every branch.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Callable, Iterator, Mapping, Sequence

from .oracle import BlockOracle, Reduction
from .pls import FORWARD, IterInstance, IterReduction, PreconditionError, verify_iter
from .resolution import (
    BOTTOM,
    CNF,
    RES,
    WK,
    Clause,
    Node,
    RefutationInstance,
    clause,
    cnf_of,
    num_vars,
    width_derivable,
)

Rd = Callable[[int], int]
Rho = tuple[tuple[int, int], ...]


class ProverFailure(RuntimeError):
    """The strategy got stuck, cycled or exceeded its step budget."""


class _Unknown(Exception):
    def __init__(self, var: int) -> None:
        self.var = var


class Trapped(Exception):
    """A query outside the declared partial assignment."""


def rho_of(assignment: Mapping[int, int] | Sequence[tuple[int, int]]) -> Rho:
    items = assignment.items() if isinstance(assignment, Mapping) else assignment
    return tuple(sorted((int(v), int(b)) for v, b in items))


def clause_of_rho(rho: Mapping[int, int] | Sequence[tuple[int, int]]) -> Clause:
    """The unique clause falsified by exactly the assignment ``rho``."""
    return clause(-v if b else v for v, b in rho_of(rho))


# ---------------------------------------------------------------------------
# decision trees


@dataclass(frozen=True)
class DTree:
    var: int | None = None
    lo: "DTree | None" = None
    hi: "DTree | None" = None
    leaf: Any = None

    @staticmethod
    def const(value: Any) -> "DTree":
        return DTree(leaf=value)

    @staticmethod
    def query(var: int, lo: "DTree", hi: "DTree") -> "DTree":
        return DTree(var, lo, hi)

    @property
    def is_leaf(self) -> bool:
        return self.var is None

    def run(self, rd: Rd) -> Any:
        t = self
        while t.var is not None:
            t = t.hi if rd(t.var) else t.lo  # type: ignore[assignment]
        return t.leaf

    def trace(self, rho: Mapping[int, int]) -> tuple[list[int], Any, int | None]:
        """Variables visited under ``rho``, the leaf if reached, else the first unknown variable."""
        path, t = [], self
        while t.var is not None:
            if t.var not in rho:
                return path, None, t.var
            path.append(t.var)
            t = t.hi if rho[t.var] else t.lo  # type: ignore[assignment]
        return path, t.leaf, None

    @property
    def depth(self) -> int:
        if self.var is None:
            return 0
        return 1 + max(self.lo.depth, self.hi.depth)  # type: ignore[union-attr]

    def leaves(self) -> Iterator[Any]:
        if self.var is None:
            yield self.leaf
        else:
            yield from self.lo.leaves()  # type: ignore[union-attr]
            yield from self.hi.leaves()  # type: ignore[union-attr]

    def to_json(self) -> dict:
        if self.var is None:
            return {"leaf": self.leaf}
        return {"var": self.var, "lo": self.lo.to_json(), "hi": self.hi.to_json()}  # type: ignore[union-attr]

    @staticmethod
    def from_json(obj: Mapping) -> "DTree":
        if "leaf" in obj:
            return DTree(leaf=obj["leaf"])
        return DTree(int(obj["var"]), DTree.from_json(obj["lo"]), DTree.from_json(obj["hi"]))

    @staticmethod
    def from_procedure(proc: Callable[[Rd], Any], max_depth: int = 64) -> "DTree":
        def build(prefix: dict[int, int]) -> DTree:
            if len(prefix) > max_depth:
                raise ProverFailure(f"procedure exceeded {max_depth} queries")

            def rd(v: int) -> int:
                if v in prefix:
                    return prefix[v]
                raise _Unknown(v)

            try:
                return DTree(leaf=proc(rd))
            except _Unknown as e:
                return DTree(e.var, build({**prefix, e.var: 0}), build({**prefix, e.var: 1}))

        return build({})


def paths_of(proc: Callable[[Rd], Any]) -> Iterator[tuple[Rho, Any]]:
    """Every root-to-leaf path of the query procedure, as (bits read, result)."""
    stack: list[Rho] = [()]
    while stack:
        prefix = stack.pop()
        known = dict(prefix)

        def rd(v: int) -> int:
            if v in known:
                return known[v]
            raise _Unknown(v)

        try:
            res = proc(rd)
        except _Unknown as e:
            stack.append(prefix + ((e.var, 1),))
            stack.append(prefix + ((e.var, 0),))
            continue
        yield prefix, res


def solver_tree(F: Sequence[Sequence[int]], order: Sequence[int] | None = None) -> DTree:
    """Queries ``order`` until some clause of ``F`` is falsified; leaves are clause indices."""
    cnf = cnf_of(F)
    order = list(order) if order is not None else sorted({abs(l) for c in cnf for l in c})

    def build(rho: dict[int, int], k: int) -> DTree:
        for j, c in enumerate(cnf):
            if all(abs(l) in rho and bool(rho[abs(l)]) != (l > 0) for l in c):
                return DTree(leaf=j)
        if k == len(order):
            raise PreconditionError("F is satisfiable; no solver tree exists")
        v = order[k]
        return DTree(v, build({**rho, v: 0}, k + 1), build({**rho, v: 1}, k + 1))

    return build({}, 0)


# ---------------------------------------------------------------------------
# search problems given by verifier trees


@dataclass(frozen=True)
class DtSearchProblem:
    """``check(o, rd)`` decides ``(x, o) in P`` by querying bits of ``x``."""

    name: str
    n: int
    outputs: tuple
    check: Callable[[Any, Rd], bool]


def search_problem(F: Sequence[Sequence[int]], n: int | None = None) -> DtSearchProblem:
    cnf = cnf_of(F)

    def check(o: Any, rd: Rd) -> bool:
        if not isinstance(o, int) or not 0 <= o < len(cnf):
            return False
        return all(bool(rd(abs(l))) != (l > 0) for l in cnf[o])

    return DtSearchProblem("search", n if n is not None else num_vars(cnf), tuple(range(len(cnf))), check)


def search_cnf(problem: DtSearchProblem) -> CNF:
    """One clause per accepting path of each verifier, excluding that path."""
    out: list[Clause] = []
    for o in problem.outputs:
        for path, ok in paths_of(lambda rd, o=o: problem.check(o, rd)):
            if ok:
                out.append(clause_of_rho(path))
    return tuple(out)


@dataclass(frozen=True)
class TargetProblem:
    """A block-valued problem: instances are ``size`` blocks, ``verify(blocks, o)``."""

    name: str
    size: int
    outputs: tuple
    verify: Callable[[BlockOracle, Any], bool]


def iter_target(M: int) -> TargetProblem:
    return TargetProblem("iter", M, tuple(range(M)), lambda blocks, o: verify_iter(IterInstance(blocks, FORWARD), o))


# ---------------------------------------------------------------------------
# refuter instances


@dataclass(frozen=True)
class RftInstance:
    """Purported reduction from ``P`` to ``Q``: ``f[i]`` computes block ``i`` of
    the ``Q`` instance and ``g[o]`` maps a ``Q`` solution to a ``P`` solution."""

    P: DtSearchProblem
    Q: TargetProblem
    f: tuple[DTree, ...]
    g: tuple[DTree, ...]

    def __post_init__(self) -> None:
        if len(self.f) != self.Q.size or len(self.g) != len(self.Q.outputs):
            raise PreconditionError("tree tables do not match the problem sizes")

    @property
    def d(self) -> int:
        return max((t.depth for t in self.f + self.g), default=0)

    def q_instance(self, rd: Rd) -> BlockOracle:
        return BlockOracle(self.Q.size, lambda i: self.f[i].run(rd), "f(x)")

    def to_json(self) -> dict:
        return {"P": self.P.name, "Q": self.Q.name, "f": [t.to_json() for t in self.f], "g": [t.to_json() for t in self.g]}


def pls_formulation(F: Sequence[Sequence[int]], f: Sequence[DTree], g: Sequence[DTree]) -> RftInstance:
    """A purported reduction from ``Search(F)`` to forward Iter on ``len(f)`` nodes."""
    M = len(f)
    cnf = cnf_of(F)
    for t in f:
        if any(not isinstance(v, int) or not 0 <= v < M for v in t.leaves()):
            raise PreconditionError("f leaves must lie in [0, M)")
    for t in g:
        if any(not isinstance(v, int) or not 0 <= v < len(cnf) for v in t.leaves()):
            raise PreconditionError("g leaves must be clause indices")
    return RftInstance(search_problem(cnf), iter_target(M), tuple(f), tuple(g))


def verify_rft(inst: RftInstance, sol: tuple[Any, Any]) -> bool:
    rho_in, o = sol
    try:
        rho = dict(rho_of(rho_in))
    except (TypeError, ValueError):
        return False
    if o not in inst.Q.outputs or any(not 1 <= v <= inst.P.n or b not in (0, 1) for v, b in rho.items()):
        return False

    def rd(v: int) -> int:
        if v not in rho:
            raise Trapped(v)
        return rho[v]

    try:
        if not inst.Q.verify(inst.q_instance(rd), o):
            return False
        p_out = inst.g[inst.Q.outputs.index(o)].run(rd)
        return not inst.P.check(p_out, rd)
    except (Trapped, ValueError):
        return False


def _recording(x: Callable[[int], int]) -> tuple[Rd, dict[int, int]]:
    seen: dict[int, int] = {}

    def rd(v: int) -> int:
        if v not in seen:
            seen[v] = x(v)
        return seen[v]

    return rd, seen


def rft_solutions(inst: RftInstance) -> list[tuple[Rho, Any]]:
    """Exhaustive: for every input and output, the bits the check reads."""
    out: set[tuple[Rho, Any]] = set()
    for bits in itertools.product((0, 1), repeat=inst.P.n):
        for o in inst.Q.outputs:
            rd, seen = _recording(lambda v: bits[v - 1])
            try:
                ok = inst.Q.verify(inst.q_instance(rd), o)
                ok = ok and not inst.P.check(inst.g[inst.Q.outputs.index(o)].run(rd), rd)
            except ValueError:
                ok = False
            if ok:
                out.add((rho_of(seen), o))
    return sorted(out, key=repr)


def embed_q_in_rft(q_blocks: Sequence[Any], Q: TargetProblem, P: DtSearchProblem) -> tuple[RftInstance, Callable[[tuple[Any, Any]], Any]]:
    """Depth-0 reduction: constant trees for the instance, a fixed ``P`` output for every solution."""
    o_p = P.outputs[0]
    inst = RftInstance(P, Q, tuple(DTree.const(b) for b in q_blocks), tuple(DTree.const(o_p) for _ in Q.outputs))
    return inst, lambda sol: sol[1]


@dataclass(frozen=True)
class DtReduction:
    """Decision-tree reduction ``P -> S``: ``h[j]`` computes bit ``j+1`` of the
    ``S`` input, ``l[s]`` maps an ``S`` output to a ``P`` output."""

    P: DtSearchProblem
    S: DtSearchProblem
    h: tuple[DTree, ...]
    l: Mapping[Any, DTree]


def identity_dt_reduction(P: DtSearchProblem) -> DtReduction:
    h = tuple(DTree(v, DTree.const(0), DTree.const(1)) for v in range(1, P.n + 1))
    return DtReduction(P, P, h, {o: DTree.const(o) for o in P.outputs})


def _through(h: Sequence[DTree], rd: Rd) -> Rd:
    return lambda j: h[j - 1].run(rd)


def rft_gap_compose(front: DtReduction, inst: RftInstance) -> tuple[RftInstance, Callable[[tuple[Any, Any]], tuple[Rho, Any]]]:
    """``Rft(S -> Q)`` to ``Rft(P -> Q)`` by substituting ``front`` into every tree."""
    if inst.P is not front.S and inst.P.n != front.S.n:
        raise PreconditionError("front reduction target does not match the refuter's source")
    h = front.h

    def f_tree(t: DTree) -> DTree:
        return DTree.from_procedure(lambda rd: t.run(_through(h, rd)))

    def g_tree(t: DTree) -> DTree:
        return DTree.from_procedure(lambda rd: front.l[t.run(_through(h, rd))].run(rd))

    out = RftInstance(front.P, inst.Q, tuple(f_tree(t) for t in inst.f), tuple(g_tree(t) for t in inst.g))

    def back(sol: tuple[Any, Any]) -> tuple[Rho, Any]:
        rho_p, o = sol
        known = dict(rho_of(rho_p))
        y_rd, y_seen = _recording(_through(h, lambda v: known.get(v, 0)))
        inst.Q.verify(inst.q_instance(y_rd), o)
        s = inst.g[inst.Q.outputs.index(o)].run(y_rd)
        front.S.check(s, y_rd)
        return rho_of(y_seen), o

    return out, back


def rft_gap2_compose(inst: RftInstance, back_red: Reduction, Q: TargetProblem) -> tuple[RftInstance, Callable[[tuple[Any, Any]], tuple[Rho, Any]]]:
    """``Rft(P -> S)`` with a block reduction ``S -> Q`` to ``Rft(P -> Q)``."""

    def f_tree(i: int) -> DTree:
        return DTree.from_procedure(lambda rd: back_red.out_block(inst.q_instance(rd), i))

    def g_tree(o: Any) -> DTree:
        def proc(rd: Rd) -> Any:
            s = back_red.map_solution(inst.q_instance(rd), o)
            return inst.g[inst.Q.outputs.index(s)].run(rd)

        return DTree.from_procedure(proc)

    out = RftInstance(inst.P, Q, tuple(f_tree(i) for i in range(Q.size)), tuple(g_tree(o) for o in Q.outputs))

    def back(sol: tuple[Any, Any]) -> tuple[Rho, Any]:
        rho_q, o = sol
        known = dict(rho_of(rho_q))
        rd, seen = _recording(lambda v: known.get(v, 0))
        s = back_red.map_solution(inst.q_instance(rd), o)
        inst.Q.verify(inst.q_instance(rd), s)
        inst.P.check(inst.g[inst.Q.outputs.index(s)].run(rd), rd)
        return rho_of(seen), s

    return out, back


# ---------------------------------------------------------------------------
# Prover strategies


@dataclass(frozen=True)
class Query:
    var: int


@dataclass(frozen=True)
class Forget:
    """Drops a set of variables in one weakening step; the empty set only advances registers."""

    vars: tuple[int, ...]


@dataclass(frozen=True)
class Output:
    clause: int


Action = Query | Forget | Output


class ProverStrategy:
    """States are hashable and expose ``rho``; ``after`` applies an action."""

    memory_bound: int

    def initial(self) -> Any:
        raise NotImplementedError

    def act(self, state: Any) -> Action:
        raise NotImplementedError

    def after(self, state: Any, action: Action, value: int | None = None) -> Any:
        raise NotImplementedError


@dataclass(frozen=True)
class GameProof:
    instance: RefutationInstance
    peak_memory: int
    states: int

    @property
    def width(self) -> int:
        return max((len(n.clause) for n in self.instance.nodes), default=0)


def _successors(strategy: ProverStrategy, s: Any, a: Action) -> list[Any]:
    if isinstance(a, Query):
        if a.var in dict(s.rho):
            raise ProverFailure(f"query of remembered variable {a.var}")
        return [strategy.after(s, a, 0), strategy.after(s, a, 1)]
    if isinstance(a, Forget):
        return [strategy.after(s, a)]
    return []


def prover_to_resolution(strategy: ProverStrategy, F: Sequence[Sequence[int]], *, max_states: int = 2_000_000) -> GameProof:
    """Explores every Delayer answer; each memory state becomes the clause it falsifies.

    Query gives a resolution step, Forget a weakening and Output a weakening of
    the named axiom.  Children precede parents, so the initial state is last.
    """
    cnf = cnf_of(F)
    m = len(cnf)
    index: dict[Any, int] = {}
    nodes: list[Node] = []
    active: set[Any] = set()
    peak = 0
    root = strategy.initial()
    stack: list[tuple[Any, bool]] = [(root, False)]
    while stack:
        s, expanded = stack.pop()
        if s in index:
            continue
        a = strategy.act(s)
        kids = _successors(strategy, s, a)
        if not expanded:
            if s in active:
                raise ProverFailure("the strategy revisits a memory state")
            active.add(s)
            if len(index) + len(active) > max_states:
                raise ProverFailure(f"more than {max_states} memory states; the strategy may not terminate")
            stack.append((s, True))
            for k in kids:
                if k in active:
                    raise ProverFailure("the strategy revisits a memory state")
                if k not in index:
                    stack.append((k, False))
            continue
        active.discard(s)
        peak = max(peak, len(s.rho))
        c = clause_of_rho(s.rho)
        if isinstance(a, Query):
            node = Node(c, RES, index[kids[0]], index[kids[1]], a.var)
        elif isinstance(a, Forget):
            node = Node(c, WK, index[kids[0]])
        else:
            if not 0 <= a.clause < m:
                raise ProverFailure(f"output of unknown clause {a.clause}")
            node = Node(c, WK, a.clause - m)
        index[s] = len(nodes)
        nodes.append(node)
    return GameProof(RefutationInstance.from_nodes(cnf, nodes, strategy.memory_bound + 1), peak, len(nodes))


@dataclass(frozen=True)
class TreeState:
    rho: Rho


class QueryAllStrategy(ProverStrategy):
    """Queries variables in order until an axiom is falsified."""

    def __init__(self, F: Sequence[Sequence[int]], order: Sequence[int] | None = None) -> None:
        self.tree = solver_tree(F, order)
        self.memory_bound = self.tree.depth

    def initial(self) -> TreeState:
        return TreeState(())

    def act(self, state: TreeState) -> Action:
        _, leaf, nxt = self.tree.trace(dict(state.rho))
        return Query(nxt) if nxt is not None else Output(leaf)

    def after(self, state: TreeState, action: Action, value: int | None = None) -> TreeState:
        return TreeState(rho_of(dict(state.rho) | {action.var: value}))  # type: ignore[union-attr]


# ---------------------------------------------------------------------------
# PLS formulations as Prover strategies


@dataclass(frozen=True)
class PlsState:
    """Registers ``(v, phase, k, u)``: current node, phase (0 evaluates ``f_v``,
    1 evaluates ``g_o``), queries made in the phase, previous node."""

    v: int
    phase: int
    k: int
    u: int
    rho: Rho

    @property
    def registers(self) -> tuple[int, int, int, int]:
        return (self.v, self.phase, self.k, self.u)


def _bits_for(count: int) -> int:
    return max(1, (count - 1).bit_length())


@dataclass(frozen=True)
class MemoryLayout:
    """Big-endian ``v, phase, k, u`` followed by ``slots`` assignment slots of
    ``(present, var - 1, value)``, present slots first in increasing variable order."""

    n: int
    M: int
    d: int

    @property
    def b_node(self) -> int:
        return _bits_for(self.M)

    @property
    def b_k(self) -> int:
        return max(1, self.d.bit_length())

    @property
    def b_var(self) -> int:
        return _bits_for(self.n)

    @property
    def slots(self) -> int:
        return min(3 * self.d, self.n)

    @property
    def register_bits(self) -> int:
        return 2 * self.b_node + 1 + self.b_k

    @property
    def slot_bits(self) -> int:
        return self.b_var + 2

    @property
    def B(self) -> int:
        return self.register_bits + self.slots * self.slot_bits

    def encode(self, s: PlsState) -> int:
        if len(s.rho) > self.slots:
            raise ValueError(f"{len(s.rho)} remembered variables exceed {self.slots} slots")
        code = 0
        for value, bits in ((s.v, self.b_node), (s.phase, 1), (s.k, self.b_k), (s.u, self.b_node)):
            if not 0 <= value < 1 << bits:
                raise ValueError(f"register value {value} does not fit {bits} bits")
            code = (code << bits) | value
        for j in range(self.slots):
            code <<= self.slot_bits
            if j < len(s.rho):
                var, val = s.rho[j]
                code |= (1 << (self.b_var + 1)) | ((var - 1) << 1) | val
        return code

    def decode(self, code: int) -> PlsState | None:
        """``None`` on a format error."""
        if not 0 <= code < 1 << self.B:
            return None
        slots = []
        for _ in range(self.slots):
            slots.append(code & ((1 << self.slot_bits) - 1))
            code >>= self.slot_bits
        slots.reverse()
        regs = []
        for bits in (self.b_node, self.b_k, 1, self.b_node):
            regs.append(code & ((1 << bits) - 1))
            code >>= bits
        u, k, phase, v = regs
        rho: list[tuple[int, int]] = []
        ended = False
        for sl in slots:
            if sl >> (self.b_var + 1):
                if ended:
                    return None
                var = ((sl >> 1) & ((1 << self.b_var) - 1)) + 1
                if var > self.n or (rho and rho[-1][0] >= var):
                    return None
                rho.append((var, sl & 1))
            else:
                if sl:
                    return None
                ended = True
        if v >= self.M or u >= self.M or k > self.d:
            return None
        return PlsState(v, phase, k, u, tuple(rho))

    def index(self, s: PlsState) -> int:
        return (1 << self.B) - 1 - self.encode(s)

    def state_at(self, e: int) -> PlsState | None:
        return self.decode((1 << self.B) - 1 - e)


def _walk_new(tree: DTree, rho: Mapping[int, int], old: set[int], k: int) -> tuple[list[int], bool] | None:
    """The first ``k`` variables of ``tree``'s path that are not in ``old``.

    ``None`` when ``rho`` disagrees with having queried exactly those; the flag
    says whether the path reached a leaf.
    """
    new: list[int] = []
    t = tree
    while t.var is not None:
        z = t.var
        if z in old:
            t = t.hi if rho[z] else t.lo  # type: ignore[assignment]
            continue
        if len(new) < k:
            if z not in rho:
                return None
            new.append(z)
            t = t.hi if rho[z] else t.lo  # type: ignore[assignment]
            continue
        if z in rho:
            return None
        return new, False
    if len(new) != k:
        return None
    return new, True


class PlsProver(ProverStrategy):
    """Walks ``0 -> f_0 -> ...``, remembering the paths of ``f_u`` and ``f_v``,
    and evaluates ``g`` at the first Iter solution met."""

    def __init__(self, inst: RftInstance, F: Sequence[Sequence[int]]) -> None:
        self.inst = inst
        self.cnf = cnf_of(F)
        self.M = inst.Q.size
        self.d = inst.d
        self.layout = MemoryLayout(max(inst.P.n, num_vars(self.cnf)), self.M, max(1, self.d))
        self.memory_bound = 3 * self.d
        self.tree_reads = 0

    def _f(self, i: int) -> DTree:
        self.tree_reads += 1
        return self.inst.f[i]

    def _g(self, o: int) -> DTree:
        self.tree_reads += 1
        return self.inst.g[o]

    def initial(self) -> PlsState:
        return PlsState(0, 0, 0, 0, ())

    def _resolve(self, s: PlsState) -> tuple[Action, tuple[int, int, int, int], Rho]:
        """The action at ``s`` with the successor's registers and assignment (query value unset)."""
        v, phase, k, u = s.registers
        rho = dict(s.rho)
        if phase == 0:
            path, w, nxt = self._f(v).trace(rho)
            if nxt is not None:
                return Query(nxt), (v, 0, k + 1, u), s.rho
            if w > v:
                keep = set(path)
                drop = tuple(x for x, _ in s.rho if x not in keep)
                return Forget(drop), (w, 0, 0, v), tuple(p for p in s.rho if p[0] in keep)
            phase, k = 1, 0
        w = self._f(v).trace(rho)[1]
        o = v if w < v else u
        _, D, nxt = self._g(o).trace(rho)
        if nxt is not None:
            return Query(nxt), (v, 1, k + 1, u), s.rho
        return Output(D), s.registers, s.rho

    def act(self, state: PlsState) -> Action:
        return self._resolve(state)[0]

    def after(self, state: PlsState, action: Action, value: int | None = None) -> PlsState:
        a, regs, rho = self._resolve(state)
        if a != action:
            raise ProverFailure(f"action {action} does not match the strategy's {a}")
        if isinstance(a, Query):
            rho = rho_of(dict(rho) | {a.var: value})
        return PlsState(*regs, rho)

    def solution_of(self, s: PlsState) -> int:
        """The Iter node whose ``g`` is evaluated in phase 1."""
        w = self.inst.f[s.v].trace(dict(s.rho))[1]
        return s.v if w < s.v else s.u

    def is_valid(self, s: PlsState) -> bool:
        """Registers agree with the memory content; reads the paths of at most three trees."""
        v, phase, k, u = s.registers
        rho = dict(s.rho)
        if phase not in (0, 1) or not 0 <= v < self.M or not 0 <= u < self.M:
            return False
        if v == 0:
            if u != 0:
                return False
            old: set[int] = set()
        else:
            if u >= v:
                return False
            path_u, w_u, nxt = self._f(u).trace(rho)
            if nxt is not None or w_u != v:
                return False
            old = set(path_u)
        if phase == 0:
            walked = _walk_new(self._f(v), rho, old, k)
            return walked is not None and set(rho) == old | set(walked[0])
        path_v, w, nxt = self._f(v).trace(rho)
        if nxt is not None or w > v:
            return False
        old |= set(path_v)
        o = v if w < v else u
        walked = _walk_new(self._g(o), rho, old, k)
        return walked is not None and set(rho) == old | set(walked[0])


def pls_to_prover(inst: RftInstance, F: Sequence[Sequence[int]]) -> PlsProver:
    if inst.Q.name != "iter":
        raise PreconditionError("the formulation must target forward Iter")
    return PlsProver(inst, F)


def encode_memory(prover: PlsProver, s: PlsState) -> int:
    return prover.layout.encode(s)


def decode_memory(prover: PlsProver, code: int) -> PlsState | None:
    return prover.layout.decode(code)


def is_valid_encoding(prover: PlsProver, code: int) -> bool:
    s = prover.layout.decode(code)
    return s is not None and prover.is_valid(s)


def execution(prover: ProverStrategy, answers: Callable[[Any, int], int], max_steps: int = 100_000) -> list[Any]:
    """States of one play against the Delayer ``answers(state, var)``, ending at an Output."""
    s = prover.initial()
    out = [s]
    for _ in range(max_steps):
        a = prover.act(s)
        if isinstance(a, Output):
            return out
        s = prover.after(s, a, answers(s, a.var) if isinstance(a, Query) else None)
        out.append(s)
    raise ProverFailure("no output within the step budget")


# ---------------------------------------------------------------------------
# refuter of Search(F) -> Iter to width refuter of F


@dataclass(frozen=True)
class MemoryProof:
    instance: RefutationInstance
    map_solution: Callable[[int], tuple[Rho, int]]
    prover: PlsProver

    def state(self, e: int) -> PlsState | None:
        s = self.prover.layout.state_at(e)
        return s if s is not None and self.prover.is_valid(s) else None


def tfnp_refuter_to_width_refuter(inst: RftInstance, F: Sequence[Sequence[int]]) -> MemoryProof:
    """Node ``e`` is the translated memory state encoded by ``2^B - 1 - e``;
    invalid encodings become axiom copies."""
    cnf = cnf_of(F)
    m = len(cnf)
    prover = pls_to_prover(inst, cnf)
    lay = prover.layout
    L = 1 << lay.B
    pad = Node(cnf[0], WK, -m)

    def fetch(e: int) -> Node:
        s = lay.state_at(e)
        if s is None or not prover.is_valid(s):
            return pad
        c = clause_of_rho(s.rho)
        a = prover.act(s)
        if isinstance(a, Query):
            return Node(c, RES, lay.index(prover.after(s, a, 0)), lay.index(prover.after(s, a, 1)), a.var)
        if isinstance(a, Forget):
            return Node(c, WK, lay.index(prover.after(s, a)))
        return Node(c, WK, a.clause - m)

    refutation = RefutationInstance(cnf, BlockOracle(L, fetch, "memory-proof"), prover.memory_bound + 1)

    def back(e: int) -> tuple[Rho, int]:
        s = lay.state_at(e)
        if s is None or not prover.is_valid(s):
            raise ValueError(f"node {e} is padding and always valid")
        a = prover.act(s)
        if not isinstance(a, Output):
            raise ValueError(f"node {e} is a {type(a).__name__} step and always valid")
        rho = dict(s.rho)
        for lit in cnf[a.clause]:
            rho.setdefault(abs(lit), 1 if lit > 0 else 0)
        return rho_of(rho), prover.solution_of(s)

    return MemoryProof(refutation, back, prover)


def rft_to_iter(inst: RftInstance, F: Sequence[Sequence[int]], membership: Callable[[RefutationInstance], IterReduction]) -> IterReduction:
    """Chains the memory proof with a width-refuter membership; Iter solutions map to ``(rho, o)``."""
    mp = tfnp_refuter_to_width_refuter(inst, F)
    red = membership(mp.instance)

    def back(x: int) -> tuple[Rho, int]:
        ans = red.map_solution(x)
        return mp.map_solution(ans.node)

    return IterReduction(red.iter, back, {"B": mp.prover.layout.B, **red.info})


def random_formulation(F: Sequence[Sequence[int]], rng: random.Random, M: int | None = None, f_depth: int = 2) -> RftInstance:
    """A correct formulation: random successor trees, every ``g_o`` a solver tree."""
    cnf = cnf_of(F)
    n = num_vars(cnf)
    M = M if M is not None else rng.randint(1, 4)

    def rand_tree(depth: int) -> DTree:
        if depth == 0 or rng.random() < 0.3:
            return DTree.const(rng.randrange(M))
        return DTree(rng.randint(1, n), rand_tree(depth - 1), rand_tree(depth - 1))

    def solver() -> DTree:
        order = list(range(1, n + 1))
        rng.shuffle(order)
        return solver_tree(cnf, order)

    return pls_formulation(cnf, [rand_tree(f_depth) for _ in range(M)], [solver() for _ in range(M)])


# ---------------------------------------------------------------------------
# lower-bound CNFs


@dataclass(frozen=True)
class ProofCodec:
    """Bit layout of an ``L``-node purported refutation of ``cnf``.

    Per node: tag (0 resolution, 1 weakening), pivot - 1, ``p1 + m``, ``p2 + m``,
    then the clause: ``w0 - 1`` literal slots (0 empty, ``2v - 1`` for ``v``,
    ``2v`` for ``-v``) when capped, else two bits per variable.
    Undefined codes read as absent literals.
    """

    cnf: CNF
    L: int
    w0: int | None

    @cached_property
    def m(self) -> int:
        return len(self.cnf)

    @cached_property
    def n(self) -> int:
        return num_vars(self.cnf)

    @cached_property
    def b_piv(self) -> int:
        return _bits_for(self.n)

    @cached_property
    def b_ptr(self) -> int:
        return _bits_for(self.L + self.m)

    @cached_property
    def units(self) -> int:
        return self.w0 - 1 if self.w0 is not None else self.n

    @cached_property
    def b_unit(self) -> int:
        return (2 * self.n).bit_length() if self.w0 is not None else 2

    @cached_property
    def R(self) -> int:
        return 1 + self.b_piv + 2 * self.b_ptr + self.units * self.b_unit

    @cached_property
    def nvars(self) -> int:
        return self.L * self.R

    @cached_property
    def offsets(self) -> dict[str, int]:
        return {"tag": 0, "piv": 1, "p1": 1 + self.b_piv, "p2": 1 + self.b_piv + self.b_ptr, "c": 1 + self.b_piv + 2 * self.b_ptr}

    def _off(self, name: str) -> int:
        return self.offsets[name]

    def var(self, i: int, off: int) -> int:
        return i * self.R + off + 1

    def unit_vars(self, i: int) -> list[int]:
        base = self._off("c")
        return [self.var(i, base + t) for t in range(self.units * self.b_unit)]

    def _read(self, rd: Rd, i: int, off: int, bits: int) -> int:
        x = 0
        for t in range(bits):
            x = (x << 1) | rd(self.var(i, off + t))
        return x

    def _equals(self, rd: Rd, i: int, off: int, bits: int, value: int) -> bool:
        for t in range(bits):
            if rd(self.var(i, off + t)) != (value >> (bits - 1 - t)) & 1:
                return False
        return True

    def _lit_of(self, k: int, code: int) -> int | None:
        if self.w0 is not None:
            if 1 <= code <= 2 * self.n:
                return (code + 1) // 2 if code % 2 else -(code // 2)
            return None
        return {1: k + 1, 2: -(k + 1)}.get(code)

    def _code_of(self, lit: int) -> tuple[int, int]:
        """(unit index, code) for the capped and uncapped layouts."""
        if self.w0 is not None:
            return -1, 2 * lit - 1 if lit > 0 else -2 * lit
        return abs(lit) - 1, 1 if lit > 0 else 2

    def read_clause(self, rd: Rd, j: int) -> frozenset[int]:
        if j < 0:
            return frozenset(self.cnf[self.m + j])
        base = self._off("c")
        lits = (self._lit_of(k, self._read(rd, j, base + k * self.b_unit, self.b_unit)) for k in range(self.units))
        return frozenset(l for l in lits if l is not None)

    def has_literal(self, rd: Rd, j: int, lit: int) -> bool:
        if j < 0:
            return lit in self.cnf[self.m + j]
        base = self._off("c")
        k, code = self._code_of(lit)
        if abs(lit) > self.n:
            return False
        if k >= 0:
            return self._equals(rd, j, base + k * self.b_unit, self.b_unit, code)
        return any(self._equals(rd, j, base + t * self.b_unit, self.b_unit, code) for t in range(self.units))

    def node_invalid(self, i: int, rd: Rd) -> bool:
        m, n = self.m, self.n
        if i == self.L - 1 and self.read_clause(rd, i):
            return True
        if rd(self.var(i, 0)) == 0:
            x = self._read(rd, i, self._off("piv"), self.b_piv) + 1
            if x > n:
                return True
            j1 = self._read(rd, i, self._off("p1"), self.b_ptr) - m
            if j1 >= i or not self.has_literal(rd, j1, x):
                return True
            j2 = self._read(rd, i, self._off("p2"), self.b_ptr) - m
            if j2 >= i or not self.has_literal(rd, j2, -x):
                return True
            res = (self.read_clause(rd, j1) - {x}) | (self.read_clause(rd, j2) - {-x})
            return self.read_clause(rd, i) != res
        j1 = self._read(rd, i, self._off("p1"), self.b_ptr) - m
        if j1 >= i:
            return True
        return not all(self.has_literal(rd, i, l) for l in sorted(self.read_clause(rd, j1), key=abs))

    def preds(self, i: int, rd: Rd) -> tuple[int, ...]:
        j1 = self._read(rd, i, self._off("p1"), self.b_ptr) - self.m
        if rd(self.var(i, 0)):
            return (j1,)
        return (j1, self._read(rd, i, self._off("p2"), self.b_ptr) - self.m)

    def decode(self, bits: Mapping[int, int]) -> list[Node]:
        rd = lambda v: bits.get(v, 0)  # noqa: E731
        out = []
        for i in range(self.L):
            c = clause(self.read_clause(rd, i))
            j1 = self._read(rd, i, self._off("p1"), self.b_ptr) - self.m
            if rd(self.var(i, 0)):
                out.append(Node(c, WK, j1))
            else:
                j2 = self._read(rd, i, self._off("p2"), self.b_ptr) - self.m
                out.append(Node(c, RES, j1, j2, self._read(rd, i, self._off("piv"), self.b_piv) + 1))
        return out

    def encode(self, nodes: Sequence[Node]) -> dict[int, int]:
        if len(nodes) != self.L:
            raise ValueError(f"expected {self.L} nodes, got {len(nodes)}")
        bits: dict[int, int] = {}

        def put(i: int, off: int, nbits: int, value: int) -> None:
            if not 0 <= value < 1 << nbits:
                raise ValueError(f"value {value} does not fit {nbits} bits")
            for t in range(nbits):
                bits[self.var(i, off + t)] = (value >> (nbits - 1 - t)) & 1

        for i, node in enumerate(nodes):
            put(i, 0, 1, 1 if node.tag == WK else 0)
            put(i, self._off("piv"), self.b_piv, (node.pivot or 1) - 1)
            put(i, self._off("p1"), self.b_ptr, node.p1 + self.m)
            put(i, self._off("p2"), self.b_ptr, (node.p2 if node.p2 is not None else -self.m) + self.m)
            codes = [0] * self.units
            if self.w0 is not None:
                if len(node.clause) > self.units:
                    raise ValueError(f"clause of width {len(node.clause)} exceeds the {self.units} slots")
                for t, lit in enumerate(node.clause):
                    codes[t] = self._code_of(lit)[1]
            else:
                for lit in node.clause:
                    k, code = self._code_of(lit)
                    codes[k] = code
            for t, code in enumerate(codes):
                put(i, self._off("c") + t * self.b_unit, self.b_unit, code)
        return bits


@dataclass(frozen=True)
class LowerBoundCnf:
    """``cnf`` is satisfied exactly by encodings of valid refutations."""

    cnf: CNF
    codec: ProofCodec
    index: Mapping[Clause, int] = field(repr=False)

    @property
    def nvars(self) -> int:
        return self.codec.nvars


def refuter_problem(codec: ProofCodec) -> DtSearchProblem:
    return DtSearchProblem("refuter", codec.nvars, tuple(range(codec.L)), lambda i, rd: codec.node_invalid(i, rd))


def _lower_bound_cnf(codec: ProofCodec) -> LowerBoundCnf:
    cnf = search_cnf(refuter_problem(codec))
    index: dict[Clause, int] = {}
    for j, c in enumerate(cnf):
        index.setdefault(c, j)
    return LowerBoundCnf(cnf, codec, index)


def build_wLB_cnf(F: Sequence[Sequence[int]], w0: int, L: int) -> LowerBoundCnf:
    if w0 < 1 or L < 1:
        raise PreconditionError("need w0 >= 1 and L >= 1")
    return _lower_bound_cnf(ProofCodec(cnf_of(F), L, w0))


def build_sLB_cnf(F: Sequence[Sequence[int]], L: int) -> LowerBoundCnf:
    if L < 1:
        raise PreconditionError("need L >= 1")
    return _lower_bound_cnf(ProofCodec(cnf_of(F), L, None))


@dataclass(frozen=True)
class WalkState:
    cur: int
    rho: Rho


class LowerBoundProver(ProverStrategy):
    """Stays at a node whose clause is not derivable within the width bound,
    verifies it, and moves to a non-derivable predecessor when it is valid."""

    def __init__(self, lb: LowerBoundCnf, w0: int, max_vars: int = 16) -> None:
        self.lb = lb
        self.codec = lb.codec
        self.w0 = w0
        self.max_vars = max_vars
        self.memory_bound = 4 * self.codec.R
        self._derivable: dict[frozenset[int], bool] = {}

    def derivable(self, c: frozenset[int]) -> bool:
        if c not in self._derivable:
            self._derivable[c] = width_derivable(self.codec.cnf, c, self.w0, self.max_vars)
        return self._derivable[c]

    def initial(self) -> WalkState:
        return WalkState(self.codec.L - 1, ())

    def _run(self, s: WalkState) -> tuple[str, Any]:
        rho = dict(s.rho)
        read: dict[int, int] = {}

        def rd(v: int) -> int:
            if v not in rho:
                raise _Unknown(v)
            read[v] = rho[v]
            return rho[v]

        try:
            bad = self.codec.node_invalid(s.cur, rd)
        except _Unknown as e:
            return "query", e.var
        if bad:
            c = clause_of_rho(read)
            if c not in self.lb.index:
                raise ProverFailure(f"verifier path at node {s.cur} has no clause")
            return "output", self.lb.index[c]
        preds = self.codec.preds(s.cur, rd)
        for j in preds:
            if j >= 0 and not self.derivable(self.codec.read_clause(rd, j)):
                return "move", j
        raise ProverFailure(f"node {s.cur} is valid but every predecessor is derivable below width {self.w0}")

    def act(self, state: WalkState) -> Action:
        kind, x = self._run(state)
        if kind == "query":
            return Query(x)
        if kind == "output":
            return Output(x)
        keep = set(self.codec.unit_vars(x))
        return Forget(tuple(v for v, _ in state.rho if v not in keep))

    def after(self, state: WalkState, action: Action, value: int | None = None) -> WalkState:
        if isinstance(action, Query):
            return WalkState(state.cur, rho_of(dict(state.rho) | {action.var: value}))
        kind, j = self._run(state)
        keep = set(self.codec.unit_vars(j))
        return WalkState(j, tuple(p for p in state.rho if p[0] in keep))


@dataclass(frozen=True)
class LowerBoundRefutation:
    lb: LowerBoundCnf
    proof: GameProof

    @property
    def width(self) -> int:
        return self.proof.width

    @property
    def record_bits(self) -> int:
        return self.lb.codec.R


def refute_wLB_cnf(F: Sequence[Sequence[int]], w0: int, L: int, *, check: bool = True, max_vars: int = 16) -> LowerBoundRefutation:
    cnf = cnf_of(F)
    if check and width_derivable(cnf, BOTTOM, w0, max_vars):
        raise ProverFailure(f"F has a refutation with all widths below {w0}; the lower-bound CNF is satisfiable for large L")
    lb = build_wLB_cnf(cnf, w0, L)
    prover = LowerBoundProver(lb, w0, max_vars)
    return LowerBoundRefutation(lb, prover_to_resolution(prover, lb.cnf))
