"""Clauses, resolution nodes, node-local validity and the width oracle.

Literals are non-zero signed integers in DIMACS style.  A clause is a tuple of
literals sorted by ``(variable, negative)`` without duplicates; a tuple that
holds both ``v`` and ``-v`` is a legal (tautological) clause.

Axiom ``j`` for ``-m <= j < 0`` is ``cnf[m + j]``, so ``-1`` is the last clause
of the CNF and ``-m`` the first.
"""

from __future__ import annotations

import io
import json
import struct
from dataclasses import dataclass, replace
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .oracle import BlockOracle

Clause = tuple[int, ...]
CNF = tuple[Clause, ...]

BOTTOM: Clause = ()
RES = "res"
WK = "wk"


def _lit_key(lit: int) -> tuple[int, int]:
    return (abs(lit), lit < 0)


def clause(lits: Iterable[int]) -> Clause:
    out = set()
    for lit in lits:
        if not isinstance(lit, int) or lit == 0:
            raise ValueError(f"invalid literal {lit!r}")
        out.add(lit)
    return tuple(sorted(out, key=_lit_key))


def cnf_of(clauses: Iterable[Iterable[int]]) -> CNF:
    return tuple(clause(c) for c in clauses)


def width(c: Clause) -> int:
    return len(c)


def is_tautology(c: Clause) -> bool:
    s = set(c)
    return any(-lit in s for lit in c)


def variables(c: Iterable[int]) -> set[int]:
    return {abs(lit) for lit in c}


def num_vars(cnf: Iterable[Clause]) -> int:
    return max((abs(lit) for c in cnf for lit in c), default=0)


def evaluate(c: Clause, assignment: Mapping[int, int] | Sequence[int]) -> bool:
    """Truth value of ``c``; sequences are indexed by ``variable - 1``."""
    if isinstance(assignment, Mapping):
        return any(bool(assignment[abs(l)]) == (l > 0) for l in c)
    return any(bool(assignment[abs(l) - 1]) == (l > 0) for l in c)


def falsifying_assignment(c: Clause) -> dict[int, int] | None:
    if is_tautology(c):
        return None
    return {abs(l): 0 if l > 0 else 1 for l in c}


@dataclass(frozen=True)
class Node:
    clause: Clause
    tag: str
    p1: int
    p2: int | None = None
    pivot: int | None = None

    @staticmethod
    def res(c: Iterable[int], p1: int, p2: int, pivot: int) -> "Node":
        return Node(clause(c), RES, p1, p2, pivot)

    @staticmethod
    def wk(c: Iterable[int], p1: int) -> "Node":
        return Node(clause(c), WK, p1)

    def preds(self) -> tuple[int, ...]:
        return (self.p1,) if self.tag == WK else (self.p1, self.p2)  # type: ignore[return-value]


@dataclass(frozen=True)
class Verdict:
    ok: bool
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


VALID = Verdict(True)


def Invalid(reason: str) -> Verdict:
    return Verdict(False, reason)


@dataclass(frozen=True)
class RefutationInstance:
    cnf: CNF
    nodes: BlockOracle
    width_cap: int | None = None

    @property
    def m(self) -> int:
        return len(self.cnf)

    @property
    def length(self) -> int:
        return self.nodes.length

    def axiom(self, j: int) -> Clause:
        if not -self.m <= j < 0:
            raise IndexError(f"axiom index {j} outside [-{self.m}, 0)")
        return self.cnf[self.m + j]

    def clause_at(self, j: int) -> Clause:
        return self.axiom(j) if j < 0 else self.nodes[j].clause

    def with_nodes(self, nodes: BlockOracle) -> "RefutationInstance":
        return replace(self, nodes=nodes)

    @staticmethod
    def from_nodes(cnf: Iterable[Iterable[int]], nodes: Sequence[Node], width_cap: int | None = None) -> "RefutationInstance":
        return RefutationInstance(cnf_of(cnf), BlockOracle.from_list(list(nodes), "nodes"), width_cap)


def is_axiom_copy(inst: RefutationInstance, node: Node) -> bool:
    """A weakening that restates an axiom verbatim; exempt from the width cap like axioms."""
    p = node.p1
    return node.tag == WK and isinstance(p, int) and -inst.m <= p < 0 and node.clause == inst.axiom(p)


def check_node(inst: RefutationInstance, i: int) -> Verdict:
    """Local validity of node ``i``; reads at most three node blocks."""
    if not 0 <= i < inst.length:
        raise IndexError(f"node index {i} outside [0, {inst.length})")
    node = inst.nodes[i]
    if inst.width_cap is not None and len(node.clause) > inst.width_cap - 1 and not is_axiom_copy(inst, node):
        return Invalid("width-cap")
    if i == inst.length - 1 and node.clause != BOTTOM:
        return Invalid("last-not-empty")

    def pred(j: object) -> Clause | None:
        if not isinstance(j, int) or j >= i or j < -inst.m:
            return None
        return inst.clause_at(j)

    if node.tag == WK:
        c1 = pred(node.p1)
        if c1 is None:
            return Invalid("forward-reference" if isinstance(node.p1, int) and node.p1 >= i else "bad-predecessor")
        if not set(c1) <= set(node.clause):
            return Invalid("not-a-weakening")
        return VALID
    if node.tag == RES:
        c1 = pred(node.p1)
        if c1 is None:
            return Invalid("forward-reference" if isinstance(node.p1, int) and node.p1 >= i else "bad-predecessor")
        c2 = pred(node.p2)
        if c2 is None:
            return Invalid("forward-reference" if isinstance(node.p2, int) and node.p2 >= i else "bad-predecessor")
        x = node.pivot
        if not isinstance(x, int) or x <= 0:
            return Invalid("bad-pivot")
        if x not in c1 or -x not in c2:
            return Invalid("pivot-missing")
        resolvent = (set(c1) - {x}) | (set(c2) - {-x})
        if resolvent != set(node.clause):
            return Invalid("wrong-resolvent")
        return VALID
    return Invalid("bad-tag")


@dataclass(frozen=True)
class RefutationReport:
    ok: bool
    first_invalid: int | None = None
    reason: str = ""


def verify_refutation(inst: RefutationInstance) -> RefutationReport:
    if inst.length == 0:
        return RefutationReport(False, 0, "empty")
    for i in range(inst.length):
        v = check_node(inst, i)
        if not v:
            return RefutationReport(False, i, v.reason)
    return RefutationReport(True)


def invalid_nodes(inst: RefutationInstance) -> list[int]:
    return [i for i in range(inst.length) if not check_node(inst, i)]


class _Killed:
    __slots__ = ()

    def __repr__(self) -> str:
        return "KilledTrue"

    def __bool__(self) -> bool:
        return False


KILLED = _Killed()


def restrict_clause(c: Clause, rho: Mapping[int, int]) -> Clause | _Killed:
    out = []
    for lit in c:
        v = abs(lit)
        if v in rho:
            if bool(rho[v]) == (lit > 0):
                return KILLED
        else:
            out.append(lit)
    return tuple(out)


def php_var(i: int, j: int, n: int) -> int:
    return i * n + j + 1


def php_pair(v: int, n: int) -> tuple[int, int]:
    return divmod(v - 1, n)


def mono(c: Clause, n: int, m: int | None = None) -> Clause:
    """Replace each ``¬x_{i,j}`` by ``x_{i,j'}`` for all holes ``j' != j``."""
    m = n + 1 if m is None else m
    out = set()
    for lit in c:
        i, j = php_pair(abs(lit), n)
        if not 0 <= i < m:
            raise ValueError(f"literal {lit} is not a PHP_{m}->{n} variable")
        if lit > 0:
            out.add(lit)
        else:
            out.update(php_var(i, jj, n) for jj in range(n) if jj != j)
    return clause(out)


class WidthOracleTooLarge(ValueError):
    pass


def _masks(c: Iterable[int]) -> tuple[int, int]:
    pos = neg = 0
    for lit in c:
        if lit > 0:
            pos |= 1 << lit
        else:
            neg |= 1 << -lit
    return pos, neg


@lru_cache(maxsize=64)
def _closure(cnf: CNF, w0: int) -> frozenset[tuple[int, int]]:
    known: set[tuple[int, int]] = set()
    by_pos: dict[int, list[tuple[int, int]]] = {}
    by_neg: dict[int, list[tuple[int, int]]] = {}
    queue: list[tuple[int, int]] = []

    def add(cl: tuple[int, int]) -> None:
        if cl in known:
            return
        known.add(cl)
        queue.append(cl)
        pos, neg = cl
        v = pos
        while v:
            low = v & -v
            by_pos.setdefault(low.bit_length() - 1, []).append(cl)
            v ^= low
        v = neg
        while v:
            low = v & -v
            by_neg.setdefault(low.bit_length() - 1, []).append(cl)
            v ^= low

    for c in cnf:
        add(_masks(c))
    while queue:
        pos, neg = queue.pop()
        for x in _bits(pos):
            for p2, n2 in list(by_neg.get(x, ())):
                r = ((pos & ~(1 << x)) | p2, neg | (n2 & ~(1 << x)))
                if _popcount(r[0]) + _popcount(r[1]) < w0:
                    add(r)
        for x in _bits(neg):
            for p1, n1 in list(by_pos.get(x, ())):
                r = ((p1 & ~(1 << x)) | pos, n1 | (neg & ~(1 << x)))
                if _popcount(r[0]) + _popcount(r[1]) < w0:
                    add(r)
    return frozenset(known)


def _bits(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def _popcount(mask: int) -> int:
    return bin(mask).count("1")


def width_closure(cnf: Iterable[Iterable[int]], w0: int, max_vars: int = 16) -> frozenset[tuple[int, int]]:
    """All clauses derivable with every derived clause of width ``< w0``.

    Axioms are leaves and are not subject to the width bound.  Clauses are
    returned as ``(positive mask, negative mask)`` pairs.
    """
    f = cnf_of(cnf)
    if num_vars(f) > max_vars:
        raise WidthOracleTooLarge(f"{num_vars(f)} variables exceed the cap of {max_vars}")
    return _closure(f, w0)


def width_derivable(cnf: Iterable[Iterable[int]], c: Iterable[int], w0: int, max_vars: int = 16) -> bool:
    """Whether ``c`` follows from ``cnf`` by resolution and weakening with all
    derived clauses of width ``< w0``; a subset of ``c`` must be in the closure.
    """
    target = clause(c)
    if len(target) >= w0 and target not in set(cnf_of(cnf)):
        return False
    pos, neg = _masks(target)
    for p, q in width_closure(cnf, w0, max_vars):
        if p & ~pos == 0 and q & ~neg == 0:
            return True
    return False


def read_dimacs(source: str | Path | io.TextIOBase) -> tuple[int, CNF]:
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source and Path(source).exists()):
        text = Path(source).read_text()
    elif isinstance(source, str):
        text = source
    else:
        text = source.read()
    nvars = None
    clauses: list[Clause] = []
    current: list[int] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ValueError(f"malformed problem line: {line!r}")
            nvars = int(parts[2])
            continue
        for tok in line.split():
            lit = int(tok)
            if lit == 0:
                clauses.append(clause(current))
                current = []
            else:
                current.append(lit)
    if current:
        clauses.append(clause(current))
    if nvars is None:
        nvars = num_vars(clauses)
    return nvars, tuple(clauses)


def write_dimacs(cnf: Iterable[Iterable[int]], nvars: int | None = None) -> str:
    cl = cnf_of(cnf)
    nv = num_vars(cl) if nvars is None else nvars
    lines = [f"p cnf {nv} {len(cl)}"]
    lines += [" ".join(str(l) for l in c) + (" 0" if c else "0") for c in cl]
    return "\n".join(lines) + "\n"


def node_to_json(node: Node) -> str:
    return json.dumps({"lits": list(node.clause), "tag": node.tag, "p1": node.p1, "p2": node.p2, "pivot": node.pivot})


def node_from_json(line: str) -> Node:
    d = json.loads(line)
    if d.get("tag") not in (RES, WK):
        raise ValueError(f"bad tag in {line!r}")
    return Node(clause(d["lits"]), d["tag"], int(d["p1"]), d.get("p2"), d.get("pivot"))


def dumps_proof(nodes: Iterable[Node]) -> str:
    return "".join(node_to_json(n) + "\n" for n in nodes)


def loads_proof(text: str) -> list[Node]:
    return [node_from_json(line) for line in text.splitlines() if line.strip()]


_MAGIC = b"RFLB"
_HEADER = struct.Struct("<4sII")


def dumps_proof_binary(nodes: Sequence[Node], slots: int) -> bytes:
    """Fixed records: tag, p1, p2, pivot, then ``slots`` literals padded with 0."""
    rec = struct.Struct(f"<4i{slots}i")
    out = bytearray(_HEADER.pack(_MAGIC, slots, len(nodes)))
    for node in nodes:
        if len(node.clause) > slots:
            raise ValueError(f"clause of width {len(node.clause)} exceeds {slots} slots")
        lits = list(node.clause) + [0] * (slots - len(node.clause))
        tag = 0 if node.tag == RES else 1
        p2 = node.p2 if node.p2 is not None else 0
        pivot = node.pivot if node.pivot is not None else 0
        out += rec.pack(tag, node.p1, p2, pivot, *lits)
    return bytes(out)


def binary_proof_oracle(data: bytes) -> BlockOracle:
    magic, slots, count = _HEADER.unpack_from(data, 0)
    if magic != _MAGIC:
        raise ValueError("not a binary proof")
    rec = struct.Struct(f"<4i{slots}i")
    if len(data) != _HEADER.size + count * rec.size:
        raise ValueError("truncated binary proof")

    def fetch(i: int) -> Node:
        tag, p1, p2, pivot, *lits = rec.unpack_from(data, _HEADER.size + i * rec.size)
        c = clause(l for l in lits if l != 0)
        if tag == 0:
            return Node(c, RES, p1, p2, pivot)
        return Node(c, WK, p1)

    return BlockOracle(count, fetch, "binary-proof")


def tree_refutation(cnf: Iterable[Iterable[int]], order: Sequence[int] | None = None) -> list[Node]:
    """Decision-tree refutation branching on ``order`` until an axiom is falsified.

    Subtrees whose clause avoids the branching literal are reused unchanged,
    so the output is a valid refutation of size at most the tree size.
    """
    f = cnf_of(cnf)
    m = len(f)
    order = list(order) if order is not None else sorted({abs(l) for c in f for l in c})
    nodes: list[Node] = []

    def at(j: int) -> Clause:
        return f[m + j] if j < 0 else nodes[j].clause

    def rec(rho: dict[int, int], depth: int) -> int:
        for j, c in enumerate(f):
            if all(abs(l) in rho and bool(rho[abs(l)]) != (l > 0) for l in c):
                return j - m
        if depth == len(order):
            raise ValueError("the CNF is satisfiable")
        v = order[depth]
        a = rec({**rho, v: 1}, depth + 1)
        if -v not in at(a):
            return a
        b = rec({**rho, v: 0}, depth + 1)
        if v not in at(b):
            return b
        nodes.append(Node(clause((set(at(b)) - {v}) | (set(at(a)) - {-v})), RES, b, a, v))
        return len(nodes) - 1

    root = rec({}, 0)
    if root < 0 or root != len(nodes) - 1:
        nodes.append(Node(BOTTOM, WK, root))
    return nodes
