"""Target search problems: Iter in both orientations, rwPHP(P) and WrongProof.

Forward Iter solutions: ``x = 0`` with ``S(0) = 0``, or ``S(x) < x``, or
``S(x) > x`` with ``S(S(x)) = S(x)``.  Reversed Iter solutions: ``S(x) > x``,
or ``S(x) < x`` with ``S(S(x)) = S(x)``; instances promise ``S(N-1) < N-1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Iterator, Sequence

from .oracle import BlockOracle, Reduction
from .resolution import (
    CNF,
    Clause,
    Node,
    RefutationInstance,
    check_node,
    clause,
    cnf_of,
    evaluate,
)

FORWARD = "forward"
REVERSED = "reversed"


class NoSolution(RuntimeError):
    pass


class PromiseViolation(NoSolution):
    pass


class PreconditionError(ValueError):
    pass


@dataclass(frozen=True)
class IterInstance:
    S: BlockOracle
    orientation: str = REVERSED

    def __post_init__(self) -> None:
        if self.orientation not in (FORWARD, REVERSED):
            raise ValueError(f"unknown orientation {self.orientation!r}")

    @property
    def N(self) -> int:
        return self.S.length

    @staticmethod
    def table(values: Sequence[int], orientation: str = REVERSED) -> "IterInstance":
        return IterInstance(BlockOracle.from_list(list(values), "S"), orientation)

    def succ(self, x: int) -> int:
        s = self.S[x]
        if not isinstance(s, int) or not 0 <= s < self.N:
            raise ValueError(f"S({x}) = {s!r} outside [0, {self.N})")
        return s


def verify_iter(inst: IterInstance, x: int) -> bool:
    if not isinstance(x, int) or not 0 <= x < inst.N:
        return False
    s = inst.succ(x)
    if inst.orientation == FORWARD:
        if x == 0 and s == 0:
            return True
        if s < x:
            return True
        return s > x and inst.succ(s) == s
    if s > x:
        return True
    return s < x and inst.succ(s) == s


def iter_solutions(inst: IterInstance) -> list[int]:
    return [x for x in range(inst.N) if verify_iter(inst, x)]


def solve_iter_bruteforce(inst: IterInstance) -> int:
    """Pointer-following from the source end, at most ``N`` steps."""
    N = inst.N
    if N == 0:
        raise NoSolution("empty Iter instance")
    if inst.orientation == FORWARD:
        cur = 0
        for _ in range(N + 1):
            nxt = inst.succ(cur)
            if nxt == cur:
                if cur == 0:
                    return 0
                raise NoSolution("walk reached a fixed point")
            if nxt < cur:
                return cur
            if inst.succ(nxt) == nxt:
                return cur
            cur = nxt
        raise NoSolution("step budget exhausted")
    cur = N - 1
    if inst.succ(cur) >= cur:
        raise PromiseViolation(f"reversed Iter promise S({N - 1}) < {N - 1} violated")
    for _ in range(N + 1):
        nxt = inst.succ(cur)
        if nxt > cur:
            return cur
        if inst.succ(nxt) == nxt:
            return cur
        cur = nxt
    raise NoSolution("step budget exhausted")


@dataclass(frozen=True)
class InnerProblem:
    """Pluggable inner problem: a verifier and an exhaustive solution lister."""

    name: str
    verify: Callable[[Any, Any], bool]
    solutions: Callable[[Any], Iterable[Any]]


ITER = InnerProblem("iter", verify_iter, iter_solutions)


@dataclass(frozen=True)
class RwPhpInstance:
    """Purported surjection ``f:[M]->[N]`` with inner instances and labels.

    ``general`` admits any ``M < N``; ``checked=False`` drops the size
    relation entirely (used for desk runs outside the counting regime).
    """

    M: int
    N: int
    f: BlockOracle
    inner: Callable[[int], Any]
    g: Callable[[int, Any], int]
    problem: InnerProblem = ITER
    general: bool = False
    checked: bool = True

    def __post_init__(self) -> None:
        if len(self.f) != self.M:
            raise ValueError("f must have exactly M entries")
        if self.checked:
            if self.general and not self.M < self.N:
                raise PreconditionError(f"need M < N, got M={self.M}, N={self.N}")
            if not self.general and not 2 * self.M <= self.N:
                raise PreconditionError(f"need M <= N/2, got M={self.M}, N={self.N}")

    def label(self, y: int, ans: Any) -> int:
        lab = self.g(y, ans)
        if not isinstance(lab, int) or not 0 <= lab < self.M:
            raise ValueError(f"label g_{y}({ans!r}) = {lab!r} outside [0, {self.M})")
        return lab


def verify_rwphp(inst: RwPhpInstance, sol: tuple[int, Any]) -> bool:
    y, ans = sol
    if not isinstance(y, int) or not 0 <= y < inst.N:
        return False
    if not inst.problem.verify(inst.inner(y), ans):
        return False
    return inst.f[inst.label(y, ans)] != y


def rwphp_solutions(inst: RwPhpInstance) -> Iterator[tuple[int, Any]]:
    for y in range(inst.N):
        sub = inst.inner(y)
        for ans in inst.problem.solutions(sub):
            if inst.f[inst.label(y, ans)] != y:
                yield (y, ans)


def solve_rwphp_bruteforce(inst: RwPhpInstance) -> tuple[int, Any]:
    """Smallest ``y`` outside the image of ``f`` first, then the rest."""
    image = {inst.f[x] for x in range(inst.M)}
    order = [y for y in range(inst.N) if y not in image] + sorted(image)
    for y in order:
        sub = inst.inner(y)
        for ans in inst.problem.solutions(sub):
            if inst.f[inst.label(y, ans)] != y:
                return (y, ans)
    raise NoSolution("no rwPHP solution (inner instances without solutions?)")


def embed_inner(inst_p: Any, problem: InnerProblem = ITER) -> tuple[RwPhpInstance, Callable[[tuple[int, Any]], Any]]:
    """Constant ``f`` over ``[1] -> [2]``; every ``I_y`` is the given instance."""
    f = BlockOracle.from_list([0], "f")
    inst = RwPhpInstance(1, 2, f, lambda y: inst_p, lambda y, ans: 0, problem)
    return inst, lambda sol: sol[1]


def trivial_iter() -> IterInstance:
    return IterInstance.table([0], FORWARD)


def embed_rwphp(M: int, N: int, f: Sequence[int], g: Sequence[int], general: bool = False) -> tuple[RwPhpInstance, Callable[[tuple[int, Any]], int]]:
    """A plain rwPHP instance ``(f, g)`` with one-node inner instances."""
    f_oracle = BlockOracle.from_list(list(f), "f")
    g_oracle = BlockOracle.from_list(list(g), "g")
    triv = trivial_iter()
    inst = RwPhpInstance(M, N, f_oracle, lambda y: triv, lambda y, ans: g_oracle[y], ITER, general)
    return inst, lambda sol: sol[0]


def lift_reduction(
    r: Reduction,
    problem_q: InnerProblem,
    to_oracle: Callable[[Any], BlockOracle] = lambda inst: inst.S,
    from_oracle: Callable[[BlockOracle], Any] = lambda o: IterInstance(o, REVERSED),
) -> Callable[[RwPhpInstance], tuple[RwPhpInstance, Callable[[tuple[int, Any]], tuple[int, Any]]]]:
    """Turn a reduction P -> Q into one rwPHP(P) -> rwPHP(Q)."""

    def apply(inst: RwPhpInstance) -> tuple[RwPhpInstance, Callable[[tuple[int, Any]], tuple[int, Any]]]:
        def inner(y: int) -> Any:
            return from_oracle(r.output(to_oracle(inst.inner(y))))

        def g(y: int, ans: Any) -> int:
            return inst.g(y, r.map_solution(to_oracle(inst.inner(y)), ans))

        out = RwPhpInstance(inst.M, inst.N, inst.f, inner, g, problem_q, inst.general, inst.checked)

        def back(sol: tuple[int, Any]) -> tuple[int, Any]:
            y, ans = sol
            return (y, r.map_solution(to_oracle(inst.inner(y)), ans))

        return out, back

    return apply


@dataclass(frozen=True)
class WrongProofInstance:
    cnf: CNF
    nodes: BlockOracle
    alpha: tuple[int, ...]

    @property
    def k(self) -> int:
        return len(self.cnf)

    @property
    def L(self) -> int:
        return len(self.nodes)

    def refutation(self) -> RefutationInstance:
        return RefutationInstance(self.cnf, self.nodes)

    def value(self, c: Clause) -> bool:
        return evaluate(c, self.alpha)


def verify_wrongproof(inst: WrongProofInstance, ans: tuple[str, int]) -> bool:
    kind, j = ans
    if kind == "axiom":
        return -inst.k <= j < 0 and not inst.value(inst.cnf[inst.k + j])
    if kind == "node":
        return 0 <= j < inst.L and not check_node(inst.refutation(), j)
    return False


def wrongproof_solutions(inst: WrongProofInstance) -> list[tuple[str, int]]:
    out = [("axiom", j) for j in range(-inst.k, 0) if verify_wrongproof(inst, ("axiom", j))]
    out += [("node", i) for i in range(inst.L) if verify_wrongproof(inst, ("node", i))]
    return out


@dataclass(frozen=True)
class IterReduction:
    """An Iter instance produced from some input together with its solution map."""

    iter: IterInstance
    map_solution: Callable[[int], Any]
    info: dict = field(default_factory=dict)


def wrongproof_to_iter(inst: WrongProofInstance) -> IterReduction:
    """Shifted indices: axiom ``j`` sits at ``j + k``, node ``i`` at ``i + k``."""
    k, L = inst.k, inst.L
    if k < 1 or L < 1:
        raise PreconditionError("need at least one axiom and one node")
    N = k + L

    def fwd(x: int) -> int:
        return N - 1 if x < N - 1 else 0

    def S(x: int) -> int:
        if x < k:
            return x if inst.value(inst.cnf[x]) else k
        i = x - k
        node = inst.nodes[i]
        if inst.value(node.clause):
            return 0 if x == N - 1 else x
        preds = node.preds()
        if any(not isinstance(p, int) or p >= i or p < -k for p in preds):
            return fwd(x)
        p1 = node.p1
        c1 = inst.cnf[k + p1] if p1 < 0 else inst.nodes[p1].clause
        if not inst.value(c1) or node.tag != "res":
            return p1 + k
        return node.p2 + k  # type: ignore[operator]

    def back(x: int) -> tuple[str, int]:
        return ("axiom", x - k) if x < k else ("node", x - k)

    return IterReduction(IterInstance(BlockOracle(N, S, "S"), REVERSED), back, {"k": k, "L": L})


def _find_pivot(a: Clause, b: Clause) -> tuple[int, int, int] | None:
    for lit in a:
        if lit > 0 and -lit in b:
            return (-2, -1, lit)
    for lit in b:
        if lit > 0 and -lit in a:
            return (-1, -2, lit)
    return None


def iter_to_wrongproof(S: IterInstance, F: Iterable[Iterable[int]], alpha: Sequence[int]) -> tuple[WrongProofInstance, Callable[[tuple[str, int]], int]]:
    """Self-loops become a valid resolution of the last two axioms; solutions
    become ``⊥`` weakened from the first axiom; the rest chain ``⊥`` downward."""
    if S.orientation != REVERSED:
        raise PreconditionError("reversed Iter required")
    cnf = cnf_of(F)
    k = len(cnf)
    alpha_t = tuple(int(a) for a in alpha)
    if k < 2:
        raise PreconditionError("need at least two axioms")
    if not all(evaluate(c, alpha_t) for c in cnf):
        raise PreconditionError("alpha must satisfy F")
    found = _find_pivot(cnf[k - 2], cnf[k - 1])
    if found is None:
        raise PreconditionError("the last two axioms are not resolvable")
    q1, q2, x = found
    c1, c2 = cnf[k + q1], cnf[k + q2]
    D = clause((set(c1) - {x}) | (set(c2) - {-x}))

    def node(i: int) -> Node:
        s = S.succ(i)
        if s == i:
            return Node(D, "res", q1, q2, x)
        if s > i or S.succ(s) == s:
            return Node((), "wk", -k)
        return Node((), "wk", s)

    inst = WrongProofInstance(cnf, BlockOracle(S.N, node, "nodes"), alpha_t)

    def back(ans: tuple[str, int]) -> int:
        kind, j = ans
        if kind != "node":
            raise ValueError("alpha satisfies F, so only node answers can occur")
        return j

    return inst, back


class InfeasibleParameters(PreconditionError):
    """A counting premise fails; the message names the failing inequality."""


def to_mixed_radix(digits: Sequence[int], radices: Sequence[int]) -> int:
    """Most significant digit first."""
    x = 0
    for d, r in zip(digits, radices, strict=True):
        if not 0 <= d < r:
            raise ValueError(f"digit {d} outside radix {r}")
        x = x * r + d
    return x


def from_mixed_radix(x: int, radices: Sequence[int]) -> tuple[int, ...]:
    out = []
    for r in reversed(radices):
        x, d = divmod(x, r)
        out.append(d)
    if x:
        raise ValueError("value exceeds the mixed-radix range")
    return tuple(reversed(out))
