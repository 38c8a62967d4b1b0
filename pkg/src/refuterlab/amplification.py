"""Stretch amplification for retraction pigeonhole instances over Iter.

A chain of ``d`` levels ``f_k : [D_k] -> [D_{k+1}]`` composes into
``f' = f_{d-1} o ... o f_0``.  The inner instance for ``y`` walks the levels
downward, one Iter stage per level, and the stages are glued into a single
Iter instance by ``compose_sequential_iter``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Sequence

from .oracle import BlockOracle
from .pls import (
    FORWARD,
    ITER,
    IterInstance,
    PreconditionError,
    PromiseViolation,
    RwPhpInstance,
    trivial_iter,
    verify_iter,
)


class DependencyCycle(PreconditionError):
    pass


def as_forward(inst: IterInstance) -> tuple[IterInstance, Callable[[int], int]]:
    """Reflects a reversed instance so that solutions correspond index-wise via ``x -> N-1-x``."""
    if inst.orientation == FORWARD:
        return inst, lambda x: x
    N = inst.N
    S = BlockOracle(N, lambda x: N - 1 - inst.succ(N - 1 - x), "S")

    def back(x: int) -> int:
        if x == 0 and inst.succ(N - 1) == N - 1:
            raise PromiseViolation(f"reversed Iter promise S({N - 1}) < {N - 1} violated")
        return N - 1 - x

    return IterInstance(S, FORWARD), back


@dataclass(frozen=True)
class IterChainSpec:
    """``stage(j, answers)`` builds stage ``j`` from the verified answers of stages ``< j``.

    ``depends[j]`` lists the stages that stage ``j`` reads; every entry must be ``< j``.
    Stage instances shorter than ``lengths[j]`` are padded with self-loops.
    """

    lengths: tuple[int, ...]
    stage: Callable[[int, tuple[int, ...]], IterInstance]
    depends: tuple[tuple[int, ...], ...] | None = None

    @property
    def d(self) -> int:
        return len(self.lengths)


@dataclass(frozen=True)
class ComposedIter:
    iter: IterInstance
    decode: Callable[[int], tuple[int, ...]]
    spec: IterChainSpec

    def index(self, j: int, prefix: Sequence[int], x: int) -> int:
        return _index(self.spec.lengths, j, prefix, x)


def _block_sizes(lengths: Sequence[int]) -> list[int]:
    out, prod = [], 1
    for L in lengths:
        out.append(prod * L)
        prod *= L
    return out


def _index(lengths: Sequence[int], j: int, prefix: Sequence[int], x: int) -> int:
    off = sum(_block_sizes(lengths)[:j])
    code = 0
    for k, a in enumerate(prefix):
        code = code * lengths[k] + a
    return off + code * lengths[j] + x


def _locate(lengths: Sequence[int], idx: int) -> tuple[int, tuple[int, ...], int]:
    for j, size in enumerate(_block_sizes(lengths)):
        if idx < size:
            code, x = divmod(idx, lengths[j])
            prefix = []
            for k in range(j - 1, -1, -1):
                code, a = divmod(code, lengths[k])
                prefix.append(a)
            return j, tuple(reversed(prefix)), x
        idx -= size
    raise IndexError(idx)


def _padded(inst: IterInstance, length: int) -> IterInstance:
    fwd, _ = as_forward(inst)
    if fwd.N > length:
        raise PreconditionError(f"stage instance of length {fwd.N} exceeds the declared {length}")
    if fwd.N == length:
        return fwd
    return IterInstance(BlockOracle(length, lambda x: fwd.succ(x) if x < fwd.N else x, "S"), FORWARD)


def compose_sequential_iter(spec: IterChainSpec) -> ComposedIter:
    """One forward Iter over ``(stage, committed prefix, node)``, stage-major.

    Stage solutions jump to node ``0`` of the next stage; last-stage solutions
    point to ``0`` and so become the only composed solutions.  Entries whose
    prefix fails stagewise verification are self-loops.
    """
    lengths = tuple(spec.lengths)
    if not lengths or any(L < 1 for L in lengths):
        raise PreconditionError("stage lengths must be positive")
    if spec.depends is not None:
        for j, deps in enumerate(spec.depends):
            if any(not 0 <= k < j for k in deps):
                raise DependencyCycle(f"stage {j} depends on {list(deps)}; only earlier stages are allowed")
    d = len(lengths)
    total = sum(_block_sizes(lengths))

    def stage(j: int, prefix: tuple[int, ...]) -> IterInstance:
        return _padded(spec.stage(j, prefix), lengths[j])

    def prefix_ok(prefix: tuple[int, ...]) -> bool:
        return all(verify_iter(stage(k, prefix[:k]), prefix[k]) for k in range(len(prefix)))

    def S(idx: int) -> int:
        j, prefix, x = _locate(lengths, idx)
        if not prefix_ok(prefix):
            return idx
        inst = stage(j, prefix)
        if verify_iter(inst, x):
            if j == d - 1:
                return 0
            return _index(lengths, j + 1, prefix + (x,), 0)
        return _index(lengths, j, prefix, inst.succ(x))

    def decode(idx: int) -> tuple[int, ...]:
        j, prefix, x = _locate(lengths, idx)
        if j != d - 1:
            raise ValueError(f"index {idx} lies in stage {j}, not the last stage")
        return prefix + (x,)

    return ComposedIter(IterInstance(BlockOracle(total, S, "S"), FORWARD), decode, spec)


# ---------------------------------------------------------------------------
# level chains


@dataclass(frozen=True)
class Level:
    """``f_k`` and its downward step.

    ``down(y)`` returns ``("det", y_k)`` when the preimage is forced, or
    ``("inner", y_base, relabel)`` when it comes from ``g_{y_base}`` of the
    input instance, with ``y_k = relabel(g_{y_base}(ans))``.
    """

    dom: int
    cod: int
    f: Callable[[int], int]
    down: Callable[[int], tuple]


@dataclass(frozen=True)
class Amplified:
    rw: RwPhpInstance
    map_solution: Callable[[tuple[int, Any]], tuple[int, Any]]
    levels: tuple[Level, ...]
    composed: Callable[[int], ComposedIter]


def _chain(inst: RwPhpInstance, levels: Sequence[Level], inner_length: int) -> Amplified:
    d = len(levels)
    M, N_out = levels[0].dom, levels[-1].cod

    def f_from(k: int, x: int) -> int:
        for lev in levels[k:]:
            x = lev.f(x)
        return x

    def native(y_base: int, ans: int) -> int:
        return as_forward(inst.inner(y_base))[1](ans)

    def walk(y: int, answers: Sequence[int]) -> list[int]:
        """``[y_d, y_{d-1}, ...]`` as far as the answers reach."""
        ys = [y]
        for s, ans in enumerate(answers):
            lev = levels[d - 1 - s]
            step = lev.down(ys[-1])
            if step[0] == "det":
                ys.append(step[1])
            else:
                ys.append(step[2](inst.label(step[1], native(step[1], ans))))
        return ys

    def composed(y: int) -> ComposedIter:
        def stage(s: int, prefix: tuple[int, ...]) -> IterInstance:
            ys = walk(y, prefix)
            step = levels[d - 1 - s].down(ys[-1])
            if step[0] == "det":
                return trivial_iter()
            return inst.inner(step[1])

        return compose_sequential_iter(IterChainSpec(tuple([inner_length] * d), stage, tuple(tuple(range(s)) for s in range(d))))

    cache: dict[int, ComposedIter] = {}

    def comp(y: int) -> ComposedIter:
        if y not in cache:
            cache[y] = composed(y)
        return cache[y]

    def g(y: int, ans: int) -> int:
        return walk(y, comp(y).decode(ans))[-1]

    rw = RwPhpInstance(M, N_out, BlockOracle(M, lambda x: f_from(0, x), "f"), lambda y: comp(y).iter, g, ITER, general=True, checked=inst.checked)

    def back(sol: tuple[int, Any]) -> tuple[int, Any]:
        y, ans = sol
        answers = comp(y).decode(ans)
        ys = walk(y, answers)  # ys[s] = y_{d-s}
        for k in range(d):
            y_k, y_k1 = ys[d - k], ys[d - k - 1]
            if f_from(k, y_k) != y and f_from(k + 1, y_k1) == y:
                step = levels[k].down(y_k1)
                if step[0] != "inner":
                    raise AssertionError("forced steps never break the chain")
                return (step[1], native(step[1], answers[d - 1 - k]))
        raise ValueError(f"{sol!r} is not a solution of the amplified instance")

    return Amplified(rw, back, tuple(levels), comp)


def _inner_length(inst: RwPhpInstance, inner_length: int | None) -> int:
    if inner_length is not None:
        return inner_length
    return max(inst.inner(y).N for y in range(inst.N))


def amplify_small_stretch(inst: RwPhpInstance, eps: Fraction | float | str, *, inner_length: int | None = None) -> Amplified:
    """``M -> (1+eps)M`` into ``M -> 2M``; ``1/eps`` and ``eps*M`` must be integers."""
    eps = Fraction(eps)
    M = inst.M
    if eps <= 0 or (1 / eps).denominator != 1 or (eps * M).denominator != 1:
        raise PreconditionError(f"need 1/eps and eps*M integral, got eps={eps}, M={M}")
    d, step = int(1 / eps), int(eps * M)
    if inst.N != M + step:
        raise PreconditionError(f"input must map [M] to [(1+eps)M] = [{M + step}], got N={inst.N}")
    N = inst.N
    f = inst.f

    def level(k: int) -> Level:
        def fk(x: int) -> int:
            return f[x] if x < M else x + step

        def down(y: int) -> tuple:
            if y >= N:
                return ("det", y - step)
            return ("inner", y, lambda lab: lab)

        return Level(M + k * step, M + (k + 1) * step, fk, down)

    L = _inner_length(inst, inner_length)
    out = _chain(inst, [level(k) for k in range(d)], L)
    if out.rw.N != 2 * M:
        raise AssertionError("small-stretch chain must end at 2M")
    return out


def amplify_large_stretch(inst: RwPhpInstance, N: int, *, inner_length: int | None = None) -> Amplified:
    """``M -> 2M`` into ``M -> 2^d M`` with ``2^d M >= N`` (``N`` padded upward)."""
    M = inst.M
    if inst.N != 2 * M:
        raise PreconditionError("input must map [M] to [2M]")
    if N <= M:
        raise PreconditionError("target N must exceed M")
    d = max(1, math.ceil(math.log2(N / M)))
    while M * 2 ** (d - 1) >= N and d > 1:
        d -= 1
    while M * 2**d < N:
        d += 1
    f = inst.f

    def level(k: int) -> Level:
        def fk(x: int) -> int:
            x0, x1 = divmod(x, M)
            return x0 * 2 * M + f[x1]

        def down(y: int) -> tuple:
            y0, y1 = divmod(y, 2 * M)
            return ("inner", y1, lambda lab, y0=y0: y0 * M + lab)

        return Level(M * 2**k, M * 2 ** (k + 1), fk, down)

    return _chain(inst, [level(k) for k in range(d)], _inner_length(inst, inner_length))


def amplify(inst: RwPhpInstance, eps: Fraction | float | str, N: int) -> tuple[RwPhpInstance, Callable[[tuple[int, Any]], tuple[int, Any]]]:
    """Small stretch then large stretch; the solution map composes both."""
    a = amplify_small_stretch(inst, eps)
    b = amplify_large_stretch(a.rw, N)
    return b.rw, lambda sol: a.map_solution(b.map_solution(sol))
