from __future__ import annotations

import itertools
import random
from fractions import Fraction

import pytest

import oracles as O
from refuterlab.amplification import (
    DependencyCycle,
    IterChainSpec,
    amplify,
    amplify_large_stretch,
    amplify_small_stretch,
    as_forward,
    compose_sequential_iter,
)
from refuterlab.oracle import BlockOracle
from refuterlab.pls import FORWARD, ITER, REVERSED, IterInstance, PreconditionError, PromiseViolation, RwPhpInstance, iter_solutions, rwphp_solutions, verify_rwphp


def _tables(max_len: int):
    for L in range(1, max_len + 1):
        yield from itertools.product(range(L), repeat=L)


def _chain_oracle(d: int, table_of) -> set[tuple[int, ...]]:
    out = set()

    def rec(prefix):
        if len(prefix) == d:
            out.add(prefix)
            return
        for x in O.iter_solutions(table_of(len(prefix), prefix), FORWARD):
            rec(prefix + (x,))

    rec(())
    return out


def test_compose_single_stage_is_the_stage():
    for S in _tables(4):
        comp = compose_sequential_iter(IterChainSpec((len(S),), lambda j, p, S=S: IterInstance.table(S, FORWARD)))
        got = {comp.decode(x) for x in iter_solutions(comp.iter)}
        assert got == {(x,) for x in O.iter_solutions(S, FORWARD)}


@pytest.mark.parametrize("d", [2, 3])
def test_compose_dependent_stages_match_oracle(d):
    rng = random.Random(d)
    for _ in range(150):
        L = rng.randint(1, 3)
        tables: dict[tuple[int, ...], tuple[int, ...]] = {}

        def table_of(j, prefix, L=L, tables=tables):
            if prefix not in tables:
                n = rng.randint(1, L)
                tables[prefix] = tuple(rng.randrange(n) for _ in range(n))
            return tables[prefix]

        spec = IterChainSpec(tuple([L] * d), lambda j, p: IterInstance.table(table_of(j, p), FORWARD), tuple(tuple(range(j)) for j in range(d)))
        comp = compose_sequential_iter(spec)
        got = {comp.decode(x) for x in iter_solutions(comp.iter)}
        assert got and got == _chain_oracle(d, table_of)


def test_compose_index_algebra():
    lengths = (2, 3, 2)
    comp = compose_sequential_iter(IterChainSpec(lengths, lambda j, p: IterInstance.table([0], FORWARD)))
    seen = []
    for j in range(3):
        for prefix in itertools.product(*(range(L) for L in lengths[:j])):
            for x in range(lengths[j]):
                seen.append(comp.index(j, prefix, x))
    assert sorted(seen) == list(range(comp.iter.N)) == list(range(2 + 6 + 12))
    assert comp.index(1, (1,), 2) == 2 + 3 + 2
    with pytest.raises(ValueError):
        comp.decode(0)


def test_compose_pads_short_stages_with_self_loops():
    comp = compose_sequential_iter(IterChainSpec((3,), lambda j, p: IterInstance.table([0], FORWARD)))
    assert [comp.iter.succ(x) for x in range(3)] == [0, 1, 2]
    with pytest.raises(PreconditionError):
        compose_sequential_iter(IterChainSpec((1,), lambda j, p: IterInstance.table([0, 0], FORWARD))).iter.succ(0)


def test_compose_rejects_forward_dependencies():
    with pytest.raises(DependencyCycle):
        compose_sequential_iter(IterChainSpec((1, 1), lambda j, p: IterInstance.table([0]), ((1,), ())))
    with pytest.raises(PreconditionError):
        compose_sequential_iter(IterChainSpec((), lambda j, p: IterInstance.table([0])))


def test_as_forward_reflects_reversed_solutions():
    for S in _tables(5):
        if len(S) < 2 or S[-1] == len(S) - 1:
            continue
        fwd, back = as_forward(IterInstance.table(S, REVERSED))
        assert {back(x) for x in iter_solutions(fwd)} == O.iter_solutions(S, REVERSED)
    fwd, back = as_forward(IterInstance.table([0, 1], REVERSED))
    with pytest.raises(PromiseViolation):
        back(0)


def test_small_stretch_exhaustive_one_node_inner():
    total = 0
    for f in itertools.product(range(3), repeat=2):
        for g in itertools.product(range(2), repeat=3):
            rw = RwPhpInstance(
                2, 3, BlockOracle.from_list(list(f)), lambda y: IterInstance.table([0], FORWARD), lambda y, a, g=g: g[y], ITER, general=True
            )
            amp = amplify_small_stretch(rw, Fraction(1, 2))
            assert (amp.rw.M, amp.rw.N) == (2, 4)
            for sol in rwphp_solutions(amp.rw):
                assert verify_rwphp(rw, amp.map_solution(sol))
                total += 1
    assert total > 0


def test_small_stretch_preconditions():
    rw = RwPhpInstance(2, 3, BlockOracle.from_list([0, 1]), lambda y: IterInstance.table([0]), lambda y, a: 0, ITER, general=True)
    with pytest.raises(PreconditionError):
        amplify_small_stretch(rw, Fraction(2, 3))
    with pytest.raises(PreconditionError):
        amplify_small_stretch(rw, Fraction(1, 4))
    with pytest.raises(PreconditionError):
        amplify_small_stretch(rw, 0)


@pytest.mark.parametrize("N,levels", [(2, 1), (3, 2), (4, 2), (8, 3)])
def test_large_stretch_m1(N, levels):
    total = 0
    for f0 in range(2):
        for tabs in itertools.product(list(_tables(2)), repeat=2):
            rw = RwPhpInstance(1, 2, BlockOracle.from_list([f0]), lambda y, tabs=tabs: IterInstance.table(tabs[y], FORWARD), lambda y, a: 0, ITER)
            amp = amplify_large_stretch(rw, N)
            assert len(amp.levels) == levels and amp.rw.N == 2**levels >= N
            for sol in rwphp_solutions(amp.rw):
                assert verify_rwphp(rw, amp.map_solution(sol))
                total += 1
    assert total > 0


def test_large_stretch_preconditions():
    rw = RwPhpInstance(1, 2, BlockOracle.from_list([0]), lambda y: IterInstance.table([0]), lambda y, a: 0, ITER)
    with pytest.raises(PreconditionError):
        amplify_large_stretch(rw, 1)
    odd = RwPhpInstance(1, 3, BlockOracle.from_list([0]), lambda y: IterInstance.table([0]), lambda y, a: 0, ITER, general=True)
    with pytest.raises(PreconditionError):
        amplify_large_stretch(odd, 4)


def test_pipeline_mixed_orientations():
    rng = random.Random(1)
    total = 0
    for _ in range(150):
        f = [rng.randrange(3) for _ in range(2)]
        tabs = [[rng.randrange(2) for _ in range(2)] for _ in range(3)]
        ori = rng.choice([FORWARD, REVERSED])
        if ori == REVERSED:
            for t in tabs:
                t[1] = 0
        labels = [[rng.randrange(2) for _ in range(2)] for _ in range(3)]
        rw = RwPhpInstance(
            2, 3, BlockOracle.from_list(f), lambda y, tabs=tabs, ori=ori: IterInstance.table(tabs[y], ori), lambda y, a, labels=labels: labels[y][a], ITER, general=True
        )
        out, back = amplify(rw, "1/2", 8)
        assert out.N == 8
        for sol in rwphp_solutions(out):
            assert verify_rwphp(rw, back(sol))
            total += 1
    assert total > 0


def test_amplified_inner_grows_with_levels():
    rw = RwPhpInstance(1, 2, BlockOracle.from_list([0]), lambda y: IterInstance.table([0, 0]), lambda y, a: 0, ITER)
    sizes = [amplify_large_stretch(rw, N).rw.inner(0).N for N in (2, 4, 8)]
    assert sizes == [2, 2 + 4, 2 + 4 + 8]
