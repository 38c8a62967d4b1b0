from __future__ import annotations

import itertools
import random

import networkx as nx
import pytest

from refuterlab.formulas import expansion, gen_php, gen_tseitin, xor_lift
from refuterlab.oracle import BlockOracle
from refuterlab.planted import planted_proof
from refuterlab.pls import FORWARD, ITER, IterInstance, PreconditionError, RwPhpInstance, rwphp_solutions, verify_rwphp
from refuterlab.report import chain_cnf, meter_gadget, meter_php_size, random_rwphp
from refuterlab.resolution import KILLED, RefutationInstance, check_node, clause, invalid_nodes, tree_refutation, verify_refutation
from refuterlab.size_refuters import (
    InfeasibleParameters,
    PhpCodec,
    TseitinCodec,
    XorCodec,
    php_default_W_int,
    php_size_refuter_to_rwphp,
    php_union_bound,
    rwphp_to_size_refuter,
    tseitin_size_refuter_to_rwphp,
    tseitin_union_bound,
    materialize_gadget,
    xor_bound,
    xorlift_size_refuter_to_rwphp,
)
from refuterlab.width_refuters import universal_width_refuter_to_iter


def _random_clause(rng: random.Random, nv: int, k: int) -> tuple[int, ...]:
    return clause(v if rng.random() < 0.5 else -v for v in rng.sample(range(1, nv + 1), k))


# ---------------------------------------------------------------------------
# PHP codec


def test_php_codec_radices():
    codec = PhpCodec(4, 2, 3)
    assert codec.seq_radices == (20, 12)
    assert codec.bad_radices == (17, 9)
    assert codec.seq_size == 240 and codec.bad_size == 153


def test_php_codec_rejects_nonpositive_factor():
    with pytest.raises(InfeasibleParameters):
        PhpCodec(3, 2, 6)
    with pytest.raises(InfeasibleParameters):
        PhpCodec(3, 3, 0)


def test_php_decode_is_a_matching():
    codec = PhpCodec(4, 3, 0)
    seen = set()
    for s in itertools.product(*(range(r) for r in codec.seq_radices)):
        pairs = codec.decode(s).pairs
        assert len({u for u, _ in pairs}) == len({v for _, v in pairs}) == 3
        assert codec.seq_of_pairs(pairs) == s
        seen.add(pairs)
    assert len(seen) == codec.seq_size


def test_php_seq_bad_roundtrip_width_three():
    rng = random.Random(0)
    codec = PhpCodec(4, 1, 3)
    for _ in range(400):
        c = _random_clause(rng, 20, rng.randint(0, 3))
        images = {}
        for s0 in range(codec.seq_size):
            b = codec.seq_to_bad(c, (s0,))
            if b is not None:
                assert b not in images
                images[b] = (s0,)
                assert codec.bad_to_seq(c, b) == (s0,)
        for b0 in range(codec.bad_size):
            if (b0,) not in images:
                assert codec.bad_to_seq(c, (b0,)) is None


def test_php_bad_digit_range_checked():
    with pytest.raises(ValueError):
        PhpCodec(4, 1, 3).bad_to_seq((), (17,))
    with pytest.raises(ValueError):
        PhpCodec(4, 1, 3).decode((20,))


def test_matching_restriction_kills_and_shrinks():
    rho = PhpCodec(3, 1, 0).decode((0,))  # pigeon 0 -> hole 0
    assert rho.pairs == ((0, 0),)
    assert rho.restrict(clause([1])) is KILLED
    assert rho.value(1) == 1 and rho.value(2) == 0 and rho.value(4) == 0 and rho.value(5) is None


def test_php_union_bound_vectors():
    rep = php_union_bound(4, 1, 18, 1)
    assert rep.holds and (rep.lhs, rep.rhs) == (4, 20)
    rep = php_union_bound(4, 1, 3, 1)
    assert not rep.holds
    rep = php_union_bound(3, 2, 7, 1)
    assert rep.nonpositive_factors == (1,)


@pytest.mark.parametrize("n,t,L", [(4, 1, 1), (10, 1, 4), (20, 2, 8), (40, 4, 2**10)])
def test_php_default_W_int_is_least(n, t, L):
    W = php_default_W_int(n, t, L)
    q = (n + 1) ** 2
    assert (q - W) ** t * 2 * L <= q**t
    assert W == 0 or (q - W + 1) ** t * 2 * L > q**t


# ---------------------------------------------------------------------------
# PHP size reduction


def test_php_size_planted_flaws_map_to_invalid_nodes():
    rng = random.Random(1)
    F = gen_php(6, 5)
    found = 0
    for _ in range(10):
        inst = RefutationInstance.from_nodes(F, planted_proof(rng, F, 30, rng.randint(2, 6), 4))
        red = php_size_refuter_to_rwphp(inst, 5, 1, 4, checked=False)
        for sol in rwphp_solutions(red.rw):
            assert not check_node(inst, red.map_solution(sol))
            found += 1
    assert found > 0


def test_php_size_valid_proof_has_no_solution():
    F = gen_php(6, 5)
    inst = RefutationInstance.from_nodes(F, tree_refutation(F))
    red = php_size_refuter_to_rwphp(inst, 5, 1, 4, checked=False)
    assert red.rw.N == 30
    assert not list(rwphp_solutions(red.rw))


def test_php_size_preconditions():
    F = gen_php(5, 4)
    inst = RefutationInstance.from_nodes(F, planted_proof(random.Random(2), F, 20, 3, 3))
    with pytest.raises(PreconditionError):
        php_size_refuter_to_rwphp(inst, 4, 1, 3)
    F = gen_php(6, 5)
    inst = RefutationInstance.from_nodes(F, planted_proof(random.Random(2), F, 30, 3, 3))
    with pytest.raises(InfeasibleParameters):
        php_size_refuter_to_rwphp(inst, 5, 1, 4)


def test_php_size_metering():
    rng = random.Random(3)
    F = gen_php(6, 5)
    inst = RefutationInstance.from_nodes(F, planted_proof(rng, F, 30, 4, 4))
    reps = meter_php_size(inst, 5, 1, 4, checked=False)
    assert reps["f"].block_depth_max <= 1
    assert reps["I"].block_depth_max <= 3
    assert reps["g"].block_depth_max <= 2


# ---------------------------------------------------------------------------
# XOR lifting

BASE = ((1, 2), (-1, 2), (1, -2), (-1, -2), (3,))


def test_xor_codec_sizes_and_compression():
    codec = XorCodec(3, 2)
    assert (codec.standard_size, codec.short_size) == (64, 36)
    wide = xor_lift([(1, 2)])[0]
    assert codec.compressible(wide)
    assert codec.radices(xor_lift([(3,)])[0]) == [4, 4, 2]
    assert not codec.compressible(())


def test_xor_codec_short_roundtrip():
    codec = XorCodec(3, 2)
    for lifted in xor_lift(BASE):
        seen = set()
        for y in range(codec.standard_size):
            ch = codec.choices(y)
            assert codec.standard(ch) == y
            code = codec.short(lifted, ch)
            if code is None:
                assert codec.restrict(lifted, ch) is KILLED
                continue
            assert code not in seen
            seen.add(code)
            assert codec.unshort(lifted, code) == ch
        assert codec.unshort(lifted, -1) is None


def test_xor_restrict_yields_base_clause_up_to_sign():
    codec = XorCodec(2, 1)
    for lifted in xor_lift([(1, -2)]):
        for y in range(codec.standard_size):
            rc = codec.restrict(lifted, codec.choices(y))
            if rc is not KILLED:
                assert sorted(abs(l) for l in rc) == [1, 2]


def test_xor_bound_vectors():
    assert xor_bound(4, 2, 1).holds
    assert not xor_bound(4, 0, 1).holds


@pytest.mark.parametrize("w", [2, 3])
def test_xor_planted_flaws_map_to_invalid_nodes(w):
    rng = random.Random(4 + w)
    Fl = xor_lift(BASE)
    found = 0
    for _ in range(20):
        inst = RefutationInstance.from_nodes(Fl, planted_proof(rng, Fl, 6, rng.randint(2, 6), 4))
        red = xorlift_size_refuter_to_rwphp(inst, BASE, w, checked=False)
        for sol in rwphp_solutions(red.rw):
            assert not check_node(inst, red.map_solution(sol))
            found += 1
    assert found > 0
    inst = RefutationInstance.from_nodes(Fl, tree_refutation(Fl))
    assert not list(rwphp_solutions(xorlift_size_refuter_to_rwphp(inst, BASE, w, checked=False).rw))


def test_xor_with_universal_base_walk():
    rng = random.Random(6)
    Fb = gen_php(3, 2)
    Fl = xor_lift(Fb)
    found = 0
    for _ in range(3):
        inst = RefutationInstance.from_nodes(Fl, planted_proof(rng, Fl, 12, rng.randint(2, 4), 3))
        red = xorlift_size_refuter_to_rwphp(
            inst, Fb, 2, base=lambda I: universal_width_refuter_to_iter(Fb, 2, I), checked=False
        )
        for sol in rwphp_solutions(red.rw):
            assert not check_node(inst, red.map_solution(sol))
            found += 1
    assert found > 0


# ---------------------------------------------------------------------------
# Tseitin

K4 = gen_tseitin(nx.complete_graph(4), [1, 0, 0, 0])


def test_tseitin_codec_literals():
    assert [TseitinCodec.literal(k) for k in range(4)] == [1, -1, 2, -2]
    codec = TseitinCodec(K4, 2, 3)
    assert codec.seq_radices == (12, 10)
    assert codec.bad_radices == (9, 8)
    assert codec.decode((0, 0)) == {0: 1, 1: 1}


def test_tseitin_codec_roundtrip_two_rounds():
    rng = random.Random(7)
    codec = TseitinCodec(K4, 2, 3)
    for _ in range(200):
        c = _random_clause(rng, 6, rng.randint(3, 6))
        for s in itertools.product(*(range(r) for r in codec.seq_radices)):
            b = codec.seq_to_bad(c, s)
            if b is not None:
                assert codec.bad_to_seq(c, b) == s


def test_tseitin_union_bound_vector():
    rep = tseitin_union_bound(6, 1, 2, 1)
    assert (rep.lhs, rep.rhs, rep.holds) == (20, 12, False)
    assert tseitin_union_bound(40, 4, 60, 2).holds


@pytest.mark.parametrize("G", [nx.complete_graph(4), nx.complete_bipartite_graph(3, 3)])
def test_tseitin_planted_flaws_map_to_invalid_nodes(G):
    rng = random.Random(8)
    tf = gen_tseitin(G, [1] + [0] * (G.number_of_nodes() - 1))
    e = expansion(tf.edges, tf.n_vertices)
    found = 0
    for _ in range(15):
        inst = RefutationInstance.from_nodes(tf.cnf, planted_proof(rng, tf.cnf, tf.nvars, rng.randint(2, 6), 4))
        red = tseitin_size_refuter_to_rwphp(tf, inst, 1, e, checked=False)
        for sol in rwphp_solutions(red.rw):
            assert not check_node(inst, red.map_solution(sol))
            found += 1
    assert found > 0
    inst = RefutationInstance.from_nodes(tf.cnf, tree_refutation(tf.cnf))
    assert not list(rwphp_solutions(tseitin_size_refuter_to_rwphp(tf, inst, 1, e, checked=False).rw))


# ---------------------------------------------------------------------------
# rwPHP gadget


def test_gadget_invalid_iff_rwphp_solvable():
    rng = random.Random(9)
    F = gen_php(2, 1)
    for _ in range(300):
        rw = random_rwphp(rng, 2, 3)
        inst, back, gad = rwphp_to_size_refuter(rw, F)
        assert inst.nodes.to_list() == materialize_gadget(gad)
        inv = invalid_nodes(inst)
        assert bool(inv) == bool(list(rwphp_solutions(rw)))
        assert all(verify_rwphp(rw, back(i)) for i in inv)


def test_gadget_structure():
    rw = RwPhpInstance(1, 2, BlockOracle.from_list([0]), lambda y: IterInstance.table([0, 0], FORWARD), lambda y, a: 0, ITER)
    F = gen_php(2, 1)
    inst, back, gad = rwphp_to_size_refuter(rw, F)
    rep = verify_refutation(inst)
    assert inst.nodes[inst.length - 1].clause == ()
    assert gad.layout.k == (1, 1, 1)
    assert rep.ok == (not list(rwphp_solutions(rw)))
    with pytest.raises(ValueError):
        back(0)


def test_gadget_rejects_bad_shapes():
    F = gen_php(2, 1)
    rw = RwPhpInstance(1, 3, BlockOracle.from_list([0]), lambda y: IterInstance.table([0], FORWARD), lambda y, a: 0, ITER, general=True)
    with pytest.raises(PreconditionError):
        rwphp_to_size_refuter(rw, F)
    tabs = ([0], [0, 0])
    rw = RwPhpInstance(1, 2, BlockOracle.from_list([0]), lambda y: IterInstance.table(tabs[y], FORWARD), lambda y, a: 0, ITER)
    with pytest.raises(PreconditionError):
        rwphp_to_size_refuter(rw, F)
    rw = random_rwphp(random.Random(0), 1, 2)
    with pytest.raises(PreconditionError):
        rwphp_to_size_refuter(rw, F, s_F=1)


def test_gadget_depth_grows_linearly():
    rng = random.Random(10)
    depths = [meter_gadget(random_rwphp(rng, 2, 3), chain_cnf(n)).fetch_max for n in (3, 4, 5, 6)]
    diffs = {b - a for a, b in zip(depths, depths[1:])}
    assert len(diffs) == 1 and diffs.pop() > 0
