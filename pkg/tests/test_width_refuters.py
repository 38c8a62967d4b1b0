from __future__ import annotations

import itertools
import random

import networkx as nx
import pytest

import oracles as O
from refuterlab.formulas import EphpFormula, gen_ephp, gen_php, gen_tseitin
from refuterlab.planted import planted_proof
from refuterlab.pls import FORWARD, IterInstance, PreconditionError, iter_solutions
from refuterlab.report import meter_iter_to_width_refuter, meter_walk
from refuterlab.resolution import BOTTOM, Node, RefutationInstance, clause, invalid_nodes, mono, php_var, tree_refutation
from refuterlab.width_refuters import (
    RefuterAnswer,
    cri_ephp,
    cri_mono_php,
    cri_tseitin,
    ephp_width_cap,
    ephp_width_refuter_to_iter,
    iter_to_width_refuter,
    mono_threshold,
    mono_width_refuter_to_iter,
    tseitin_width_refuter_to_iter,
    universal_width_refuter_to_iter,
    verify_ephp_answer,
    verify_invalid_answer,
    verify_mono_answer,
    verify_tseitin_answer,
)

K4 = gen_tseitin(nx.complete_graph(4), [1, 0, 0, 0])
C6 = gen_tseitin(nx.cycle_graph(6), [1, 0, 0, 0, 0, 0])


def _reversed_tables(max_len: int):
    for L in range(2, max_len + 1):
        for S in itertools.product(range(L), repeat=L):
            if S[-1] < L - 1:
                yield S


# ---------------------------------------------------------------------------
# cri measures


@pytest.mark.parametrize("n", range(1, 7))
def test_ephp_cri_bottom(n):
    assert cri_ephp(n, BOTTOM).value == n + 1
    assert max(cri_ephp(n, c).value for c in gen_ephp(n)) <= 1


def test_ephp_cri_single_y_literal():
    ef = EphpFormula(2)
    res = cri_ephp(2, clause([-ef.y(0, 0)]))
    assert res.critical_set == O.cri_from(O.ephp_critical(2), [-ef.y(0, 0)]) == {0}


def test_ephp_dense_and_sparse_agree():
    rng = random.Random(0)
    for n in (3, 4, 5):
        nv = EphpFormula(n).nvars
        for _ in range(300):
            vs = rng.sample(range(1, nv + 1), rng.randint(0, 6))
            c = clause(v if rng.random() < 0.5 else -v for v in vs)
            assert cri_ephp(n, c, "dense") == cri_ephp(n, c, "sparse")
    with pytest.raises(ValueError):
        cri_ephp(2, BOTTOM, "magic")


def test_ephp_cri_matches_oracle_random_wide():
    rng = random.Random(1)
    crit = O.ephp_critical(3)
    nv = EphpFormula(3).nvars
    for _ in range(300):
        vs = rng.sample(range(1, nv + 1), rng.randint(4, 8))
        c = clause(v if rng.random() < 0.3 else -v for v in vs)
        assert cri_ephp(3, c).critical_set == O.cri_from(crit, c)


@pytest.mark.parametrize("n", range(1, 7))
def test_mono_cri_bottom_and_axioms(n):
    assert cri_mono_php(n + 1, n, BOTTOM).value == n + 1
    F = gen_php(n + 1, n)
    assert all(cri_mono_php(n + 1, n, c).value == 1 for c in F[: n + 1])
    # hole axioms ¬x_{i,j} ∨ ¬x_{i',j}: both i and i' are critical pigeons
    for c in F[n + 1 :]:
        pigeons = {(abs(l) - 1) // n for l in c}
        assert cri_mono_php(n + 1, n, c).critical_set == pigeons


def test_mono_hole_axiom_cri_matches_oracle():
    n = 3
    crit = O.php_critical(n)
    for c in gen_php(n + 1, n)[n + 1 :]:
        assert cri_mono_php(n + 1, n, c).critical_set == O.cri_from(crit, O.mono_clause(c, n))


def test_mono_cri_single_negative_literal():
    c = clause([-php_var(0, 0, 2)])
    assert mono(c, 2) == (php_var(0, 1, 2),)
    assert cri_mono_php(3, 2, c).critical_set == O.cri_from(O.php_critical(2), O.mono_clause(c, 2))


def test_mono_threshold():
    assert mono_threshold(9) == 18
    assert (9 // 3) * (2 * 9 // 3) == 18
    assert mono_threshold(4) == 4


def test_tseitin_cri():
    assert cri_tseitin(C6, BOTTOM).value == 6
    for v, axioms in enumerate(C6.vertex_axioms):
        for c in axioms:
            assert cri_tseitin(C6, c).critical_set == {v}
    assert cri_tseitin(C6, clause([1, -1])).value == 0


# ---------------------------------------------------------------------------
# walks


def test_ephp_walk_needs_n_at_least_four():
    inst = RefutationInstance.from_nodes(gen_ephp(2), [Node.wk([], -1)])
    with pytest.raises(PreconditionError):
        ephp_width_refuter_to_iter(inst, 2)
    assert ephp_width_cap(4) == 2


def test_ephp_walk_on_hardness_instances():
    """Answers are the invalid nodes, except node 0 when no walk step reaches it."""
    E = gen_ephp(4)
    for S in _reversed_tables(5):
        proof, _ = iter_to_width_refuter(IterInstance.table(S), E, check=False)
        red = ephp_width_refuter_to_iter(proof, 4)
        answers = {red.map_solution(x).node for x in iter_solutions(red.iter)}
        inv = set(invalid_nodes(proof))
        assert answers and answers <= inv
        assert inv - answers <= {0}


def test_ephp_walk_finds_tampered_step():
    E = gen_ephp(4)
    ef = EphpFormula(4)
    m = len(E)
    a = E.index(clause([-ef.y(0, 0)]))
    b = E.index(clause([ef.y(0, 0), ef.x(0, 0), -ef.y(0, 1)]))
    nodes = [Node.res([ef.x(0, 0), -ef.y(0, 1)], b - m, a - m, ef.y(0, 0)), Node.res([], 0, a - m, ef.x(0, 0))]
    inst = RefutationInstance.from_nodes(E, nodes)
    red = ephp_width_refuter_to_iter(inst, 4)
    answers = [red.map_solution(x) for x in iter_solutions(red.iter)]
    assert answers and all(verify_ephp_answer(inst, 4, ans) for ans in answers)
    assert {ans.node for ans in answers} == {1}


def test_walk_depths_at_most_three():
    rng = random.Random(2)
    E = gen_ephp(4)
    F = gen_php(5, 4)
    for _ in range(20):
        inst = RefutationInstance.from_nodes(E, planted_proof(rng, E, EphpFormula(4).nvars, 8, 3))
        assert meter_walk("ephp", inst, lambda R: ephp_width_refuter_to_iter(R, 4)).block_depth_max <= 3
        inst = RefutationInstance.from_nodes(F, planted_proof(rng, F, 20, 8, 4))
        assert meter_walk("mono", inst, lambda R: mono_width_refuter_to_iter(R, 4)).block_depth_max <= 3
        inst = RefutationInstance.from_nodes(C6.cnf, planted_proof(rng, C6.cnf, 6, 8, 2))
        assert meter_walk("tseitin", inst, lambda R: tseitin_width_refuter_to_iter(C6, 2, R)).block_depth_max <= 3


def test_mono_walk_valid_tree_refutation_gives_fat_clause():
    F = gen_php(4, 3)
    inst = RefutationInstance.from_nodes(F, tree_refutation(F))
    red = mono_width_refuter_to_iter(inst, 3, allow_small=True)
    answers = [red.map_solution(x) for x in iter_solutions(red.iter)]
    assert answers
    assert all(a.kind == "fat" and verify_mono_answer(inst, 3, a) for a in answers)


def test_mono_walk_planted_bad_weakening():
    F = gen_php(5, 4)
    nodes = tree_refutation(gen_php(5, 4))[:0] + [Node.wk([php_var(0, 0, 4)], -len(F)), Node.wk([], 0)]
    inst = RefutationInstance.from_nodes(F, nodes)
    red = mono_width_refuter_to_iter(inst, 4)
    answers = [red.map_solution(x) for x in iter_solutions(red.iter)]
    assert answers and all(verify_mono_answer(inst, 4, a) for a in answers)
    assert RefuterAnswer("invalid", 1) in answers


def test_tseitin_walk_planted_flaw_on_c6():
    rng = random.Random(3)
    for _ in range(100):
        inst = RefutationInstance.from_nodes(C6.cnf, planted_proof(rng, C6.cnf, 6, rng.randint(2, 8), 2))
        red = tseitin_width_refuter_to_iter(C6, 2, inst)
        for x in iter_solutions(red.iter):
            ans = red.map_solution(x)
            assert ans.kind == "invalid" and verify_tseitin_answer(C6, 2, inst, ans)


def test_tseitin_walk_finds_sparse_cut_on_barbell():
    tf = gen_tseitin(nx.barbell_graph(3, 0), [1, 0, 0, 0, 0, 0], regular=False)
    bridge = [i + 1 for i, (u, v) in enumerate(tf.edges) if (u < 3) != (v < 3)]
    order = bridge + [v for v in range(1, tf.nvars + 1) if v not in bridge]
    inst = RefutationInstance.from_nodes(tf.cnf, tree_refutation(tf.cnf, order))
    red = tseitin_width_refuter_to_iter(tf, 5, inst)
    answers = [red.map_solution(x) for x in iter_solutions(red.iter)]
    assert answers
    assert all(a.kind == "cut" and verify_tseitin_answer(tf, 5, inst, a) for a in answers)


def test_tseitin_walk_requires_odd_charge():
    even = gen_tseitin(nx.cycle_graph(4), [1, 1, 0, 0])
    with pytest.raises(PreconditionError):
        tseitin_width_refuter_to_iter(even, 2, RefutationInstance.from_nodes(even.cnf, [Node.wk([], -1)]))


def test_answer_verifiers_reject_bogus():
    inst = RefutationInstance.from_nodes(C6.cnf, [Node.wk(C6.cnf[0], -len(C6.cnf)), Node.res([], -1, -2, 1)])
    assert not verify_invalid_answer(inst, RefuterAnswer("invalid", 0))
    assert not verify_invalid_answer(inst, RefuterAnswer("invalid", 7))
    assert not verify_invalid_answer(inst, RefuterAnswer("fat", 1))
    assert not verify_tseitin_answer(C6, 2, inst, RefuterAnswer("cut", 1, None))
    assert not verify_tseitin_answer(C6, 2, inst, RefuterAnswer("cut", 1, frozenset({0, 1, 2})))
    assert not verify_tseitin_answer(C6, 2, inst, RefuterAnswer("unjustified", 1))


# ---------------------------------------------------------------------------
# hardness and universal membership


def test_iter_to_width_refuter_unique_solution():
    S = (0, 0, 1, 2)
    proof, back = iter_to_width_refuter(IterInstance.table(S), K4.cnf)
    assert invalid_nodes(proof) == [1]
    assert back(1) == 1


def test_iter_to_width_refuter_padding_valid():
    S = (0, 1, 2, 3, 0)
    proof, _ = iter_to_width_refuter(IterInstance.table(S), K4.cnf)
    assert invalid_nodes(proof) == [4]


def test_iter_to_width_refuter_depth_two():
    for S in _reversed_tables(4):
        assert meter_iter_to_width_refuter(IterInstance.table(S), K4.cnf).block_depth_max <= 2


def test_iter_to_width_refuter_rejects_narrow_refutable_formula():
    # EPHP(2) has a width-3 refutation, so the precondition fails.
    with pytest.raises(PreconditionError):
        iter_to_width_refuter(IterInstance.table([0, 0]), gen_ephp(2))
    with pytest.raises(PreconditionError):
        iter_to_width_refuter(IterInstance.table([0, 0], FORWARD), K4.cnf)


def test_universal_walk_answers_are_invalid_nodes():
    rng = random.Random(4)
    E = gen_ephp(2)
    nv = EphpFormula(2).nvars
    for _ in range(60):
        inst = RefutationInstance.from_nodes(E, planted_proof(rng, E, nv, rng.randint(2, 6), 2))
        uni = universal_width_refuter_to_iter(E, 2, inst)
        capped = RefutationInstance(inst.cnf, inst.nodes, 2)
        for x in iter_solutions(uni.iter):
            assert verify_invalid_answer(capped, uni.map_solution(x))


def test_universal_walk_depth_two():
    rng = random.Random(5)
    E = gen_ephp(2)
    for _ in range(20):
        inst = RefutationInstance.from_nodes(E, planted_proof(rng, E, EphpFormula(2).nvars, 6, 2))
        rep = meter_walk("universal", inst, lambda R: universal_width_refuter_to_iter(E, 2, R), budget=2)
        assert rep.within_budget


def test_universal_requires_hard_formula():
    with pytest.raises(PreconditionError):
        universal_width_refuter_to_iter(gen_php(2, 1), 3, RefutationInstance.from_nodes(gen_php(2, 1), [Node.wk([], -1)]))
