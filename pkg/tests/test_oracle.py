from __future__ import annotations

import itertools

import pytest

from refuterlab.oracle import (
    BlockOracle,
    BudgetExceeded,
    MultiMeter,
    OracleIndexError,
    Reduction,
    SchemaMismatch,
    compose,
    identity_reduction,
    metered_view,
)


def test_from_list_roundtrip():
    o = BlockOracle.from_list([3, 1, 4, 1], "x")
    assert len(o) == 4
    assert o.to_list() == [3, 1, 4, 1]
    assert list(o) == [3, 1, 4, 1]
    assert o.materialize().to_list() == o.to_list()


@pytest.mark.parametrize("bad", [-1, 4, 1.0, "0"])
def test_out_of_range_index_raises(bad):
    o = BlockOracle.from_list([0, 0, 0, 0])
    with pytest.raises(OracleIndexError):
        o[bad]


def test_negative_length_rejected():
    with pytest.raises(ValueError):
        BlockOracle(-1, lambda i: i)


def test_lazy_oracle_fetches_on_demand():
    calls = []
    o = BlockOracle(10**12, lambda i: calls.append(i) or i * i)
    assert o[10**11] == 10**22
    assert calls == [10**11]


def test_meter_counts_distinct_blocks():
    view, meter = metered_view(BlockOracle.from_list(list(range(5))))
    view[1], view[1], view[3]
    assert meter.block_depth == 2
    assert meter.total_fetches == 3
    meter.reset()
    assert meter.block_depth == 0 and meter.total_fetches == 0


def test_multimeter_sums_depths():
    mm = MultiMeter()
    a = mm.wrap("a", BlockOracle.from_list([0, 1]))
    b = mm.wrap("b", BlockOracle.from_list([0, 1]))
    a[0], a[1], b[0]
    assert mm.block_depth == 3
    mm.reset()
    assert mm.total_fetches == 0


def test_identity_compose_identity():
    inp = BlockOracle.from_list([7, 8, 9, 10])
    r = compose(identity_reduction(), identity_reduction())
    assert r.output(inp).to_list() == [7, 8, 9, 10]
    assert r.block_budget == 1
    assert r.map_solution(inp, 2) == 2


def _window(k: int) -> Reduction:
    """Block ``j`` is the sum of input blocks ``j .. j+k-1`` (cyclic)."""
    return Reduction(
        out_length=len,
        out_block=lambda inp, j: sum(inp[(j + d) % len(inp)] for d in range(k)),
        map_solution=lambda inp, sol: sol,
        block_budget=k,
        name=f"window{k}",
    )


def test_composed_budget_is_product_and_respected():
    r = compose(_window(2), _window(3))
    assert r.block_budget == 6
    for L in range(1, 7):
        for vals in itertools.product(range(2), repeat=L):
            assert r.check_budget(BlockOracle.from_list(vals)) <= 6


def test_compose_maps_solution_back_on_chain():
    # P: find the index of the largest block; Q/R: same problem on shifted data.
    shift = Reduction(
        out_length=len,
        out_block=lambda inp, j: inp[(j + 1) % len(inp)],
        map_solution=lambda inp, sol: (sol + 1) % len(inp),
        block_budget=1,
    )
    r = compose(shift, shift)
    inp = BlockOracle.from_list([5, 9, 2])
    out = r.output(inp).to_list()
    sol = out.index(max(out))
    assert inp[r.map_solution(inp, sol)] == 9


def test_budget_violation_raises():
    liar = Reduction(len, lambda inp, j: inp[0] + inp[1], lambda inp, s: s, block_budget=1, name="liar")
    with pytest.raises(BudgetExceeded):
        liar.check_budget(BlockOracle.from_list([1, 2, 3]))


def test_schema_mismatch():
    a = Reduction(len, lambda i, j: i[j], lambda i, s: s, 1, target="iter")
    b = Reduction(len, lambda i, j: i[j], lambda i, s: s, 1, source="rwphp")
    with pytest.raises(SchemaMismatch):
        compose(a, b)
