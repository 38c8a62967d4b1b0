from __future__ import annotations

import random

import networkx as nx
import pytest

from refuterlab.formulas import gen_ephp, gen_tseitin
from refuterlab.planted import planted_proof
from refuterlab.pls import REVERSED, IterInstance, iter_to_wrongproof
from refuterlab.report import (
    MeterReport,
    chain_cnf,
    fit_linear,
    gadget_depth_fit,
    meter_gadget,
    meter_iter_to_width_refuter,
    meter_iter_to_wrongproof,
    meter_walk,
    meter_wrongproof_to_iter,
    plot_depth_fit,
    random_rwphp,
)
from refuterlab.resolution import RefutationInstance
from refuterlab.width_refuters import ephp_width_refuter_to_iter

K4 = gen_tseitin(nx.complete_graph(4), [1, 0, 0, 0]).cnf


def test_meter_report_json():
    rep = MeterReport("x", 3, 10, 2)
    assert not rep.within_budget
    assert rep.to_json() == {"name": "x", "block_depth_max": 3, "total_fetches": 10, "declared_budget": 2, "within_budget": False}
    assert MeterReport("y", 9, 0, None).within_budget


def test_hardness_meters():
    S = IterInstance.table([0, 0, 1, 1, 3, 2], REVERSED)
    rep = meter_iter_to_width_refuter(S, K4)
    assert rep.within_budget and 1 <= rep.block_depth_max <= 2
    assert len(rep.per_entry) >= 6
    assert meter_iter_to_wrongproof(S, [(1, 2), (-1, 2)], (0, 1)).block_depth_max <= 2
    wp, _ = iter_to_wrongproof(S, [(1, 2), (-1, 2)], (0, 1))
    assert meter_wrongproof_to_iter(wp).block_depth_max <= 2


def test_walk_meter_within_budget():
    rng = random.Random(0)
    E = gen_ephp(4)
    inst = RefutationInstance.from_nodes(E, planted_proof(rng, E, 40, 8, 3))
    rep = meter_walk("ephp", inst, lambda R: ephp_width_refuter_to_iter(R, 4))
    assert rep.declared_budget == 3 and rep.within_budget


def test_chain_cnf():
    assert chain_cnf(3) == ((1,), (-1, 2), (-2, 3), (-3,))


def test_gadget_meter_reads_f():
    rep = meter_gadget(random_rwphp(random.Random(1), 2, 3), chain_cnf(4))
    assert rep.fetch_max >= rep.block_depth_max > 0


def test_fit_linear_exact():
    slope, intercept, r2 = fit_linear([1, 2, 3], [3, 5, 7])
    assert (slope, intercept, r2) == pytest.approx((2.0, 1.0, 1.0))
    assert fit_linear([1, 2], [4, 4])[2] == 1.0


def test_gadget_depth_fit_is_linear(tmp_path):
    fit = gadget_depth_fit(range(3, 7), trials=2)
    assert fit.r2 > 0.99 and fit.slope > 0
    assert fit.bound(6) == pytest.approx(fit.slope * 6 + fit.intercept)
    path = tmp_path / "fit.png"
    plot_depth_fit(fit, str(path))
    assert path.stat().st_size > 0
