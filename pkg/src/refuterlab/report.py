"""Block-depth metering of the reductions and the linear fit of gadget depth.

Each ``meter_*`` function rebuilds a reduction over a metered view of its
input and records the number of distinct input blocks read per output entry.
"""

from __future__ import annotations

import random
import statistics
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Iterable, Sequence

from .oracle import BlockOracle, MultiMeter, QueryMeter, metered_view
from .pls import FORWARD, IterInstance, RwPhpInstance, iter_to_wrongproof, wrongproof_to_iter
from .resolution import RefutationInstance, cnf_of
from .size_refuters import php_size_refuter_to_rwphp, rwphp_to_size_refuter
from .width_refuters import iter_to_width_refuter


@dataclass(frozen=True)
class MeterReport:
    name: str
    block_depth_max: int
    total_fetches: int
    declared_budget: int | None
    per_entry: tuple[int, ...] = field(default=(), repr=False)
    fetch_max: int = 0

    @property
    def within_budget(self) -> bool:
        return self.declared_budget is None or self.block_depth_max <= self.declared_budget

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "block_depth_max": self.block_depth_max,
            "total_fetches": self.total_fetches,
            "declared_budget": self.declared_budget,
            "within_budget": self.within_budget,
        }


def _scan(name: str, meter: QueryMeter | MultiMeter, entries: Iterable[Any], compute: Callable[[Any], Any], budget: int | None) -> MeterReport:
    depths, fetches, fetch_max = [], 0, 0
    for e in entries:
        meter.reset()
        compute(e)
        depths.append(meter.block_depth)
        fetches += meter.total_fetches
        fetch_max = max(fetch_max, meter.total_fetches)
    return MeterReport(name, max(depths, default=0), fetches, budget, tuple(depths), fetch_max)


def _metered_proof(inst: RefutationInstance) -> tuple[RefutationInstance, QueryMeter]:
    view, meter = metered_view(inst.nodes)
    return inst.with_nodes(view), meter


def meter_iter_to_width_refuter(S: IterInstance, F: Sequence[Sequence[int]]) -> MeterReport:
    view, meter = metered_view(S.S)
    proof, _ = iter_to_width_refuter(IterInstance(view, S.orientation), F, check=False)
    return _scan("iter-to-width-refuter", meter, range(proof.length), lambda i: proof.nodes[i], 2)


def meter_iter_to_wrongproof(S: IterInstance, F: Sequence[Sequence[int]], alpha: Sequence[int]) -> MeterReport:
    view, meter = metered_view(S.S)
    wp, _ = iter_to_wrongproof(IterInstance(view, S.orientation), F, alpha)
    return _scan("iter-to-wrongproof", meter, range(wp.nodes.length), lambda i: wp.nodes[i], 2)


def meter_wrongproof_to_iter(wp: Any) -> MeterReport:
    view, meter = metered_view(wp.nodes)
    red = wrongproof_to_iter(replace(wp, nodes=view))
    return _scan("wrongproof-to-iter", meter, range(red.iter.N), red.iter.succ, 2)


def meter_walk(name: str, inst: RefutationInstance, build: Callable[[RefutationInstance], Any], budget: int = 3) -> MeterReport:
    """``build`` maps a (metered) refutation instance to an ``IterReduction``."""
    proof, meter = _metered_proof(inst)
    red = build(proof)
    return _scan(name, meter, range(red.iter.N), red.iter.succ, budget)


def meter_php_size(inst: RefutationInstance, n: int, t: int, W_int: int, **kw: Any) -> dict[str, MeterReport]:
    """Depths of ``f``, the inner instances and ``g`` of the PHP size reduction."""
    proof, meter = _metered_proof(inst)
    rw = php_size_refuter_to_rwphp(proof, n, t, W_int, **kw).rw
    inner_entries = [(y, a) for y in range(rw.N) for a in range(rw.inner(y).N)]
    label_entries = [(y, a) for y in range(rw.N) for a in range(rw.inner(y).N)]

    def label(e: tuple[int, int]) -> None:
        try:
            rw.g(*e)
        except ValueError:
            pass

    return {
        "f": _scan("php-size f", meter, range(rw.M), lambda x: rw.f[x], 1),
        "I": _scan("php-size inner", meter, inner_entries, lambda e: rw.inner(e[0]).succ(e[1]), 3),
        "g": _scan("php-size g", meter, label_entries, label, 2),
    }


def _metered_rw(rw: RwPhpInstance) -> tuple[RwPhpInstance, MultiMeter]:
    mm = MultiMeter()
    f = mm.wrap("f", rw.f)
    inner_views = {y: IterInstance(mm.wrap(f"S{y}", rw.inner(y).S), rw.inner(y).orientation) for y in range(rw.N)}
    g_meter = QueryMeter()
    mm.meters["g"] = g_meter

    def g(y: int, ans: Any) -> int:
        g_meter.record((y, ans))  # type: ignore[arg-type]
        return rw.g(y, ans)

    out = RwPhpInstance(rw.M, rw.N, f, inner_views.__getitem__, g, rw.problem, rw.general, rw.checked)
    return out, mm


def meter_gadget(rw: RwPhpInstance, F: Sequence[Sequence[int]]) -> MeterReport:
    mrw, mm = _metered_rw(rw)
    inst, _, gad = rwphp_to_size_refuter(mrw, F)
    start = gad.layout.size - gad.layout.core
    return _scan("rwphp-gadget", mm, range(start, inst.length), lambda i: inst.nodes[i], None)


def chain_cnf(n: int) -> tuple[tuple[int, ...], ...]:
    """``x_1, x_1 -> x_2, ..., x_{n-1} -> x_n, not x_n``."""
    return cnf_of([(1,)] + [(-i, i + 1) for i in range(1, n)] + [(-n,)])


def random_rwphp(rng: random.Random, M: int, L_it: int) -> RwPhpInstance:
    N = 2 * M
    f = [rng.randrange(N) for _ in range(M)]
    tables = [[rng.randrange(L_it) for _ in range(L_it)] for _ in range(N)]
    labels = [[rng.randrange(M) for _ in range(L_it)] for _ in range(N)]
    return RwPhpInstance(
        M,
        N,
        BlockOracle.from_list(f, "f"),
        lambda y: IterInstance.table(tables[y], FORWARD),
        lambda y, a: labels[y][a],
    )


@dataclass(frozen=True)
class DepthFit:
    """``depths`` are per-node query counts; ``distinct`` the distinct-block depths."""

    ns: tuple[int, ...]
    depths: tuple[int, ...]
    distinct: tuple[int, ...]
    slope: float
    intercept: float
    r2: float

    def bound(self, n: int) -> float:
        return self.slope * n + self.intercept


def fit_linear(xs: Sequence[float], ys: Sequence[float]) -> tuple[float, float, float]:
    slope, intercept = statistics.linear_regression(xs, ys)
    mean = statistics.fmean(ys)
    ss_tot = sum((y - mean) ** 2 for y in ys)
    ss_res = sum((y - (slope * x + intercept)) ** 2 for x, y in zip(xs, ys))
    r2 = 1.0 if ss_tot == 0 else 1 - ss_res / ss_tot
    return slope, intercept, r2


def gadget_depth_fit(ns: Sequence[int] = range(3, 9), M: int = 2, L_it: int = 3, trials: int = 3, seed: int = 0) -> DepthFit:
    """Per-node query depth of the gadget on the chain CNF, maximised over
    ``trials`` random instances per ``n``.  Distinct blocks saturate at
    ``M + O(1)`` because ``f`` has only ``M`` entries, so the fit uses queries."""
    rng = random.Random(seed)
    depths, distinct = [], []
    for n in ns:
        F = chain_cnf(n)
        reps = [meter_gadget(random_rwphp(rng, M, L_it), F) for _ in range(trials)]
        depths.append(max(r.fetch_max for r in reps))
        distinct.append(max(r.block_depth_max for r in reps))
    slope, intercept, r2 = fit_linear(list(ns), depths)
    return DepthFit(tuple(ns), tuple(depths), tuple(distinct), slope, intercept, r2)


def plot_depth_fit(fit: DepthFit, path: str) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(4, 3))
    ax.plot(fit.ns, fit.depths, "o", label="measured")
    ax.plot(fit.ns, [fit.bound(n) for n in fit.ns], "-", label=f"{fit.slope:.2f} n + {fit.intercept:.2f}, R² = {fit.r2:.3f}")
    ax.set_xlabel("variables n")
    ax.set_ylabel("max queries per node")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
