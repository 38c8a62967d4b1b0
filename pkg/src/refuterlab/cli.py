"""``refuterlab`` command line: generate, reduce, verify, solve and meter.

Exit codes: 0 success, 1 invalid solution or refutation, 2 malformed input,
3 infeasible parameters (the failing inequality is printed).
Randomness is seeded by ``--seed`` or the ``REFUTERLAB_SEED`` variable.
"""

from __future__ import annotations

import json
import os
import random
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path
from typing import Any

import click
import networkx as nx

from .amplification import amplify as amplify_rw
from .formulas import gen_ephp, gen_php, gen_random_kcnf, gen_tseitin, expansion, xor_lift
from .oracle import BlockOracle
from .planted import planted_proof
from .pls import (
    FORWARD,
    REVERSED,
    InfeasibleParameters,
    IterInstance,
    PreconditionError,
    RwPhpInstance,
    iter_solutions,
    rwphp_solutions,
    solve_iter_bruteforce,
    solve_rwphp_bruteforce,
    verify_iter,
    verify_rwphp,
)
from .prover_delayer import (
    DTree,
    pls_formulation,
    pls_to_prover,
    prover_to_resolution,
    random_formulation,
    refute_wLB_cnf,
    rft_solutions,
    verify_rft,
    build_wLB_cnf,
)
from .report import meter_gadget, meter_iter_to_width_refuter, meter_php_size, meter_walk, random_rwphp, chain_cnf
from .resolution import (
    RefutationInstance,
    check_node,
    clause,
    dumps_proof,
    loads_proof,
    read_dimacs,
    tree_refutation,
    verify_refutation,
    write_dimacs,
)
from .size_refuters import php_size_refuter_to_rwphp, rwphp_to_size_refuter, php_union_bound, tseitin_union_bound, xor_bound
from .width_refuters import (
    cri_ephp,
    cri_mono_php,
    cri_tseitin,
    ephp_width_refuter_to_iter,
    iter_to_width_refuter,
    mono_width_refuter_to_iter,
    tseitin_width_refuter_to_iter,
    universal_width_refuter_to_iter,
)

EXIT_INVALID, EXIT_MALFORMED, EXIT_INFEASIBLE = 1, 2, 3


class _Group(click.Group):
    """Maps library exceptions to the documented exit codes."""

    def invoke(self, ctx: click.Context) -> Any:
        try:
            return super().invoke(ctx)
        except (InfeasibleParameters, PreconditionError) as e:
            click.echo(f"infeasible: {e}", err=True)
            ctx.exit(EXIT_INFEASIBLE)
        except (ValueError, KeyError, TypeError, IndexError, json.JSONDecodeError, FileNotFoundError) as e:
            click.echo(f"malformed input: {e}", err=True)
            ctx.exit(EXIT_MALFORMED)


def _seed(seed: int | None) -> int:
    if seed is not None:
        return seed
    return int(os.environ.get("REFUTERLAB_SEED", "0"))


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        click.echo(text, nl=not text.endswith("\n"))


def _load_json(path: str) -> Any:
    return json.loads(Path(path).read_text())


def _cnf(path: str) -> tuple[tuple[int, ...], ...]:
    return read_dimacs(Path(path))[1]


def _graph(spec: str) -> nx.Graph:
    kind, _, arg = spec.partition(":")
    if kind == "complete":
        return nx.complete_graph(int(arg))
    if kind == "cycle":
        return nx.cycle_graph(int(arg))
    if kind == "kbip":
        return nx.complete_bipartite_graph(int(arg), int(arg))
    if kind == "petersen":
        return nx.petersen_graph()
    if kind == "edges":
        return nx.Graph([tuple(int(v) for v in e.split("-")) for e in arg.split(",")])
    raise ValueError(f"unknown graph spec {spec!r}; use complete:n, cycle:n, kbip:n, petersen or edges:0-1,1-2")


def _tseitin(graph: str, tau: str | None):
    G = _graph(graph)
    nv = G.number_of_nodes()
    charge = [int(c) for c in tau] if tau else [1] + [0] * (nv - 1)
    return gen_tseitin(G, charge, regular=False)


def _iter_json(inst: IterInstance) -> str:
    return json.dumps({"kind": "iter", "orientation": inst.orientation, "S": [inst.succ(x) for x in range(inst.N)]}) + "\n"


def _load_iter(path: str) -> IterInstance:
    obj = _load_json(path)
    return IterInstance.table([int(v) for v in obj["S"]], obj.get("orientation", REVERSED))


def _load_proof(cnf_path: str, proof_path: str, width_cap: int | None = None) -> RefutationInstance:
    return RefutationInstance.from_nodes(_cnf(cnf_path), loads_proof(Path(proof_path).read_text()), width_cap)


def _load_rw(path: str) -> RwPhpInstance:
    obj = _load_json(path)
    orient = obj.get("orientation", FORWARD)
    inner = [IterInstance.table(t, orient) for t in obj["inner"]]
    labels = obj["labels"]
    return RwPhpInstance(int(obj["M"]), int(obj["N"]), BlockOracle.from_list(obj["f"], "f"), inner.__getitem__, lambda y, a: labels[y][a], general=bool(obj.get("general", False)))


def _load_formulation(path: str, cnf_path: str):
    obj = _load_json(path)
    return pls_formulation(_cnf(cnf_path), [DTree.from_json(t) for t in obj["f"]], [DTree.from_json(t) for t in obj["g"]])


def _membership(family: str, n: int | None, graph: str | None, tau: str | None, e: int | None, w0: int | None, cnf):
    if family == "ephp":
        return lambda inst: ephp_width_refuter_to_iter(inst, _need(n, "--n"))
    if family == "mono":
        return lambda inst: mono_width_refuter_to_iter(inst, _need(n, "--n"))
    if family == "tseitin":
        tf = _tseitin(_need(graph, "--graph"), tau)
        e_val = e if e is not None else expansion([tuple(x) for x in tf.edges], tf.n_vertices)
        return lambda inst: tseitin_width_refuter_to_iter(tf, e_val, inst)
    if family == "universal":
        return lambda inst: universal_width_refuter_to_iter(cnf, _need(w0, "--w0"), inst)
    raise ValueError(f"unknown family {family!r}")


def _need(value: Any, flag: str) -> Any:
    if value is None:
        raise ValueError(f"{flag} is required for this family")
    return value


@click.group(cls=_Group)
def main() -> None:
    """Refuter problems for resolution lower bounds."""


# ---------------------------------------------------------------------------
# gen


@main.group(cls=_Group)
def gen() -> None:
    """Generate formulas, instances and purported proofs."""


@gen.command("formula")
@click.option("--kind", type=click.Choice(["php", "ephp", "tseitin", "xor", "random"]), required=True)
@click.option("--n", type=int)
@click.option("--m", type=int, help="pigeons for php; clauses for random")
@click.option("--k", type=int, default=3, show_default=True)
@click.option("--graph", help="tseitin graph: complete:n, cycle:n, kbip:n, petersen, edges:...")
@click.option("--tau", help="tseitin charge as a 0/1 string; default puts 1 on vertex 0")
@click.option("--base", type=click.Path(exists=True), help="DIMACS base formula for xor")
@click.option("--seed", type=int)
@click.option("-o", "--out", type=click.Path())
def gen_formula(kind, n, m, k, graph, tau, base, seed, out) -> None:
    if kind == "php":
        n = _need(n, "--n")
        cnf = gen_php(m if m is not None else n + 1, n)
    elif kind == "ephp":
        cnf = gen_ephp(_need(n, "--n"))
    elif kind == "tseitin":
        cnf = _tseitin(_need(graph, "--graph"), tau).cnf
    elif kind == "xor":
        cnf = xor_lift(_cnf(_need(base, "--base")))
    else:
        cnf = gen_random_kcnf(k, _need(n, "--n"), _need(m, "--m"), _seed(seed))
    _emit(write_dimacs(cnf), out)


@gen.command("iter")
@click.option("--length", type=int, required=True)
@click.option("--orientation", type=click.Choice([REVERSED, FORWARD]), default=REVERSED, show_default=True)
@click.option("--seed", type=int)
@click.option("-o", "--out", type=click.Path())
def gen_iter(length, orientation, seed, out) -> None:
    if length < 1:
        raise PreconditionError("length must be positive")
    rng = random.Random(_seed(seed))
    S = [rng.randrange(length) for _ in range(length)]
    if orientation == REVERSED and length > 1:
        S[-1] = rng.randrange(length - 1)
    _emit(_iter_json(IterInstance.table(S, orientation)), out)


@gen.command("proof")
@click.option("--cnf", "cnf_path", type=click.Path(exists=True), required=True)
@click.option("--tree", is_flag=True, help="a valid decision-tree refutation instead of a planted one")
@click.option("--length", type=int, default=8, show_default=True)
@click.option("--max-width", type=int, default=3, show_default=True)
@click.option("--seed", type=int)
@click.option("-o", "--out", type=click.Path())
def gen_proof(cnf_path, tree, length, max_width, seed, out) -> None:
    nvars, cnf = read_dimacs(Path(cnf_path))
    if tree:
        nodes = tree_refutation(cnf)
    else:
        nodes = planted_proof(random.Random(_seed(seed)), cnf, nvars, length, max_width)
    _emit(dumps_proof(nodes), out)


@gen.command("wlb-cnf")
@click.option("--kind", type=click.Choice(["php", "ephp"]), default="ephp", show_default=True)
@click.option("--n", type=int, required=True)
@click.option("--w0", type=int, required=True)
@click.option("--L", "L", type=int, required=True)
@click.option("-o", "--out", type=click.Path())
def gen_wlb(kind, n, w0, L, out) -> None:
    F = gen_ephp(n) if kind == "ephp" else gen_php(n + 1, n)
    lb = build_wLB_cnf(F, w0, L)
    _emit(write_dimacs(lb.cnf, lb.nvars), out)


@gen.command("formulation")
@click.option("--cnf", "cnf_path", type=click.Path(exists=True), required=True)
@click.option("--M", "M", type=int)
@click.option("--seed", type=int)
@click.option("-o", "--out", type=click.Path())
def gen_formulation(cnf_path, M, seed, out) -> None:
    inst = random_formulation(_cnf(cnf_path), random.Random(_seed(seed)), M)
    _emit(json.dumps({"f": [t.to_json() for t in inst.f], "g": [t.to_json() for t in inst.g]}) + "\n", out)


@gen.command("rwphp")
@click.option("--M", "M", type=int, required=True)
@click.option("--L-it", "L_it", type=int, default=3, show_default=True)
@click.option("--seed", type=int)
@click.option("-o", "--out", type=click.Path())
def gen_rwphp(M, L_it, seed, out) -> None:
    rng = random.Random(_seed(seed))
    rw = random_rwphp(rng, M, L_it)
    obj = {
        "M": rw.M,
        "N": rw.N,
        "f": rw.f.to_list(),
        "orientation": FORWARD,
        "inner": [[rw.inner(y).succ(a) for a in range(L_it)] for y in range(rw.N)],
        "labels": [[rw.g(y, a) for a in range(L_it)] for y in range(rw.N)],
    }
    _emit(json.dumps(obj) + "\n", out)


# ---------------------------------------------------------------------------
# reduce / materialize


@main.group(cls=_Group)
def reduce() -> None:
    """Run a reduction; ``--query i`` prints one output block lazily."""


@reduce.command("iter-to-width-refuter")
@click.option("--in", "inp", type=click.Path(exists=True), required=True)
@click.option("--cnf", "cnf_path", type=click.Path(exists=True), required=True)
@click.option("--query", type=int)
@click.option("-o", "--out", type=click.Path())
def reduce_iter_to_width(inp, cnf_path, query, out) -> None:
    inst, _ = iter_to_width_refuter(_load_iter(inp), _cnf(cnf_path))
    if query is not None:
        _emit(dumps_proof([inst.nodes[query]]), out)
    else:
        _emit(dumps_proof(inst.nodes.to_list()), out)


_family_options = [
    click.option("--family", type=click.Choice(["ephp", "mono", "tseitin", "universal"]), required=True),
    click.option("--cnf", "cnf_path", type=click.Path(exists=True), required=True),
    click.option("--proof", "proof_path", type=click.Path(exists=True), required=True),
    click.option("--n", type=int),
    click.option("--graph"),
    click.option("--tau"),
    click.option("--e", type=int),
    click.option("--w0", type=int),
]


def _with_family(fn):
    for opt in reversed(_family_options):
        fn = opt(fn)
    return fn


def _width_reduction(family, cnf_path, proof_path, n, graph, tau, e, w0):
    inst = _load_proof(cnf_path, proof_path)
    return _membership(family, n, graph, tau, e, w0, inst.cnf)(inst)


@reduce.command("width-refuter-to-iter")
@_with_family
@click.option("--query", type=int)
@click.option("-o", "--out", type=click.Path())
def reduce_width_to_iter(family, cnf_path, proof_path, n, graph, tau, e, w0, query, out) -> None:
    red = _width_reduction(family, cnf_path, proof_path, n, graph, tau, e, w0)
    if query is not None:
        _emit(json.dumps({"x": query, "S": red.iter.succ(query)}) + "\n", out)
    else:
        _emit(_iter_json(red.iter), out)


@reduce.command("php-size-to-rwphp")
@click.option("--cnf", "cnf_path", type=click.Path(exists=True), required=True)
@click.option("--proof", "proof_path", type=click.Path(exists=True), required=True)
@click.option("--n", type=int, required=True)
@click.option("--t", type=int)
@click.option("--W", "W", type=int)
@click.option("--unchecked", is_flag=True, help="skip the counting premise (desk runs)")
def reduce_php_size(cnf_path, proof_path, n, t, W, unchecked) -> None:
    inst = _load_proof(cnf_path, proof_path)
    red = php_size_refuter_to_rwphp(inst, n, t, W, checked=not unchecked)
    sol = solve_rwphp_bruteforce(red.rw)
    click.echo(json.dumps({"M": red.rw.M, "N": red.rw.N, "solution": list(sol), "invalid_node": red.map_solution(sol)}))


reduce.add_command(reduce_php_size, "php-size")


@reduce.command("rwphp-to-size")
@click.option("--in", "inp", type=click.Path(exists=True), required=True, help="rwPHP JSON")
@click.option("--cnf", "cnf_path", type=click.Path(exists=True), required=True)
@click.option("--sF", "s_F", type=int, help="target proof length; defaults to the minimum")
@click.option("--query", type=int)
@click.option("-o", "--out", type=click.Path())
def reduce_rwphp_to_size(inp, cnf_path, s_F, query, out) -> None:
    inst, _, _ = rwphp_to_size_refuter(_load_rw(inp), _cnf(cnf_path), s_F)
    if query is not None:
        _emit(dumps_proof([inst.nodes[query]]), out)
    else:
        _emit(dumps_proof(inst.nodes.to_list()), out)


@main.command("materialize")
@_with_family
@click.option("-o", "--out", type=click.Path())
def materialize(family, cnf_path, proof_path, n, graph, tau, e, w0, out) -> None:
    """Write the full Iter table of a width-refuter reduction."""
    red = _width_reduction(family, cnf_path, proof_path, n, graph, tau, e, w0)
    _emit(_iter_json(red.iter), out)


# ---------------------------------------------------------------------------
# verify / solve


@main.group(cls=_Group)
def verify() -> None:
    """Exit 0 when the solution or refutation is valid, 1 otherwise."""


def _verdict(ok: bool, message: str) -> None:
    click.echo(message)
    if not ok:
        sys.exit(EXIT_INVALID)


@verify.command("iter")
@click.option("--instance", type=click.Path(exists=True), required=True)
@click.option("--solution", type=int, required=True)
def verify_iter_cmd(instance, solution) -> None:
    ok = verify_iter(_load_iter(instance), solution)
    _verdict(ok, "valid" if ok else "invalid")


@verify.command("refutation")
@click.option("--cnf", "cnf_path", type=click.Path(exists=True), required=True)
@click.option("--proof", "proof_path", type=click.Path(exists=True), required=True)
@click.option("--width-cap", type=int)
def verify_refutation_cmd(cnf_path, proof_path, width_cap) -> None:
    rep = verify_refutation(_load_proof(cnf_path, proof_path, width_cap))
    _verdict(rep.ok, "valid" if rep.ok else f"invalid node {rep.first_invalid}: {rep.reason}")


@verify.command("width-refuter")
@click.option("--cnf", "cnf_path", type=click.Path(exists=True), required=True)
@click.option("--proof", "proof_path", type=click.Path(exists=True), required=True)
@click.option("--node", type=int, required=True)
@click.option("--width-cap", type=int)
def verify_width_cmd(cnf_path, proof_path, node, width_cap) -> None:
    v = check_node(_load_proof(cnf_path, proof_path, width_cap), node)
    _verdict(not v.ok, f"node {node} is invalid: {v.reason}" if not v.ok else f"node {node} is valid")


@verify.command("rwphp")
@click.option("--instance", type=click.Path(exists=True), required=True)
@click.option("--y", type=int, required=True)
@click.option("--answer", type=int, required=True)
def verify_rwphp_cmd(instance, y, answer) -> None:
    ok = verify_rwphp(_load_rw(instance), (y, answer))
    _verdict(ok, "valid" if ok else "invalid")


@verify.command("rft")
@click.option("--formulation", type=click.Path(exists=True), required=True)
@click.option("--cnf", "cnf_path", type=click.Path(exists=True), required=True)
@click.option("--solution", required=True, help='JSON {"rho": [[var, value], ...], "o": k}')
def verify_rft_cmd(formulation, cnf_path, solution) -> None:
    sol = json.loads(solution)
    ok = verify_rft(_load_formulation(formulation, cnf_path), ([tuple(p) for p in sol["rho"]], sol["o"]))
    _verdict(ok, "valid" if ok else "invalid")


@main.group(cls=_Group)
def solve() -> None:
    """Brute-force solvers."""


@solve.command("iter")
@click.option("--instance", type=click.Path(exists=True), required=True)
@click.option("--bruteforce", is_flag=True, default=True)
@click.option("--all", "all_", is_flag=True, help="list every solution")
def solve_iter_cmd(instance, bruteforce, all_) -> None:
    inst = _load_iter(instance)
    click.echo(json.dumps(iter_solutions(inst) if all_ else solve_iter_bruteforce(inst)))


def _scan_chunk(args: tuple[str, str, int | None, int, int]) -> list[int]:
    cnf_path, proof_path, cap, lo, hi = args
    inst = _load_proof(cnf_path, proof_path, cap)
    return [i for i in range(lo, hi) if not check_node(inst, i)]


@solve.command("width-refuter")
@click.option("--cnf", "cnf_path", type=click.Path(exists=True), required=True)
@click.option("--proof", "proof_path", type=click.Path(exists=True), required=True)
@click.option("--width-cap", type=int)
@click.option("--jobs", type=int, default=1, show_default=True)
def solve_width_cmd(cnf_path, proof_path, width_cap, jobs) -> None:
    """Every invalid node, by full scan; chunks are merged in index order."""
    L = _load_proof(cnf_path, proof_path, width_cap).length
    step = max(1, -(-L // max(1, jobs)))
    chunks = [(cnf_path, proof_path, width_cap, lo, min(L, lo + step)) for lo in range(0, L, step)]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as ex:
            parts = list(ex.map(_scan_chunk, chunks))
    else:
        parts = [_scan_chunk(c) for c in chunks]
    click.echo(json.dumps([i for part in parts for i in part]))


@solve.command("rwphp")
@click.option("--instance", type=click.Path(exists=True), required=True)
@click.option("--all", "all_", is_flag=True, help="list every solution")
def solve_rwphp_cmd(instance, all_) -> None:
    rw = _load_rw(instance)
    if all_:
        click.echo(json.dumps([list(sol) for sol in rwphp_solutions(rw)]))
    else:
        click.echo(json.dumps(list(solve_rwphp_bruteforce(rw))))


@solve.command("rft")
@click.option("--formulation", type=click.Path(exists=True), required=True)
@click.option("--cnf", "cnf_path", type=click.Path(exists=True), required=True)
def solve_rft_cmd(formulation, cnf_path) -> None:
    sols = rft_solutions(_load_formulation(formulation, cnf_path))
    click.echo(json.dumps([{"rho": [list(p) for p in rho], "o": o} for rho, o in sols]))


# ---------------------------------------------------------------------------
# meter / cri / amplify / compile / refute / bound


@main.command("meter", cls=click.Command)
@click.option("--reduction", type=click.Choice(["iter-to-width-refuter", "ephp-walk", "mono-walk", "tseitin-walk", "php-size", "gadget"]), required=True)
@click.option("--in", "inp", type=click.Path(exists=True), help="Iter JSON, proof JSONL or rwPHP JSON")
@click.option("--cnf", "cnf_path", type=click.Path(exists=True))
@click.option("--n", type=int)
@click.option("--t", type=int, default=1, show_default=True)
@click.option("--W", "W", type=int)
@click.option("--graph")
@click.option("--tau")
@click.option("--e", type=int)
def meter(reduction, inp, cnf_path, n, t, W, graph, tau, e) -> None:
    """JSON report: block_depth_max, total_fetches, declared_budget, within_budget."""
    try:
        if reduction == "iter-to-width-refuter":
            reps = [meter_iter_to_width_refuter(_load_iter(_need(inp, "--in")), _cnf(_need(cnf_path, "--cnf")))]
        elif reduction == "gadget":
            rw = _load_rw(_need(inp, "--in"))
            F = _cnf(cnf_path) if cnf_path else chain_cnf(_need(n, "--n"))
            reps = [meter_gadget(rw, F)]
        else:
            inst = _load_proof(_need(cnf_path, "--cnf"), _need(inp, "--in"))
            if reduction == "php-size":
                reps = list(meter_php_size(inst, _need(n, "--n"), t, _need(W, "--W"), checked=False).values())
            else:
                family = reduction.split("-")[0]
                build = _membership(family, n, graph, tau, e, None, inst.cnf)
                reps = [meter_walk(reduction, inst, build)]
    except (InfeasibleParameters, PreconditionError) as exc:
        click.echo(f"infeasible: {exc}", err=True)
        sys.exit(EXIT_INFEASIBLE)
    except (ValueError, KeyError, TypeError, json.JSONDecodeError) as exc:
        click.echo(f"malformed input: {exc}", err=True)
        sys.exit(EXIT_MALFORMED)
    out = [r.to_json() for r in reps]
    click.echo(json.dumps(out[0] if len(out) == 1 else out))


@main.command("cri")
@click.option("--family", type=click.Choice(["ephp", "mono", "php-mono", "tseitin"]), required=True)
@click.option("--n", type=int)
@click.option("--m", type=int)
@click.option("--graph")
@click.option("--tau")
@click.option("--clause", "lits", default="", help="comma-separated literals; empty for the empty clause")
def cri_cmd(family, n, m, graph, tau, lits) -> None:
    try:
        c = clause(int(x) for x in lits.split(",") if x.strip())
        if family == "ephp":
            r = cri_ephp(_need(n, "--n"), c)
        elif family in ("mono", "php-mono"):
            n = _need(n, "--n")
            r = cri_mono_php(m if m is not None else n + 1, n, c)
        else:
            r = cri_tseitin(_tseitin(_need(graph, "--graph"), tau), c)
    except ValueError as exc:
        click.echo(f"malformed input: {exc}", err=True)
        sys.exit(EXIT_MALFORMED)
    click.echo(json.dumps({"value": r.value, "critical_set": sorted(r.critical_set)}))


@main.command("amplify")
@click.option("--in", "inp", type=click.Path(exists=True), required=True, help="rwPHP JSON with N = (1+eps)M")
@click.option("--eps", default="1/2", show_default=True)
@click.option("--N", "--target-N", "N", type=int, required=True)
@click.option("--solve", "do_solve", is_flag=True, help="brute-force one solution and map it back")
def amplify_cmd(inp, eps, N, do_solve) -> None:
    try:
        rw = _load_rw(inp)
        if rw.N != rw.M + int(Fraction(eps) * rw.M):
            rw = RwPhpInstance(rw.M, rw.N, rw.f, rw.inner, rw.g, general=True)
        out, back = amplify_rw(rw, Fraction(eps), N)
    except PreconditionError as exc:
        click.echo(f"infeasible: {exc}", err=True)
        sys.exit(EXIT_INFEASIBLE)
    except (ValueError, KeyError, TypeError, json.JSONDecodeError) as exc:
        click.echo(f"malformed input: {exc}", err=True)
        sys.exit(EXIT_MALFORMED)
    obj: dict[str, Any] = {"M": out.M, "N": out.N, "f": out.f.to_list()}
    if do_solve:
        sol = solve_rwphp_bruteforce(out)
        mapped = back(sol)
        obj.update(solution=list(sol), mapped=list(mapped), mapped_valid=verify_rwphp(rw, mapped))
    click.echo(json.dumps(obj))


@main.group(cls=_Group)
def compile() -> None:  # noqa: A001
    """Compile strategies and formulations into resolution proofs."""


@compile.command("pls-to-res")
@click.option("--formulation", type=click.Path(exists=True), required=True)
@click.option("--cnf", "cnf_path", type=click.Path(exists=True), required=True)
@click.option("-o", "--out", type=click.Path())
def compile_pls(formulation, cnf_path, out) -> None:
    cnf = _cnf(cnf_path)
    proof = prover_to_resolution(pls_to_prover(_load_formulation(formulation, cnf_path), cnf), cnf)
    click.echo(json.dumps({"nodes": proof.states, "width": proof.width, "memory_bound": proof.instance.width_cap - 1}), err=True)
    _emit(dumps_proof(proof.instance.nodes.to_list()), out)


@main.group(cls=_Group)
def refute() -> None:
    """Refutations of lower-bound CNFs."""


@refute.command("wlb-cnf")
@click.option("--kind", type=click.Choice(["php", "ephp"]), default="ephp", show_default=True)
@click.option("--n", type=int, required=True)
@click.option("--w0", type=int, required=True)
@click.option("--L", "L", type=int, required=True)
@click.option("-o", "--out", type=click.Path())
def refute_wlb(kind, n, w0, L, out) -> None:
    F = gen_ephp(n) if kind == "ephp" else gen_php(n + 1, n)
    try:
        r = refute_wLB_cnf(F, w0, L)
    except RuntimeError as exc:
        click.echo(f"infeasible: {exc}", err=True)
        sys.exit(EXIT_INFEASIBLE)
    ok = verify_refutation(r.proof.instance).ok
    click.echo(json.dumps({"nodes": r.proof.states, "width": r.width, "record_bits": r.record_bits, "valid": ok}), err=True)
    if out:
        Path(out).write_text(dumps_proof(r.proof.instance.nodes.to_list()))
    if not ok:
        sys.exit(EXIT_INVALID)


@main.command("bound")
@click.option("--kind", type=click.Choice(["php", "xor", "tseitin"]), required=True)
@click.option("--n", type=int, required=True, help="holes, variables or edges")
@click.option("--t", type=int, default=1, show_default=True)
@click.option("--W", "W", type=int, help="php fat threshold")
@click.option("--w", type=int, help="xor or tseitin width")
@click.option("--L", "L", type=int, required=True)
def bound(kind, n, t, W, w, L) -> None:
    """Evaluate a counting premise exactly; exit 3 when it fails."""
    try:
        if kind == "php":
            rep = php_union_bound(n, t, _need(W, "--W"), L)
        elif kind == "xor":
            rep = xor_bound(n, _need(w, "--w"), L)
        else:
            rep = tseitin_union_bound(n, t, _need(w, "--w"), L)
    except ValueError as exc:
        click.echo(f"malformed input: {exc}", err=True)
        sys.exit(EXIT_MALFORMED)
    feasible = rep.holds and not rep.nonpositive_factors
    click.echo(json.dumps({"feasible": feasible, "holds": rep.holds, "inequality": rep.inequality, "nonpositive_factors": list(rep.nonpositive_factors)}))
    if not feasible:
        click.echo(f"infeasible: {rep.inequality}", err=True)
        sys.exit(EXIT_INFEASIBLE)


if __name__ == "__main__":  # pragma: no cover
    main()
