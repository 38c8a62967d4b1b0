"""Random purported refutations: mostly valid steps with occasional junk."""

from __future__ import annotations

import random
from typing import Sequence

from .resolution import BOTTOM, RES, WK, Clause, Node, clause


def random_clause(rng: random.Random, nvars: int, max_width: int) -> Clause:
    w = rng.randint(0, max_width)
    vs = rng.sample(range(1, nvars + 1), min(w, nvars))
    return clause(v if rng.random() < 0.5 else -v for v in vs)


def planted_proof(
    rng: random.Random,
    cnf: Sequence[Clause],
    nvars: int,
    length: int,
    max_width: int,
    p_valid: float = 0.7,
) -> list[Node]:
    """Mostly-valid steps over earlier clauses, random junk otherwise; the last node is ``⊥``."""
    m = len(cnf)
    nodes: list[Node] = []

    def at(j: int) -> Clause:
        return cnf[m + j] if j < 0 else nodes[j].clause

    for i in range(length):
        last = i == length - 1
        node = None
        if rng.random() < p_valid:
            for _ in range(20):
                a, b = rng.randrange(-m, i), rng.randrange(-m, i)
                ca, cb = at(a), at(b)
                pivots = [l for l in ca if l > 0 and -l in cb]
                if pivots:
                    x = rng.choice(pivots)
                    res = clause((set(ca) - {x}) | (set(cb) - {-x}))
                    if len(res) <= max_width and (not last or res == BOTTOM):
                        node = Node(res, RES, a, b, x)
                        break
                if len(ca) <= max_width and not last:
                    node = Node(ca, WK, a)
                    break
        if node is None:
            c = BOTTOM if last else random_clause(rng, nvars, max_width)
            if rng.random() < 0.5:
                node = Node(c, WK, rng.randrange(-m, i) if i or m else 0)
            else:
                node = Node(c, RES, rng.randrange(-m, max(i, 1 - m)), rng.randrange(-m, max(i, 1 - m)), rng.randint(1, nvars))
        nodes.append(node)
    return nodes
