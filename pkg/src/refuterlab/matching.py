"""Bipartite matching helpers.

The dense path delegates to SciPy's Hopcroft-Karp implementation; the small
augmenting-path routine serves the sparse cri paths, whose graphs have a
handful of vertices.
"""

from __future__ import annotations

from typing import Callable, Hashable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching


def has_perfect_matching(allowed: np.ndarray) -> bool:
    """``allowed`` is a square boolean biadjacency matrix (rows to columns)."""
    rows, cols = allowed.shape
    if rows != cols:
        return False
    if rows == 0:
        return True
    if not allowed.any(axis=1).all() or not allowed.any(axis=0).all():
        return False
    match = maximum_bipartite_matching(csr_matrix(allowed.astype(np.int8)), perm_type="column")
    return bool((match >= 0).all())


def saturating_matching(
    left: Sequence[Hashable],
    right: Sequence[Hashable],
    allowed: Callable[[Hashable, Hashable], bool],
) -> dict[Hashable, Hashable] | None:
    """Matching covering every vertex of ``left``, or ``None`` if none exists."""
    owner: dict[Hashable, Hashable] = {}
    adj = {u: [v for v in right if allowed(u, v)] for u in left}

    def augment(u: Hashable, seen: set) -> bool:
        for v in adj[u]:
            if v in seen:
                continue
            seen.add(v)
            if v not in owner or augment(owner[v], seen):
                owner[v] = u
                return True
        return False

    for u in left:
        if not augment(u, set()):
            return None
    return {u: v for v, u in owner.items()}
