"""Linear systems over GF(2) with rows packed into Python integers."""

from __future__ import annotations

from typing import Iterable


def reduce_system(rows: Iterable[tuple[int, int]]) -> list[tuple[int, int]] | None:
    """Gaussian elimination on ``(mask, rhs)`` rows, pivoting on the lowest set bit.

    Returns an echelon basis, or ``None`` when the system is inconsistent.
    """
    basis: dict[int, tuple[int, int]] = {}
    for mask, rhs in rows:
        rhs &= 1
        while mask:
            low = mask & -mask
            if low not in basis:
                basis[low] = (mask, rhs)
                break
            bmask, brhs = basis[low]
            mask ^= bmask
            rhs ^= brhs
        else:
            if rhs:
                return None
    return list(basis.values())


def solvable(rows: Iterable[tuple[int, int]]) -> bool:
    return reduce_system(rows) is not None


def rank(masks: Iterable[int]) -> int:
    basis = reduce_system((m, 0) for m in masks)
    assert basis is not None
    return len(basis)
