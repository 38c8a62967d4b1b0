"""Refuter problems for resolution: width and size refuters, their reductions
to Iter and rwPHP(PLS), amplification, and the Prover-Delayer compiler."""

from __future__ import annotations

from .oracle import BlockOracle, QueryMeter, metered_view
from .pls import FORWARD, REVERSED, InfeasibleParameters, IterInstance, PreconditionError, RwPhpInstance, verify_iter, verify_rwphp
from .resolution import Node, RefutationInstance, check_node, read_dimacs, verify_refutation, write_dimacs

__all__ = [
    "BlockOracle",
    "FORWARD",
    "InfeasibleParameters",
    "IterInstance",
    "Node",
    "PreconditionError",
    "QueryMeter",
    "REVERSED",
    "RefutationInstance",
    "RwPhpInstance",
    "check_node",
    "metered_view",
    "read_dimacs",
    "verify_iter",
    "verify_refutation",
    "verify_rwphp",
    "write_dimacs",
]
