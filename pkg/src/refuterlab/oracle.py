"""Block-addressed oracles, query metering and reductions.

Every instance in this package is exposed as a :class:`BlockOracle`: a length
plus a pure ``fetch`` callback.  Reductions build their output oracles lazily
on top of an input oracle, so the number of distinct input blocks touched while
computing one output block (the block-depth) can be measured directly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Generic, Iterator, Sequence, TypeVar

T = TypeVar("T")


class OracleIndexError(IndexError):
    pass


class BudgetExceeded(AssertionError):
    pass


class SchemaMismatch(ValueError):
    pass


class BlockOracle(Generic[T]):
    """Read-only, index-addressed collection of blocks."""

    __slots__ = ("length", "_fetch", "name")

    def __init__(self, length: int, fetch: Callable[[int], T], name: str = "") -> None:
        if length < 0:
            raise ValueError("oracle length must be non-negative")
        self.length = length
        self._fetch = fetch
        self.name = name

    @classmethod
    def from_list(cls, blocks: Sequence[T], name: str = "") -> "BlockOracle[T]":
        data = tuple(blocks)
        return cls(len(data), data.__getitem__, name)

    def __len__(self) -> int:
        return self.length

    def __getitem__(self, i: int) -> T:
        if not isinstance(i, int) or i < 0 or i >= self.length:
            raise OracleIndexError(f"block index {i!r} outside [0, {self.length})")
        return self._fetch(i)

    def fetch(self, i: int) -> T:
        return self[i]

    def __iter__(self) -> Iterator[T]:
        for i in range(self.length):
            yield self[i]

    def materialize(self) -> "BlockOracle[T]":
        return BlockOracle.from_list([self[i] for i in range(self.length)], self.name)

    def to_list(self) -> list[T]:
        return [self[i] for i in range(self.length)]


@dataclass
class QueryMeter:
    distinct_blocks: set[int] = field(default_factory=set)
    total_fetches: int = 0

    @property
    def block_depth(self) -> int:
        return len(self.distinct_blocks)

    def record(self, i: int) -> None:
        self.distinct_blocks.add(i)
        self.total_fetches += 1

    def reset(self) -> None:
        self.distinct_blocks = set()
        self.total_fetches = 0


def metered_view(oracle: BlockOracle[T]) -> tuple[BlockOracle[T], QueryMeter]:
    meter = QueryMeter()

    def fetch(i: int) -> T:
        value = oracle[i]
        meter.record(i)
        return value

    return BlockOracle(oracle.length, fetch, oracle.name), meter


class MultiMeter:
    """Meters several named oracles at once; depth is the sum over oracles."""

    def __init__(self) -> None:
        self.meters: dict[str, QueryMeter] = {}

    def wrap(self, key: str, oracle: BlockOracle[T]) -> BlockOracle[T]:
        view, meter = metered_view(oracle)
        self.meters[key] = meter
        return view

    @property
    def block_depth(self) -> int:
        return sum(m.block_depth for m in self.meters.values())

    @property
    def total_fetches(self) -> int:
        return sum(m.total_fetches for m in self.meters.values())

    def reset(self) -> None:
        for m in self.meters.values():
            m.reset()


@dataclass(frozen=True)
class SearchProblem:
    """A search problem given by a verifier with a declared block budget."""

    name: str
    verify: Callable[[Any, Any], bool]
    budget: int | None = None


@dataclass(frozen=True)
class Reduction:
    """Instance map exposed block by block, plus a solution map back.

    ``out_block(inp, j)`` must only read ``inp`` through ``inp[...]``; the
    declared ``block_budget`` bounds the distinct input indices it may touch.
    """

    out_length: Callable[[BlockOracle], int]
    out_block: Callable[[BlockOracle, int], Any]
    map_solution: Callable[[BlockOracle, Any], Any]
    block_budget: int
    solution_budget: int | None = None
    name: str = ""
    source: str = ""
    target: str = ""

    def output(self, inp: BlockOracle) -> BlockOracle:
        return BlockOracle(self.out_length(inp), lambda j: self.out_block(inp, j), self.name)

    def measure(self, inp: BlockOracle, j: int) -> int:
        view, meter = metered_view(inp)
        self.out_block(view, j)
        return meter.block_depth

    def max_depth(self, inp: BlockOracle) -> int:
        return max((self.measure(inp, j) for j in range(self.out_length(inp))), default=0)

    def check_budget(self, inp: BlockOracle) -> int:
        depth = self.max_depth(inp)
        if depth > self.block_budget:
            raise BudgetExceeded(f"{self.name}: measured depth {depth} > budget {self.block_budget}")
        return depth


def identity_reduction() -> Reduction:
    return Reduction(
        out_length=len,
        out_block=lambda inp, j: inp[j],
        map_solution=lambda inp, sol: sol,
        block_budget=1,
        solution_budget=0,
        name="identity",
    )


def compose(r1: Reduction, r2: Reduction) -> Reduction:
    """``r1`` maps P to Q and ``r2`` maps Q to R; the result maps P to R."""
    if r1.target and r2.source and r1.target != r2.source:
        raise SchemaMismatch(f"cannot compose {r1.target!r} output with {r2.source!r} input")

    def mid(inp: BlockOracle) -> BlockOracle:
        return r1.output(inp)

    def out_length(inp: BlockOracle) -> int:
        return r2.out_length(mid(inp))

    def out_block(inp: BlockOracle, j: int) -> Any:
        return r2.out_block(mid(inp), j)

    def map_solution(inp: BlockOracle, sol: Any) -> Any:
        return r1.map_solution(inp, r2.map_solution(mid(inp), sol))

    sol_budget = None
    if r1.solution_budget is not None and r2.solution_budget is not None:
        sol_budget = r2.solution_budget * r1.block_budget + r1.solution_budget
    return Reduction(
        out_length=out_length,
        out_block=out_block,
        map_solution=map_solution,
        block_budget=r1.block_budget * r2.block_budget,
        solution_budget=sol_budget,
        name=f"{r2.name}∘{r1.name}" if r1.name or r2.name else "",
        source=r1.source,
        target=r2.target,
    )
