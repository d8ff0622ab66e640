"""Finite-depth semimeasure tables.

A :class:`SemimeasureTable` stores a dyadic value for every bit string of
length at most ``depth``.  It is a semimeasure when the root value is at
most 1 and ``Q(x) >= Q(x0) + Q(x1)`` at every internal node; violations
are reported as data by :func:`validate` rather than raised.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .bitcore import (ONE, ZERO, Dyadic, all_strings, check_bits, max_depth,
                      parse_bits, render_bits, strings_of_length)
from .errors import DepthExceeded, FormatError, InvalidInput, WeightOverflow
from .schedule import LengthSchedule, Schedule


class SemimeasureTable:
    """Dense map from every string of length ``<= depth`` to a :class:`Dyadic`.

    Missing entries default to zero.  Instances are treated as immutable.
    """

    __slots__ = ("depth", "_values")

    def __init__(self, depth: int, values: Mapping[str, Dyadic] | None = None):
        if depth < 0:
            raise ValueError("depth must be nonnegative")
        if depth > max_depth():
            raise DepthExceeded(f"depth {depth} exceeds maximum {max_depth()}")
        values = values or {}
        for x, v in values.items():
            check_bits(x)
            if len(x) > depth:
                raise DepthExceeded(f"entry {x} is deeper than {depth}")
            if not isinstance(v, Dyadic):
                raise TypeError(f"value at {render_bits(x)} is not a Dyadic")
        self.depth = depth
        self._values = {x: values.get(x, ZERO) for x in all_strings(depth)}

    def __getitem__(self, x: str) -> Dyadic:
        try:
            return self._values[x]
        except KeyError:
            raise DepthExceeded(f"{render_bits(x)} is not in a depth-{self.depth} table") from None

    def items(self):
        return self._values.items()

    def strings(self):
        return self._values.keys()

    def __eq__(self, other):
        if not isinstance(other, SemimeasureTable):
            return NotImplemented
        return self.depth == other.depth and self._values == other._values

    def __repr__(self):
        return f"SemimeasureTable(depth={self.depth}, root={self._values['']})"

    def map(self, fn) -> "SemimeasureTable":
        return SemimeasureTable(self.depth, {x: fn(x, v) for x, v in self._values.items()})

    def truncated(self, depth: int) -> "SemimeasureTable":
        return SemimeasureTable(depth, {x: v for x, v in self._values.items() if len(x) <= depth})


@dataclass(frozen=True)
class Violation:
    string: str
    kind: str
    lhs: Dyadic
    rhs: Dyadic

    def __str__(self):
        x = render_bits(self.string)
        if self.kind == "split":
            return f"at {x}: Q(x) = {self.lhs} < Q(x0) + Q(x1) = {self.rhs}"
        if self.kind == "root":
            return f"at {x}: Q(root) = {self.lhs} > {self.rhs}"
        if self.kind == "stage":
            return f"at {x}: stage value {self.lhs} < previous {self.rhs}"
        return f"at {x}: {self.kind} {self.lhs} vs {self.rhs}"


def validate(tab: SemimeasureTable) -> list[Violation]:
    """Every way ``tab`` fails to be a semimeasure; empty if it is one."""
    out = []
    v = tab._values
    if v[""] > ONE:
        out.append(Violation("", "root", v[""], ONE))
    for n in range(tab.depth):
        for x in strings_of_length(n):
            rhs = v[x + "0"] + v[x + "1"]
            if v[x] < rhs:
                out.append(Violation(x, "split", v[x], rhs))
    return out


def is_semimeasure(tab: SemimeasureTable) -> bool:
    return not validate(tab)


def finite_string_mass(tab: SemimeasureTable, x: str) -> Dyadic:
    """Probability that the output is exactly the finite string ``x``."""
    if len(x) >= tab.depth:
        raise DepthExceeded(f"|x| = {len(x)} must be below depth {tab.depth}")
    try:
        return tab[x] - tab[x + "0"] - tab[x + "1"]
    except ValueError:
        raise InvalidInput(f"table violates the split inequality at {render_bits(x)}") from None


def mix(tables: Sequence[SemimeasureTable], weights: Sequence[Dyadic]) -> SemimeasureTable:
    """Pointwise weighted sum; weights must sum to at most 1."""
    if len(tables) != len(weights) or not tables:
        raise ValueError("need one weight per table and at least one table")
    depth = tables[0].depth
    if any(t.depth != depth for t in tables):
        raise InvalidInput("all mixed tables must have the same depth")
    total = ZERO
    for w in weights:
        total = total + w
    if total > ONE:
        raise WeightOverflow(f"mixture weights sum to {total} > 1")
    out = {}
    for x in all_strings(depth):
        acc = ZERO
        for t, w in zip(tables, weights):
            acc = acc + t._values[x] * w
        out[x] = acc
    return SemimeasureTable(depth, out)


# ---------------------------------------------------------------------------
# pads


def pad_semimeasure(d_schedule, depth: int | None = None) -> SemimeasureTable:
    """Pad with gap ``2**-(n + d(n))`` at every string of length ``n < depth``.

    ``S(x) = 2**-|x| * sum_{|x| <= m <= depth} 2**-d(m)``.  The weight check
    covers the levels below the root only, since the root is reset to 1 by
    rounding; the root value itself may therefore exceed 1.
    """
    if not isinstance(d_schedule, Schedule):
        if depth is None:
            raise ValueError("depth is required with a raw d sequence")
        d_schedule = LengthSchedule(list(d_schedule)[: depth + 1])
    if depth is not None and d_schedule.depth != depth:
        raise ValueError(f"schedule depth {d_schedule.depth} != {depth}")
    d_schedule.check_weight()
    return schedule_pad(d_schedule)


def schedule_pad(schedule: Schedule) -> SemimeasureTable:
    """``S(x) = sum over extensions y of x (y included) of 2**-budget(y)``.

    Bottom-up, so ``S(x) - S(x0) - S(x1) = 2**-budget(x)`` holds exactly.
    No weight check is made here.
    """
    depth = schedule.depth
    out: dict[str, Dyadic] = {}
    for n in range(depth, -1, -1):
        for x in strings_of_length(n):
            v = Dyadic(1, schedule.budget(x))
            if n < depth:
                v = v + out[x + "0"] + out[x + "1"]
            out[x] = v
    return SemimeasureTable(depth, out)


def quadratic_pad(depth: int) -> SemimeasureTable:
    """The fixed pad ``S(x) = 2**-2|x|``, gap ``2**-(2n+1)`` at length ``n``."""
    return SemimeasureTable(depth, {x: Dyadic(1, 2 * len(x)) for x in all_strings(depth)})


def uniform_table(depth: int) -> SemimeasureTable:
    return SemimeasureTable(depth, {x: Dyadic(1, len(x)) for x in all_strings(depth)})


# ---------------------------------------------------------------------------
# enumeration stages


def stage_violations(stages: Sequence[SemimeasureTable]) -> list[tuple[int, Violation]]:
    """Per-stage semimeasure violations plus pointwise decreases between stages."""
    out = []
    for i, tab in enumerate(stages):
        if tab.depth != stages[0].depth:
            raise InvalidInput("all stages must share one depth")
        out.extend((i, v) for v in validate(tab))
        if i:
            prev = stages[i - 1]._values
            for x, val in tab._values.items():
                if val < prev[x]:
                    out.append((i, Violation(x, "stage", val, prev[x])))
    return out


def is_monotone_sequence(stages: Sequence[SemimeasureTable]) -> bool:
    for prev, cur in zip(stages, stages[1:]):
        p = prev._values
        if any(v < p[x] for x, v in cur._values.items()):
            return False
    return True


def depth_stages(tab: SemimeasureTable) -> list[SemimeasureTable]:
    """Stage ``j`` reveals the values of strings of length ``<= j``, zero below."""
    stages = []
    for j in range(tab.depth + 1):
        stages.append(SemimeasureTable(
            tab.depth, {x: v for x, v in tab.items() if len(x) <= j}))
    return stages


def component_stages(tables: Sequence[SemimeasureTable],
                     weights: Sequence[Dyadic]) -> list[SemimeasureTable]:
    """Stage ``k`` is the mixture of the first ``k`` weighted components."""
    return [mix(tables[:k], weights[:k]) for k in range(1, len(tables) + 1)]


# ---------------------------------------------------------------------------
# text format


def format_table(tab: SemimeasureTable) -> str:
    lines = [f"depth {tab.depth}"]
    for x, v in tab.items():
        lines.append(f"{render_bits(x)} {v}")
    return "\n".join(lines) + "\n"


def parse_table(text: str) -> SemimeasureTable:
    depth = None
    values: dict[str, Dyadic] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "depth":
            if len(parts) != 2 or depth is not None:
                raise FormatError(f"line {lineno}: bad or repeated depth header")
            depth = int(parts[1])
            continue
        if len(parts) != 2:
            raise FormatError(f"line {lineno}: expected '<bits> <m>/2^<e>'")
        try:
            x = parse_bits(parts[0])
        except ValueError as exc:
            raise FormatError(f"line {lineno}: {exc}") from None
        if x in values:
            raise FormatError(f"line {lineno}: duplicate entry for {parts[0]}")
        values[x] = Dyadic.parse(parts[1])
    if depth is None:
        raise FormatError("missing 'depth <D>' header")
    return SemimeasureTable(depth, values)
