"""Granularity schedules: how many bits of precision each string gets.

A schedule assigns every string ``x`` with ``|x| <= depth`` a *budget*
``b(x)``.  The pad semimeasure leaves a gap of ``2**-b(x)`` at ``x``, the
rounded table lives on the ``2**-(b(x)+1)`` grid at ``x`` and the cones
allocated to ``x`` have stems of length ``grid(x) = b(x) + 1``.

Two flavours exist:

* :class:`LengthSchedule` -- ``b(x) = n + d(n)`` for ``n = |x|``.
* :class:`StringSchedule` -- an explicit per-string budget ``t(x)``.
"""
from __future__ import annotations

import re

from .bitcore import Dyadic, ZERO, all_strings, max_depth, parse_bits, render_bits
from .errors import FormatError, ScheduleNotMonotone, WeightOverflow


class Schedule:
    depth: int

    def budget(self, x: str) -> int:
        raise NotImplementedError

    def grid(self, x: str) -> int:
        return self.budget(x) + 1

    @property
    def max_grid(self) -> int:
        return max(self.grid(x) for x in all_strings(self.depth))

    def pad_weight(self) -> Dyadic:
        """Total pad mass below the root, ``sum over 1 <= |y| <= D of 2**-b(y)``."""
        total = ZERO
        for x in all_strings(self.depth)[1:]:
            total = total + Dyadic(1, self.budget(x))
        return total

    def check_weight(self) -> None:
        w = self.pad_weight()
        if w > Dyadic(1, 0):
            raise WeightOverflow(f"pad weight below the root is {w} > 1")

    def monotone_violations(self) -> list[tuple[str, str]]:
        """Pairs ``(x, child)`` with ``budget(child) < budget(x)``."""
        bad = []
        for x in all_strings(self.depth - 1) if self.depth > 0 else ():
            for b in "01":
                if self.budget(x + b) < self.budget(x):
                    bad.append((x, x + b))
        return bad

    def check_monotone(self) -> None:
        bad = self.monotone_violations()
        if bad:
            x, c = bad[0]
            raise ScheduleNotMonotone(
                f"budget decreases from {render_bits(x)} ({self.budget(x)}) "
                f"to {render_bits(c)} ({self.budget(c)})")

    def shifted(self, w: int) -> "Schedule":
        raise NotImplementedError

    def fit_shift(self) -> int:
        """Smallest uniform shift ``w >= 0`` making the pad weight at most 1."""
        w = 0
        weight = self.pad_weight()
        one = Dyadic(1, 0)
        while weight > one:
            weight = weight.halve()
            w += 1
        return w


class LengthSchedule(Schedule):
    """Budget ``n + d(n)`` depending on the length only."""

    def __init__(self, d, label: str | None = None):
        d = tuple(int(v) for v in d)
        if not d:
            raise ValueError("schedule needs at least d(0)")
        if any(v < 0 for v in d):
            raise ValueError("d(n) must be nonnegative")
        self.d = d
        self.depth = len(d) - 1
        self.label = label

    def budget(self, x: str) -> int:
        n = len(x)
        return n + self.d[n]

    def budget_of_length(self, n: int) -> int:
        return n + self.d[n]

    def grid_of_length(self, n: int) -> int:
        return n + self.d[n] + 1

    @property
    def max_grid(self) -> int:
        return max(self.grid_of_length(n) for n in range(self.depth + 1))

    def pad_weight(self) -> Dyadic:
        total = ZERO
        for n in range(1, self.depth + 1):
            total = total + Dyadic(1, self.d[n])
        return total

    def monotone_violations(self):
        bad = []
        for n in range(self.depth):
            if self.budget_of_length(n + 1) < self.budget_of_length(n):
                bad.append(("0" * n, "0" * (n + 1)))
        return bad

    def shifted(self, w: int) -> "LengthSchedule":
        return LengthSchedule([v + w for v in self.d])

    def __eq__(self, other):
        return isinstance(other, LengthSchedule) and self.d == other.d

    def __hash__(self):
        return hash(("L", self.d))

    def __repr__(self):
        return f"LengthSchedule({list(self.d)})" if self.label is None else \
            f"LengthSchedule(d={self.label}, depth={self.depth})"


class StringSchedule(Schedule):
    """Explicit per-string budget ``t(x)``."""

    def __init__(self, t: dict, depth: int):
        missing = [x for x in all_strings(depth) if x not in t]
        if missing:
            raise ValueError(f"budget missing for {render_bits(missing[0])}")
        if any(t[x] < 0 for x in all_strings(depth)):
            raise ValueError("budgets must be nonnegative")
        self.t = {x: int(t[x]) for x in all_strings(depth)}
        self.depth = depth

    def budget(self, x: str) -> int:
        return self.t[x]

    def shifted(self, w: int) -> "StringSchedule":
        return StringSchedule({x: v + w for x, v in self.t.items()}, self.depth)

    def __eq__(self, other):
        return isinstance(other, StringSchedule) and self.depth == other.depth \
            and self.t == other.t

    def __hash__(self):
        return hash(("S", self.depth, tuple(sorted(self.t.items()))))

    def __repr__(self):
        return f"StringSchedule(depth={self.depth})"


# ---------------------------------------------------------------------------
# construction from expressions


def ceil_log2(k: int) -> int:
    """Exact ``ceil(log2 k)`` for ``k >= 1``."""
    if k < 1:
        raise ValueError("ceil_log2 needs k >= 1")
    return (k - 1).bit_length()


def d_linear(depth: int, offset: int = 0) -> LengthSchedule:
    """``d(n) = n + offset``; offset 0 is the ``2n + O(1)`` regime."""
    label = "n" if offset == 0 else f"n+{offset}"
    return LengthSchedule([n + offset for n in range(depth + 1)], label=label)


def d_twolog(depth: int) -> LengthSchedule:
    """``d(n) = 2*ceil(log2(n+2)) + 1``."""
    s = LengthSchedule([2 * ceil_log2(n + 2) + 1 for n in range(depth + 1)], label="2log")
    # exact partial-sum check, root term included
    total = ZERO
    for v in s.d:
        total = total + Dyadic(1, v)
    if total > Dyadic(1, 0):
        raise WeightOverflow(f"2log schedule weight {total} exceeds 1")
    return s


def parse_d_expr(expr: str, depth: int) -> LengthSchedule:
    """Parse ``n``, ``n+c``, ``2log``, a constant ``c`` or a comma table."""
    if depth > max_depth():
        raise ValueError(f"depth {depth} exceeds maximum {max_depth()}")
    expr = expr.strip()
    if expr.startswith("d="):
        expr = expr[2:]
    if expr == "n":
        return d_linear(depth)
    m = re.fullmatch(r"n\+(\d+)", expr)
    if m:
        return d_linear(depth, int(m.group(1)))
    if expr == "2log":
        return d_twolog(depth)
    if re.fullmatch(r"\d+", expr):
        return LengthSchedule([int(expr)] * (depth + 1), label=expr)
    if re.fullmatch(r"\d+(,\d+)*", expr):
        values = [int(v) for v in expr.split(",")]
        if len(values) != depth + 1:
            raise FormatError(
                f"explicit schedule has {len(values)} entries, need depth+1 = {depth + 1}")
        return LengthSchedule(values)
    raise FormatError(f"unknown schedule expression {expr!r}")


# ---------------------------------------------------------------------------
# text form


def format_schedule(s: Schedule) -> list[str]:
    if isinstance(s, LengthSchedule):
        return ["schedule length " + " ".join(str(v) for v in s.d)]
    lines = ["schedule string"]
    for x in all_strings(s.depth):
        lines.append(f"budget {render_bits(x)} {s.t[x]}")
    return lines


def parse_schedule(lines: list[str], depth: int) -> Schedule:
    """Inverse of :func:`format_schedule`; ``lines`` holds only schedule records."""
    if not lines:
        raise FormatError("missing schedule header")
    head = lines[0].split()
    if head[:2] == ["schedule", "length"]:
        s = LengthSchedule([int(v) for v in head[2:]])
        if s.depth != depth:
            raise FormatError(f"schedule depth {s.depth} != table depth {depth}")
        return s
    if head[:2] == ["schedule", "string"]:
        t = {}
        for line in lines[1:]:
            parts = line.split()
            if len(parts) != 3 or parts[0] != "budget":
                raise FormatError(f"bad budget record {line!r}")
            t[parse_bits(parts[1])] = int(parts[2])
        return StringSchedule(t, depth)
    raise FormatError(f"bad schedule header {lines[0]!r}")
