"""Incremental cone allocation realizing a rounded semimeasure as a monotone map.

Every output string ``x`` owns a set of disjoint input cones whose stems
all have length ``grid(x)``.  The cones of ``x0`` and ``x1`` are carved out
of the cones of ``x``, so the induced map ``T`` (input -> longest ``x``
owning a prefix of the input) is monotone and the first ``grid(x)`` input
bits decide whether the output extends ``x``.  Under uniform input the
probability that ``T`` extends ``x`` is exactly the rounded value ``R(x)``.

Internally positions are integers in units of ``2**-K`` with ``K`` the
largest grid of the schedule; a cone with stem index ``k`` at grid ``L``
covers ``[k << (K-L), (k+1) << (K-L))``.
"""
from __future__ import annotations

from bisect import bisect_left
from typing import Iterable, Sequence

from .bitcore import Cone, Dyadic, all_strings, parse_bits, render_bits, strings_of_length
from .errors import (FormatError, InternalInvariantBroken, InvalidInput,
                     NotMonotoneStages)
from .rounding import RoundedTable
from .schedule import Schedule, format_schedule, parse_schedule
from .semimeasure import SemimeasureTable


def _stem(index: int, length: int) -> str:
    return format(index, f"0{length}b") if length else ""


class Allocation:
    """Mutable while being extended stage by stage; query-only afterwards."""

    def __init__(self, schedule: Schedule):
        schedule.check_monotone()
        self.schedule = schedule
        self.depth = schedule.depth
        self.K = schedule.max_grid
        self.stage = 0
        self._grid = {x: schedule.grid(x) for x in all_strings(self.depth)}
        self._cones: dict[str, list[int]] = {x: [] for x in all_strings(self.depth)}
        # free space inside each region not yet handed to the region's children;
        # the root's region is keyed by None and starts as all of the input space
        self._free: dict[str | None, list[tuple[int, int]]] = {
            x: [] for x in all_strings(self.depth - 1)} if self.depth > 0 else {}
        self._free[None] = [(0, 1 << self.K)]
        self._index: dict[str, frozenset] | None = None

    # -- construction ---------------------------------------------------

    def extend(self, rounded: RoundedTable) -> None:
        """Grow every string's cone set to match ``rounded``; never revokes cones."""
        if rounded.schedule != self.schedule:
            raise InvalidInput("rounded table uses a different schedule")
        if rounded.depth != self.depth:
            raise InvalidInput("rounded table has a different depth")
        targets = {}
        for x in all_strings(self.depth):
            g = self._grid[x]
            try:
                count = rounded.table[x].grid_count(g)
            except ValueError:
                raise InvalidInput(f"R({render_bits(x)}) is off its 2^-{g} grid") from None
            have = len(self._cones[x])
            if count < have:
                raise NotMonotoneStages(
                    f"R({render_bits(x)}) shrank from {have} to {count} cells")
            targets[x] = count
        for x in all_strings(self.depth):
            for _ in range(targets[x] - len(self._cones[x])):
                self._take(x)
        self.stage += 1
        self._index = None

    def _take(self, x: str) -> int:
        region = self._free[x[:-1] if x else None]
        L = self._grid[x]
        size = 1 << (self.K - L)
        spot = None
        if x:
            sibling = x[:-1] + ("1" if x[-1] == "0" else "0")
            ls = self._grid[sibling]
            if ls < L:
                spot = self._partial_cell(region, 1 << (self.K - ls))
        if spot is None:
            for i, (lo, hi) in enumerate(region):
                a = -(-lo // size) * size
                if a + size <= hi:
                    spot = (i, a)
                    break
        if spot is None:
            raise InternalInvariantBroken(
                f"no free cell of length {L} for {render_bits(x)} inside its parent")
        i, a = spot
        lo, hi = region[i]
        pieces = [p for p in ((lo, a), (a + size, hi)) if p[0] < p[1]]
        region[i:i + 1] = pieces
        index = a // size
        self._cones[x].append(index)
        if len(x) < self.depth:
            _insert_merged(self._free[x], a, a + size)
        return index

    @staticmethod
    def _partial_cell(region, coarse):
        """Leftmost free spot inside a sibling-grid cell that is already partly used.

        The finer sibling fills such a cell before opening a new one, so at
        most one exists and the coarser sibling never meets a fragmented cell.
        """
        for i, (lo, hi) in enumerate(region):
            if lo % coarse:
                return i, lo
            if hi % coarse:
                return i, max(lo, (hi // coarse) * coarse)
        return None

    # -- queries ----------------------------------------------------------

    def grid(self, x: str) -> int:
        return self._grid[x]

    def cone_indices(self, x: str) -> list[int]:
        """Stem indices of ``x``'s cones, in allocation order."""
        return self._cones[x]

    def cones(self, x: str) -> list[Cone]:
        L = self._grid[x]
        return [Cone(_stem(i, L)) for i in sorted(self._cones[x])]

    def count(self, x: str) -> int:
        return len(self._cones[x])

    def measure(self, x: str) -> Dyadic:
        return Dyadic(len(self._cones[x]), self._grid[x])

    def _lookup(self) -> dict[str, frozenset]:
        if self._index is None:
            self._index = {x: frozenset(c) for x, c in self._cones.items()}
        return self._index

    def apply_int(self, value: int, length: int) -> str:
        """:func:`apply_map` on the input whose ``length`` bits spell ``value``."""
        index = self._lookup()
        grid = self._grid
        x = ""
        for _ in range(self.depth):
            for b in "01":
                c = x + b
                L = grid[c]
                if L <= length and (value >> (length - L)) in index[c]:
                    x = c
                    break
            else:
                break
        return x

    def free_space(self) -> dict:
        return {k: list(v) for k, v in self._free.items()}

    def __eq__(self, other):
        if not isinstance(other, Allocation):
            return NotImplemented
        return (self.schedule == other.schedule and self.stage == other.stage
                and self._cones == other._cones and self._free == other._free)

    def __repr__(self):
        total = sum(len(c) for c in self._cones.values())
        return f"Allocation(depth={self.depth}, stage={self.stage}, cones={total})"


def _insert_merged(free: list, lo: int, hi: int) -> None:
    i = bisect_left(free, (lo,))
    if i > 0 and free[i - 1][1] == lo:
        i -= 1
        lo = free[i][0]
        del free[i]
    if i < len(free) and free[i][0] == hi:
        hi = free[i][1]
        del free[i]
    free.insert(i, (lo, hi))


# ---------------------------------------------------------------------------
# module-level operations


def build_allocation(rounded_stages: Sequence[RoundedTable],
                     allocation: Allocation | None = None) -> Allocation:
    """Allocate cones stage by stage; pass ``allocation`` to continue a build."""
    if not rounded_stages and allocation is None:
        raise ValueError("need at least one rounded stage")
    if allocation is None:
        allocation = Allocation(rounded_stages[0].schedule)
    for r in rounded_stages:
        allocation.extend(r)
    return allocation


def apply_map(a: Allocation, input_bits: str) -> str:
    """Longest output string owning a cone whose stem is a prefix of ``input_bits``."""
    if not input_bits:
        return a.apply_int(0, 0)
    return a.apply_int(int(input_bits, 2), len(input_bits))


def image_semimeasure(a: Allocation, depth: int | None = None) -> SemimeasureTable:
    """Output distribution of the map under uniform input, from cone counts."""
    depth = a.depth if depth is None else depth
    if depth > a.depth:
        raise ValueError(f"depth {depth} exceeds allocation depth {a.depth}")
    return SemimeasureTable(depth, {x: a.measure(x) for x in all_strings(depth)})


def preimage(a: Allocation, x: str) -> list[Cone]:
    """The clopen set ``T^-1(cone of x)`` as a sorted list of cones."""
    if len(x) > a.depth:
        raise ValueError(f"|x| = {len(x)} exceeds depth {a.depth}")
    return a.cones(x)


# ---------------------------------------------------------------------------
# invariants and persistence


def allocation_violations(a: Allocation) -> list[str]:
    """Check the structural invariants from the cone sets alone."""
    out = []
    K = a.K
    for x in all_strings(a.depth):
        L = a.grid(x)
        idx = a.cone_indices(x)
        if len(set(idx)) != len(idx):
            out.append(f"{render_bits(x)}: repeated cone")
        if any(i < 0 or i >= (1 << L) for i in idx):
            out.append(f"{render_bits(x)}: stem index out of range")
        if not x:
            continue
        parent = x[:-1]
        lp = a.grid(parent)
        parents = set(a.cone_indices(parent))
        if any((i >> (L - lp)) not in parents for i in idx):
            out.append(f"{render_bits(x)}: cone outside every parent cone")
        if x[-1] == "0":
            sib = parent + "1"
            ls = a.grid(sib)
            mine = _intervals(idx, L, K)
            theirs = _intervals(a.cone_indices(sib), ls, K)
            if _overlap(mine, theirs):
                out.append(f"{render_bits(x)}: overlaps sibling")
    return out


def _intervals(indices: Iterable[int], L: int, K: int) -> list[tuple[int, int]]:
    size = 1 << (K - L)
    return sorted((i * size, (i + 1) * size) for i in indices)


def _overlap(a: list, b: list) -> bool:
    i = j = 0
    while i < len(a) and j < len(b):
        if a[i][1] <= b[j][0]:
            i += 1
        elif b[j][1] <= a[i][0]:
            j += 1
        else:
            return True
    return False


def _subtract(base: list, holes: list) -> list[tuple[int, int]]:
    """Canonical (merged, sorted) form of ``union(base) - union(holes)``."""
    out: list[tuple[int, int]] = []
    j = 0
    for lo, hi in _merge(base):
        cur = lo
        while j < len(holes) and holes[j][1] <= cur:
            j += 1
        k = j
        while k < len(holes) and holes[k][0] < hi:
            if holes[k][0] > cur:
                out.append((cur, holes[k][0]))
            cur = max(cur, holes[k][1])
            k += 1
        if cur < hi:
            out.append((cur, hi))
    return _merge(out)


def _merge(intervals: list) -> list[tuple[int, int]]:
    out: list[tuple[int, int]] = []
    for lo, hi in sorted(intervals):
        if out and out[-1][1] >= lo:
            out[-1] = (out[-1][0], max(out[-1][1], hi))
        else:
            out.append((lo, hi))
    return out


def format_allocation(a: Allocation) -> str:
    lines = [f"depth {a.depth}", f"stage {a.stage}"]
    lines.extend(format_schedule(a.schedule))
    for x in all_strings(a.depth):
        L = a.grid(x)
        rx = render_bits(x)
        for i in a.cone_indices(x):
            lines.append(f"alloc {rx} {_stem(i, L)}")
    return "\n".join(lines) + "\n"


def parse_allocation(text: str) -> Allocation:
    depth = stage = None
    sched_lines: list[str] = []
    allocs: list[tuple[str, str]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        head = parts[0]
        if head == "depth" and len(parts) == 2:
            depth = int(parts[1])
        elif head == "stage" and len(parts) == 2:
            stage = int(parts[1])
        elif head in ("schedule", "budget"):
            sched_lines.append(line)
        elif head == "alloc" and len(parts) == 3:
            allocs.append((parse_bits(parts[1]), parse_bits(parts[2])))
        else:
            raise FormatError(f"line {lineno}: unrecognized record {line!r}")
    if depth is None or stage is None:
        raise FormatError("allocation dump needs 'depth' and 'stage' headers")
    a = Allocation(parse_schedule(sched_lines, depth))
    for x, stem in allocs:
        if x not in a._cones:
            raise FormatError(f"output string {render_bits(x)} deeper than {depth}")
        if len(stem) != a.grid(x):
            raise FormatError(f"stem {stem} for {render_bits(x)} must have length {a.grid(x)}")
        a._cones[x].append(int(stem, 2) if stem else 0)
    bad = allocation_violations(a)
    if bad:
        raise FormatError(f"inconsistent allocation: {bad[0]}")
    K = a.K
    root = _intervals(a.cone_indices(""), a.grid(""), K)
    a._free[None] = _subtract([(0, 1 << K)], root)
    for n in range(depth):
        for x in strings_of_length(n):
            kids = _intervals(a.cone_indices(x + "0"), a.grid(x + "0"), K) + \
                _intervals(a.cone_indices(x + "1"), a.grid(x + "1"), K)
            a._free[x] = _subtract(_intervals(a.cone_indices(x), a.grid(x), K), sorted(kids))
    a.stage = stage
    return a
