"""Encoding targets into input codes, decoding, and low-test witnesses.

``encode(a, x)`` picks the least cone of ``x``'s preimage; feeding that code
to the map reproduces ``x``.  :class:`CodeStream` does the same bit by bit,
emitting only bits shared by every surviving candidate cone, so all codes
for successive prefixes of a target are prefixes of one another.

The witness functions work on a :class:`TestAssignment`, a nonnegative
function on the finest input cells with mean at most 1.  If the average
test value over a preimage is at most ``C``, some cell in that preimage has
test value at most ``C``; :func:`find_low_test_preimage` returns the
smallest such cell.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .allocator import Allocation, apply_map
from .bitcore import ONE, Cone, Dyadic, check_bits, parse_bits, render_bits
from .errors import (BoundViolated, FormatError, InternalInvariantBroken, NotCovered,
                     StreamFinalized)


def _stem(index: int, length: int) -> str:
    return format(index, f"0{length}b") if length else ""


def encode(a: Allocation, target: str) -> str:
    """Least stem in ``preimage(target)``; its length is ``grid(target)``."""
    check_bits(target)
    if len(target) > a.depth:
        raise ValueError(f"target longer than depth {a.depth}")
    idx = a.cone_indices(target)
    if not idx:
        raise NotCovered(target)
    return _stem(min(idx), a.grid(target))


def _common_prefix(lo: str, hi: str) -> str:
    n = 0
    for p, q in zip(lo, hi):
        if p != q:
            break
        n += 1
    return lo[:n]


class CodeStream:
    """Incremental encoder: feed target bits, collect committed code bits.

    At every point, ``committed`` followed by the completion of any
    candidate stem decodes to the target read so far.
    """

    def __init__(self, a: Allocation):
        self.allocation = a
        self.target = ""
        self.committed = ""
        self.finalized = False
        self._set_candidates("")

    def _set_candidates(self, target: str) -> str:
        a = self.allocation
        idx = a.cone_indices(target)
        if not idx:
            raise NotCovered(target)
        L = a.grid(target)
        self._idx = sorted(idx)
        self._len = L
        # sorted stems share a prefix iff the first and last do
        common = _common_prefix(_stem(self._idx[0], L), _stem(self._idx[-1], L))
        emitted = common[len(self.committed):]
        self.committed = common
        self.target = target
        return emitted

    @property
    def candidates(self) -> list[Cone]:
        return [Cone(_stem(i, self._len)) for i in self._idx]

    def feed(self, bit: str) -> str:
        """Extend the target by ``bit``; returns the newly committed code bits."""
        if self.finalized:
            raise StreamFinalized("stream already finalized")
        if bit not in ("0", "1"):
            raise ValueError(f"target bit must be '0' or '1', got {bit!r}")
        if len(self.target) >= self.allocation.depth:
            raise ValueError("target already at full depth")
        return self._set_candidates(self.target + bit)

    def finalize(self) -> str:
        """Commit the least candidate and return the complete code."""
        if self.finalized:
            raise StreamFinalized("stream already finalized")
        self.finalized = True
        self.committed = _stem(self._idx[0], self._len)
        return self.committed


def encode_stream(a: Allocation, target: str) -> tuple[list[str], str]:
    """Feed ``target`` through a :class:`CodeStream`.

    Returns the bits emitted after each target bit (index 0 holds what the
    empty target already commits) and the finalized code.
    """
    stream = CodeStream(a)
    emitted = [stream.committed]
    for b in target:
        emitted.append(stream.feed(b))
    return emitted, stream.finalize()


@dataclass(frozen=True)
class Decoded:
    bits: str
    requested: int

    @property
    def complete(self) -> bool:
        return len(self.bits) == self.requested

    @property
    def underdetermined(self) -> int | None:
        """Depth actually reached when short of the request, else ``None``."""
        return None if self.complete else len(self.bits)


def decode(a: Allocation, code: str, n: int) -> Decoded:
    """First ``n`` output bits of the map applied to ``code``."""
    check_bits(code)
    if n < 0 or n > a.depth:
        raise ValueError(f"n must lie in 0..{a.depth}")
    return Decoded(apply_map(a, code)[:n], n)


# ---------------------------------------------------------------------------
# tests over the leaf cells


class TestAssignment:
    """Nonnegative dyadic value for each ``depth``-bit leaf cell, mean <= 1.

    Values are held as integer numerators over a common ``2**-exponent``.
    """

    __test__ = False  # not a pytest class

    def __init__(self, depth: int, values):
        values = list(values)
        if len(values) != 1 << depth:
            raise ValueError(f"need {1 << depth} leaf values, got {len(values)}")
        values = [v if isinstance(v, Dyadic) else Dyadic.from_fraction(v) for v in values]
        e = max((v.e for v in values), default=0)
        self.depth = depth
        self.exponent = e
        self.numerators = [v.m << (e - v.e) for v in values]
        if self.mean > ONE:
            raise ValueError(f"test mean {self.mean} exceeds 1")

    @property
    def mean(self) -> Dyadic:
        return Dyadic(sum(self.numerators), self.exponent + self.depth)

    def value(self, leaf: int) -> Dyadic:
        return Dyadic(self.numerators[leaf], self.exponent)

    def __getitem__(self, stem: str) -> Dyadic:
        if len(stem) != self.depth:
            raise ValueError(f"leaf stems have length {self.depth}")
        return self.value(int(stem, 2) if stem else 0)

    def leaves_in(self, cones_idx, L: int):
        shift = self.depth - L
        for i in sorted(cones_idx):
            yield from range(i << shift, (i + 1) << shift)

    def average_over(self, cones_idx, L: int) -> Fraction:
        """``tau(U) / P(U)``; exact, generally not dyadic."""
        leaves = list(self.leaves_in(cones_idx, L))
        total = sum(self.numerators[j] for j in leaves)
        return Fraction(total, len(leaves) << self.exponent)


def format_test(t: TestAssignment) -> str:
    lines = [f"depth {t.depth}"]
    for j, num in enumerate(t.numerators):
        if num:
            lines.append(f"{_stem(j, t.depth) or '-'} {Dyadic(num, t.exponent)}")
    return "\n".join(lines) + "\n"


def parse_test(text: str) -> TestAssignment:
    depth = None
    entries = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "depth" and len(parts) == 2:
            depth = int(parts[1])
            continue
        if len(parts) != 2:
            raise FormatError(f"line {lineno}: expected '<leaf> <m>/2^<e>'")
        entries[parse_bits(parts[0])] = Dyadic.parse(parts[1])
    if depth is None:
        raise FormatError("missing 'depth <G>' header")
    values = [Dyadic(0, 0)] * (1 << depth)
    for stem, v in entries.items():
        if len(stem) != depth:
            raise FormatError(f"leaf {stem} must have {depth} bits")
        values[int(stem, 2) if stem else 0] = v
    return TestAssignment(depth, values)


@dataclass(frozen=True)
class Witness:
    prefix: str
    leaf: Cone
    value: Dyadic
    ratio: Fraction   # tau(U) / P(U) for this prefix


def _witness(a: Allocation, x: str, t: TestAssignment, C: Dyadic) -> Witness:
    if t.depth < a.K:
        raise ValueError(f"test depth {t.depth} below finest grid {a.K}")
    idx = a.cone_indices(x)
    if not idx:
        raise NotCovered(x)
    L = a.grid(x)
    leaves = list(t.leaves_in(idx, L))
    nums = t.numerators
    total = sum(nums[j] for j in leaves)
    # tau(U) <= C * P(U)  <=>  total / 2^exp <= C * #leaves
    if total << C.e > (C.m * len(leaves)) << t.exponent:
        raise BoundViolated(
            x, f"average test value over preimage of {render_bits(x)} is "
               f"{Fraction(total, len(leaves) << t.exponent)} > {C}")
    best = min(leaves, key=lambda j: (nums[j], j))
    return Witness(x, Cone(_stem(best, t.depth)), t.value(best),
                   Fraction(total, len(leaves) << t.exponent))


def find_low_test_preimage(a: Allocation, x: str, t: TestAssignment, C: Dyadic) -> Cone:
    """Leaf cell of ``preimage(x)`` with the least test value (ties: least stem).

    Raises :class:`BoundViolated` unless the average over the preimage is at
    most ``C``; when it is, the returned value is at most ``C``.
    """
    return _witness(a, x, t, C).leaf


@dataclass(frozen=True)
class WitnessChain:
    alpha: str
    witnesses: list
    limit: Witness

    def ok(self, a: Allocation, t: TestAssignment, C: Dyadic) -> bool:
        """Recheck every witness from scratch."""
        for w in self.witnesses + [self.limit]:
            if t[w.leaf.stem] > C or not apply_map(a, w.leaf.stem).startswith(w.prefix):
                return False
        return all(apply_map(a, self.limit.leaf.stem).startswith(w.prefix)
                   for w in self.witnesses)


def verify_nested_witnesses(a: Allocation, alpha: str, t: TestAssignment,
                            C: Dyadic) -> WitnessChain:
    """Witnesses for every prefix of ``alpha`` plus one leaf valid for all of them.

    The full-length preimage is contained in every shorter one, so its own
    witness serves every prefix at once.
    """
    check_bits(alpha)
    if len(alpha) > a.depth:
        raise ValueError(f"alpha longer than depth {a.depth}")
    chain = [_witness(a, alpha[:i], t, C) for i in range(len(alpha) + 1)]
    limit = chain[-1]
    stem = limit.leaf.stem
    out = apply_map(a, stem)
    if not out.startswith(alpha):
        raise InternalInvariantBroken(f"limit leaf {stem} maps to {out!r}, not an extension of alpha")
    return WitnessChain(alpha, chain, limit)
