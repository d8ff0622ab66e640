"""Exact bit-level primitives: bit strings, dyadic rationals and cones.

Bit strings are plain ``str`` objects over the characters ``'0'`` and
``'1'``; the empty string is the empty word.  Python's string ordering is
exactly the lexicographic order in which a prefix sorts before its
extensions, which is the order used for cone placement.

No floating point is used anywhere in this module.
"""
from __future__ import annotations

import os
import re
from fractions import Fraction
from functools import lru_cache
from itertools import product

from .errors import FormatError, NonPositive, NotDyadic, PrecisionExceeded

#: Largest exponent a :class:`Dyadic` may carry after normalization.
MAX_EXPONENT = 64

DEFAULT_MAX_DEPTH = 16


def max_depth() -> int:
    """Configured maximum table depth (``SEMIALLOC_MAX_DEPTH`` overrides)."""
    raw = os.environ.get("SEMIALLOC_MAX_DEPTH")
    if raw is None:
        return DEFAULT_MAX_DEPTH
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"SEMIALLOC_MAX_DEPTH must be an integer, got {raw!r}") from None
    if value < 0:
        raise ValueError("SEMIALLOC_MAX_DEPTH must be nonnegative")
    return value


_BITS = re.compile(r"[01]*\Z")


def check_bits(s: str) -> str:
    if not isinstance(s, str) or not _BITS.match(s):
        raise ValueError(f"not a bit string: {s!r}")
    return s


def render_bits(s: str) -> str:
    """Text form of a bit string; the empty word is written ``-``."""
    return s if s else "-"


def parse_bits(token: str) -> str:
    return "" if token == "-" else check_bits(token)


def is_prefix(x: str, y: str) -> bool:
    return y.startswith(x)


@lru_cache(maxsize=64)
def strings_of_length(n: int) -> tuple[str, ...]:
    """All bit strings of length ``n`` in lexicographic order."""
    if n == 0:
        return ("",)
    return tuple("".join(p) for p in product("01", repeat=n))


@lru_cache(maxsize=64)
def all_strings(depth: int) -> tuple[str, ...]:
    """All bit strings of length at most ``depth``, breadth-first."""
    out: list[str] = []
    for n in range(depth + 1):
        out.extend(strings_of_length(n))
    return tuple(out)


# ---------------------------------------------------------------------------
# Dyadic rationals


class Dyadic:
    """Nonnegative binary fraction ``m / 2**e``.

    The numerator and exponent are stored as given (not normalized), so a
    value rounded onto a ``2**-g`` grid keeps exponent ``g``.  Equality,
    ordering and hashing are by value.
    """

    __slots__ = ("m", "e")

    def __init__(self, m: int = 0, e: int = 0):
        if type(m) is not int or type(e) is not int:
            raise TypeError("Dyadic numerator and exponent must be int")
        if m < 0 or e < 0:
            raise ValueError(f"Dyadic needs m >= 0 and e >= 0, got {m}/2^{e}")
        if e > MAX_EXPONENT:
            shift = min(_trailing_zeros(m), e) if m else e
            m >>= shift
            e -= shift
            if e > MAX_EXPONENT:
                raise PrecisionExceeded(
                    f"{m}/2^{e} needs exponent {e} > {MAX_EXPONENT}")
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "e", e)

    def __setattr__(self, name, value):
        raise AttributeError("Dyadic is immutable")

    def __reduce__(self):
        return (Dyadic, (self.m, self.e))

    # -- conversion -------------------------------------------------------

    @classmethod
    def from_fraction(cls, q) -> "Dyadic":
        q = Fraction(q)
        if q < 0:
            raise ValueError(f"negative value {q}")
        den = q.denominator
        if den & (den - 1):
            raise NotDyadic(f"{q} is not a binary fraction")
        return cls(q.numerator, den.bit_length() - 1)

    @classmethod
    def pow2(cls, k: int) -> "Dyadic":
        """``2**-k`` for ``k >= 0``."""
        return cls(1, k)

    def to_fraction(self) -> Fraction:
        return Fraction(self.m, 1 << self.e)

    def normalized(self) -> "Dyadic":
        if self.m == 0:
            return ZERO
        shift = min(_trailing_zeros(self.m), self.e)
        return Dyadic(self.m >> shift, self.e - shift)

    def fractional_bits(self) -> int:
        """Number of binary digits after the point in the shortest form."""
        return self.normalized().e

    def on_grid(self, g: int) -> bool:
        """True iff the value is an integer multiple of ``2**-g``."""
        return self.fractional_bits() <= g

    def grid_count(self, g: int) -> int:
        """The integer ``value * 2**g``; raises if not on the grid."""
        if self.e <= g:
            return self.m << (g - self.e)
        shift = self.e - g
        if self.m & ((1 << shift) - 1):
            raise ValueError(f"{self} is not on the 2^-{g} grid")
        return self.m >> shift

    # -- arithmetic -------------------------------------------------------

    def __add__(self, other: "Dyadic") -> "Dyadic":
        if not isinstance(other, Dyadic):
            return NotImplemented
        a, b = self, other
        if a.e < b.e:
            a, b = b, a
        return Dyadic(a.m + (b.m << (a.e - b.e)), a.e)

    def __sub__(self, other: "Dyadic") -> "Dyadic":
        if not isinstance(other, Dyadic):
            return NotImplemented
        e = max(self.e, other.e)
        m = (self.m << (e - self.e)) - (other.m << (e - other.e))
        if m < 0:
            raise ValueError(f"{self} - {other} is negative")
        return Dyadic(m, e)

    def __mul__(self, other: "Dyadic") -> "Dyadic":
        if not isinstance(other, Dyadic):
            return NotImplemented
        return Dyadic(self.m * other.m, self.e + other.e)

    def halve(self) -> "Dyadic":
        return Dyadic(self.m, self.e + 1)

    def scale_pow2(self, k: int) -> "Dyadic":
        """Multiply by ``2**-k``."""
        return Dyadic(self.m, self.e + k)

    def floor_strict(self, grid_bits: int) -> "Dyadic":
        """Largest multiple of ``2**-grid_bits`` strictly below this value.

        A value already on the grid steps down a full cell.  The result is
        stored with exponent ``grid_bits``.
        """
        if self.m == 0:
            raise NonPositive("no nonnegative grid value lies strictly below 0")
        if grid_bits < 0:
            raise ValueError("grid_bits must be nonnegative")
        if self.e >= grid_bits:
            k = (self.m - 1) >> (self.e - grid_bits)
        else:
            k = (self.m << (grid_bits - self.e)) - 1
        return Dyadic(k, grid_bits)

    # -- comparison -------------------------------------------------------

    def _cmp(self, other: "Dyadic") -> int:
        e = max(self.e, other.e)
        a = self.m << (e - self.e)
        b = other.m << (e - other.e)
        return (a > b) - (a < b)

    def __eq__(self, other):
        if not isinstance(other, Dyadic):
            return NotImplemented
        return self._cmp(other) == 0

    def __lt__(self, other):
        if not isinstance(other, Dyadic):
            return NotImplemented
        return self._cmp(other) < 0

    def __le__(self, other):
        if not isinstance(other, Dyadic):
            return NotImplemented
        return self._cmp(other) <= 0

    def __gt__(self, other):
        if not isinstance(other, Dyadic):
            return NotImplemented
        return self._cmp(other) > 0

    def __ge__(self, other):
        if not isinstance(other, Dyadic):
            return NotImplemented
        return self._cmp(other) >= 0

    def __hash__(self):
        n = self.normalized()
        return hash((n.m, n.e))

    def __bool__(self):
        return self.m != 0

    def __str__(self):
        return f"{self.m}/2^{self.e}"

    def __repr__(self):
        return f"Dyadic({self.m}, {self.e})"

    @classmethod
    def parse(cls, text: str) -> "Dyadic":
        """Parse ``m/2^e``, a plain integer, or ``a/b`` with ``b`` a power of two."""
        text = text.strip()
        match = re.fullmatch(r"(\d+)/2\^(\d+)", text)
        if match:
            return cls(int(match.group(1)), int(match.group(2)))
        match = re.fullmatch(r"(\d+)(?:/(\d+))?", text)
        if not match:
            raise FormatError(f"cannot parse dyadic value {text!r}")
        den = int(match.group(2) or 1)
        if den == 0:
            raise FormatError(f"zero denominator in {text!r}")
        return cls.from_fraction(Fraction(int(match.group(1)), den))


def _trailing_zeros(m: int) -> int:
    return (m & -m).bit_length() - 1


ZERO = Dyadic(0, 0)
ONE = Dyadic(1, 0)


def dyadic_floor_strict(v: Dyadic, grid_bits: int) -> Dyadic:
    return v.floor_strict(grid_bits)


def dsum(values) -> Dyadic:
    total = ZERO
    for v in values:
        total = total + v
    return total


def ceil_neg_log2(q: Dyadic) -> int:
    """Smallest integer ``k`` with ``2**-k <= q``, for ``q > 0``.

    For ``q = m/2^e`` this is ``e - bitlen(m) + 1``: with
    ``2**(L-1) <= m < 2**L`` the condition ``m * 2**k >= 2**e`` first holds
    at ``k = e - L + 1``.
    """
    if q.m == 0:
        raise NonPositive("-log2 of zero is unbounded")
    return q.e - q.m.bit_length() + 1


# ---------------------------------------------------------------------------
# Cones


class Cone:
    """The set of infinite sequences extending ``stem``; measure ``2**-len(stem)``."""

    __slots__ = ("stem",)

    def __init__(self, stem: str = ""):
        object.__setattr__(self, "stem", check_bits(stem))

    def __setattr__(self, name, value):
        raise AttributeError("Cone is immutable")

    @property
    def measure(self) -> Dyadic:
        return Dyadic(1, len(self.stem))

    def contains(self, other: "Cone") -> bool:
        return other.stem.startswith(self.stem)

    def disjoint(self, other: "Cone") -> bool:
        return not (self.stem.startswith(other.stem) or other.stem.startswith(self.stem))

    def __eq__(self, other):
        if not isinstance(other, Cone):
            return NotImplemented
        return self.stem == other.stem

    def __lt__(self, other):
        if not isinstance(other, Cone):
            return NotImplemented
        return self.stem < other.stem

    def __hash__(self):
        return hash(("Cone", self.stem))

    def __repr__(self):
        return f"Cone({self.stem!r})"

    def __str__(self):
        return render_bits(self.stem)


def cone_measure(c: Cone) -> Dyadic:
    return c.measure


def cones_disjoint(a: Cone, b: Cone) -> bool:
    return a.disjoint(b)
