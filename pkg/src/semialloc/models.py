"""Concrete computable semimeasures used as pipeline inputs.

Model specs are small frozen dataclasses.  :func:`realize` turns a spec
into a dense :class:`~semialloc.semimeasure.SemimeasureTable` using exact
dyadic arithmetic only.

Config format (one directive per line, ``;`` also separates lines)::

    depth 4
    kind bernoulli 3/2^2

    kind markov 1 0:3/2^2 1:1/2^1     # p(0 | previous bit)
    kind mixture
    component 1/2^1 uniform
    component 1/2^1 pad n
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .bitcore import (ONE, ZERO, Dyadic, all_strings, ceil_neg_log2, max_depth, parse_bits,
                      render_bits, strings_of_length)
from .errors import FormatError, NotDyadic, ZeroMass
from .schedule import StringSchedule, parse_d_expr
from .semimeasure import SemimeasureTable, mix, quadratic_pad, schedule_pad, uniform_table


def _as_dyadic(p) -> Dyadic:
    if isinstance(p, Dyadic):
        return p
    try:
        return Dyadic.from_fraction(Fraction(p))
    except NotDyadic:
        raise
    except (TypeError, ValueError) as exc:
        raise NotDyadic(f"{p!r} is not a binary fraction: {exc}") from None


@dataclass(frozen=True)
class Uniform:
    depth: int


@dataclass(frozen=True)
class Bernoulli:
    """Independent bits, each equal to 1 with probability ``p``."""

    p: Dyadic
    depth: int

    def __post_init__(self):
        object.__setattr__(self, "p", _as_dyadic(self.p))
        if self.p > ONE:
            raise ValueError(f"bernoulli p = {self.p} exceeds 1")


@dataclass(frozen=True)
class Markov:
    """Order-``k`` chain; ``p0[c]`` is p(0 | last k bits = c).

    Contexts are keyed by their integer value; history before the first bit
    reads as zeros.
    """

    order: int
    p0: tuple
    depth: int

    def __post_init__(self):
        p0 = tuple(_as_dyadic(p) for p in self.p0)
        if len(p0) != 1 << self.order:
            raise ValueError(f"order-{self.order} chain needs {1 << self.order} conditionals")
        if any(p > ONE for p in p0):
            raise ValueError("conditional probabilities must lie in [0, 1]")
        object.__setattr__(self, "p0", p0)


@dataclass(frozen=True)
class Pad:
    """The pad of a per-length schedule expression (``n``, ``2log``...) as a model.

    The root carries no gap of its own here (``Q(root) = Q(0) + Q(1)``), so
    the table is a semimeasure whenever the schedule's weight check passes.
    """

    d: str
    depth: int


@dataclass(frozen=True)
class QuadraticPad:
    """Fixed pad ``2**-2|x|``."""

    depth: int


@dataclass(frozen=True)
class Mixture:
    components: tuple
    weights: tuple
    depth: int

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        object.__setattr__(self, "weights", tuple(_as_dyadic(w) for w in self.weights))
        if len(self.components) != len(self.weights):
            raise ValueError("one weight per component")
        if any(c.depth != self.depth for c in self.components):
            raise ValueError("mixture components must share the mixture depth")


ModelSpec = Union[Uniform, Bernoulli, Markov, Pad, QuadraticPad, Mixture]

MEASURE_KINDS = (Uniform, Bernoulli, Markov)


def is_measure_kind(spec) -> bool:
    if isinstance(spec, Mixture):
        total = sum((w.to_fraction() for w in spec.weights), Fraction(0))
        return total == 1 and all(is_measure_kind(c) for c in spec.components)
    return isinstance(spec, MEASURE_KINDS)


def realize(spec: ModelSpec) -> SemimeasureTable:
    depth = spec.depth
    if depth > max_depth():
        raise ValueError(f"depth {depth} exceeds maximum {max_depth()}")
    if isinstance(spec, Uniform):
        return uniform_table(depth)
    if isinstance(spec, QuadraticPad):
        return quadratic_pad(depth)
    if isinstance(spec, Pad):
        s = parse_d_expr(spec.d, depth)
        s.check_weight()
        pad = schedule_pad(s)
        if depth == 0:
            return SemimeasureTable(0, {"": ZERO})
        return pad.map(lambda x, v: v if x else pad["0"] + pad["1"])
    if isinstance(spec, Mixture):
        return mix([realize(c) for c in spec.components], list(spec.weights))
    if isinstance(spec, Bernoulli):
        p1, p0 = spec.p, ONE - spec.p
        return _product_table(depth, lambda x, b: p1 if b == "1" else p0)
    if isinstance(spec, Markov):
        k = spec.order

        def cond(x, b):
            # a short history is implicitly left-padded with zeros
            ctx = int(x[-k:], 2) if k and x else 0
            p = spec.p0[ctx]
            return p if b == "0" else ONE - p
        return _product_table(depth, cond)
    raise TypeError(f"unknown model spec {spec!r}")


def _product_table(depth, cond) -> SemimeasureTable:
    out = {"": ONE}
    for n in range(depth):
        for x in strings_of_length(n):
            q = out[x]
            out[x + "0"] = q * cond(x, "0")
            out[x + "1"] = q * cond(x, "1")
    return SemimeasureTable(depth, out)


def budget_schedule_of(spec_or_table, slack: int) -> StringSchedule:
    """Per-string code budget ``ceil(-log2 Q(x)) + slack``, monotonized downward.

    Each child takes the max of its own bound and its parent's budget, so
    ``t(x) <= t(x0)`` and ``t(x) <= t(x1)`` hold everywhere.
    """
    tab = spec_or_table if isinstance(spec_or_table, SemimeasureTable) else realize(spec_or_table)
    if slack < 0:
        raise ValueError("slack must be nonnegative")
    t: dict[str, int] = {}
    for x in all_strings(tab.depth):
        q = tab[x]
        if not q:
            raise ZeroMass(f"model assigns zero mass to {render_bits(x)}")
        raw = max(0, ceil_neg_log2(q) + slack)
        t[x] = raw if not x else max(raw, t[x[:-1]])
    sched = StringSchedule(t, tab.depth)
    sched.check_monotone()
    return sched


# ---------------------------------------------------------------------------
# config format


def _parse_kind(tokens: list[str], depth: int) -> ModelSpec:
    if not tokens:
        raise FormatError("empty model kind")
    kind, args = tokens[0], tokens[1:]
    if kind == "uniform" and not args:
        return Uniform(depth)
    if kind == "quadpad" and not args:
        return QuadraticPad(depth)
    if kind == "pad" and len(args) == 1:
        parse_d_expr(args[0], depth)
        return Pad(args[0], depth)
    if kind == "bernoulli" and len(args) == 1:
        return Bernoulli(Dyadic.parse(args[0]), depth)
    if kind == "markov" and args:
        k = int(args[0])
        p0 = {}
        for item in args[1:]:
            ctx, _, val = item.partition(":")
            ctx = parse_bits(ctx)
            if len(ctx) != k:
                raise FormatError(f"markov context {item!r} must have {k} bits")
            p0[int(ctx, 2) if ctx else 0] = Dyadic.parse(val)
        if sorted(p0) != list(range(1 << k)):
            raise FormatError(f"markov order {k} needs all {1 << k} contexts")
        return Markov(k, tuple(p0[i] for i in range(1 << k)), depth)
    raise FormatError(f"cannot parse model kind {' '.join(tokens)!r}")


def parse_model(text: str, depth: int | None = None) -> ModelSpec:
    """Parse the line-oriented config; ``depth`` fills in a missing header."""
    lines = []
    for raw in text.replace(";", "\n").splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            lines.append(line.split())
    for parts in lines:
        if parts[0] == "depth":
            if len(parts) != 2:
                raise FormatError("bad depth directive")
            depth = int(parts[1])
    kinds = [p for p in lines if p[0] == "kind"]
    if not kinds:
        # a bare kind line, e.g. "bernoulli 3/2^2"
        kinds = [["kind"] + p for p in lines if p[0] not in ("depth", "component")]
    if depth is None:
        raise FormatError("model needs a depth")
    if len(kinds) != 1:
        raise FormatError("model needs exactly one kind directive")
    head = kinds[0][1:]
    if head == ["mixture"]:
        comps, weights = [], []
        for parts in lines:
            if parts[0] == "component":
                if len(parts) < 3:
                    raise FormatError("component needs a weight and a kind")
                weights.append(Dyadic.parse(parts[1]))
                comps.append(_parse_kind(parts[2:], depth))
        if not comps:
            raise FormatError("mixture without components")
        return Mixture(tuple(comps), tuple(weights), depth)
    if any(p[0] == "component" for p in lines):
        raise FormatError("component lines need 'kind mixture'")
    return _parse_kind(head, depth)


def _kind_tokens(spec) -> str:
    if isinstance(spec, Uniform):
        return "uniform"
    if isinstance(spec, QuadraticPad):
        return "quadpad"
    if isinstance(spec, Pad):
        return f"pad {spec.d}"
    if isinstance(spec, Bernoulli):
        return f"bernoulli {spec.p}"
    if isinstance(spec, Markov):
        k = spec.order
        ctxs = [render_bits(format(i, f"0{k}b") if k else "") for i in range(1 << k)]
        return f"markov {k} " + " ".join(f"{c}:{p}" for c, p in zip(ctxs, spec.p0))
    raise TypeError(f"{spec!r} has no single-line form")


def format_model(spec: ModelSpec) -> str:
    lines = [f"depth {spec.depth}"]
    if isinstance(spec, Mixture):
        lines.append("kind mixture")
        for c, w in zip(spec.components, spec.weights):
            lines.append(f"component {w} {_kind_tokens(c)}")
    else:
        lines.append(f"kind {_kind_tokens(spec)}")
    return "\n".join(lines) + "\n"
