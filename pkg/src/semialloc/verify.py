"""Brute-force checks of an allocation that bypass the cone bookkeeping.

Each check enumerates all ``2**K`` finest input cells, runs the map on
every one of them and inspects only the outputs.
"""
from __future__ import annotations

from collections import Counter

from .allocator import Allocation
from .bitcore import Dyadic, all_strings, render_bits
from .errors import NotCovered
from .reduction import CodeStream, decode, encode
from .schedule import LengthSchedule
from .semimeasure import SemimeasureTable

EXHAUSTIVE_LIMIT = 20


def all_outputs(a: Allocation) -> list[str]:
    K = a.K
    if K > EXHAUSTIVE_LIMIT + 4:
        raise ValueError(f"refusing to enumerate 2^{K} inputs")
    run = a.apply_int
    return [run(u, K) for u in range(1 << K)]


def brute_force_image(a: Allocation, outputs: list[str] | None = None) -> SemimeasureTable:
    """Prefix frequencies of the outputs over all ``2**K`` inputs."""
    outputs = all_outputs(a) if outputs is None else outputs
    exact = Counter(outputs)
    starts: Counter = Counter()
    for y, c in exact.items():
        for i in range(len(y) + 1):
            starts[y[:i]] += c
    K = a.K
    return SemimeasureTable(a.depth, {x: Dyadic(starts[x], K) for x in all_strings(a.depth)})


def bit_budget_violations(a: Allocation, outputs: list[str] | None = None,
                          limit: int = 10) -> list[str]:
    """Inputs sharing the decisive prefix but disagreeing on the output.

    For a per-length schedule: any two inputs agreeing on their first
    ``grid(n)`` bits must agree on the first ``n`` output bits (equal
    truncations, so a short output stays short).  For a per-string
    schedule: the inputs whose output extends ``x`` form a union of whole
    ``grid(x)``-cells.
    """
    outputs = all_outputs(a) if outputs is None else outputs
    K = a.K
    bad: list[str] = []
    if isinstance(a.schedule, LengthSchedule):
        for n in range(a.depth + 1):
            block = 1 << (K - a.schedule.grid_of_length(n))
            for start in range(0, 1 << K, block):
                ref = outputs[start][:n]
                for u in range(start + 1, start + block):
                    if outputs[u][:n] != ref:
                        bad.append(f"n={n}: inputs {start} and {u} differ")
                        break
                if len(bad) >= limit:
                    return bad
        return bad
    hits: Counter = Counter()
    grid = a.grid
    for u, y in enumerate(outputs):
        for i in range(len(y) + 1):
            x = y[:i]
            hits[(x, u >> (K - grid(x)))] += 1
    for (x, cell), c in hits.items():
        if c != 1 << (K - grid(x)):
            bad.append(f"{render_bits(x)}: cell {cell} only partly maps into x")
            if len(bad) >= limit:
                break
    return bad


def round_trip_failures(a: Allocation, strings=None) -> list[str]:
    """Strings with positive mass whose code fails to decode, has the wrong
    length, or differs from the streamed code."""
    bad = []
    for x in (all_strings(a.depth) if strings is None else strings):
        try:
            code = encode(a, x)
        except NotCovered:
            continue
        if len(code) != a.grid(x):
            bad.append(f"{render_bits(x)}: code length {len(code)} != {a.grid(x)}")
        d = decode(a, code, len(x))
        if d.bits != x:
            bad.append(f"{render_bits(x)}: decodes to {render_bits(d.bits)}")
        stream = CodeStream(a)
        for b in x:
            stream.feed(b)
        if stream.finalize() != code:
            bad.append(f"{render_bits(x)}: streamed code differs from batch code")
    return bad
