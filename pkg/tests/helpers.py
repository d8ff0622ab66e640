"""Random inputs and brute-force oracles shared by the test modules.

Nothing here calls into the code paths it is used to check: values are
built from raw integers and compared through ``fractions.Fraction``.
"""
from fractions import Fraction
from itertools import product
import random

from semialloc.bitcore import Dyadic
from semialloc.semimeasure import SemimeasureTable


def strings(depth):
    out = []
    for n in range(depth + 1):
        out.extend("".join(p) for p in product("01", repeat=n))
    return out


def frac(v):
    return Fraction(v.m, 2 ** v.e)


def random_semimeasure(rng: random.Random, depth: int, root_one: bool = True) -> SemimeasureTable:
    """Top-down random split; each child pair gets at most the parent's mass.

    About a third of the splits are exact (measure-like), some children get
    zero mass.
    """
    if root_one:
        values = {"": Dyadic(1, 0)}
    else:
        e0 = rng.randint(0, 4)
        values = {"": Dyadic(rng.randint(0, 2 ** e0), e0)}
    for x in strings(depth - 1):
        v = values[x]
        k = rng.randint(0, 3)
        total = v.m << k
        e = v.e + k
        a = rng.randint(0, total)
        if rng.random() < 0.35:
            b = total - a
        else:
            b = rng.randint(0, total - a)
        if rng.random() < 0.5:
            a, b = b, a
        values[x + "0"] = Dyadic(a, e)
        values[x + "1"] = Dyadic(b, e)
    return SemimeasureTable(depth, values)


def lower_stage(rng: random.Random, tab: SemimeasureTable, cuts: int = 3) -> SemimeasureTable:
    """A pointwise smaller semimeasure: halve a few random subtrees."""
    values = dict(tab.items())
    keys = list(values)
    for _ in range(cuts):
        root = rng.choice(keys)
        for y in keys:
            if y.startswith(root):
                values[y] = values[y].halve()
    return SemimeasureTable(tab.depth, values)


def oracle_floor_strict(v: Fraction, g: int) -> Fraction:
    """Enumerate multiples of 2^-g upward until the next one reaches v."""
    step = Fraction(1, 2 ** g)
    k = 0
    while (k + 1) * step < v:
        k += 1
    return k * step


def naive_apply(cones_by_string: dict, u: str) -> str:
    """Longest x owning a stem that prefixes u, scanning every string."""
    best = ""
    for x, stems in cones_by_string.items():
        if len(x) > len(best) and any(u.startswith(s) for s in stems):
            best = x
    return best
