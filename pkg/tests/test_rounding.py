from fractions import Fraction
import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from semialloc.bitcore import ONE, Dyadic, all_strings
from semialloc.errors import InvalidInput, NotMonotoneStages, WeightOverflow
from semialloc.models import Bernoulli, budget_schedule_of, realize
from semialloc.rounding import pad_and_round, round_stages
from semialloc.schedule import LengthSchedule, d_linear, d_twolog
from semialloc.semimeasure import SemimeasureTable, pad_semimeasure, uniform_table, validate

from helpers import frac, lower_stage, random_semimeasure


def oracle_round(M, budget, depth):
    """Pad by direct summation over extensions, then ceil(A 2^g) - 1 cells."""
    out = {}
    for x in all_strings(depth):
        s = sum(Fraction(1, 2 ** budget(y)) for y in all_strings(depth) if y.startswith(x))
        a = (frac(M[x]) + s) / 2
        g = budget(x) + 1
        out[x] = Fraction(math.ceil(a * 2 ** g) - 1, 2 ** g)
    out[""] = Fraction(1)
    return out


def test_uniform_example():
    R = pad_and_round(uniform_table(2), d_linear(2))
    assert R["0"] == Dyadic(3, 3)
    assert R[""] == ONE


def test_pad_rounded_against_itself():
    # the raw pad has root 15/8; its half is a semimeasure with root 15/16
    S = SemimeasureTable(3, {x: v.halve() for x, v in pad_semimeasure(d_linear(3)).items()})
    assert S[""] == Dyadic(15, 4) and validate(S) == []
    R = pad_and_round(S, d_linear(3))
    assert validate(R.table) == []
    assert all(R[x] >= S[x].halve() for x in all_strings(3) if x)


@pytest.mark.parametrize("schedule", [d_linear(4), d_twolog(4)])
def test_matches_oracle(schedule):
    rng = random.Random(3)
    for _ in range(10):
        M = random_semimeasure(rng, 4)
        R = pad_and_round(M, schedule)
        want = oracle_round(M, schedule.budget, 4)
        assert {x: frac(v) for x, v in R.table.items()} == want


def test_zero_model_gives_rounded_pad():
    M = SemimeasureTable(3, {"": ONE})
    R = pad_and_round(M, d_linear(3))
    assert validate(R.table) == []
    assert {x: frac(v) for x, v in R.table.items()} == oracle_round(M, d_linear(3).budget, 3)


def test_grid_width_linear():
    rng = random.Random(5)
    for D in (3, 6):
        R = pad_and_round(random_semimeasure(rng, D), d_linear(D))
        for x, v in R.table.items():
            assert v.fractional_bits() <= 2 * len(x) + 1


def check_guarantees(M, R, schedule):
    assert validate(R.table) == []
    assert R[""] == ONE
    assert R.grid_violations() == []
    for x in all_strings(M.depth):
        if x:
            assert R[x] >= M[x].halve()
        v = frac(R[x]) * 2 ** schedule.grid(x)
        assert v.denominator == 1


@given(st.integers(0, 2 ** 32), st.integers(1, 7), st.sampled_from(["n", "2log", "n+3"]))
@settings(max_examples=80, deadline=None)
def test_guarantees_random(seed, D, which):
    rng = random.Random(seed)
    schedule = {"n": d_linear(D), "2log": d_twolog(D), "n+3": d_linear(D, 3)}[which]
    M = random_semimeasure(rng, D, root_one=rng.random() < 0.7)
    check_guarantees(M, pad_and_round(M, schedule), schedule)


def test_budget_schedule_guarantees():
    spec = Bernoulli(Dyadic(3, 2), 6)
    M = realize(spec)
    s = budget_schedule_of(spec, 3)
    s = s.shifted(s.fit_shift())
    check_guarantees(M, pad_and_round(M, s), s)


def test_invalid_inputs():
    bad = SemimeasureTable(1, {"": Dyadic(1, 2), "0": Dyadic(1, 1), "1": Dyadic(1, 1)})
    with pytest.raises(InvalidInput):
        pad_and_round(bad, d_linear(1))
    with pytest.raises(InvalidInput):
        pad_and_round(uniform_table(2), d_linear(3))
    with pytest.raises(WeightOverflow):
        pad_and_round(uniform_table(2), LengthSchedule([0, 0, 0]))


def test_round_stages_examples():
    rng = random.Random(9)
    M = random_semimeasure(rng, 4)
    s = d_linear(4)
    rs = round_stages([M, M, M], s)
    assert rs[0] == rs[1] == rs[2]
    assert round_stages([M], s)[0] == pad_and_round(M, s)
    assert round_stages([], s) == []


def test_round_stages_single_leaf_increase():
    M1 = SemimeasureTable(2, {"": ONE, "0": Dyadic(1, 1), "00": Dyadic(1, 3)})
    M2 = SemimeasureTable(2, {"": ONE, "0": Dyadic(1, 1), "00": Dyadic(1, 2)})
    r1, r2 = round_stages([M1, M2], d_linear(2))
    assert all(r1[x] <= r2[x] for x in all_strings(2))
    assert r1["00"] < r2["00"]


def test_round_stages_monotone_random():
    rng = random.Random(10)
    for _ in range(30):
        D = rng.randint(1, 6)
        top = random_semimeasure(rng, D)
        mid = lower_stage(rng, top)
        low = lower_stage(rng, mid)
        out = round_stages([low, mid, top], d_twolog(D))
        for a, b in zip(out, out[1:]):
            assert all(a[x] <= b[x] for x in all_strings(D))


def test_round_stages_rejects_decrease():
    rng = random.Random(1)
    top = random_semimeasure(rng, 3)
    low = lower_stage(rng, top, cuts=1)
    if low == top:
        low = SemimeasureTable(3, {"": ONE})
    with pytest.raises(NotMonotoneStages):
        round_stages([top, low], d_linear(3))
