from fractions import Fraction
import random

import pytest

from semialloc.allocator import apply_map, build_allocation
from semialloc.bitcore import ONE, ZERO, Cone, Dyadic, all_strings
from semialloc.errors import BoundViolated, FormatError, NotCovered, StreamFinalized
from semialloc.rounding import RoundedTable, pad_and_round, round_stages
from semialloc.reduction import (CodeStream, TestAssignment, decode, encode, encode_stream,
                                 find_low_test_preimage, format_test, parse_test,
                                 verify_nested_witnesses)
from semialloc.schedule import LengthSchedule, d_linear
from semialloc.semimeasure import SemimeasureTable, uniform_table

from helpers import frac, random_semimeasure


def uniform_alloc(D):
    return build_allocation([pad_and_round(uniform_table(D), d_linear(D))])


def random_test(rng, depth, scale=6):
    raw = [rng.randint(0, 2 ** scale) for _ in range(1 << depth)]
    total = sum(raw)
    # rescale onto a power-of-two denominator without exceeding mean 1
    e = max(scale, (total).bit_length())
    vals = [Dyadic(v, e) for v in raw]
    mean = Fraction(total, 2 ** e << depth)
    assert mean <= 1
    return TestAssignment(depth, vals)


def test_encode_examples():
    a = uniform_alloc(2)
    assert encode(a, "0") == "000"
    assert encode(a, "") == "0"
    assert len(encode(a, "01")) == 5


def test_encode_not_covered():
    s = d_linear(2)
    b = build_allocation([RoundedTable(SemimeasureTable(2, {"": ONE, "0": Dyadic(1, 3)}), s)])
    with pytest.raises(NotCovered) as exc:
        encode(b, "1")
    assert exc.value.target == "1"
    with pytest.raises(ValueError):
        encode(b, "000")


def test_round_trip_random():
    rng = random.Random(2)
    for _ in range(15):
        D = rng.randint(1, 5)
        M = random_semimeasure(rng, D)
        a = build_allocation(round_stages([M], d_linear(D)))
        for x in all_strings(D):
            if not a.count(x):
                continue
            code = encode(a, x)
            assert len(code) == a.grid(x)
            assert apply_map(a, code).startswith(x)
            assert decode(a, code, len(x)).bits == x
            assert encode_stream(a, x)[1] == code


def test_stream_two_candidates():
    s = d_linear(1)
    # cones 000 and 001 for "0": the stream holds the last bit
    tab = SemimeasureTable(1, {"": ONE, "0": Dyadic(2, 3)})
    a = build_allocation([RoundedTable(tab, s)])
    stream = CodeStream(a)
    assert stream.committed == ""            # root cones 0 and 1
    assert stream.feed("0") == "00"
    assert [c.stem for c in stream.candidates] == ["000", "001"]
    assert stream.finalize() == "000"


def test_stream_single_candidate_commits_everything():
    s = d_linear(1)
    tab = SemimeasureTable(1, {"": ONE, "1": Dyadic(1, 3)})
    a = build_allocation([RoundedTable(tab, s)])
    stream = CodeStream(a)
    assert stream.feed("1") == "000"
    assert stream.finalize() == "000"


def test_stream_contract():
    rng = random.Random(6)
    M = random_semimeasure(rng, 5)
    a = build_allocation(round_stages([M], d_linear(5)))
    for x in all_strings(5):
        if not a.count(x):
            continue
        stream = CodeStream(a)
        prev = stream.committed
        for i, b in enumerate(x, 1):
            stream.feed(b)
            assert stream.committed.startswith(prev)
            prev = stream.committed
            assert len(stream.committed) <= a.grid(x[:i])
            for c in stream.candidates:
                assert c.stem.startswith(stream.committed)
                assert apply_map(a, c.stem).startswith(x[:i])


def test_stream_errors():
    a = uniform_alloc(1)
    stream = CodeStream(a)
    with pytest.raises(ValueError):
        stream.feed("2")
    stream.feed("0")
    with pytest.raises(ValueError):
        stream.feed("0")
    stream.finalize()
    with pytest.raises(StreamFinalized):
        stream.feed("1")
    with pytest.raises(StreamFinalized):
        stream.finalize()
    s = d_linear(1)
    b = build_allocation([RoundedTable(SemimeasureTable(1, {"": ONE}), s)])
    with pytest.raises(NotCovered):
        CodeStream(b).feed("1")


def test_empty_stream():
    a = uniform_alloc(2)
    emitted, code = encode_stream(a, "")
    assert emitted == [""]
    assert len(code) == a.grid("")


def test_decode_statuses():
    a = uniform_alloc(2)
    assert decode(a, "", 0).bits == ""
    assert decode(a, encode(a, ""), 0).complete
    # 11111 lands in the finite-output tail of the root
    d = decode(a, "11111", 2)
    assert not d.complete
    assert d.underdetermined == len(apply_map(a, "11111")) < 2
    with pytest.raises(ValueError):
        decode(a, "0", 3)


def test_low_test_examples():
    a = uniform_alloc(1)
    K = a.K
    ones = TestAssignment(K, [ONE] * (1 << K))
    for x in all_strings(1):
        leaf = find_low_test_preimage(a, x, ones, ONE)
        assert leaf.stem == a.cones(x)[0].stem.ljust(K, "0")
    with pytest.raises(ValueError):
        TestAssignment(1, [Dyadic(10, 0), Dyadic(1, 0)])   # mean above 1


def test_two_equal_cones_zero_and_ten():
    # preimage of "01" is two 5-bit cones; the rest of the space carries no test mass
    s = d_linear(2)
    tab = SemimeasureTable(2, {"": ONE, "0": Dyadic(1, 3), "01": Dyadic(2, 5)})
    a = build_allocation([RoundedTable(tab, s)])
    first, second = a.cones("01")
    vals = [ZERO] * 32
    vals[int(second.stem, 2)] = Dyadic(10, 0)
    t = TestAssignment(5, vals)
    C = Dyadic(5, 0)
    leaf = find_low_test_preimage(a, "01", t, C)
    assert leaf == first and t[leaf.stem] == ZERO
    with pytest.raises(BoundViolated):
        find_low_test_preimage(a, "01", t, Dyadic(9, 1))


def test_root_preimage_minimum():
    s = LengthSchedule([0])
    b = build_allocation([RoundedTable(SemimeasureTable(0, {"": ONE}), s)])
    t = TestAssignment(2, [Dyadic(1, 1), Dyadic(3, 1), ZERO, Dyadic(1, 1)])  # mean 5/8
    leaf = find_low_test_preimage(b, "", t, Dyadic(3, 2))
    assert leaf.stem == "10"


def test_low_test_against_brute_force():
    rng = random.Random(12)
    for _ in range(40):
        D = rng.randint(1, 3)
        M = random_semimeasure(rng, D)
        a = build_allocation(round_stages([M], d_linear(D)))
        t = random_test(rng, a.K)
        for x in all_strings(D):
            cones = a.cones(x)
            if not cones:
                continue
            leaves = [c.stem + format(j, f"0{a.K - len(c.stem)}b") if a.K > len(c.stem) else c.stem
                      for c in cones for j in range(1 << (a.K - len(c.stem)))]
            vals = [frac(t[leaf]) for leaf in leaves]
            avg = sum(vals) / len(vals)
            C = Dyadic.from_fraction(Fraction(int(avg * 64) + 1, 64))
            got = find_low_test_preimage(a, x, t, C)
            assert frac(t[got.stem]) == min(vals) <= frac(C)
            assert got.stem == min(l for l, v in zip(leaves, vals) if v == min(vals))
            if avg > 0:
                low = Dyadic.from_fraction(Fraction(int(avg * 64) - 1, 64)) if avg * 64 > 1 else ZERO
                if frac(low) < avg:
                    with pytest.raises(BoundViolated):
                        find_low_test_preimage(a, x, t, low)


def test_nested_witnesses():
    rng = random.Random(7)
    a = uniform_alloc(3)
    zero = TestAssignment(a.K, [ZERO] * (1 << a.K))
    chain = verify_nested_witnesses(a, "010", zero, ZERO)
    assert all(w.value == ZERO for w in chain.witnesses)
    assert chain.ok(a, zero, ZERO)
    t = random_test(rng, a.K)
    chain = verify_nested_witnesses(a, "", t, Dyadic(2, 0))
    assert frac(chain.limit.value) <= 2
    # a test piled onto alpha's preimage breaks the bound there
    vals = [ZERO] * (1 << a.K)
    for c in a.cones("111"):
        for j in range(1 << (a.K - len(c.stem))):
            vals[(int(c.stem, 2) << (a.K - len(c.stem))) + j] = Dyadic(1, 0)
    heavy = TestAssignment(a.K, vals)
    with pytest.raises(BoundViolated) as exc:
        verify_nested_witnesses(a, "111", heavy, Dyadic(1, 1))
    assert exc.value.prefix == "111"


def test_test_text_round_trip():
    rng = random.Random(1)
    t = random_test(rng, 3)
    back = parse_test(format_test(t))
    assert [back.value(i) for i in range(8)] == [t.value(i) for i in range(8)]
    with pytest.raises(FormatError):
        parse_test("000 1\n")
    with pytest.raises(FormatError):
        parse_test("depth 3\n00 1\n")
