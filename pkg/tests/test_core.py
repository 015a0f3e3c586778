from __future__ import annotations

from itertools import combinations
from math import comb

import pytest
from hypothesis import given, settings, strategies as st

from hindman_lab.core import (
    Coloring,
    DomainError,
    LengthPattern,
    apart_ground,
    bit_profile,
    check_monochromatic,
    fs_exact,
    fs_lengths,
    instantiate_pattern,
    is_apart,
    iter_params,
    lam,
    mu,
)


@st.composite
def apart_sets(draw, max_size=7):
    """Apart sets built from random disjoint, ordered bit blocks."""
    size = draw(st.integers(1, max_size))
    out = []
    pos = draw(st.integers(0, 3))
    for _ in range(size):
        width = draw(st.integers(1, 5))
        bits = draw(st.integers(0, (1 << width) - 1)) | 1 | (1 << (width - 1))
        out.append(bits << pos)
        pos += width + draw(st.integers(0, 3))
    return out


@pytest.mark.parametrize("n, exps, lam_, mu_, gaps", [
    (10, (1, 3), 1, 3, ((1, 3),)),
    (1, (0,), 0, 0, ()),
    (11, (0, 1, 3), 0, 3, ((0, 1), (1, 3))),
])
def test_bit_profile_examples(n, exps, lam_, mu_, gaps):
    p = bit_profile(n)
    assert p.exponents == exps
    assert (p.lam, p.mu, p.gaps) == (lam_, mu_, gaps)


def test_bit_profile_rejects_zero():
    with pytest.raises(DomainError):
        bit_profile(0)
    with pytest.raises(DomainError):
        lam(0)


@given(st.integers(1, 1 << 200))
def test_profile_round_trip(n):
    p = bit_profile(n)
    assert p.value() == n
    assert list(p.exponents) == sorted(set(p.exponents))
    assert p.lam == lam(n) and p.mu == mu(n)
    assert (p.gaps == ()) == (n & (n - 1) == 0)


@pytest.mark.parametrize("xs, expected", [([2, 8], True), ([3, 6], False), ([5], True)])
def test_is_apart_examples(xs, expected):
    assert is_apart(xs) is expected


@pytest.mark.parametrize("xs", [[4, 2], [0, 1], [3, 3]])
def test_is_apart_rejects_bad_input(xs):
    with pytest.raises(DomainError):
        is_apart(xs)


@pytest.mark.parametrize("args, expected", [
    ((3, 0, 1), (1, 2, 4)),
    ((2, 2, 3), (4, 32)),
    ((1, 10, 1), (1024,)),
])
def test_apart_ground_examples(args, expected):
    assert apart_ground(*args) == expected
    assert is_apart(expected)


@pytest.mark.parametrize("H, a, expected", [
    ((1, 2, 8), 2, {3, 9, 10}),
    ((1, 2, 4), 3, {7}),
    ((1, 2), 3, set()),
])
def test_fs_exact_examples(H, a, expected):
    assert fs_exact(H, a) == expected


def test_fs_exact_excludes_empty_sum():
    with pytest.raises(DomainError):
        fs_exact((1, 2), 0)


@pytest.mark.parametrize("H, A, expected", [
    ((1, 2, 8), {1, 3}, {1, 2, 8, 11}),
    ((1, 2, 4), {1, 2, 3}, {1, 2, 3, 4, 5, 6, 7}),
    ((2, 8), {4}, set()),
])
def test_fs_lengths_examples(H, A, expected):
    assert fs_lengths(H, A) == expected


def test_fs_lengths_rejects_empty_length_set():
    with pytest.raises(DomainError):
        fs_lengths((1, 2), set())


@given(apart_sets())
@settings(max_examples=300)
def test_apartness_inherited_by_subsets(H):
    assert is_apart(H)
    for r in range(1, len(H) + 1):
        for sub in combinations(H, r):
            assert is_apart(list(sub))


@given(apart_sets())
@settings(max_examples=300)
def test_sum_profile_and_counting_laws(H):
    for a in range(1, len(H) + 1):
        assert len(fs_exact(H, a)) == comb(len(H), a)
        for sub in combinations(H, a):
            s = sum(sub)
            assert lam(s) == lam(sub[0]) and mu(s) == mu(sub[-1])


@given(apart_sets(), st.sets(st.integers(1, 7), min_size=1), st.sets(st.integers(1, 7)))
@settings(max_examples=200)
def test_monotonicity(H, A, extra):
    assert fs_lengths(H, A) <= fs_lengths(H, A | extra)
    for a in range(1, len(H) + 1):
        assert fs_exact(H[:-1], a) <= fs_exact(H, a)


@pytest.mark.parametrize("pattern, params, expected", [
    (LengthPattern.brauer(3, 1), (1, 1), {1, 2, 3}),
    (LengthPattern.schur(), (2, 3), {2, 3, 5}),
    (LengthPattern.folkman(2), (1, 2), {1, 2, 3}),
    (LengthPattern.vdw(4), (2, 3), {2, 5, 8, 11}),
    (LengthPattern.brauer(3, 2), (1, 3), {1, 4, 7, 6}),
    (LengthPattern.explicit([4, 1, 4]), (), {1, 4}),
])
def test_instantiate_pattern(pattern, params, expected):
    assert instantiate_pattern(pattern, params) == expected


@pytest.mark.parametrize("pattern, params", [
    (LengthPattern.schur(), (1,)),
    (LengthPattern.vdw(3), (0, 1)),
    (LengthPattern.folkman(2), (2, 1)),
    (LengthPattern.folkman(2), (1, 2, 3)),
    (LengthPattern.explicit([1]), (1, 1)),
])
def test_instantiate_pattern_rejects_mismatched_params(pattern, params):
    with pytest.raises(DomainError):
        instantiate_pattern(pattern, params)


def test_require_distinct_params():
    assert instantiate_pattern(LengthPattern.brauer(3, 1), (2, 2)) == {2, 4, 6}
    with pytest.raises(DomainError):
        instantiate_pattern(LengthPattern.brauer(3, 1), (2, 2), require_distinct_params=True)


@pytest.mark.parametrize("text", ["schur", "vdw:3", "brauer:3:1", "folkman:2", "explicit:1,3,5"])
def test_pattern_spec_round_trip(text):
    assert LengthPattern.parse(text).spec() == text


@pytest.mark.parametrize("text", ["vdw:zero", "vdw:0", "brauer:3", "schur:1", "foo", "explicit:",
                                  "explicit:0,1"])
def test_pattern_spec_rejects(text):
    with pytest.raises(DomainError):
        LengthPattern.parse(text)


def test_iter_params_is_lexicographic_and_complete():
    bound = 9
    got = [p for p, _ in iter_params(LengthPattern.vdw(3), bound)]
    assert got == sorted(got)
    brute = [(a, b) for a in range(1, 10) for b in range(1, 10) if a + 2 * b <= bound]
    assert got == brute
    folk = [p for p, inst in iter_params(LengthPattern.folkman(2), 6)]
    assert folk == [(i, j) for i in range(1, 7) for j in range(i + 1, 7) if i + j <= 6]


def test_coloring_domain_is_enforced():
    c = Coloring(2, lambda n: n % 2, domain=10)
    assert c(3) == 1
    with pytest.raises(DomainError):
        c(11)
    with pytest.raises(DomainError):
        c(0)
    with pytest.raises(DomainError):
        Coloring(2, lambda n: 5)(1)


def test_check_monochromatic_reports_offender():
    c = Coloring(2, lambda n: int(n == 6))
    chk = check_monochromatic(c, (2, 4, 8), {1, 2})
    assert not chk.ok and chk.witness == 6
