from __future__ import annotations

import random

import pytest
from hypothesis import given, settings, strategies as st

from hindman_lab.core import DomainError, LengthPattern, apart_ground, bit_profile, fs_exact, mu
from hindman_lab.lowerbound import (
    DecodingContext,
    InsufficientWitness,
    Schedule,
    VSGColoring,
    check_claims,
    check_sum_identity,
    classify_gaps,
    decode,
    decode_detail,
    k_at,
    largeness_conditions,
    random_schedule,
    reproduce,
    short_gaps,
    very_short_gaps,
    vsg_color,
)
from hindman_lab.solver import SolveConfig, solve, verify_solution

S20 = Schedule(((2, 0),))


@st.composite
def schedules(draw, max_elem=12, max_stage=24):
    size = draw(st.integers(0, 6))
    elems = draw(st.lists(st.integers(0, max_elem), min_size=size, max_size=size, unique=True))
    stages = sorted(draw(st.lists(st.integers(0, max_stage), min_size=size, max_size=size,
                                  unique=True)))
    return Schedule(tuple(zip(stages, elems)))


def test_k_at_examples():
    s = Schedule(((2, 0), (5, 3)))
    assert k_at(s, 1) == set()
    assert k_at(s, 2) == {0}
    assert k_at(s, 100) == {0, 3}


@pytest.mark.parametrize("entries", [((3, 0), (3, 1)), ((4, 0), (2, 1)), ((1, 0), (2, 0)),
                                     ((-1, 0),)])
def test_schedule_validation(entries):
    with pytest.raises(DomainError):
        Schedule(entries)


def test_schedule_text_round_trip():
    s = Schedule(((2, 0), (5, 3), (9, 1)))
    assert s.to_text() == "2 0\n5 3\n9 1\n"
    assert Schedule.from_text(s.to_text()) == s
    with pytest.raises(DomainError):
        Schedule.from_text("2 0\n1 1\n")
    with pytest.raises(DomainError):
        Schedule.from_text("2 0 7\n")


def test_classify_gaps_examples():
    g = classify_gaps(3, S20)
    assert g.short_gaps == {(0, 1)} and g.very_short_gaps == set()
    g = classify_gaps(11, S20)
    assert g.short_gaps == {(0, 1)} and g.very_short_gaps == {(0, 1)}
    g = classify_gaps(64, Schedule(((1, 0), (3, 5))))
    assert g.short_gaps == set() == g.very_short_gaps
    with pytest.raises(DomainError):
        classify_gaps(0, S20)


def test_vsg_color_examples():
    assert vsg_color(S20, 11) == 1
    assert vsg_color(S20, 3) == 0
    assert vsg_color(Schedule(((1, 0), (4, 2))), 1) == 0


@given(schedules(), st.integers(1, 1 << 30))
@settings(max_examples=500)
def test_gap_containment(schedule, n):
    g = classify_gaps(n, schedule)
    assert g.very_short_gaps <= g.short_gaps <= set(bit_profile(n).gaps)


@given(schedules(), st.integers(0, 30), st.integers(0, 30))
def test_monotone_staging(schedule, j, k):
    j, k = sorted((j, k))
    assert k_at(schedule, j) <= k_at(schedule, k)
    assert k_at(schedule, 10 ** 6) == schedule.K


@given(schedules(), st.integers(1, 1 << 30))
@settings(max_examples=500)
def test_very_short_gaps_need_only_first_mu_stages(schedule, n):
    assert very_short_gaps(n, schedule.truncate(mu(n))) == very_short_gaps(n, schedule)


def test_largeness_conditions_examples():
    assert largeness_conditions(3, 96, S20) == (True, True, True)
    assert largeness_conditions(3, 3, Schedule(()))[0] is False
    assert largeness_conditions(3, 32, Schedule(((7, 0),)))[1] is False


def test_check_sum_identity_examples():
    rep = check_sum_identity(3, 96, S20)
    assert rep.holds
    assert rep.lhs == {(0, 1)} and rep.sg_m == {(0, 1)} and rep.vsg_n == set()
    rep = check_sum_identity(5, 40, Schedule(()))
    assert rep.holds and not rep.lhs and not rep.sg_m and not rep.vsg_n
    rep = check_sum_identity(3, 4, S20)
    assert rep.conditions == largeness_conditions(3, 4, S20)
    with pytest.raises(DomainError):
        check_sum_identity(3, 6, S20)


def _random_pair(rng):
    m = rng.randrange(1, 1 << rng.randint(1, 14))
    shift = mu(m) + 1 + rng.randint(0, 12)
    n = rng.randrange(1, 1 << rng.randint(1, 8)) << shift
    return m, n


def test_conditional_sum_identity_sample():
    rng = random.Random(11)
    hits = 0
    while hits < 1000:
        schedule = random_schedule(rng, elements_below=12, stage_lo=0, stage_hi=26)
        m, n = _random_pair(rng)
        if all(largeness_conditions(m, n, schedule)):
            hits += 1
            assert check_sum_identity(m, n, schedule).holds, (schedule, m, n)


def test_decode_examples():
    ctx = DecodingContext((4, 32, 256), 1, 1, S20)
    d = decode_detail(ctx, 0)
    assert (d.m, d.n, d.member) == (4, 32, True)
    assert decode(ctx, 1) is False
    empty = DecodingContext((4, 32, 256), 1, 1, Schedule(()))
    assert not any(decode(empty, x) for x in range(3))


def test_decode_insufficient_witness():
    ctx = DecodingContext((4, 32, 256), 1, 1, S20)
    with pytest.raises(InsufficientWitness):
        decode(ctx, 8)


def test_decoding_context_validation():
    with pytest.raises(DomainError):
        DecodingContext((4,), 1, 1, S20)
    with pytest.raises(DomainError):
        DecodingContext((3, 6), 1, 1, S20)


def test_degenerate_schedule_gives_constant_coloring():
    # all stages below every ground exponent: no very short gaps among sums
    schedule = Schedule(((0, 0),))
    c = VSGColoring(schedule)
    ground = apart_ground(8, 2)
    assert {c(s) for r in range(1, 5) for s in fs_exact(ground, r)} == {0}


def test_claims_on_direct_solution():
    schedule = Schedule(((3, 1), (7, 0), (12, 4)))
    c = VSGColoring(schedule)
    cfg = SolveConfig(ground=apart_ground(22), target_size=7, horizon=15, tail=3)
    sol = solve(c, LengthPattern.brauer(3, 1), cfg)
    assert verify_solution(c, sol)
    rep = check_claims(schedule, sol.H, *sol.params)
    assert rep.ok and sum(rep.checked.values()) > 0


@pytest.mark.parametrize("seed", range(5))
def test_reproduce_decodes_k(seed):
    schedule = random_schedule(random.Random(seed))
    rep = reproduce(schedule)
    assert rep.ok, rep.as_dict()
    assert rep.final.decode_errors == []


def test_short_gaps_depend_on_full_schedule():
    # the very short part is local, the short part is not
    n = 2 ** 0 + 2 ** 1 + 2 ** 3
    late = Schedule(((2, 0), (30, 1)))
    assert short_gaps(n, late) == {(0, 1), (1, 3)}
    assert short_gaps(n, late.truncate(mu(n))) == {(0, 1)}
