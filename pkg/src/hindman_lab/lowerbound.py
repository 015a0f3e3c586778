"""Decoding a c.e. set from solutions of the Hindman-Brauer principle.

A finite :class:`Schedule` simulates a staged enumeration of a set K. Gaps of
a number n (pairs of consecutive binary exponents) are *short* when some x below
the gap enters K after the gap closes, and *very short* when that happens by stage
mu(n). The 2-coloring ``n -> |VSG(n)| mod 2`` is computable from the first mu(n)
stages alone; any apart H with FS^{a, a+b, a+2b, b}(H) monochromatic for it lets
one read off K-membership by running the enumeration for lambda(n) stages.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

from .core import Coloring, DomainError, LengthPattern, apart_ground, bit_profile, \
    fs_exact, is_apart, lam, mu
from .oracles import BudgetExceeded
from .solver import Solution, SolveConfig, solve

Gap = tuple[int, int]


class InsufficientWitness(DomainError):
    """A finite H is too short to supply the sums the decoder needs."""


# ---------------------------------------------------------------------------
# enumeration schedules

@dataclass(frozen=True)
class Schedule:
    entries: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        entries = tuple((int(s), int(x)) for s, x in self.entries)
        object.__setattr__(self, "entries", entries)
        stages = [s for s, _ in entries]
        elems = [x for _, x in entries]
        if any(s < 0 for s in stages) or any(x < 0 for x in elems):
            raise DomainError("stages and elements must be non-negative")
        if any(s >= t for s, t in zip(stages, stages[1:])):
            raise DomainError("stages must be strictly increasing")
        if len(set(elems)) != len(elems):
            raise DomainError("an element may be enumerated only once")

    @cached_property
    def stage_of(self) -> dict[int, int]:
        return {x: s for s, x in self.entries}

    @property
    def K(self) -> frozenset[int]:
        return frozenset(self.stage_of)

    @property
    def max_stage(self) -> int:
        return self.entries[-1][0] if self.entries else 0

    def k_at(self, k: int) -> frozenset[int]:
        return frozenset(x for s, x in self.entries if s <= k)

    def truncate(self, k: int) -> Schedule:
        """The part of the enumeration visible after k stages."""
        return Schedule(tuple((s, x) for s, x in self.entries if s <= k))

    def to_text(self) -> str:
        return "".join(f"{s} {x}\n" for s, x in self.entries)

    @classmethod
    def from_text(cls, text: str) -> Schedule:
        entries = []
        for lineno, line in enumerate(text.splitlines(), 1):
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) != 2:
                raise DomainError(f"schedule line {lineno}: expected 'stage element'")
            try:
                entries.append((int(parts[0]), int(parts[1])))
            except ValueError as exc:
                raise DomainError(f"schedule line {lineno}: {line!r}") from exc
        return cls(tuple(entries))

    def digest(self) -> str:
        return hashlib.sha256(self.to_text().encode()).hexdigest()[:16]


def k_at(schedule: Schedule, k: int) -> frozenset[int]:
    return schedule.k_at(k)


# ---------------------------------------------------------------------------
# gaps

@dataclass(frozen=True)
class GapClassification:
    n: int
    gaps: tuple[Gap, ...]
    short_gaps: frozenset[Gap]
    very_short_gaps: frozenset[Gap]

    def as_dict(self) -> dict:
        return {
            "n": str(self.n),
            "gaps": [list(g) for g in self.gaps],
            "SG": [list(g) for g in sorted(self.short_gaps)],
            "VSG": [list(g) for g in sorted(self.very_short_gaps)],
            "color": len(self.very_short_gaps) % 2,
        }


def _late(schedule: Schedule, a: int, lo: int, hi: int | None) -> bool:
    """Is some x <= a enumerated at a stage s with lo < s (and s <= hi, if given)?"""
    for s, x in schedule.entries:
        if x <= a and s > lo and (hi is None or s <= hi):
            return True
    return False


def short_gaps(n: int, schedule: Schedule) -> frozenset[Gap]:
    return frozenset(g for g in bit_profile(n).gaps if _late(schedule, g[0], g[1], None))


def very_short_gaps(n: int, schedule: Schedule) -> frozenset[Gap]:
    top = mu(n)
    return frozenset(g for g in bit_profile(n).gaps if _late(schedule, g[0], g[1], top))


def classify_gaps(n: int, schedule: Schedule) -> GapClassification:
    if n < 1:
        raise DomainError("gaps are defined for n >= 1")
    return GapClassification(n, bit_profile(n).gaps, short_gaps(n, schedule),
                             very_short_gaps(n, schedule))


def vsg_color(schedule: Schedule, n: int) -> int:
    if n < 1:
        raise DomainError("the coloring is defined for n >= 1")
    return len(very_short_gaps(n, schedule)) % 2


class VSGColoring(Coloring):
    """n -> |VSG(n)| mod 2 for a fixed schedule."""

    def __init__(self, schedule: Schedule):
        super().__init__(2, name=f"vsg-parity:{schedule.digest()}")
        self.schedule = schedule

    def _color(self, n: int) -> int:
        return vsg_color(self.schedule, n)


# ---------------------------------------------------------------------------
# the sum identity

def largeness_conditions(m: int, n: int, schedule: Schedule) -> tuple[bool, bool, bool]:
    """(mu(m) < lambda(n), K agrees with K[lambda(n)] below mu(m), mu(m+n) = mu(n))."""
    if m < 1 or n < 1:
        raise DomainError("m and n must be positive")
    cond1 = mu(m) < lam(n)
    settled = lam(n)
    cond2 = all(s <= settled for s, x in schedule.entries if x <= mu(m))
    cond3 = mu(m + n) == mu(n)
    return cond1, cond2, cond3


@dataclass(frozen=True)
class SumIdentityReport:
    m: int
    n: int
    conditions: tuple[bool, bool, bool]
    lhs: frozenset[Gap]
    sg_m: frozenset[Gap]
    vsg_n: frozenset[Gap]
    connecting_very_short: bool
    holds: bool

    def as_dict(self) -> dict:
        def gaps(s):
            return [list(g) for g in sorted(s)]
        return {
            "m": str(self.m), "n": str(self.n),
            "conditions": list(self.conditions),
            "lhs": gaps(self.lhs),
            "rhs_parts": {"SG_m": gaps(self.sg_m), "VSG_n": gaps(self.vsg_n)},
            "connecting_gap_very_short": self.connecting_very_short,
            "holds": self.holds,
        }


def check_sum_identity(m: int, n: int, schedule: Schedule) -> SumIdentityReport:
    """Compare VSG(m+n) against SG(m) and VSG(n) as gap sets."""
    if m < 1 or n < 1:
        raise DomainError("m and n must be positive")
    if mu(m) >= lam(n):
        raise DomainError(f"mu({m}) >= lambda({n}): the binary supports would merge")
    lhs = very_short_gaps(m + n, schedule)
    sg_m = short_gaps(m, schedule)
    vsg_n = very_short_gaps(n, schedule)
    link = (mu(m), lam(n))
    link_vs = link in lhs
    holds = not link_vs and not (sg_m & vsg_n) and lhs == sg_m | vsg_n
    return SumIdentityReport(m, n, largeness_conditions(m, n, schedule), lhs, sg_m, vsg_n,
                             link_vs, holds)


# ---------------------------------------------------------------------------
# claims on solutions

@dataclass
class ClaimViolation:
    claim: int
    m: int
    partner: int
    sg_size: int


@dataclass
class ClaimsReport:
    checked: dict[int, int] = field(default_factory=dict)
    without_partner: dict[int, int] = field(default_factory=dict)
    violations: list[ClaimViolation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def as_dict(self) -> dict:
        return {
            "checked": {str(k): v for k, v in sorted(self.checked.items())},
            "without_partner": {str(k): v for k, v in sorted(self.without_partner.items())},
            "violations": [
                {"claim": v.claim, "m": str(v.m), "partner": str(v.partner), "SG_size": v.sg_size}
                for v in self.violations
            ],
            "ok": self.ok,
        }


def _partner(m: int, pool: Sequence[int], schedule: Schedule) -> int | None:
    for n in pool:
        if lam(n) > mu(m) and all(largeness_conditions(m, n, schedule)):
            return n
    return None


def check_claims(schedule: Schedule, H: Sequence[int], a: int, b: int) -> ClaimsReport:
    """Parity of |SG(m)| for m in FS^a, FS^b and FS^{a+b} of H that have a partner
    meeting all three largeness conditions inside H."""
    fa = sorted(fs_exact(H, a))
    fb = sorted(fs_exact(H, b))
    fab = sorted(fs_exact(H, a + b))
    report = ClaimsReport()
    for claim, ms, pool in ((1, fa, fb), (2, fb, fa), (3, fab, fb)):
        for m in ms:
            n = _partner(m, pool, schedule)
            if n is None:
                report.without_partner[claim] = report.without_partner.get(claim, 0) + 1
                continue
            report.checked[claim] = report.checked.get(claim, 0) + 1
            size = len(short_gaps(m, schedule))
            if size % 2:
                report.violations.append(ClaimViolation(claim, m, n, size))
    return report


# ---------------------------------------------------------------------------
# decoding

@dataclass(frozen=True)
class DecodingContext:
    H: tuple[int, ...]
    a: int
    b: int
    schedule: Schedule
    schedule_ref: str = ""

    def __post_init__(self):
        object.__setattr__(self, "H", tuple(self.H))
        if self.a < 1 or self.b < 1:
            raise DomainError("a and b must be positive")
        if len(self.H) < self.a + self.b:
            raise DomainError(f"|H| = {len(self.H)} < a + b = {self.a + self.b}")
        if not is_apart(self.H):
            raise DomainError("H is not apart")

    def to_json(self) -> dict:
        return {"H": [str(h) for h in self.H], "a": self.a, "b": self.b,
                "schedule_ref": self.schedule_ref or self.schedule.digest()}

    @classmethod
    def from_json(cls, doc: dict, schedule: Schedule) -> DecodingContext:
        return cls(tuple(int(h) for h in doc["H"]), int(doc["a"]), int(doc["b"]), schedule,
                   doc.get("schedule_ref", ""))


@dataclass(frozen=True)
class Decoded:
    x: int
    member: bool
    m: int
    n: int


def decode_detail(ctx: DecodingContext, x: int) -> Decoded:
    if x < 0:
        raise DomainError("x must be non-negative")
    fa = sorted(fs_exact(ctx.H, ctx.a))
    fb = sorted(fs_exact(ctx.H, ctx.b))
    for m in fa:
        if x > mu(m):
            continue
        for n in fb:
            if n > m and mu(m) < lam(n):
                return Decoded(x, x in ctx.schedule.k_at(lam(n)), m, n)
    raise InsufficientWitness(f"no admissible m, n in H for x = {x}")


def decode(ctx: DecodingContext, x: int) -> bool:
    return decode_detail(ctx, x).member


# ---------------------------------------------------------------------------
# end-to-end runs

def random_schedule(rng: random.Random, elements_below: int = 16, stage_lo: int = 1,
                    stage_hi: int = 28, max_size: int = 8) -> Schedule:
    size = rng.randint(1, min(max_size, elements_below, stage_hi - stage_lo + 1))
    elems = rng.sample(range(elements_below), size)
    stages = sorted(rng.sample(range(stage_lo, stage_hi + 1), size))
    return Schedule(tuple(zip(stages, elems)))


@dataclass
class Attempt:
    ground_size: int
    target_size: int
    outcome: str
    solution: Solution | None = None
    claims: ClaimsReport | None = None
    decode_errors: list[int] = field(default_factory=list)


@dataclass
class Reproduction:
    schedule: Schedule
    x_bound: int
    attempts: list[Attempt]

    @property
    def final(self) -> Attempt:
        return self.attempts[-1]

    @property
    def ok(self) -> bool:
        return self.final.outcome == "ok"

    @property
    def fallback_used(self) -> bool:
        return len(self.attempts) > 1

    def as_dict(self) -> dict:
        out = {"schedule_ref": self.schedule.digest(), "x_bound": self.x_bound,
               "ok": self.ok, "attempts": []}
        for att in self.attempts:
            out["attempts"].append({
                "ground_size": att.ground_size,
                "target_size": att.target_size,
                "outcome": att.outcome,
                "solution": att.solution.to_json(True) if att.solution else None,
                "claims": att.claims.as_dict() if att.claims else None,
                "decode_errors": att.decode_errors,
            })
        return out


def reproduce(schedule: Schedule, x_bound: int = 16, target_size: int = 8, tail: int = 3,
              pattern: LengthPattern | None = None, budget: int | None = 2_000_000,
              max_attempts: int = 4, enlarge: int = 4, workers: int = 1) -> Reproduction:
    """Solve for the |VSG| parity coloring, check the claims, decode K below ``x_bound``.

    The ground is a run of powers of two reaching ``tail`` + ``target_size`` exponents
    past both the last stage and ``x_bound``, and H must keep ``tail`` elements there,
    standing in for the unbounded part of an infinite solution. A claims violation
    or an H too short to decode enlarges ground and target and retries.
    """
    pattern = pattern or LengthPattern.brauer(3, 1)
    c = VSGColoring(schedule)
    horizon = max(schedule.max_stage, x_bound - 1)
    truth = schedule.K
    attempts = []
    size = target_size
    for _ in range(max_attempts):
        ground = apart_ground(horizon + 1 + size + tail)
        cfg = SolveConfig(mode="direct", ground=ground, target_size=size, budget=budget,
                          horizon=horizon, tail=tail, workers=workers)
        att = Attempt(len(ground), size, "ok")
        attempts.append(att)
        try:
            sol = solve(c, pattern, cfg)
        except BudgetExceeded:
            att.outcome = "budget_exceeded"
            break
        if sol is None:
            att.outcome = "not_found"
            size += enlarge
            continue
        att.solution = sol
        a, b = sol.params
        att.claims = check_claims(schedule, sol.H, a, b)
        if not att.claims.ok:
            att.outcome = "claims_violation"
            size += enlarge
            continue
        ctx = DecodingContext(sol.H, a, b, schedule)
        try:
            att.decode_errors = [x for x in range(x_bound) if decode(ctx, x) != (x in truth)]
        except InsufficientWitness:
            att.outcome = "insufficient_witness"
            size += enlarge
            continue
        if att.decode_errors:
            att.outcome = "decode_error"
        break
    return Reproduction(schedule, x_bound, attempts)

