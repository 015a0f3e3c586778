"""Finding apart sets H whose restricted sums FS^A(H) are monochromatic.

Three modes:

``iterated``
    successive homogeneous extractions for c(x1+...+xi), i = 1..k, each refining the
    previous set; the colors c_1..c_k form a coloring of [1, k] in which a pattern
    instance is then found.
``pipeline``
    a single homogeneous extraction for the derived tuple coloring
    (c(x1), c(x1+x2), ..., c(x1+...+xk)) packed into k bits.
``direct``
    exhaustive search over parameters and apart subsets of the ground set in
    canonical order.

Homogeneous sets of infinite Ramsey theory are replaced by exhaustive, budgeted
searches over a finite apart ground set. Running out of budget raises
:class:`~hindman_lab.oracles.BudgetExceeded`; "nothing exists" is ``None``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Sequence

from .core import (
    Coloring,
    DomainError,
    LengthPattern,
    Params,
    check_monochromatic,
    fs_exact,
    instantiate_pattern,
    is_apart,
    iter_params,
    lam,
    params_dict,
    params_from_dict,
)
from .oracles import (
    BudgetExceeded,
    TableColoring,
    find_mono_config,
    ordered_results,
    report_hit,
    superseded,
    witness_number,
)

MODES = ("pipeline", "iterated", "direct")


class SolveFailure(RuntimeError):
    """The solver could not run to a verdict (for example the witness number for
    the pattern is not reachable under the configured ``max_n``)."""


# ---------------------------------------------------------------------------
# tuple colorings

@dataclass(frozen=True)
class TupleColoring:
    arity: int
    colors: int
    fn: Callable[[tuple[int, ...]], int]

    def __call__(self, xs: tuple[int, ...]) -> int:
        return self.fn(xs)


def derived_tuple_coloring(c: Coloring, n: int, xs: Sequence[int]) -> int:
    """Pack c(x1), c(x1+x2), ..., c(x1+...+xn) into an integer, bit i-1 for the
    i-th partial sum."""
    if c.r != 2:
        raise DomainError("derived tuple colorings need a 2-coloring")
    if len(xs) != n:
        raise DomainError(f"expected a {n}-tuple, got {len(xs)} entries")
    if any(x >= y for x, y in zip(xs, xs[1:])):
        raise DomainError("tuple must be strictly increasing")
    code = 0
    total = 0
    for i, x in enumerate(xs):
        total += x
        code |= c(total) << i
    return code


class DerivedTupleColoring:
    """Picklable callable wrapper around :func:`derived_tuple_coloring`."""

    def __init__(self, c: Coloring, n: int):
        self.c = c
        self.n = n

    def __call__(self, xs: tuple[int, ...]) -> int:
        return derived_tuple_coloring(self.c, self.n, xs)

    def as_tuple_coloring(self) -> TupleColoring:
        return TupleColoring(self.n, 1 << self.n, self)


class SumColoring:
    """f(x1, ..., xi) = c(x1 + ... + xi)."""

    def __init__(self, c: Coloring):
        self.c = c

    def __call__(self, xs: tuple[int, ...]) -> int:
        return self.c(sum(xs))


# ---------------------------------------------------------------------------
# homogeneous sets

@dataclass(frozen=True)
class Homogeneous:
    elements: tuple[int, ...]
    color: int | None
    steps: int


def extract_homogeneous(ground: Sequence[int], tc: TupleColoring, target_size: int,
                        budget: int | None = None) -> Homogeneous | None:
    """Lexicographically least ``target_size``-subset of ``ground`` on which every
    increasing ``tc.arity``-tuple has the same color.

    ``color`` is ``None`` only when the subset is too small to contain a tuple.
    """
    ground = tuple(ground)
    if not is_apart(ground):
        raise DomainError("ground set is not apart")
    n = tc.arity
    if target_size < n:
        raise DomainError(f"target_size {target_size} < arity {n}")
    chosen: list[int] = []
    steps = 0

    def rec(start: int, color: int | None) -> bool:
        nonlocal steps
        if len(chosen) == target_size:
            return True
        need = target_size - len(chosen)
        for i in range(start, len(ground) - need + 1):
            e = ground[i]
            steps += 1
            if budget is not None and steps > budget:
                raise BudgetExceeded(f"homogeneous extraction exceeded {budget} steps", steps)
            col = color
            ok = True
            for rest in combinations(chosen, n - 1):
                got = tc(rest + (e,))
                if col is None:
                    col = got
                elif got != col:
                    ok = False
                    break
            if not ok:
                continue
            chosen.append(e)
            if rec(i + 1, col):
                return True
            chosen.pop()
        return False

    if not rec(0, None):
        return None
    H = tuple(chosen)
    color = tc(H[:n]) if len(H) >= n else None
    return Homogeneous(H, color, steps)


def iterated_refinement(ground: Sequence[int], c: Coloring, k: int, target_size: int,
                        budget: int | None = None,
                        stage_slack: int = 1) -> tuple[tuple[int, ...], tuple[int, ...], int] | None:
    """Refine ``ground`` k times, stage i making c(x1+...+xi) constant on i-subsets.

    Stage i keeps ``target_size + (k - i) * stage_slack`` elements so later stages
    still have something to choose from. Returns (H, (c_1, ..., c_k), steps).
    """
    if c.r != 2:
        raise DomainError("iterated refinement needs a 2-coloring")
    if k < 1 or target_size < k:
        raise DomainError("need k >= 1 and target_size >= k")
    H = tuple(ground)
    colors = []
    steps = 0
    f = SumColoring(c)
    for i in range(1, k + 1):
        size = target_size + (k - i) * stage_slack
        left = None if budget is None else budget - steps
        try:
            hom = extract_homogeneous(H, TupleColoring(i, 2, f), size, left)
        except BudgetExceeded as exc:
            raise BudgetExceeded(f"budget exhausted at refinement stage {i}",
                                 steps + exc.steps, stage=i) from None
        if hom is None:
            return None
        steps += hom.steps
        H = hom.elements
        colors.append(hom.color)
    return H, tuple(colors), steps


# ---------------------------------------------------------------------------
# solutions

@dataclass(frozen=True)
class Solution:
    H: tuple[int, ...]
    pattern: LengthPattern
    params: Params
    A: tuple[int, ...]
    color: int
    mode: str = "direct"
    budget_used: int = 0
    coloring_ref: str = ""
    notes: tuple[str, ...] = ()

    def to_json(self, verified: bool | None = None) -> dict:
        out = {
            "H": [str(h) for h in self.H],
            "pattern": self.pattern.spec(),
            "params": params_dict(self.pattern, self.params),
            "A": list(self.A),
            "color": self.color,
            "coloring_ref": self.coloring_ref,
            "verified": verified,
            "mode": self.mode,
            "budget_used": self.budget_used,
        }
        if self.notes:
            out["notes"] = list(self.notes)
        return out

    def dumps(self, verified: bool | None = None) -> str:
        return json.dumps(self.to_json(verified), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, doc: dict) -> Solution:
        pattern = LengthPattern.parse(doc["pattern"])
        return cls(
            H=tuple(int(h) for h in doc["H"]),
            pattern=pattern,
            params=params_from_dict(pattern, doc["params"]),
            A=tuple(int(a) for a in doc["A"]),
            color=int(doc["color"]),
            mode=doc.get("mode", "direct"),
            budget_used=int(doc.get("budget_used", 0)),
            coloring_ref=doc.get("coloring_ref", ""),
            notes=tuple(doc.get("notes", ())),
        )


@dataclass
class Verification:
    ok: bool
    color: int | None = None
    reason: str = ""
    sums_checked: int = 0

    def __bool__(self) -> bool:
        return self.ok


def verify_solution(c: Coloring, sol: Solution) -> Verification:
    try:
        if not is_apart(sol.H):
            return Verification(False, reason="H is not apart")
    except DomainError as exc:
        return Verification(False, reason=f"H malformed: {exc}")
    try:
        A = instantiate_pattern(sol.pattern, sol.params)
    except DomainError as exc:
        return Verification(False, reason=str(exc))
    if tuple(sorted(A)) != tuple(sol.A):
        return Verification(False, reason="A does not match the pattern instance")
    if len(sol.H) < max(A):
        return Verification(False, reason=f"|H| = {len(sol.H)} < max(A) = {max(A)}")
    try:
        chk = check_monochromatic(c, sol.H, A, sol.color)
    except DomainError as exc:
        return Verification(False, reason=f"coloring domain exceeded: {exc}")
    if not chk.ok:
        return Verification(False, chk.color, reason=f"sum {chk.witness} has another color",
                            sums_checked=chk.count)
    return Verification(True, sol.color, sums_checked=chk.count)


@dataclass
class SolveConfig:
    mode: str = "direct"
    ground: tuple[int, ...] = ()
    target_size: int = 5
    budget: int | None = 1_000_000
    max_n: int = 40
    strategy: str = "incremental_dfs"
    workers: int = 1
    stage_slack: int = 1
    # direct mode: require at least `tail` elements of H with lambda > horizon
    horizon: int | None = None
    tail: int = 0
    notes: list[str] = field(default_factory=list)

    def __post_init__(self):
        if self.mode not in MODES:
            raise DomainError(f"unknown mode {self.mode!r}")
        self.ground = tuple(self.ground)
        if self.target_size < 1:
            raise DomainError("target_size must be positive")
        if self.budget is not None and self.budget <= 0:
            raise DomainError("budget must be positive")


# ---------------------------------------------------------------------------
# direct search

def _direct_params(args) -> tuple[tuple[int, ...] | None, int | None, int]:
    """Search the canonically least H for a fixed length set A.

    Forward checking keeps, at each node, only the later ground elements whose
    addition leaves FS^A monochromatic. Monochromaticity is inherited by subsets,
    so every completion is drawn from those candidates.
    """
    c, ground, A, size, horizon, tail, budget, index = args
    max_a = max(A)
    A = set(A)
    in_tail = [horizon is not None and lam(g) > horizon for g in ground]
    cache: dict[int, int] = {}
    steps = 0

    def col(x: int) -> int:
        v = cache.get(x)
        if v is None:
            v = cache[x] = c(x)
        return v

    def new_sums(partial, e):
        for j in A:
            if j - 1 < len(partial):
                for s in partial[j - 1]:
                    yield e + s

    def viable(partial, e, color):
        nonlocal steps
        steps += 1
        if budget is not None and steps > budget:
            raise _Stop
        if steps % 64 == 0 and superseded(index):
            raise _Stop
        for s in new_sums(partial, e):
            got = col(s)
            if color is None:
                color = got
            elif got != color:
                return None
        return (color,)

    def rec(chosen, partial, color, cands, have_tail):
        if len(chosen) == size:
            return (tuple(chosen), color) if have_tail >= tail else None
        need = size - len(chosen)
        if len(cands) < need:
            return None
        keep = []
        for i in cands:
            v = viable(partial, ground[i], color)
            if v is not None:
                keep.append((i, v[0]))
        if len(keep) < need:
            return None
        if tail and have_tail + sum(in_tail[i] for i, _ in keep) < tail:
            return None
        for pos, (i, newcol) in enumerate(keep):
            if len(keep) - pos < need:
                break
            e = ground[i]
            grown = [list(p) for p in partial]
            if len(grown) < max_a:
                grown.append([])
            for j in range(len(grown) - 1, 0, -1):
                grown[j].extend(e + s for s in partial[j - 1])
            found = rec(chosen + [e], grown, newcol, [k for k, _ in keep[pos + 1:]],
                        have_tail + in_tail[i])
            if found is not None:
                return found
        return None

    try:
        found = rec([], [[0]], None, list(range(len(ground))), 0)
    except _Stop:
        return None, None, steps
    if found is None:
        return None, None, steps
    report_hit(index)
    H, color = found
    return H, color, steps


class _Stop(Exception):
    pass


def _solve_direct(c: Coloring, pattern: LengthPattern, cfg: SolveConfig) -> Solution | None:
    ground = cfg.ground
    size = min(cfg.target_size, len(ground))
    candidates = [(p, tuple(sorted(inst))) for p, inst in iter_params(pattern, size)]
    jobs = [(c, ground, A, size, cfg.horizon, cfg.tail, cfg.budget, index)
            for index, (_, A) in enumerate(candidates)]
    used = 0
    with ordered_results(_direct_params, jobs, cfg.workers) as results:
        for (params, A), (H, color, steps) in zip(candidates, results):
            used += steps
            if cfg.budget is not None and used > cfg.budget:
                raise BudgetExceeded(f"direct search exceeded {cfg.budget} steps", used)
            if H is not None:
                return Solution(H, pattern, params, A, color, "direct", used, c.ref())
    return None


# ---------------------------------------------------------------------------
# proof pipelines

def pattern_core_k(pattern: LengthPattern, cfg: SolveConfig) -> int:
    w = witness_number(pattern, 2, cfg.max_n, cfg.strategy, workers=cfg.workers)
    if not w.exact:
        raise SolveFailure(f"witness number for {pattern.spec()} exceeds max_n={cfg.max_n}")
    return w.value


def _read_off(pattern: LengthPattern, bits: Sequence[int]):
    C = TableColoring(2, tuple(bits))
    w = find_mono_config(C, pattern)
    if w is None:
        raise SolveFailure("induced length coloring avoids the pattern; k is too small")
    return C, w


def _solve_pipeline(c: Coloring, pattern: LengthPattern, cfg: SolveConfig) -> Solution | None:
    k = pattern_core_k(pattern, cfg)
    if cfg.target_size < 2 * k:
        # room for k + max(A) elements, and max(A) <= k
        raise SolveFailure(f"pipeline mode needs target_size >= 2k = {2 * k}")
    tc = DerivedTupleColoring(c, k).as_tuple_coloring()
    hom = extract_homogeneous(cfg.ground, tc, cfg.target_size, cfg.budget)
    if hom is None:
        return None
    sigma = hom.color
    _, w = _read_off(pattern, [(sigma >> i) & 1 for i in range(k)])
    A = w.instance
    # an i-subset must extend to a k-tuple inside H: keep room for k - min(A) more
    H = hom.elements[:len(hom.elements) - (k - min(A))]
    note = f"k={k}; exported the first {len(H)} of {len(hom.elements)} homogeneous elements"
    return Solution(H, pattern, w.params, A, w.color, "pipeline", hom.steps, c.ref(), (note,))


def _solve_iterated(c: Coloring, pattern: LengthPattern, cfg: SolveConfig) -> Solution | None:
    k = pattern_core_k(pattern, cfg)
    out = iterated_refinement(cfg.ground, c, k, cfg.target_size, cfg.budget, cfg.stage_slack)
    if out is None:
        return None
    H, colors, steps = out
    _, w = _read_off(pattern, colors)
    note = f"k={k}; induced length coloring {''.join(map(str, colors))}"
    return Solution(H, pattern, w.params, w.instance, w.color, "iterated", steps, c.ref(), (note,))


def solve(c: Coloring, pattern: LengthPattern, cfg: SolveConfig) -> Solution | None:
    if cfg.mode in ("pipeline", "iterated") and c.r != 2:
        raise DomainError(f"{cfg.mode} mode is stated for 2-colorings only")
    if not cfg.ground or not is_apart(cfg.ground):
        raise DomainError("ground must be a non-empty apart set")
    if cfg.mode == "direct":
        sol = _solve_direct(c, pattern, cfg)
    elif cfg.mode == "pipeline":
        sol = _solve_pipeline(c, pattern, cfg)
    else:
        sol = _solve_iterated(c, pattern, cfg)
    if sol is not None:
        check = verify_solution(c, sol)
        if not check:
            raise AssertionError(f"solver produced an unverifiable solution: {check.reason}")
    return sol


def homogeneity_transfer_holds(c: Coloring, H: Sequence[int], n: int, sigma: int) -> bool:
    """For every i <= n, each i-subset of the first |H| - (n - i) elements of an
    arity-n homogeneous set sums to color bit i-1 of ``sigma``."""
    for i in range(1, n + 1):
        head = H[:len(H) - (n - i)]
        bit = (sigma >> (i - 1)) & 1
        if any(c(s) != bit for s in fs_exact(head, i)):
            return False
    return True
