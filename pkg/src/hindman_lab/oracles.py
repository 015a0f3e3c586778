"""Finite partition-theorem engine.

Finds monochromatic pattern configurations in colorings of [1, n] and computes
witness numbers (Schur, van der Waerden, Brauer, Folkman) by exhaustive search.
Two independent strategies are provided so that each can serve as the other's
oracle:

* ``full_enumeration`` walks every r-coloring of [1, n] for n = 1, 2, ... (vectorised
  with numpy);
* ``incremental_dfs`` grows colorings position by position and abandons a branch
  as soon as a monochromatic configuration is completed.

Both report the lexicographically least avoiding coloring as certificate, so
their outputs can be compared verbatim.
"""

from __future__ import annotations

import atexit
import contextlib
import multiprocessing
from concurrent.futures import ProcessPoolExecutor, wait
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .core import DomainError, LengthPattern, Params, iter_params, params_dict

STRATEGIES = ("full_enumeration", "incremental_dfs")


class BudgetExceeded(RuntimeError):
    """A search ran out of its step budget before reaching a verdict."""

    def __init__(self, message: str, steps: int, stage: int | None = None):
        super().__init__(message)
        self.steps = steps
        self.stage = stage


# ---------------------------------------------------------------------------
# table colorings

@dataclass(frozen=True)
class TableColoring:
    r: int
    table: tuple[int, ...]

    def __post_init__(self):
        if self.r < 1:
            raise DomainError("r must be positive")
        object.__setattr__(self, "table", tuple(int(x) for x in self.table))
        if any(not 0 <= x < self.r for x in self.table):
            raise DomainError(f"table entries must lie in [0, {self.r})")

    @property
    def n(self) -> int:
        return len(self.table)

    def __call__(self, i: int) -> int:
        if not 1 <= i <= self.n:
            raise DomainError(f"{i} outside [1, {self.n}]")
        return self.table[i - 1]

    def to_text(self) -> str:
        return f"{self.r} {self.n}\n" + " ".join(map(str, self.table))

    @classmethod
    def from_text(cls, text: str) -> TableColoring:
        lines = text.strip("\n").split("\n")
        try:
            r, n = (int(t) for t in lines[0].split())
            table = [int(t) for t in lines[1].split()] if len(lines) > 1 else []
        except (ValueError, IndexError) as exc:
            raise DomainError("malformed coloring table") from exc
        if len(table) != n:
            raise DomainError(f"table declares n={n} but lists {len(table)} colors")
        return cls(r, tuple(table))


@dataclass(frozen=True)
class ConfigWitness:
    params: Params
    color: int
    instance: tuple[int, ...]


@lru_cache(maxsize=256)
def _instances(pattern: LengthPattern, n: int) -> tuple[tuple[Params, tuple[int, ...]], ...]:
    return tuple((p, tuple(sorted(inst))) for p, inst in iter_params(pattern, n))


def find_mono_config(c: TableColoring, pattern: LengthPattern) -> ConfigWitness | None:
    t = c.table
    for params, inst in _instances(pattern, c.n):
        col = t[inst[0] - 1]
        if all(t[i - 1] == col for i in inst):
            return ConfigWitness(params, col, inst)
    return None


def is_avoiding(c: TableColoring, pattern: LengthPattern) -> bool:
    return find_mono_config(c, pattern) is None


# ---------------------------------------------------------------------------
# witness numbers

@dataclass(frozen=True)
class WitnessResult:
    status: str  # "exact" | "lower_bound_only"
    value: int
    certificate: TableColoring
    pattern: LengthPattern
    r: int
    strategy: str
    steps: int

    @property
    def exact(self) -> bool:
        return self.status == "exact"

    def as_dict(self) -> dict:
        return {
            "pattern": self.pattern.spec(),
            "colors": self.r,
            "status": self.status,
            "exact": self.exact,
            "value": self.value,
            "certificate": self.certificate.to_text(),
            "strategy": self.strategy,
            "steps": self.steps,
        }


@lru_cache(maxsize=256)
def _by_max(pattern: LengthPattern, n: int) -> tuple[tuple[tuple[int, ...], ...], ...]:
    """For each position p (0-based) the instances whose largest member is p, as
    tuples of the remaining 0-based positions."""
    groups: list[set[tuple[int, ...]]] = [set() for _ in range(n)]
    for _, inst in _instances(pattern, n):
        pos = [i - 1 for i in inst]
        groups[pos[-1]].add(tuple(pos[:-1]))
    return tuple(tuple(sorted(g)) for g in groups)


def _closes_mono(colors: list[int], p: int, groups) -> bool:
    col = colors[p]
    for rest in groups[p]:
        if all(colors[q] == col for q in rest):
            return True
    return False


def _prefixes(pattern: LengthPattern, r: int, max_n: int,
              depth: int) -> tuple[list[tuple[int, ...]], int]:
    """Avoiding canonical prefixes of length ``depth`` in lex order, plus the node count.

    Colors are canonical: position 1 gets color 0 and every new color is one more
    than the largest used so far. The lexicographically least avoider always has
    this shape, so nothing is lost.
    """
    groups = _by_max(pattern, max_n)
    out: list[tuple[int, ...]] = []
    colors: list[int] = []
    nodes = 0

    def rec(top: int):
        nonlocal nodes
        if len(colors) == depth:
            out.append(tuple(colors))
            return
        p = len(colors)
        for col in range(min(r, top + 2)):
            nodes += 1
            colors.append(col)
            if not _closes_mono(colors, p, groups):
                rec(max(top, col))
            colors.pop()

    rec(-1)
    return out, nodes


def _dfs_shard(args) -> tuple[dict[int, tuple[int, ...]], int]:
    """Explore every avoiding extension of ``prefix`` up to ``max_n``.

    Returns the first (lex least) avoider seen for each length and the node count.
    """
    pattern, r, max_n, prefix, budget = args
    groups = _by_max(pattern, max_n)
    colors = list(prefix)
    first: dict[int, tuple[int, ...]] = {len(colors): tuple(colors)}
    steps = 0

    def rec(top: int):
        nonlocal steps
        n = len(colors)
        if n not in first:
            first[n] = tuple(colors)
        if n == max_n:
            return
        for col in range(min(r, top + 2)):
            steps += 1
            if budget is not None and steps > budget:
                raise _Stop
            colors.append(col)
            if not _closes_mono(colors, n, groups):
                rec(max(top, col))
            colors.pop()

    try:
        rec(max(prefix, default=-1))
    except _Stop:
        return {}, steps
    return first, steps


class _Stop(Exception):
    pass


_POOLS: dict[int, tuple[ProcessPoolExecutor, object]] = {}
_NO_HIT = 1 << 62

# in worker processes: least job index known to have succeeded (shared, monotone)
_BEST = None


def _init_worker(best):
    global _BEST
    _BEST = best


def shared_pool(workers: int):
    """One long-lived process pool per worker count, with its shared bound."""
    entry = _POOLS.get(workers)
    if entry is None:
        best = multiprocessing.Value("q", _NO_HIT)
        pool = ProcessPoolExecutor(max_workers=workers, initializer=_init_worker,
                                   initargs=(best,))
        entry = _POOLS[workers] = (pool, best)
    return entry


@atexit.register
def _close_pools():
    for pool, _ in _POOLS.values():
        pool.shutdown(cancel_futures=True)


def superseded(index: int) -> bool:
    """True once a job with a smaller index has reported success."""
    return _BEST is not None and _BEST.value < index


def report_hit(index: int) -> None:
    if _BEST is not None:
        with _BEST.get_lock():
            if index < _BEST.value:
                _BEST.value = index


@contextlib.contextmanager
def ordered_results(fn, jobs, workers: int):
    """Iterate ``fn(job)`` in job order while the jobs run speculatively in parallel.

    Jobs call :func:`report_hit` on success and poll :func:`superseded` to give up
    once an earlier job has succeeded; the consumer is expected to stop at the
    first success, so abandoned results are never read.
    """
    if workers <= 1 or len(jobs) <= 1:
        yield (fn(j) for j in jobs)
        return
    pool, best = shared_pool(workers)
    best.value = _NO_HIT
    futures = [pool.submit(fn, j) for j in jobs]
    try:
        yield (f.result() for f in futures)
    finally:
        best.value = -1
        for f in futures:
            f.cancel()
        wait(futures)
        best.value = _NO_HIT


def parallel_map(fn, jobs, workers: int) -> list:
    """``[fn(j) for j in jobs]``, spread over ``workers`` processes; order preserved."""
    if workers <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    return list(shared_pool(workers)[0].map(fn, jobs))


SHARD_DEPTH = 6


def _witness_dfs(pattern, r, max_n, budget, workers):
    depth = min(SHARD_DEPTH, max_n)
    prefixes, steps = _prefixes(pattern, r, max_n, depth)
    first: dict[int, tuple[int, ...]] = {}
    if prefixes:
        results = parallel_map(_dfs_shard, [(pattern, r, max_n, p, budget) for p in prefixes], workers)
        for shard_first, shard_steps in results:
            steps += shard_steps
            for n, col in shard_first.items():
                if n not in first or col < first[n]:
                    first[n] = col
    if budget is not None and steps > budget:
        raise BudgetExceeded(f"incremental_dfs exceeded {budget} steps", steps)
    # prefixes shorter than depth never survive; recover short avoiders directly
    for n in range(depth):
        if n not in first:
            short, _ = _prefixes(pattern, r, max_n, n)
            if short:
                first[n] = short[0]
    return first, steps


def _enumerate_chunk(args) -> tuple[tuple[int, ...] | None, int]:
    """Scan colorings with indices in [lo, hi) (first color fixed to 0); return the
    first avoider and the number of tables scanned."""
    pattern, r, n, lo, hi = args
    idx = np.arange(lo, hi, dtype=np.int64)
    tables = np.zeros((len(idx), n), dtype=np.int8)
    rest = idx.copy()
    for j in range(n - 1, 0, -1):
        tables[:, j] = rest % r
        rest //= r
    avoid = np.ones(len(idx), dtype=bool)
    for _, inst in _instances(pattern, n):
        cols = tables[:, [i - 1 for i in inst]]
        avoid &= ~(cols == cols[:, :1]).all(axis=1)
        if not avoid.any():
            break
    hits = np.flatnonzero(avoid)
    if hits.size:
        return tuple(int(x) for x in tables[hits[0]]), len(idx)
    return None, len(idx)


CHUNK = 1 << 18


def _witness_full(pattern, r, max_n, budget, workers):
    first: dict[int, tuple[int, ...]] = {0: ()}
    steps = 0
    for n in range(1, max_n + 1):
        total = r ** (n - 1) if r > 1 else 1
        if budget is not None and steps + total > budget:
            raise BudgetExceeded(f"full_enumeration exceeded {budget} steps", steps + total)
        jobs = [(pattern, r, n, lo, min(lo + CHUNK, total)) for lo in range(0, total, CHUNK)]
        results = parallel_map(_enumerate_chunk, jobs, workers)
        steps += total
        hit = next((t for t, _ in results if t is not None), None)
        if hit is None:
            break
        first[n] = hit
    return first, steps


def witness_number(pattern: LengthPattern, r: int, max_n: int,
                   strategy: str = "incremental_dfs", budget: int | None = None,
                   workers: int = 1) -> WitnessResult:
    """Least n <= max_n such that every r-coloring of [1, n] has a monochromatic
    instance of ``pattern``.

    ``budget`` bounds search steps (tables scanned or DFS nodes); running out raises
    :class:`BudgetExceeded`. Not finding a witness below ``max_n`` is not an error:
    it returns a ``lower_bound_only`` result certified on [1, max_n].
    """
    if r < 1 or max_n < 1:
        raise DomainError("need r >= 1 and max_n >= 1")
    if strategy == "incremental_dfs":
        first, steps = _witness_dfs(pattern, r, max_n, budget, workers)
    elif strategy == "full_enumeration":
        first, steps = _witness_full(pattern, r, max_n, budget, workers)
    else:
        raise DomainError(f"unknown strategy {strategy!r}")
    longest = max(first)
    if longest >= max_n:
        return WitnessResult("lower_bound_only", max_n, TableColoring(r, first[max_n]),
                             pattern, r, strategy, steps)
    return WitnessResult("exact", longest + 1, TableColoring(r, first[longest]),
                         pattern, r, strategy, steps)


def verify_witness(result: WitnessResult, samples: int = 0, seed: int = 0) -> bool:
    """Re-check a witness result: the certificate avoids the pattern and, if
    ``samples`` > 0, that many random colorings of [1, value] do not."""
    cert = result.certificate
    expected_len = result.value - 1 if result.exact else result.value
    if cert.n != expected_len or cert.r != result.r:
        return False
    if not is_avoiding(cert, result.pattern):
        return False
    if result.exact and samples:
        rng = np.random.default_rng(seed)
        for _ in range(samples):
            table = TableColoring(result.r, tuple(rng.integers(0, result.r, result.value)))
            if is_avoiding(table, result.pattern):
                return False
    return True


def witness_payload(w: ConfigWitness | None, pattern: LengthPattern) -> dict | None:
    if w is None:
        return None
    return {"params": params_dict(pattern, w.params), "color": w.color,
            "instance": list(w.instance)}

