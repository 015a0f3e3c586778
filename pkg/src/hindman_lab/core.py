"""Binary-support arithmetic, apart sets, restricted finite sums and length patterns.

Every integer here is a Python ``int`` so that apart sets whose binary supports
spread far to the left never overflow.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from typing import Callable, Iterable, Iterator, Sequence


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


# ---------------------------------------------------------------------------
# bit profiles

@dataclass(frozen=True)
class BitProfile:
    exponents: tuple[int, ...]

    @property
    def lam(self) -> int:
        return self.exponents[0]

    @property
    def mu(self) -> int:
        return self.exponents[-1]

    @property
    def gaps(self) -> tuple[tuple[int, int], ...]:
        e = self.exponents
        return tuple(zip(e, e[1:]))

    def value(self) -> int:
        return sum(1 << t for t in self.exponents)

    def as_dict(self) -> dict:
        return {
            "exponents": list(self.exponents),
            "lambda": self.lam,
            "mu": self.mu,
            "gaps": [list(g) for g in self.gaps],
        }


def exponents(n: int) -> tuple[int, ...]:
    if n < 1:
        raise DomainError(f"binary profile undefined for {n}")
    out = []
    t = 0
    while n:
        low = n & -n
        t = low.bit_length() - 1
        out.append(t)
        n ^= low
    return tuple(out)


@lru_cache(maxsize=1 << 16)
def bit_profile(n: int) -> BitProfile:
    return BitProfile(exponents(n))


def lam(n: int) -> int:
    """Least exponent of ``n``'s binary expansion."""
    if n < 1:
        raise DomainError(f"lambda undefined for {n}")
    return (n & -n).bit_length() - 1


def mu(n: int) -> int:
    """Greatest exponent of ``n``'s binary expansion."""
    if n < 1:
        raise DomainError(f"mu undefined for {n}")
    return n.bit_length() - 1


# ---------------------------------------------------------------------------
# apart sets

def _check_increasing(xs: Sequence[int]) -> None:
    for x in xs:
        if x < 1:
            raise DomainError(f"elements must be positive, got {x}")
    for x, y in zip(xs, xs[1:]):
        if not x < y:
            raise DomainError(f"elements must be strictly increasing: {x} then {y}")


def is_apart(xs: Sequence[int]) -> bool:
    _check_increasing(xs)
    return all(mu(x) < lam(y) for x, y in zip(xs, xs[1:]))


def apart_ground(count: int, start_exp: int = 0, stride: int = 1) -> tuple[int, ...]:
    if count < 1 or start_exp < 0 or stride < 1:
        raise DomainError("need count >= 1, start_exp >= 0, stride >= 1")
    return tuple(1 << (start_exp + i * stride) for i in range(count))


# ---------------------------------------------------------------------------
# restricted finite sums

def fs_exact(H: Sequence[int], a: int) -> set[int]:
    if a < 1:
        raise DomainError("sums must have at least one term")
    return {sum(s) for s in combinations(H, a)}


def fs_lengths(H: Sequence[int], A: Iterable[int]) -> set[int]:
    A = set(A)
    if not A:
        raise DomainError("empty length set")
    out: set[int] = set()
    for j in A:
        out |= fs_exact(H, j)
    return out


def iter_fs_lengths(H: Sequence[int], A: Iterable[int]) -> Iterator[int]:
    """Yield the members of ``fs_lengths(H, A)`` without materialising the set."""
    for j in sorted(set(A)):
        for s in combinations(H, j):
            yield sum(s)


# ---------------------------------------------------------------------------
# length patterns

KINDS = ("schur", "vdw", "brauer", "folkman", "explicit")


@dataclass(frozen=True)
class LengthPattern:
    kind: str
    length: int = 0
    s: int = 1
    values: tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown pattern kind {self.kind!r}")
        if self.kind in ("vdw", "brauer", "folkman") and self.length < 1:
            raise DomainError(f"{self.kind} needs length >= 1")
        if self.kind == "brauer" and self.s < 1:
            raise DomainError("brauer needs s >= 1")
        if self.kind == "explicit":
            if not self.values or any(v < 1 for v in self.values):
                raise DomainError("explicit pattern needs a non-empty set of positive integers")
            object.__setattr__(self, "values", tuple(sorted(set(self.values))))

    @classmethod
    def schur(cls) -> LengthPattern:
        return cls("schur")

    @classmethod
    def vdw(cls, length: int) -> LengthPattern:
        return cls("vdw", length)

    @classmethod
    def brauer(cls, length: int, s: int = 1) -> LengthPattern:
        return cls("brauer", length, s)

    @classmethod
    def folkman(cls, length: int) -> LengthPattern:
        return cls("folkman", length)

    @classmethod
    def explicit(cls, values: Iterable[int]) -> LengthPattern:
        return cls("explicit", values=tuple(values))

    @classmethod
    def parse(cls, text: str) -> LengthPattern:
        """Parse ``schur | vdw:L | brauer:L:S | folkman:L | explicit:k1,k2,...``."""
        parts = text.strip().split(":")
        kind = parts[0]
        try:
            if kind == "schur" and len(parts) == 1:
                return cls.schur()
            if kind in ("vdw", "folkman") and len(parts) == 2:
                return cls(kind, int(parts[1]))
            if kind == "brauer" and len(parts) == 3:
                return cls.brauer(int(parts[1]), int(parts[2]))
            if kind == "explicit" and len(parts) == 2:
                return cls.explicit(int(v) for v in parts[1].split(","))
        except ValueError as exc:
            raise DomainError(f"malformed pattern spec {text!r}") from exc
        raise DomainError(f"malformed pattern spec {text!r}")

    def spec(self) -> str:
        if self.kind == "schur":
            return "schur"
        if self.kind == "brauer":
            return f"brauer:{self.length}:{self.s}"
        if self.kind == "explicit":
            return "explicit:" + ",".join(map(str, self.values))
        return f"{self.kind}:{self.length}"

    @property
    def uses_ab(self) -> bool:
        return self.kind in ("schur", "vdw", "brauer")


Params = tuple[int, ...]
"""(a, b) for schur/vdw/brauer, sorted indices for folkman, () for explicit."""


def _subset_sums(xs: Sequence[int]) -> set[int]:
    out: set[int] = set()
    for r in range(1, len(xs) + 1):
        out |= {sum(c) for c in combinations(xs, r)}
    return out


def instantiate_pattern(pattern: LengthPattern, params: Params = (),
                        require_distinct_params: bool = False) -> frozenset[int]:
    params = tuple(params)
    if pattern.uses_ab:
        if len(params) != 2 or min(params) < 1:
            raise DomainError(f"{pattern.kind} needs positive params (a, b), got {params}")
        a, b = params
        if require_distinct_params and a == b:
            raise DomainError("a == b rejected by require_distinct_params")
        if pattern.kind == "schur":
            return frozenset((a, b, a + b))
        ap = {a + i * b for i in range(pattern.length)}
        if pattern.kind == "brauer":
            ap.add(pattern.s * b)
        return frozenset(ap)
    if pattern.kind == "folkman":
        if len(params) != pattern.length or min(params, default=0) < 1 or \
                any(x >= y for x, y in zip(params, params[1:])):
            raise DomainError(f"folkman:{pattern.length} needs {pattern.length} "
                              f"strictly increasing positive indices, got {params}")
        return frozenset(_subset_sums(params))
    if params:
        raise DomainError("explicit patterns take no params")
    return frozenset(pattern.values)


def iter_params(pattern: LengthPattern, bound: int) -> Iterator[tuple[Params, frozenset[int]]]:
    """All (params, instance) with instance inside [1, bound], params in lexicographic order."""
    if pattern.uses_ab:
        for a in range(1, bound + 1):
            for b in range(1, bound + 1):
                inst = instantiate_pattern(pattern, (a, b))
                if max(inst) <= bound:
                    yield (a, b), inst
    elif pattern.kind == "folkman":
        ell = pattern.length

        def rec(prefix: list[int], start: int, total: int):
            if len(prefix) == ell:
                yield tuple(prefix)
                return
            # the remaining ell-len(prefix) indices are at least start, start+1, ...
            need = ell - len(prefix)
            for i in range(start, bound + 1):
                if total + need * i + need * (need - 1) // 2 > bound:
                    break
                prefix.append(i)
                yield from rec(prefix, i + 1, total + i)
                prefix.pop()

        for idx in rec([], 1, 0):
            yield idx, instantiate_pattern(pattern, idx)
    else:
        if max(pattern.values) <= bound:
            yield (), frozenset(pattern.values)


def params_dict(pattern: LengthPattern, params: Params) -> dict:
    if pattern.uses_ab:
        return {"a": params[0], "b": params[1]}
    if pattern.kind == "folkman":
        return {"indices": list(params)}
    return {}


def params_from_dict(pattern: LengthPattern, d: dict) -> Params:
    if pattern.uses_ab:
        return (int(d["a"]), int(d["b"]))
    if pattern.kind == "folkman":
        return tuple(int(i) for i in d["indices"])
    return ()


# ---------------------------------------------------------------------------
# colorings

class Coloring:
    """A map from positive integers (inside ``domain``, if given) to ``range(r)``.

    Subclasses override :meth:`_color`; queries outside the declared domain raise
    :class:`DomainError` rather than falling back to some default color.
    """

    name = "coloring"

    def __init__(self, r: int, fn: Callable[[int], int] | None = None,
                 domain: int | None = None, name: str | None = None):
        if r < 1:
            raise DomainError("a coloring needs at least one color")
        self.r = r
        self.domain = domain
        self._fn = fn
        if name is not None:
            self.name = name

    def _color(self, n: int) -> int:
        if self._fn is None:
            raise NotImplementedError
        return self._fn(n)

    def __call__(self, n: int) -> int:
        if n < 1 or (self.domain is not None and n > self.domain):
            raise DomainError(f"{n} outside the domain of {self.name}")
        col = self._color(n)
        if not 0 <= col < self.r:
            raise DomainError(f"{self.name} produced color {col} outside range({self.r})")
        return col

    def ref(self) -> str:
        return self.name


class ConstantColoring(Coloring):
    def __init__(self, color: int = 0, r: int = 2):
        super().__init__(r, name=f"constant:{color}")
        self.color = color

    def _color(self, n: int) -> int:
        return self.color


class ParityColoring(Coloring):
    name = "parity"

    def __init__(self):
        super().__init__(2)

    def _color(self, n: int) -> int:
        return n & 1


class PopcountParityColoring(Coloring):
    """Parity of the number of binary digits equal to 1."""

    name = "popcount-parity"

    def __init__(self):
        super().__init__(2)

    def _color(self, n: int) -> int:
        return bin(n).count("1") & 1


@dataclass
class FSCheck:
    """Result of checking that ``fs_lengths(H, A)`` is monochromatic."""

    ok: bool
    color: int | None
    witness: int | None = None
    count: int = 0
    detail: list = field(default_factory=list)


def check_monochromatic(c: Coloring, H: Sequence[int], A: Iterable[int],
                        color: int | None = None) -> FSCheck:
    count = 0
    for s in iter_fs_lengths(H, A):
        col = c(s)
        count += 1
        if color is None:
            color = col
        elif col != color:
            return FSCheck(False, color, witness=s, count=count)
    return FSCheck(True, color, count=count)
