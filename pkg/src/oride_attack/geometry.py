"""Integer lattice points on circles and even p-norm curves.

Everything here is exact integer arithmetic. Membership ("is this a perfect
square / perfect p-th power") is decided with integer roots, never with
floating point.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import isqrt
from typing import FrozenSet, NamedTuple

# 2 * (60 km)^2: room for grids twice the largest experiment side.
DEFAULT_MAX_N = 2 * 60000**2


class ParameterTooLarge(ValueError):
    pass


class InvalidExponent(ValueError):
    pass


class LatticeOffset(NamedTuple):
    dx: int
    dy: int


@dataclass(frozen=True)
class LatticeSolutionSet:
    parameter_n: int
    norm_exponent: int
    offsets: FrozenSet[LatticeOffset]

    def __len__(self):
        return len(self.offsets)

    def __iter__(self):
        # sorted so callers iterating the set see a reproducible order
        return iter(sorted(self.offsets))

    def __contains__(self, item):
        return item in self.offsets


def iroot(n: int, k: int) -> int:
    """Return floor(n ** (1/k)) for n >= 0, computed exactly."""
    if n < 0:
        raise ValueError("iroot of a negative number")
    if k == 1 or n < 2:
        return n
    if k == 2:
        return isqrt(n)
    # integer Newton iteration from an upper bound
    x = 1 << ((n.bit_length() + k - 1) // k)
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            break
        x = y
    while x**k > n:
        x -= 1
    while (x + 1) ** k <= n:
        x += 1
    return x


def _symmetric_orbit(x: int, y: int):
    return {
        LatticeOffset(sx * a, sy * b)
        for a, b in ((x, y), (y, x))
        for sx in (1, -1)
        for sy in (1, -1)
    }


def default_bound(p: int = 2) -> int:
    """2 * (60 km)^p: the largest norm value of a 60 km grid, in metres^p."""
    return DEFAULT_MAX_N if p == 2 else 2 * 60000**p


def _check_n(n: int, max_n: int | None, p: int = 2) -> None:
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    bound = default_bound(p) if max_n is None else max_n
    if n > bound:
        raise ParameterTooLarge(f"n={n} exceeds the enumeration bound {bound}")


def enumerate_circle(n: int, max_n: int | None = None) -> LatticeSolutionSet:
    """All integer (x, y) with x**2 + y**2 == n.

    Walks the canonical octant 0 <= x <= y, so the loop runs about
    sqrt(n/2) times, and expands each hit by the eight dihedral symmetries.
    """
    _check_n(n, max_n)
    offsets = set()
    for x in range(isqrt(n // 2) + 1):
        rest = n - x * x
        y = isqrt(rest)
        if y * y == rest:
            offsets |= _symmetric_orbit(x, y)
    return LatticeSolutionSet(n, 2, frozenset(offsets))


def enumerate_pnorm(p: int, n: int, max_n: int | None = None) -> LatticeSolutionSet:
    """All integer (x, y) with |x|**p + |y|**p == n, for even p >= 2."""
    if p <= 0 or p % 2:
        raise InvalidExponent(f"p must be a positive even integer, got {p}")
    if p == 2:
        return enumerate_circle(n, max_n)
    _check_n(n, max_n, p)
    offsets = set()
    x = 0
    while True:
        xp = x**p
        # x <= y implies 2 * x**p <= n
        if 2 * xp > n:
            break
        rest = n - xp
        y = iroot(rest, p)
        if y**p == rest:
            offsets |= _symmetric_orbit(x, y)
        x += 1
    return LatticeSolutionSet(n, p, frozenset(offsets))


def embed_pnorm_into_circle(p: int, solution: LatticeOffset) -> LatticeOffset:
    """Map a solution of x^p + y^p = n to (x^q, y^q), a point on x^2 + y^2 = n.

    Signs are kept, so the image of a symmetric p-norm set is symmetric too.
    """
    if p <= 0 or p % 2:
        raise InvalidExponent(f"p must be a positive even integer, got {p}")
    q = p // 2
    dx, dy = solution
    return LatticeOffset(
        (1 if dx >= 0 else -1) * abs(dx) ** q,
        (1 if dy >= 0 else -1) * abs(dy) ** q,
    )


def pnorm_value(p: int, dx: int, dy: int) -> int:
    """Exact |dx|^p + |dy|^p; for p == 2 this is the squared distance."""
    return abs(dx) ** p + abs(dy) ** p
