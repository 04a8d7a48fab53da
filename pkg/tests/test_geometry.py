import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oride_attack.geometry import (
    DEFAULT_MAX_N,
    InvalidExponent,
    LatticeOffset,
    ParameterTooLarge,
    embed_pnorm_into_circle,
    enumerate_circle,
    enumerate_pnorm,
    iroot,
)

from oracles import circle_scan, circle_table, pnorm_brute, r2


def as_set(sol):
    return {(o.dx, o.dy) for o in sol.offsets}


def test_circle_25_has_twelve_offsets():
    expected = {(3, 4), (3, -4), (-3, 4), (-3, -4), (4, 3), (4, -3), (-4, 3), (-4, -3),
                (5, 0), (-5, 0), (0, 5), (0, -5)}
    sol = enumerate_circle(25)
    assert as_set(sol) == expected
    assert len(sol) == 12


@pytest.mark.parametrize("n, expected", [
    (0, {(0, 0)}),
    (3, set()),
    (2, {(1, 1), (1, -1), (-1, 1), (-1, -1)}),
])
def test_circle_small_cases(n, expected):
    assert as_set(enumerate_circle(n)) == expected


def test_circle_matches_exhaustive_square_up_to_1e4():
    table = circle_table(10_000)
    for n in range(10_001):
        assert as_set(enumerate_circle(n)) == table.get(n, set()), n


def test_circle_matches_column_scan_for_random_large_n():
    rng = random.Random(91)
    ns = [rng.randint(0, 10**9) for _ in range(500)]
    # half the sample is forced to be representable, else most sets are empty
    ns += [rng.randint(0, 22360) ** 2 + rng.randint(0, 22360) ** 2 for _ in range(500)]
    for n in ns:
        got = as_set(enumerate_circle(n))
        assert got == circle_scan(n), n
        assert len(got) == r2(n), n


def test_circle_respects_bound():
    enumerate_circle(DEFAULT_MAX_N)
    with pytest.raises(ParameterTooLarge):
        enumerate_circle(DEFAULT_MAX_N + 1)
    with pytest.raises(ParameterTooLarge):
        enumerate_circle(101, max_n=100)
    with pytest.raises(ValueError):
        enumerate_circle(-1)
    enumerate_pnorm(4, 2 * 60000**4)
    with pytest.raises(ParameterTooLarge):
        enumerate_pnorm(4, 2 * 60000**4 + 1)


def test_pnorm_examples():
    assert as_set(enumerate_pnorm(4, 17)) == {(a, b) for a in (1, -1) for b in (2, -2)} | {
        (b, a) for a in (1, -1) for b in (2, -2)}
    assert as_set(enumerate_pnorm(2, 25)) == as_set(enumerate_circle(25))
    assert as_set(enumerate_pnorm(4, 5)) == set()


@pytest.mark.parametrize("p", [0, 1, 3, -2, 5])
def test_pnorm_rejects_bad_exponent(p):
    with pytest.raises(InvalidExponent):
        enumerate_pnorm(p, 17)


def _pair_values(p, limit):
    r = iroot(limit, p) + 1
    xs = np.arange(-r, r + 1, dtype=np.int64)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    return (np.abs(X) ** p + np.abs(Y) ** p).ravel()


@pytest.mark.parametrize("p", [2, 4, 6])
def test_pnorm_matches_brute_force_sampled(p):
    rng = random.Random(p)
    vals = _pair_values(p, 10**6)
    vals = vals[vals <= 10**6]
    ns = [rng.randint(0, 10**6) for _ in range(40)] + [int(v) for v in rng.sample(list(vals), 40)]
    for n in ns:
        assert as_set(enumerate_pnorm(p, n)) == pnorm_brute(p, n), (p, n)


def test_embed_examples():
    assert embed_pnorm_into_circle(4, LatticeOffset(1, 2)) == (1, 4)
    assert embed_pnorm_into_circle(2, LatticeOffset(3, 4)) == (3, 4)
    assert embed_pnorm_into_circle(6, LatticeOffset(0, 2)) == (0, 8)
    assert 0**2 + 8**2 == 0**6 + 2**6


@pytest.mark.parametrize("p", [4, 6, 8])
def test_pnorm_embeds_into_circle(p):
    rng = random.Random(7 * p)
    top = iroot(10**9, p)
    for _ in range(300):
        n = rng.randint(0, top) ** p + rng.randint(0, top) ** p
        circle = enumerate_circle(n)
        for o in enumerate_pnorm(p, n):
            assert embed_pnorm_into_circle(p, o) in circle.offsets


def test_iroot_exact():
    for k in (2, 3, 4, 6):
        for n in list(range(2000)) + [10**30 + 7, 2**200]:
            r = iroot(n, k)
            assert r**k <= n < (r + 1) ** k


def test_no_duplicates_on_axes_and_diagonals():
    # n = 50 = 1+49 = 25+25: a diagonal orbit and a generic orbit
    assert len(enumerate_circle(50)) == 12
    assert len(enumerate_circle(8)) == 4
    assert len(enumerate_circle(16)) == 4


SYMS = [
    lambda x, y: (x, y), lambda x, y: (-x, y), lambda x, y: (x, -y), lambda x, y: (-x, -y),
    lambda x, y: (y, x), lambda x, y: (-y, x), lambda x, y: (y, -x), lambda x, y: (-y, -x),
]


@settings(max_examples=300, deadline=None)
@given(st.integers(min_value=0, max_value=2 * 10**9))
def test_circle_closed_under_symmetries(n):
    s = as_set(enumerate_circle(n))
    for f in SYMS:
        assert {f(x, y) for x, y in s} == s
    assert all(x * x + y * y == n for x, y in s)


@settings(max_examples=300, deadline=None)
@given(st.integers(min_value=1, max_value=2 * 10**9))
def test_circle_size_multiple_of_four(n):
    assert len(enumerate_circle(n)) % 4 == 0


@settings(max_examples=200, deadline=None)
@given(st.sampled_from([4, 6]), st.integers(0, 200), st.integers(0, 200))
def test_pnorm_contains_generating_point(p, x, y):
    if p == 6:
        x, y = x % 31, y % 31
    n = x**p + y**p
    sol = as_set(enumerate_pnorm(p, n))
    assert (x, y) in sol and (-y, x) in sol
    assert all(abs(a) ** p + abs(b) ** p == n for a, b in sol)


def test_large_n_is_fast():
    import time
    n = 2 * 30000**2
    start = time.perf_counter()
    sol = enumerate_circle(n)
    assert time.perf_counter() - start < 0.1
    assert (30000, 30000) in sol.offsets
    assert math.isqrt(n // 2) == 30000
