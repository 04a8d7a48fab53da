"""Undo SP-side monotone polynomial noise on disclosed distances.

The SP may send F(N_i) instead of N_i for a secret polynomial F with
coefficients in [1, 2^alpha - 1] and inputs in [0, 2^beta - 1]. With every
coefficient positive, F is strictly increasing on the non-negative
integers, so each candidate polynomial can be inverted by binary search.

This module works at desk scale: it enumerates every admissible
coefficient vector and keeps those that explain all outputs. It is not the
lattice-reduction method needed for realistic parameters (d=9, alpha=32,
beta=28); it shows that the noise can be inverted, nothing more.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

SEARCH_BUDGET = 10**9


class Inconsistent(ValueError):
    """No admissible polynomial explains the outputs."""


class AmbiguityLimitExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class NoiseModel:
    degree_d: int
    coeff_bits_alpha: int
    input_bits_beta: int

    def __post_init__(self):
        if self.degree_d < 1:
            raise ValueError("degree must be >= 1 (a constant polynomial hides nothing)")
        if self.coeff_bits_alpha < 1 or self.input_bits_beta < 1:
            raise ValueError("alpha and beta must be positive")
        if self.search_cost(1) > SEARCH_BUDGET:
            raise ValueError(
                f"model {self} is beyond desk scale: ~{self.search_cost(1):.3g} evaluations per output"
            )

    @property
    def max_coeff(self) -> int:
        return 2**self.coeff_bits_alpha - 1

    @property
    def max_input(self) -> int:
        return 2**self.input_bits_beta - 1

    def search_cost(self, n_outputs: int) -> int:
        return self.max_coeff ** (self.degree_d + 1) * max(1, n_outputs) * self.input_bits_beta


@dataclass
class RecoveryResult:
    recovered_inputs: Optional[List[int]]
    candidate_polynomials: int
    explanations: List[Tuple[int, ...]] = field(default_factory=list)
    polynomials: Dict[Tuple[int, ...], List[Tuple[int, ...]]] = field(default_factory=dict)

    @property
    def unique(self) -> bool:
        return len(self.explanations) == 1


def evaluate(coeffs: Sequence[int], x: int) -> int:
    """F(x) with ``coeffs[k]`` the coefficient of x**k (Horner, exact ints)."""
    acc = 0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def sample_monotone_poly(model: NoiseModel, rng: np.random.Generator) -> Tuple[int, ...]:
    """d + 1 coefficients, each uniform on [1, 2^alpha - 1], lowest power first."""
    return tuple(int(c) for c in rng.integers(1, model.max_coeff + 1, size=model.degree_d + 1))


def _invert(coeffs, y, lo, hi):
    """Smallest x in [lo, hi] with F(x) == y, or None. F strictly increasing."""
    while lo < hi:
        mid = (lo + hi) // 2
        if evaluate(coeffs, mid) < y:
            lo = mid + 1
        else:
            hi = mid
    return lo if evaluate(coeffs, lo) == y else None


def recover_inputs(outputs: Sequence[int], model: NoiseModel, max_explanations: int = 1000) -> RecoveryResult:
    """Every input list that some admissible polynomial maps onto ``outputs``.

    Distinct outputs are processed in increasing order; because F is
    increasing their preimages must increase too, which narrows each binary
    search to the range above the previous preimage.
    """
    outputs = [int(y) for y in outputs]
    if not outputs:
        raise ValueError("need at least one output")
    if model.search_cost(len(set(outputs))) > SEARCH_BUDGET:
        raise ValueError("too many outputs for a desk-scale search")
    distinct = sorted(set(outputs))
    smallest, largest = distinct[0], distinct[-1]
    top = model.max_input

    by_inputs: Dict[Tuple[int, ...], List[Tuple[int, ...]]] = {}
    n_polys = 0
    higher = range(1, model.max_coeff + 1)
    for tail in itertools.product(higher, repeat=model.degree_d):
        # F(x) >= c0 + (sum of tail) * x for x >= 1, and F(0) = c0
        for c0 in range(1, min(model.max_coeff, smallest) + 1):
            coeffs = (c0,) + tail
            if evaluate(coeffs, top) < largest:
                continue
            pre = {}
            lo = 0
            for y in distinct:
                x = _invert(coeffs, y, lo, top)
                if x is None:
                    break
                pre[y] = x
                lo = x + 1
            else:
                inputs = tuple(pre[y] for y in outputs)
                n_polys += 1
                by_inputs.setdefault(inputs, []).append(coeffs)
                if len(by_inputs) > max_explanations:
                    raise AmbiguityLimitExceeded(
                        f"more than {max_explanations} input lists explain the outputs"
                    )
    if not by_inputs:
        raise Inconsistent("no admissible polynomial reproduces these outputs")
    explanations = sorted(by_inputs)
    recovered = list(explanations[0]) if len(explanations) == 1 else None
    return RecoveryResult(recovered, n_polys, explanations, by_inputs)
