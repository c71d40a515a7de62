"""Uniform binary expansion of bounded continuous variables.

A variable with expansion (depth d, multiplier alpha, offset beta) takes
the values  beta + alpha * j / (2^d - 1)  for j = 0 .. 2^d - 1, i.e. the
uniform grid on [beta, alpha + beta].  Bit k (1-based, LSB first) carries
weight alpha * delta(k) with delta(k) = 2^(k-1) / (2^d - 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .algebra import AffineExpr, BitVar


def delta(k: int, depth: int) -> float:
    """Bit weight 2^(k-1) / (2^depth - 1) for k in 1..depth."""
    if not 1 <= k <= depth:
        raise ValueError(f"bit index {k} out of range 1..{depth}")
    return float(1 << (k - 1)) / float((1 << depth) - 1)


@dataclass(frozen=True)
class BinaryExpansion:
    """(depth, alpha, beta) triple fixing a uniform grid on [beta, alpha+beta]."""

    depth: int
    alpha: float
    beta: float

    def __post_init__(self) -> None:
        if not isinstance(self.depth, int) or self.depth < 1:
            raise ValueError(f"depth must be a positive integer, got {self.depth!r}")
        if not math.isfinite(self.alpha) or not math.isfinite(self.beta):
            raise ValueError("alpha and beta must be finite")
        if self.alpha < 0:
            raise ValueError("alpha must be nonnegative; fold sign flips into beta "
                             "or the surrounding coefficients")

    @property
    def n_levels(self) -> int:
        return 1 << self.depth

    @property
    def bounds(self) -> tuple[float, float]:
        return (self.beta, self.alpha + self.beta)

    @property
    def resolution(self) -> float:
        """Grid spacing alpha / (2^depth - 1)."""
        return self.alpha / float(self.n_levels - 1)

    def decode(self, bits: Sequence[int]) -> float:
        """Grid value realized by a {0,1}^depth bit pattern (LSB first)."""
        if len(bits) != self.depth:
            raise ValueError(f"expected {self.depth} bits, got {len(bits)}")
        j = 0
        for k, b in enumerate(bits):
            if b not in (0, 1):
                raise ValueError(f"bits must be 0 or 1, got {b!r}")
            j |= int(b) << k
        return self.beta + self.alpha * (j / float(self.n_levels - 1))

    def quantize(self, value: float) -> tuple[int, ...]:
        """Bit pattern of the grid point nearest to value.

        Out-of-range values clamp to the nearest endpoint; exact midpoints
        round toward the lower grid index.
        """
        if not math.isfinite(value):
            raise ValueError(f"value must be finite, got {value!r}")
        top = self.n_levels - 1
        if self.alpha == 0.0:
            j = 0
        else:
            x = (value - self.beta) / self.resolution
            j = math.ceil(x - 0.5)
            j = min(max(j, 0), top)
        return tuple((j >> k) & 1 for k in range(self.depth))

    def to_affine(self, bits: Sequence[BitVar]) -> AffineExpr:
        """Affine form beta + sum alpha*delta(k)*b_k over the given bit vars."""
        if len(bits) != self.depth:
            raise ValueError(f"expected {self.depth} bit variables, got {len(bits)}")
        terms = {v: self.alpha * delta(k, self.depth)
                 for k, v in enumerate(bits, start=1)}
        return AffineExpr(terms, self.beta)

    def grid(self) -> np.ndarray:
        """All 2^depth grid values in increasing order."""
        top = self.n_levels - 1
        return self.beta + self.alpha * (np.arange(self.n_levels) / float(top))
