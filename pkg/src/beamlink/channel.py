"""Nakagami-m MIMO channel generation with a fixed first/second-moment structure.

The element model is a complex Gaussian scattered about a real mean: each
entry is h = sqrt(squared_mean) + g with g ~ CN(0, variance), where the
(squared_mean, variance) pair is taken from the moments of a Nakagami-m
amplitude.  A plain amplitude-Nakagami draw with uniform phase would have
zero mean and could not reproduce the nonzero cross-correlation that the
stacked-channel Gram matrix is required to carry; the mean-plus-scatter
model is the unique element-wise structure that does.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.random import Generator


@dataclass(frozen=True)
class NakagamiParams:
    """Nakagami-m fading parameters: shape m and spread omega = E[|h|^2].

    m = 1 is the Rayleigh special case; m >= 0.5 is required for validity.
    """

    m: float
    omega: float

    def __post_init__(self):
        if not (self.m >= 0.5):
            raise ValueError(f"Nakagami shape m must be >= 0.5, got {self.m}")
        if not (self.omega > 0):
            raise ValueError(f"spread omega must be > 0, got {self.omega}")


@dataclass(frozen=True)
class MomentDecomposition:
    """Split of the channel-element spread into squared mean plus variance.

    squared_mean is the square of the mean element amplitude; variance is
    the remaining scatter power.  They sum to the total spread omega.
    """

    squared_mean: float
    variance: float

    @property
    def total(self) -> float:
        return self.squared_mean + self.variance

    @property
    def correlation(self) -> float:
        """Normalized cross-correlation squared_mean / (variance + squared_mean)."""
        return self.squared_mean / self.total


@dataclass(frozen=True)
class StackedChannel:
    """Vertical concatenation [top; bottom] of two M x M channel matrices."""

    top: np.ndarray
    bottom: np.ndarray
    combined: np.ndarray

    @property
    def dimension(self) -> int:
        return self.top.shape[0]


def derive_moments(params: NakagamiParams) -> MomentDecomposition:
    """Reduce Nakagami-m (m, omega) to the (squared mean, variance) pair.

    The mean amplitude of a Nakagami-m variate is
    Gamma(m + 1/2) / Gamma(m) * sqrt(omega / m); its square is the
    squared_mean and the remainder omega - squared_mean is the variance.
    Uses log-gamma so very large m (the deterministic-channel limit) stays
    finite.
    """
    m, omega = params.m, params.omega
    squared_mean = math.exp(2.0 * (math.lgamma(m + 0.5) - math.lgamma(m))) * omega / m
    return MomentDecomposition(squared_mean=squared_mean, variance=omega - squared_mean)


def sample_channel(moments: MomentDecomposition, dimension: int, rng: Generator) -> np.ndarray:
    """Draw one M x M channel matrix with i.i.d. mean-plus-scatter entries.

    Each entry is sqrt(squared_mean) + CN(0, variance).  Real and imaginary
    scatter parts are drawn in a fixed order so equal seeds give
    bit-identical matrices.
    """
    if dimension < 1:
        raise ValueError(f"dimension must be >= 1, got {dimension}")
    shape = (dimension, dimension)
    sigma = math.sqrt(moments.variance / 2.0)
    scatter = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return math.sqrt(moments.squared_mean) + sigma * scatter


def stack(top: np.ndarray, bottom: np.ndarray) -> StackedChannel:
    """Stack two equal-size square channel matrices into a 2M x M matrix."""
    top = np.asarray(top)
    bottom = np.asarray(bottom)
    if top.shape != bottom.shape or top.ndim != 2 or top.shape[0] != top.shape[1]:
        raise ValueError(
            f"expected two equal square matrices, got {top.shape} and {bottom.shape}"
        )
    return StackedChannel(top=top, bottom=bottom, combined=np.vstack([top, bottom]))


def expected_gram(moments: MomentDecomposition, dimension: int) -> np.ndarray:
    """Expected Gram matrix E[S S^H] of a stacked channel with these moments.

    For i.i.d. entries with mean sqrt(squared_mean) and scatter variance
    `variance`, the 2M x 2M Gram expectation has M * (variance +
    squared_mean) on the diagonal and M * squared_mean everywhere else.
    """
    if dimension < 1:
        raise ValueError(f"dimension must be >= 1, got {dimension}")
    n = 2 * dimension
    gram = np.full((n, n), dimension * moments.squared_mean, dtype=complex)
    np.fill_diagonal(gram, dimension * (moments.variance + moments.squared_mean))
    return gram
