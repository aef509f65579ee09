"""Phase-reference pipeline: exact N-copy number distributions, asymmetry,
covariant-measurement mutual information, and linearized rate estimates."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import xlogy

from .core import (
    LN2,
    CopyDistribution,
    GappedSpectrum,
    GridTooCoarse,
    GroupMismatch,
    MalformedInput,
    ResourceLimit,
    StandardState,
    ZeroVariance,
    shannon_entropy,
)

# Hard ceiling on the number of copy-distribution coefficients; keeps desk
# runs in memory and under a second while still allowing N ~ 1e5 for qubits.
DEFAULT_COEFF_CAP = 1 << 20

# Smallest quadrature grid ever used; large N bumps it further (see
# QuadratureSpec.for_length).
MIN_GRID_POINTS = 1 << 16


def _next_pow2(n: int) -> int:
    return 1 << max(0, (int(n) - 1)).bit_length()


@dataclass(frozen=True)
class QuadratureSpec:
    """Uniform periodic trapezoid rule on [0, 2*pi) with a power-of-two grid."""

    grid_points: int

    def __post_init__(self):
        k = self.grid_points
        if k < 8 or (k & (k - 1)) != 0:
            raise MalformedInput("grid_points must be a power of two >= 8")

    @classmethod
    def for_length(cls, n_coeffs: int) -> "QuadratureSpec":
        return cls(max(MIN_GRID_POINTS, _next_pow2(8 * n_coeffs)))


@dataclass(frozen=True)
class U1RatePoint:
    n_copies: int
    asymmetry_bits: float
    mutual_info_bits: float
    lin_asymmetry_per_copy: float
    lin_mi_per_copy: float
    variance_target: float


def _require_u1(state: StandardState) -> None:
    if state.group.is_cyclic:
        raise GroupMismatch("operation needs a u1 state")


def distribution_variance(c) -> float:
    """Variance of an integer-indexed distribution c_0..c_{L-1}."""
    arr = np.asarray(c, dtype=float)
    n = np.arange(arr.size, dtype=float)
    mean = math.fsum((n * arr).tolist())
    return math.fsum((arr * (n - mean) ** 2).tolist())


def number_variance(state: StandardState) -> float:
    """Variance of the number distribution of a single copy."""
    _require_u1(state)
    return distribution_variance(state.probs)


def _conv_power(p: np.ndarray, n: int) -> np.ndarray:
    """n-fold linear self-convolution; binary squaring above 64 copies."""
    if n <= 64:
        out = p.copy()
        for _ in range(n - 1):
            out = np.convolve(out, p)
        return out
    result = np.ones(1)
    base = p.copy()
    k = n
    while True:
        if k & 1:
            result = np.convolve(result, base)
        k >>= 1
        if k == 0:
            return result
        base = np.convolve(base, base)


def copy_distribution_u1(
    state: StandardState, n_copies: int, *, cap: int = DEFAULT_COEFF_CAP
) -> CopyDistribution:
    """Exact distribution of the total number label across n_copies copies."""
    _require_u1(state)
    if n_copies < 1:
        raise MalformedInput("n_copies must be >= 1")
    d = state.group.d
    out_len = n_copies * (d - 1) + 1
    if out_len > cap:
        raise ResourceLimit(
            f"{out_len} coefficients exceed the cap of {cap}; raise cap to override"
        )
    if d == 1:
        c = np.ones(1)
    else:
        c = _conv_power(state.probs, n_copies)
    return CopyDistribution(state.group, n_copies, c)


def gaussian_copy_distribution(
    state: StandardState, n_copies: int, *, cap: int = DEFAULT_COEFF_CAP
) -> CopyDistribution:
    """Discretized-normal approximation to the N-copy number distribution.

    Only valid for gapless spectra (every p_n > 0); refuses anything else
    instead of silently extrapolating.
    """
    _require_u1(state)
    if n_copies < 1:
        raise MalformedInput("n_copies must be >= 1")
    if np.any(state.probs == 0):
        raise GappedSpectrum("normal approximation needs p_n > 0 for every n")
    var1 = number_variance(state)
    if var1 == 0:
        raise ZeroVariance("normal approximation needs positive number variance")
    d = state.group.d
    out_len = n_copies * (d - 1) + 1
    if out_len > cap:
        raise ResourceLimit(f"{out_len} coefficients exceed the cap of {cap}")
    n = np.arange(out_len, dtype=float)
    mean1 = math.fsum((np.arange(d) * state.probs).tolist())
    g = np.exp(-((n - n_copies * mean1) ** 2) / (2.0 * n_copies * var1))
    g /= math.fsum(g.tolist())
    return CopyDistribution(state.group, n_copies, g)


def u1_asymmetry(
    state: StandardState, n_copies: int, *, cap: int = DEFAULT_COEFF_CAP
) -> float:
    """Shannon entropy (bits) of the exact N-copy number distribution."""
    return shannon_entropy(copy_distribution_u1(state, n_copies, cap=cap).c)


def offset_density_grid(
    state: StandardState,
    n_copies: int,
    quad: QuadratureSpec | None = None,
    *,
    cap: int = DEFAULT_COEFF_CAP,
) -> tuple[np.ndarray, np.ndarray]:
    """Grid phi_j and density f(phi_j) of the estimate-minus-true phase offset.

    f(phi) = |sum_m sqrt(c_m) e^{i m phi}|^2 / (2*pi) for the covariant
    phase measurement; it integrates to 1 exactly under the periodic
    trapezoid rule whenever the grid resolves the coefficients.
    """
    c = copy_distribution_u1(state, n_copies, cap=cap).c
    if quad is None:
        quad = QuadratureSpec.for_length(c.size)
    if quad.grid_points < 8 * c.size:
        raise GridTooCoarse(
            f"grid of {quad.grid_points} points is below 8 x {c.size} coefficients"
        )
    k = quad.grid_points
    amp = np.zeros(k)
    amp[: c.size] = np.sqrt(c)
    density = np.abs(np.fft.fft(amp)) ** 2 / (2.0 * math.pi)
    phi = np.arange(k) * (2.0 * math.pi / k)
    return phi, density


def covariant_mutual_info_u1(
    state: StandardState,
    n_copies: int,
    quad: QuadratureSpec | None = None,
    *,
    cap: int = DEFAULT_COEFF_CAP,
) -> float:
    """Mutual information (bits) between the hidden phase and the covariant
    phase estimate, by periodic-trapezoid quadrature of f log2(2*pi*f)."""
    _, density = offset_density_grid(state, n_copies, quad, cap=cap)
    g = 2.0 * math.pi * density
    val = math.fsum(xlogy(g, g).tolist()) / (g.size * LN2)
    return max(val, 0.0)


def regularized_asymmetry_u1(state: StandardState) -> float:
    """Linearized asymmetry per copy in the many-copy limit: 4*pi*V."""
    return 4.0 * math.pi * number_variance(state)


def _lin_per_copy(bits: float, n_copies: int) -> float:
    # 2^(2*bits)/N evaluated in the exponent to dodge overflow.
    return 2.0 ** (2.0 * bits - math.log2(n_copies))


def _rate_point(
    state: StandardState,
    n_copies: int,
    quad: QuadratureSpec | None,
    cap: int,
    target: float,
) -> U1RatePoint:
    h = u1_asymmetry(state, n_copies, cap=cap)
    i = covariant_mutual_info_u1(state, n_copies, quad, cap=cap)
    return U1RatePoint(
        n_copies=n_copies,
        asymmetry_bits=h,
        mutual_info_bits=i,
        lin_asymmetry_per_copy=_lin_per_copy(h, n_copies),
        lin_mi_per_copy=_lin_per_copy(i, n_copies),
        variance_target=target,
    )


def u1_rate_series(
    state: StandardState,
    n_list: Sequence[int],
    quad: QuadratureSpec | Sequence[QuadratureSpec] | None = None,
    *,
    cap: int = DEFAULT_COEFF_CAP,
    workers: int = 1,
) -> list[U1RatePoint]:
    """Per-N asymmetry, mutual information and linearized values.

    quad may be None (auto per N), a single spec reused everywhere, or one
    spec per entry of n_list.
    """
    _require_u1(state)
    n_list = [int(n) for n in n_list]
    if any(n < 1 for n in n_list):
        raise MalformedInput("every N must be >= 1")
    if quad is None or isinstance(quad, QuadratureSpec):
        quads: list[QuadratureSpec | None] = [quad] * len(n_list)
    else:
        quads = list(quad)
        if len(quads) != len(n_list):
            raise MalformedInput("need one quadrature spec per N")
    target = regularized_asymmetry_u1(state)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(
                pool.map(
                    lambda args: _rate_point(state, args[0], args[1], cap, target),
                    zip(n_list, quads),
                )
            )
    return [_rate_point(state, n, q, cap, target) for n, q in zip(n_list, quads)]
