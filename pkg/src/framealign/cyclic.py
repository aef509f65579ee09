"""Cyclic-group pipeline: exact N-copy label distributions with a brute-force
oracle, asymmetry and mutual information via stable deficits, asymptotic
predictions, alignment rates, tensor composition, and superadditivity search.
"""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy.special import xlogy

from .core import (
    LN2,
    CopyDistribution,
    DegenerateProfile,
    DeviationVector,
    GroupMismatch,
    GroupSpec,
    MalformedInput,
    ResourceLimit,
    SpectralProfile,
    StandardState,
    dft_profile,
    dft_vector,
    entropy_deficit,
)

# Full-enumeration branch of the oracle; above this the (position, residue)
# dynamic program takes over, and above ORACLE_GUARD we refuse outright.
ENUMERATION_LIMIT = 100_000
ORACLE_GUARD = 10_000_000

# Exact deficits become meaningless once r_max^(2N) underflows; below this
# exponent (base-2) the asymptotic prediction is reported instead, flagged
# as extrapolated in rate series.
EXTRAPOLATION_LOG2 = -980.0


class _InfiniteRate:
    """Sentinel for the perfectly-distinguishable case r_max = 0.

    Deliberately not a float: downstream arithmetic must fail loudly instead
    of silently absorbing an infinity.
    """

    __slots__ = ()

    def __repr__(self) -> str:  # pragma: no cover - cosmetic
        return "INFINITE_RATE"


INFINITE_RATE = _InfiniteRate()


class DeficitPrediction(NamedTuple):
    asym_bits: float
    mi_bits: float
    subdominant_ratio: float


class SearchResult(NamedTuple):
    a: StandardState
    b: StandardState
    gap_bits: float


@dataclass(frozen=True)
class ZmRatePoint:
    n_copies: int
    asymmetry_bits: float
    asymmetry_deficit_bits: float
    mi_bits: float
    mi_deficit_bits: float
    predicted_asym_deficit: float
    predicted_mi_deficit: float
    lin_asym_per_copy: float
    lin_mi_per_copy: float
    rate_target: float | _InfiniteRate
    extrapolated: bool = False


@dataclass(frozen=True)
class CompositionResult:
    composed: StandardState
    omega_moduli: np.ndarray
    rate_components: tuple
    gap_bits: float | None


def _require_cyclic(state: StandardState) -> None:
    if not state.group.is_cyclic:
        raise GroupMismatch("operation needs a cyclic state")


def copy_distribution_zm(
    state: StandardState, n_copies: int
) -> tuple[CopyDistribution, DeviationVector]:
    """Exact N-copy label distribution c_k and its deviations from uniform.

    The deviations Delta_k = M*c_k - 1 are assembled directly from the
    nontrivial transform components, so they keep full relative precision
    even when exponentially small; c is then (1 + Delta)/M.
    """
    _require_cyclic(state)
    if n_copies < 1:
        raise MalformedInput("n_copies must be >= 1")
    m = state.group.M
    z = dft_vector(state.probs)
    z[0] = 0.0
    powered = z**n_copies
    deltas = np.maximum(np.fft.fft(powered).real, -1.0)
    # A c_k that is mathematically zero comes out of the transform as
    # rounding noise; snap it onto the boundary, otherwise downstream
    # square-root amplitudes blow the noise up to sqrt(eps).
    deltas[1.0 + deltas <= 64.0 * m * np.finfo(float).eps] = -1.0
    dev = DeviationVector(m, deltas)
    c = np.maximum((1.0 + deltas) / m, 0.0)
    return CopyDistribution(state.group, n_copies, c), dev


def _oracle_enumerate(p: np.ndarray, m: int, n_copies: int) -> np.ndarray:
    """Sum the weight of every one of the M^N label strings by its residue."""
    c = np.zeros(m)
    for string in itertools.product(range(m), repeat=n_copies):
        c[sum(string) % m] += math.prod(p[s] for s in string)
    return c


def _oracle_dp(p: np.ndarray, m: int, n_copies: int) -> np.ndarray:
    """Dynamic program over (position, residue): repeated direct cyclic
    convolution, no Fourier machinery anywhere."""
    c = p.copy()
    shift = (np.arange(m)[:, None] - np.arange(m)[None, :]) % m
    for _ in range(n_copies - 1):
        c = np.array([float(np.dot(p, c[row])) for row in shift])
    return c


def multinomial_oracle_zm(state: StandardState, n_copies: int) -> CopyDistribution:
    """Brute-force N-copy label distribution, independent of the transform path.

    Full enumeration of all M^N label strings up to ENUMERATION_LIMIT, the
    (position, residue) dynamic program beyond that.
    """
    _require_cyclic(state)
    if n_copies < 1:
        raise MalformedInput("n_copies must be >= 1")
    m = state.group.M
    total = m**n_copies
    if total > ORACLE_GUARD:
        raise ResourceLimit(f"M^N = {total} exceeds the oracle guard {ORACLE_GUARD}")
    if total <= ENUMERATION_LIMIT:
        c = _oracle_enumerate(state.probs, m, n_copies)
    else:
        c = _oracle_dp(state.probs, m, n_copies)
    return CopyDistribution(state.group, n_copies, c)


def asymptotic_deficits(profile: SpectralProfile, n_copies: int) -> DeficitPrediction:
    """Leading-order predictions for the asymmetry and mutual-information
    deficits at N copies, plus the bound ratio (r_second / r_max)^N that
    controls the neglected terms."""
    if profile.r_max <= 0:
        raise DegenerateProfile("predictions are identically zero when r_max = 0")
    log2r = math.log2(profile.r_max)
    r2n = 2.0 ** (2.0 * n_copies * log2r)
    size = len(profile.S)
    asym = r2n * size / (2.0 * LN2)
    mi = r2n * (size / (4.0 * LN2) + profile.D * (1.0 - n_copies * log2r))
    rest = [profile.r[n] for n in range(1, profile.M) if n not in profile.S]
    second = max(rest, default=0.0)
    if second > 0:
        ratio = 2.0 ** (n_copies * (math.log2(second) - log2r))
    else:
        ratio = 0.0
    return DeficitPrediction(asym, mi, ratio)


def _extrapolates(profile: SpectralProfile, n_copies: int) -> bool:
    return (
        profile.r_max > 0
        and 2.0 * n_copies * math.log2(profile.r_max) < EXTRAPOLATION_LOG2
    )


def _asym_deficit_info(
    state: StandardState, profile: SpectralProfile, n_copies: int
) -> tuple[float, float, bool]:
    """(deficit_bits, linearized_per_copy, extrapolated) for the asymmetry."""
    if profile.r_max == 0.0:
        return 0.0, math.inf, False
    log2r = math.log2(profile.r_max)
    size = len(profile.S)
    if _extrapolates(profile, n_copies):
        deficit = asymptotic_deficits(profile, n_copies).asym_bits
        lin = -(2.0 * n_copies * log2r + math.log2(size / (2.0 * LN2))) / n_copies
        return deficit, lin, True
    _, dev = copy_distribution_zm(state, n_copies)
    deficit = entropy_deficit(dev)
    lin = -math.log2(deficit) / n_copies if deficit > 0 else math.inf
    return deficit, lin, False


def _mi_deficit_info(
    state: StandardState, profile: SpectralProfile, n_copies: int
) -> tuple[float, float, bool]:
    """(deficit_bits, linearized_per_copy, extrapolated) for the covariant
    mutual information."""
    m = state.group.M
    if profile.r_max == 0.0:
        return 0.0, math.inf, False
    log2r = math.log2(profile.r_max)
    if _extrapolates(profile, n_copies):
        deficit = asymptotic_deficits(profile, n_copies).mi_bits
        inner = len(profile.S) / (4.0 * LN2) + profile.D * (1.0 - n_copies * log2r)
        lin = -(2.0 * n_copies * log2r + math.log2(inner)) / n_copies
        return deficit, lin, True
    _, dev = copy_distribution_zm(state, n_copies)
    # Conditional outcome distribution over the offset j = (x - y) mod M:
    # q_j = |sum_k sqrt(c_k) e^{2 pi i k j / M}|^2 / M.  For j != 0 the flat
    # part of sqrt(c_k) cancels, so q_j is built from sqrt(1+Delta)-1 terms
    # and stays accurate when the deviations are tiny.
    with np.errstate(divide="ignore", invalid="ignore"):
        shifted = np.expm1(0.5 * np.log1p(dev.deltas))
    shifted[dev.deltas == -1.0] = -1.0
    w = dft_vector(shifted)
    q_off = np.abs(w[1:]) ** 2 / (m * m)
    t = math.fsum(q_off.tolist())
    diag = -(1.0 - t) * math.log1p(-t)
    off = -math.fsum(xlogy(q_off, q_off).tolist())
    deficit = (diag + off) / LN2
    lin = -math.log2(deficit) / n_copies if deficit > 0 else math.inf
    return deficit, lin, False


def zm_asymmetry(state: StandardState, n_copies: int) -> tuple[float, float]:
    """(H_bits, deficit_bits) of the N-copy label distribution."""
    _require_cyclic(state)
    if n_copies < 1:
        raise MalformedInput("n_copies must be >= 1")
    profile = dft_profile(state)
    deficit, _, _ = _asym_deficit_info(state, profile, n_copies)
    return math.log2(state.group.M) - deficit, deficit


def covariant_mutual_info_zm(
    state: StandardState, n_copies: int
) -> tuple[float, float]:
    """(I_bits, deficit_bits) for the Fourier-basis measurement on N copies."""
    _require_cyclic(state)
    if n_copies < 1:
        raise MalformedInput("n_copies must be >= 1")
    profile = dft_profile(state)
    deficit, _, _ = _mi_deficit_info(state, profile, n_copies)
    return math.log2(state.group.M) - deficit, deficit


def alignment_rate_zm(state: StandardState) -> float | _InfiniteRate:
    """-2 log2(r_max) bits per copy; INFINITE_RATE for exact optimal resources."""
    _require_cyclic(state)
    profile = dft_profile(state)
    if profile.r_max == 0.0:
        return INFINITE_RATE
    return -2.0 * math.log2(profile.r_max)


def zm_rate_series(state: StandardState, n_list: Sequence[int]) -> list[ZmRatePoint]:
    """Per-N deficits, predictions and linearized values for a cyclic state."""
    _require_cyclic(state)
    n_list = [int(n) for n in n_list]
    if any(n < 1 for n in n_list):
        raise MalformedInput("every N must be >= 1")
    m = state.group.M
    log2m = math.log2(m)
    profile = dft_profile(state)
    target = alignment_rate_zm(state)
    points = []
    for n in n_list:
        a_def, lin_a, extr_a = _asym_deficit_info(state, profile, n)
        m_def, lin_m, extr_m = _mi_deficit_info(state, profile, n)
        if profile.r_max > 0:
            pred = asymptotic_deficits(profile, n)
            pred_a, pred_m = pred.asym_bits, pred.mi_bits
        else:
            pred_a = pred_m = 0.0
        points.append(
            ZmRatePoint(
                n_copies=n,
                asymmetry_bits=log2m - a_def,
                asymmetry_deficit_bits=a_def,
                mi_bits=log2m - m_def,
                mi_deficit_bits=m_def,
                predicted_asym_deficit=pred_a,
                predicted_mi_deficit=pred_m,
                lin_asym_per_copy=lin_a,
                lin_mi_per_copy=lin_m,
                rate_target=target,
                extrapolated=extr_a or extr_m,
            )
        )
    return points


def _cyclic_convolve(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    m = x.size
    table = y[(np.arange(m)[:, None] - np.arange(m)[None, :]) % m]
    return table @ x


def tensor_compose(a: StandardState, b: StandardState) -> CompositionResult:
    """Effective single-copy state of a joint resource pair, its transform
    moduli, the three alignment rates, and the additivity gap."""
    _require_cyclic(a)
    if a.group != b.group:
        raise GroupMismatch("states must share the same cyclic group")
    q = _cyclic_convolve(a.probs, b.probs)
    q = q / math.fsum(q.tolist())
    composed = StandardState(a.group, q)
    prof_a = dft_profile(a)
    prof_b = dft_profile(b)
    prof_ab = dft_profile(composed)
    rate_a = alignment_rate_zm(a)
    rate_b = alignment_rate_zm(b)
    rate_ab = alignment_rate_zm(composed)
    gap: float | None
    if isinstance(rate_a, _InfiniteRate) or isinstance(rate_b, _InfiniteRate):
        gap = None
    elif isinstance(rate_ab, _InfiniteRate):
        gap = math.inf
    else:
        gap = 2.0 * (
            math.log2(prof_a.r_max)
            + math.log2(prof_b.r_max)
            - math.log2(prof_ab.r_max)
        )
        if -1e-10 <= gap < 0.0:
            gap = 0.0
    return CompositionResult(
        composed=composed,
        omega_moduli=prof_ab.r,
        rate_components=(rate_a, rate_b, rate_ab),
        gap_bits=gap,
    )


def superadditivity_gap(a: StandardState, b: StandardState) -> float:
    """Rate gained by measuring the two resource families jointly, in bits.

    Identically zero for M = 2 (a single nontrivial index) and M = 3 (the two
    indices are conjugate), so those orders short-circuit to exact zero.
    """
    _require_cyclic(a)
    if a.group != b.group:
        raise GroupMismatch("states must share the same cyclic group")
    if dft_profile(a).r_max == 0.0 or dft_profile(b).r_max == 0.0:
        raise DegenerateProfile("gap undefined when a factor has infinite rate")
    if a.group.M <= 3:
        return 0.0
    gap = tensor_compose(a, b).gap_bits
    assert gap is not None
    return gap


def _search_block(
    m: int, n_trials: int, seed: int
) -> tuple[float, np.ndarray, np.ndarray]:
    rng = np.random.default_rng(seed)
    pa = rng.exponential(1.0, size=(n_trials, m))
    pa /= pa.sum(axis=1, keepdims=True)
    pb = rng.exponential(1.0, size=(n_trials, m))
    pb /= pb.sum(axis=1, keepdims=True)
    if m <= 3:
        gaps = np.zeros(n_trials)
    else:
        ra = np.abs(np.fft.ifft(pa, axis=1))[:, 1:] * m
        rb = np.abs(np.fft.ifft(pb, axis=1))[:, 1:] * m
        with np.errstate(divide="ignore"):
            gaps = 2.0 * (
                np.log2(ra.max(axis=1))
                + np.log2(rb.max(axis=1))
                - np.log2((ra * rb).max(axis=1))
            )
        gaps[(gaps >= -1e-10) & (gaps < 0.0)] = 0.0
    best = float(gaps.max())
    idx = np.flatnonzero(gaps == best)
    key = min(idx, key=lambda i: (tuple(pa[i]), tuple(pb[i])))
    return best, pa[key], pb[key]


def search_superadditive(
    m: int, trials: int, seed: int, *, workers: int = 1
) -> SearchResult:
    """Randomized search for pairs with a positive additivity gap.

    Probabilities are drawn uniformly from the simplex (normalized
    exponentials).  Deterministic given (seed, workers): worker w consumes
    seed + w, and ties break toward the lexicographically smallest witness.
    """
    if m < 2:
        raise MalformedInput("m must be >= 2")
    if trials < 1:
        raise MalformedInput("trials must be >= 1")
    workers = max(1, int(workers))
    workers = min(workers, trials)
    budgets = [trials // workers + (1 if w < trials % workers else 0) for w in range(workers)]
    jobs = [(m, budgets[w], seed + w) for w in range(workers) if budgets[w] > 0]
    if len(jobs) == 1:
        blocks = [_search_block(*jobs[0])]
    else:
        with ThreadPoolExecutor(max_workers=len(jobs)) as pool:
            blocks = list(pool.map(lambda j: _search_block(*j), jobs))
    best_gap = max(gap for gap, _, _ in blocks)
    candidates = [
        (tuple(pa), tuple(pb)) for gap, pa, pb in blocks if gap == best_gap
    ]
    wa, wb = min(candidates)
    group = GroupSpec.cyclic(m)
    return SearchResult(
        StandardState(group, np.array(wa)),
        StandardState(group, np.array(wb)),
        best_gap,
    )
