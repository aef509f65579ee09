"""Probability-vector arithmetic shared by the alignment pipelines.

Everything here is a pure function of its inputs; states and profiles are
frozen after construction. All entropic quantities are in bits, with the
0*log(0) = 0 convention.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import xlogy

LN2 = math.log(2.0)

# Relative tolerance for membership in the maximizer set S.  Chosen so that
# floating-point DFTs of inputs with exact ties (conjugate pairs, symmetric
# vectors) land every tied index in S.
S_TIE_REL = 1e-9

# Moduli at or below this are treated as exact zeros, so that e.g. the
# uniform distribution reports r_max = 0 and an empty maximizer set instead
# of picking up FFT rounding noise.
MODULUS_ZERO_TOL = 1e-12

INPUT_SUM_TOL = 1e-6


class FrameAlignError(Exception):
    """Base class for all errors raised by this package."""


class NegativeProbability(FrameAlignError):
    pass


class WrongLength(FrameAlignError):
    pass


class SumOutOfTolerance(FrameAlignError):
    pass


class SupportMismatch(FrameAlignError):
    pass


class DeltaOutOfRange(FrameAlignError):
    pass


class GappedSpectrum(FrameAlignError):
    pass


class ZeroVariance(FrameAlignError):
    pass


class ResourceLimit(FrameAlignError):
    pass


class GridTooCoarse(FrameAlignError):
    pass


class GroupMismatch(FrameAlignError):
    pass


class DegenerateProfile(FrameAlignError):
    pass


class DimensionMismatch(FrameAlignError):
    pass


class MalformedInput(FrameAlignError):
    pass


@dataclass(frozen=True)
class GroupSpec:
    """Symmetry group of the protocol: U(1) with a cutoff d, or the cyclic group Z_M."""

    kind: str
    d: int | None = None
    M: int | None = None

    def __post_init__(self):
        if self.kind == "u1":
            if self.M is not None or self.d is None or int(self.d) < 1:
                raise MalformedInput("u1 group needs a cutoff d >= 1 and no M")
            object.__setattr__(self, "d", int(self.d))
        elif self.kind == "cyclic":
            if self.d is not None or self.M is None or int(self.M) < 2:
                raise MalformedInput("cyclic group needs an order M >= 2 and no d")
            object.__setattr__(self, "M", int(self.M))
        else:
            raise MalformedInput(f"unknown group kind {self.kind!r}")

    @classmethod
    def u1(cls, d: int) -> "GroupSpec":
        return cls("u1", d=d)

    @classmethod
    def cyclic(cls, M: int) -> "GroupSpec":
        return cls("cyclic", M=M)

    @property
    def is_cyclic(self) -> bool:
        return self.kind == "cyclic"

    @property
    def dim(self) -> int:
        return self.M if self.kind == "cyclic" else self.d  # type: ignore[return-value]


@dataclass(frozen=True)
class StandardState:
    """A resource state in standard form: a group tag plus amplitudes-squared p_k.

    Constructed through :func:`validate_state` for raw input; direct
    construction expects an already-normalized vector.
    """

    group: GroupSpec
    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.ndim != 1 or p.size != self.group.dim:
            raise WrongLength(
                f"state needs {self.group.dim} entries, got shape {p.shape}"
            )
        if np.any(p < 0):
            raise NegativeProbability("probabilities must be non-negative")
        if abs(math.fsum(p.tolist()) - 1.0) > 1e-12:
            raise SumOutOfTolerance("probabilities must sum to 1 within 1e-12")
        p = p.copy()
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)


@dataclass(frozen=True)
class CopyDistribution:
    """Distribution of the total irrep label carried by N copies of a state."""

    group: GroupSpec
    copies: int
    c: np.ndarray

    def __post_init__(self):
        if self.copies < 1:
            raise MalformedInput("copies must be >= 1")
        c = np.asarray(self.c, dtype=float)
        expected = (
            self.group.M
            if self.group.is_cyclic
            else self.copies * (self.group.d - 1) + 1
        )
        if c.ndim != 1 or c.size != expected:
            raise WrongLength(f"copy distribution needs {expected} entries")
        if np.any(c < 0):
            raise NegativeProbability("copy distribution must be non-negative")
        if abs(math.fsum(c.tolist()) - 1.0) > 1e-10:
            raise SumOutOfTolerance("copy distribution must sum to 1 within 1e-10")
        c = c.copy()
        c.setflags(write=False)
        object.__setattr__(self, "c", c)


@dataclass(frozen=True)
class DeviationVector:
    """Deviations Delta_k of a length-M distribution from uniform: c_k = (1+Delta_k)/M."""

    M: int
    deltas: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.deltas, dtype=float)
        if d.ndim != 1 or d.size != self.M:
            raise WrongLength(f"deviation vector needs {self.M} entries")
        if abs(math.fsum(d.tolist())) > 1e-10:
            raise SumOutOfTolerance("deviations must sum to 0 within 1e-10")
        d = d.copy()
        d.setflags(write=False)
        object.__setattr__(self, "deltas", d)


@dataclass(frozen=True)
class SpectralProfile:
    """Single-copy DFT data of a cyclic state.

    z[n] is the transform of the probability vector with the e^{+2*pi*i*n*m/M}
    kernel, r its moduli, theta its phases in [0, 2*pi).  S is the set of
    indices 1..M-1 whose modulus ties with r_max (relative tolerance
    ``S_TIE_REL``), and D = sum_{s in S} (M - s) / M.
    """

    M: int
    z: np.ndarray
    r: np.ndarray
    theta: np.ndarray
    r_max: float
    S: tuple[int, ...]
    D: float


def _as_prob_array(p, *, name: str = "vector") -> np.ndarray:
    arr = np.asarray(p, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise WrongLength(f"{name} must be a non-empty 1-d vector")
    if np.any(arr < 0):
        raise NegativeProbability(f"{name} has negative entries")
    return arr


def validate_state(raw, group: GroupSpec) -> StandardState:
    """Check a raw probability vector and return the normalized state.

    Input sums within ``INPUT_SUM_TOL`` of 1 are rescaled exactly; anything
    further off is rejected rather than silently normalized.
    """
    p = _as_prob_array(raw, name="probs")
    if p.size != group.dim:
        raise WrongLength(f"group expects {group.dim} entries, got {p.size}")
    total = math.fsum(p.tolist())
    if abs(total - 1.0) > INPUT_SUM_TOL:
        raise SumOutOfTolerance(f"probabilities sum to {total!r}, not 1")
    return StandardState(group, p / total)


def shannon_entropy(p) -> float:
    """Shannon entropy of a probability vector, in bits."""
    arr = _as_prob_array(p)
    return -math.fsum(xlogy(arr, arr).tolist()) / LN2


def _uniform_kl_terms(deltas: np.ndarray) -> np.ndarray:
    """(1+Delta)*ln(1+Delta) - Delta, elementwise, accurate for tiny Delta.

    Dropping the linear term is exact because the deltas sum to zero; it is
    what keeps the result meaningful when Delta ~ 1e-150 and the direct
    difference would cancel to noise.
    """
    d = np.asarray(deltas, dtype=float)
    out = np.empty_like(d)
    small = np.abs(d) < 1e-2
    ds = d[small]
    # Alternating series sum_{n>=2} (-1)^n d^n / (n(n-1)); truncation error
    # below 1 ulp for |d| < 1e-2.
    out[small] = ds * ds * (
        1.0 / 2
        + ds
        * (
            -1.0 / 6
            + ds
            * (
                1.0 / 12
                + ds * (-1.0 / 20 + ds * (1.0 / 30 + ds * (-1.0 / 42 + ds / 56)))
            )
        )
    )
    big = ~small
    db = d[big]
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = (1.0 + db) * np.log1p(db) - db
    vals[db == -1.0] = 1.0
    out[big] = vals
    return out


def entropy_deficit(dev: DeviationVector) -> float:
    """log2(M) - H of the distribution {(1+Delta_k)/M}, in bits.

    Computed directly from the deviations, never as a difference of two
    near-equal entropies: the deficit decays like the square of the largest
    deviation and would otherwise drown in rounding long before it
    underflows.
    """
    if np.any(dev.deltas < -1.0):
        raise DeltaOutOfRange("deviations below -1 do not describe probabilities")
    terms = _uniform_kl_terms(dev.deltas)
    return math.fsum(terms.tolist()) / (dev.M * LN2)


def relative_entropy_diag(c, sigma) -> float:
    """-sum_k c_k log2(sigma_k): relative entropy distance for diagonal models."""
    carr = _as_prob_array(c, name="c")
    sarr = _as_prob_array(sigma, name="sigma")
    if carr.size != sarr.size:
        raise WrongLength("c and sigma must have the same length")
    mask = carr > 0
    if np.any(sarr[mask] == 0):
        raise SupportMismatch("sigma vanishes where c has support")
    return -math.fsum((carr[mask] * np.log(sarr[mask])).tolist()) / LN2


def dft_vector(p: np.ndarray) -> np.ndarray:
    """DFT with the e^{+2*pi*i*n*m / M} kernel: z_n = sum_m p_m exp(2*pi*i*n*m/M)."""
    return np.fft.ifft(np.asarray(p, dtype=float)) * len(p)


def dft_profile(state: StandardState) -> SpectralProfile:
    """Spectral profile (moduli, phases, maximizer set) of a cyclic state."""
    if not state.group.is_cyclic:
        raise GroupMismatch("spectral profiles are defined for cyclic states")
    M = state.group.M
    z = dft_vector(state.probs)
    z[0] = 1.0
    r = np.minimum(np.abs(z), 1.0)
    r[0] = 1.0
    theta = np.mod(np.angle(z), 2.0 * math.pi)
    r_max = float(np.max(r[1:]))
    if r_max <= MODULUS_ZERO_TOL:
        r_max = 0.0
        maximizers: tuple[int, ...] = ()
        weight = 0.0
    else:
        cut = r_max * (1.0 - S_TIE_REL)
        maximizers = tuple(int(n) for n in range(1, M) if r[n] >= cut)
        weight = sum(M - s for s in maximizers) / M
    z.setflags(write=False)
    r.setflags(write=False)
    theta.setflags(write=False)
    return SpectralProfile(M, z, r, theta, r_max, maximizers, weight)


# --- state file format -------------------------------------------------------

def state_to_json(state: StandardState) -> dict:
    if state.group.is_cyclic:
        group: dict = {"kind": "cyclic", "M": state.group.M}
    else:
        group = {"kind": "u1", "d": state.group.d}
    return {"group": group, "probs": [float(x) for x in state.probs]}


def state_from_json(obj) -> StandardState:
    try:
        gd = obj["group"]
        kind = gd["kind"]
        probs = obj["probs"]
    except (KeyError, TypeError) as exc:
        raise MalformedInput(f"state object missing field: {exc}") from exc
    if kind == "cyclic":
        try:
            group = GroupSpec.cyclic(int(gd["M"]))
        except (KeyError, ValueError) as exc:
            raise MalformedInput("cyclic group needs an integer M") from exc
    elif kind == "u1":
        try:
            group = GroupSpec.u1(int(gd["d"]))
        except (KeyError, ValueError) as exc:
            raise MalformedInput("u1 group needs an integer d") from exc
    else:
        raise MalformedInput(f"unknown group kind {kind!r}")
    if not isinstance(probs, Sequence) or isinstance(probs, (str, bytes)):
        raise MalformedInput("probs must be a list of numbers")
    return validate_state(probs, group)


def load_state(path) -> StandardState:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise MalformedInput(f"cannot read state file {path}: {exc}") from exc
    return state_from_json(obj)


def save_state(state: StandardState, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(state_to_json(state), fh, indent=2, sort_keys=True)
        fh.write("\n")
