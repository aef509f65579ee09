"""Monte Carlo simulation of the alignment protocol: draw the hidden shift,
sample Bob's outcome, and estimate the mutual information empirically."""
from __future__ import annotations

import math
from dataclasses import dataclass
from io import StringIO

import numpy as np

from .core import LN2, MalformedInput, StandardState, shannon_entropy
from .povm import PovmSpec, conditional_table, ensemble_states


@dataclass(frozen=True)
class SampleRecord:
    """Outcome counts n(x, y) of a simulated run, with its reproducibility keys."""

    M: int
    shots: int
    counts: np.ndarray
    seed: int
    workers: int = 1

    def __post_init__(self):
        counts = np.asarray(self.counts)
        if counts.ndim != 2 or counts.shape[0] != self.M:
            raise MalformedInput("counts must be an M x K matrix")
        if int(counts.sum()) != self.shots:
            raise MalformedInput("counts must sum to the number of shots")
        counts = counts.copy()
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)


def _sample_block(
    cond: np.ndarray, shots: int, seed: int
) -> np.ndarray:
    m, k = cond.shape
    rng = np.random.default_rng(seed)
    x_counts = rng.multinomial(shots, np.full(m, 1.0 / m))
    block = np.zeros((m, k), dtype=np.int64)
    for x in range(m):
        if x_counts[x]:
            block[x] = rng.multinomial(x_counts[x], cond[x])
    return block


def simulate_protocol(
    state: StandardState,
    n_copies: int,
    povm: PovmSpec,
    shots: int,
    seed: int,
    *,
    workers: int = 1,
) -> SampleRecord:
    """Sample the hidden shift uniformly and the outcome from p(y|x).

    Bit-identical counts for identical (seed, shots, inputs, workers): shots
    are partitioned across workers and worker w consumes seed + w.
    """
    if shots < 1:
        raise MalformedInput("shots must be >= 1")
    ens = ensemble_states(state, n_copies)
    cond = conditional_table(ens, povm)
    cond = cond / cond.sum(axis=1, keepdims=True)
    workers = min(max(1, int(workers)), shots)
    budgets = [shots // workers + (1 if w < shots % workers else 0) for w in range(workers)]
    counts = np.zeros_like(cond, dtype=np.int64)
    for w, budget in enumerate(budgets):
        if budget:
            counts += _sample_block(cond, budget, seed + w)
    return SampleRecord(ens.M, shots, counts, seed, workers)


def mutual_info_of_counts(counts) -> float:
    """Plug-in mutual information (bits) of a joint count/weight matrix."""
    arr = np.asarray(counts, dtype=float)
    if arr.ndim != 2:
        raise MalformedInput("need a 2-d count matrix")
    total = math.fsum(arr.ravel().tolist())
    if total <= 0:
        raise MalformedInput("counts must have positive total")
    joint = arr / total
    hx = shannon_entropy(joint.sum(axis=1))
    hy = shannon_entropy(joint.sum(axis=0))
    hxy = shannon_entropy(joint.ravel())
    return hx + hy - hxy


def plugin_mi(rec: SampleRecord) -> tuple[float, float]:
    """(plug-in, bias-corrected) mutual information estimates in bits.

    The correction subtracts (nonzero cells - nonzero rows - nonzero cols
    + 1) / (2 * shots * ln 2), the usual first-order bias of the plug-in
    estimator.
    """
    estimate = mutual_info_of_counts(rec.counts)
    cells = int(np.count_nonzero(rec.counts))
    rows = int(np.count_nonzero(rec.counts.sum(axis=1)))
    cols = int(np.count_nonzero(rec.counts.sum(axis=0)))
    bias = (cells - rows - cols + 1) / (2.0 * rec.shots * LN2)
    return estimate, estimate - bias


def counts_to_csv(rec: SampleRecord) -> str:
    """Counts as CSV with header x,y,count — one row per (x, y) cell."""
    buf = StringIO()
    buf.write("x,y,count\n")
    m, k = rec.counts.shape
    for x in range(m):
        for y in range(k):
            buf.write(f"{x},{y},{int(rec.counts[x, y])}\n")
    return buf.getvalue()
