"""Finite discrete-time Markov chains: steady state and strong lumpability.

Matrices are plain ``numpy`` arrays, validated on entry. A partition is a
sequence of index blocks that must be disjoint, non-empty and cover every
state.
"""

from __future__ import annotations

import warnings
from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import NotLumpable, SingularChain

ENTRY_TOL = 1e-12
ROW_SUM_TOL = 1e-9
LUMP_TOL = 1e-9

Partition = Sequence[Sequence[int]]


def as_stochastic(P) -> np.ndarray:
    """Return ``P`` as a float array after checking it is row-stochastic."""
    P = np.asarray(P, dtype=float)
    if P.ndim != 2 or P.shape[0] != P.shape[1] or P.shape[0] == 0:
        raise ValueError(f"expected a non-empty square matrix, got shape {P.shape}")
    if not np.all(np.isfinite(P)):
        raise ValueError("matrix has non-finite entries")
    if P.min() < -ENTRY_TOL or P.max() > 1 + ENTRY_TOL:
        raise ValueError("matrix entries must lie in [0, 1]")
    sums = P.sum(axis=1)
    bad = np.flatnonzero(np.abs(sums - 1.0) > ROW_SUM_TOL)
    if bad.size:
        raise ValueError(f"row {bad[0]} sums to {sums[bad[0]]!r}, not 1")
    return P


def check_partition(part: Partition, n: int) -> list[np.ndarray]:
    blocks = [np.asarray(list(b), dtype=np.intp) for b in part]
    if any(b.size == 0 for b in blocks):
        raise ValueError("partition has an empty block")
    flat = np.concatenate(blocks) if blocks else np.empty(0, dtype=np.intp)
    if flat.size != n or not np.array_equal(np.sort(flat), np.arange(n)):
        raise ValueError(f"partition blocks must be disjoint and cover 0..{n - 1}")
    return blocks


def steady_state(P) -> np.ndarray:
    """Stationary distribution ``pi`` with ``pi @ P == pi`` and ``sum(pi) == 1``.

    Solves ``(P.T - I) pi = 0`` with the last equation swapped for the
    normalisation. Periodic chains are fine; chains with more than one
    recurrent class raise :class:`SingularChain`.
    """
    P = as_stochastic(P)
    n = P.shape[0]
    A = P.T - np.eye(n)
    A[-1, :] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("error", scipy.linalg.LinAlgWarning)
            pi = scipy.linalg.solve(A, b)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgWarning) as exc:
        raise SingularChain("no unique stationary distribution") from exc
    if pi.min() < -1e-9 or np.max(np.abs(pi @ P - pi)) > 1e-9:
        raise SingularChain("linear solve did not yield a stationary distribution")
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


def is_lumpable(P, part: Partition, tol: float = LUMP_TOL) -> bool:
    """Strong (Kemeny-Snell) lumpability of ``P`` under ``part``.

    True iff every state in a block sends the same total probability into
    each block, up to ``tol``.
    """
    P = as_stochastic(P)
    blocks = check_partition(part, P.shape[0])
    # block_sums[s, j] = P(s -> block j)
    block_sums = np.stack([P[:, b].sum(axis=1) for b in blocks], axis=1)
    for b in blocks:
        rows = block_sums[b]
        if np.max(np.abs(rows - rows[0])) > tol:
            return False
    return True


def lump(P, part: Partition, tol: float = LUMP_TOL) -> np.ndarray:
    """Aggregate ``P`` over the blocks of ``part``.

    Entry ``(i, j)`` is the probability mass that the first state of block
    ``i`` sends into block ``j``.
    """
    P = as_stochastic(P)
    blocks = check_partition(part, P.shape[0])
    if not is_lumpable(P, part, tol):
        raise NotLumpable("matrix is not lumpable under the given partition")
    reps = [b[0] for b in blocks]
    return np.stack([P[reps][:, b].sum(axis=1) for b in blocks], axis=1)
