"""Slot-level Monte Carlo simulation of the monitoring system under an SRP.

Each slot draws an action from the policy and tries a delivery against the
current channel and source states. It then tallies distortion, age and cost
and advances the source and channel chains. All randomness comes from
``numpy``'s Philox counter-based generator, drawn up front in blocks of
four uniforms per slot. So the compiled kernel and the pure-Python
fallback produce bit-identical results.

The compiled kernel is used when it has been built. Setting
``AOISRP_PURE_PYTHON=1`` forces the fallback.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from ..model import SrpPolicy, SystemConfig, channel_steady_state
from . import _pure

try:
    from . import _kernel
except ImportError:  # extension not compiled
    _kernel = None

RNG_ALGORITHM = "numpy.random.Philox(4x64)"
N_BATCHES = 100
CHUNK = 1 << 16

if _kernel is not None and os.environ.get("AOISRP_PURE_PYTHON", "") in ("", "0"):
    BACKEND = "cython"
else:
    BACKEND = "python"

_RUNNERS = {"python": _pure.run_chunk}
if _kernel is not None:
    _RUNNERS["cython"] = _kernel.run_chunk


def available_backends() -> list[str]:
    return sorted(_RUNNERS)


@dataclass(frozen=True)
class SimResult:
    """Post-warmup time averages of one run, with batch-means standard errors."""

    avg_distortion: float
    avg_age: float
    avg_cost: float
    delivery_rate: float
    xhat0_rate: float
    stderr_distortion: float
    stderr_age: float
    stderr_cost: float
    stderr_delivery: float
    slots: int
    warmup: int
    seed: int
    action_counts: tuple[int, int, int, int]
    channel_memory: str
    rng: str = RNG_ALGORITHM
    backend: str = BACKEND

    def to_dict(self) -> dict:
        d = asdict(self)
        d["action_counts"] = list(self.action_counts)
        return d


def _params(config: SystemConfig, policy: SrpPolicy, channel_memory: str) -> np.ndarray:
    ch = config.channel
    if channel_memory == "markov":
        ph0, ph1 = ch.p01, ch.p10
    elif channel_memory == "iid":
        # identical rows: each slot's channel state is a fresh stationary draw
        h0, h1 = channel_steady_state(ch)
        ph0, ph1 = h1, h0
    else:
        raise ValueError(f"channel_memory must be 'markov' or 'iid', got {channel_memory!r}")
    p0, p1, p2, _ = policy.as_tuple()
    c = config.costs
    return np.array(
        [
            p0,
            p0 + p1,
            p0 + p1 + p2,
            ch.p1r,
            ch.p0p,
            config.source.p01,
            config.source.p10,
            ph0,
            ph1,
            c.c1,
            c.c2,
            c.c3,
        ]
    )


def _batch_stderr(sums: np.ndarray, sizes: np.ndarray) -> np.ndarray:
    if len(sizes) < 2:
        return np.full(sums.shape[1], math.nan)
    means = sums / sizes[:, None]
    return means.std(axis=0, ddof=1) / math.sqrt(len(sizes))


def simulate(
    config: SystemConfig,
    policy: SrpPolicy,
    slots: int,
    warmup: int = 10_000,
    seed: int = 0,
    *,
    channel_memory: str = "markov",
    backend: Optional[str] = None,
) -> SimResult:
    """Simulate ``warmup + slots`` slots and average over the last ``slots``.

    The run starts from ``X = X_hat = 0`` and age 0, with the channel drawn
    from its stationary law. ``channel_memory="iid"`` redraws the channel
    independently every slot instead of following its Markov chain.
    """
    if slots < 1:
        raise ValueError("slots must be >= 1")
    if warmup < 0:
        raise ValueError("warmup must be >= 0")
    run_chunk = _RUNNERS[backend or BACKEND]
    params = _params(config, policy, channel_memory)
    rng = np.random.Generator(np.random.Philox(seed))
    _, h1 = channel_steady_state(config.channel)
    state = np.array([0, 0, 1 if rng.random() < h1 else 0, 0], dtype=np.int64)
    nb = min(N_BATCHES, slots)
    sums = np.zeros((nb, 5))
    counts = np.zeros(4, dtype=np.int64)
    total = warmup + slots
    done = 0
    while done < total:
        m = min(CHUNK, total - done)
        u = rng.random((m, 4))
        run_chunk(u, state, params, done - warmup, slots, nb, sums, counts)
        done += m

    b = np.arange(nb + 1)
    sizes = np.diff(-(-b * slots // nb)).astype(float)
    totals = sums.sum(axis=0)
    err = _batch_stderr(sums, sizes)
    c = config.costs
    avg_cost = (c.c1 * counts[1] + c.c2 * counts[2] + c.c3 * counts[3]) / slots
    return SimResult(
        avg_distortion=float(totals[0] / slots),
        avg_age=float(totals[1] / slots),
        avg_cost=float(avg_cost),
        delivery_rate=float(totals[3] / slots),
        xhat0_rate=float(totals[4] / slots),
        stderr_distortion=float(err[0]),
        stderr_age=float(err[1]),
        stderr_cost=float(err[2]),
        stderr_delivery=float(err[3]),
        slots=slots,
        warmup=warmup,
        seed=seed,
        action_counts=tuple(int(k) for k in counts),
        channel_memory=channel_memory,
        backend=backend or BACKEND,
    )


def simulate_batch(
    config: SystemConfig,
    policy: SrpPolicy,
    slots: int,
    n_runs: int,
    base_seed: int = 0,
    warmup: int = 10_000,
    *,
    workers: int = 1,
    **kwargs,
) -> list[SimResult]:
    """``n_runs`` independent runs with seeds ``base_seed + i``, in seed order."""
    if n_runs < 1:
        raise ValueError("n_runs must be >= 1")

    def one(i):
        return simulate(config, policy, slots, warmup, base_seed + i, **kwargs)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(one, range(n_runs)))
    return [one(i) for i in range(n_runs)]


__all__ = [
    "BACKEND",
    "RNG_ALGORITHM",
    "SimResult",
    "available_backends",
    "simulate",
    "simulate_batch",
]
