"""Constrained-POMDP model of the source's decision problem (no solver).

A hidden state is ``(x, xhat_prev, h, age)``: the source state, the
destination's previous estimate, the channel state and the age of state 1,
truncated at ``a_max``. Under action ``u`` the slot runs as follows:

1. a delivery succeeds with the channel's probability for ``u`` in state ``h``;
2. on success the estimate becomes ``x`` and the age becomes ``x``,
   otherwise the age grows by one (capped at ``a_max``);
3. ``x`` and ``h`` then move by their own Markov chains.

The source only sees whether a raw or processed update got through. That
is visible in the next state itself: a delivery leaves ``(xhat, age)`` at
``(0, 0)`` or ``(1, 1)``, which a failed slot cannot produce from a
reachable state when ``a_max >= 2``. So the observation is a deterministic
function of the next state and the action. All delivery randomness lives
in the transition probabilities.

Beliefs are 1-D ``numpy`` arrays indexed like :func:`enumerate_states`.
"""

from __future__ import annotations

import enum
import functools
from typing import NamedTuple, Sequence

import numpy as np

from .errors import ImpossibleObservation
from .model import CostVector, SystemConfig

DEFAULT_A_MAX = 64
N_ACTIONS = 4
BELIEF_EPS = 1e-15


class Observation(enum.IntEnum):
    NONE = 0
    RAW = 1
    PROCESSED = 2


class PomdpState(NamedTuple):
    x: int
    xhat_prev: int
    h: int
    age: int


def enumerate_states(a_max: int) -> list[PomdpState]:
    """All states in lexicographic ``(x, xhat_prev, h, age)`` order."""
    if a_max < 0:
        raise ValueError("a_max must be >= 0")
    return [
        PomdpState(x, xh, h, a)
        for x in (0, 1)
        for xh in (0, 1)
        for h in (0, 1)
        for a in range(a_max + 1)
    ]


def state_index(s: PomdpState, a_max: int) -> int:
    return ((s.x * 2 + s.xhat_prev) * 2 + s.h) * (a_max + 1) + s.age


def a_max_of(belief: np.ndarray) -> int:
    n = len(belief)
    if n % 8:
        raise ValueError(f"belief length {n} is not 8 * (a_max + 1)")
    return n // 8 - 1


def _is_fresh(xhat: int, age: int, a_max: int) -> bool:
    return age == min(xhat, a_max)


def transition_prob(
    s: PomdpState, u: int, s_next: PomdpState, config: SystemConfig, a_max: int = DEFAULT_A_MAX
) -> float:
    """``P(s_next | s, u)``."""
    d = config.channel.delivery_prob(u, s.h)
    prob = 0.0
    if s_next.xhat_prev == s.x and s_next.age == min(s.x, a_max):
        prob += d
    if s_next.xhat_prev == s.xhat_prev and s_next.age == min(s.age + 1, a_max):
        prob += 1.0 - d
    if prob == 0.0:
        return 0.0
    px = config.source.matrix()[s.x][s_next.x]
    ph = config.channel.matrix()[s.h][s_next.h]
    return prob * px * ph


def observation_prob(
    s_next: PomdpState, u: int, o: int, config: SystemConfig = None, a_max: int = DEFAULT_A_MAX
) -> float:
    """``Z_{s_next}(o, u)``: 1 for the observation the next state implies, else 0."""
    if u in (1, 3) and _is_fresh(s_next.xhat_prev, s_next.age, a_max):
        expected = Observation.RAW if u == 1 else Observation.PROCESSED
    else:
        expected = Observation.NONE
    return 1.0 if o == expected else 0.0


@functools.lru_cache(maxsize=32)
def transition_matrices(config: SystemConfig, a_max: int = DEFAULT_A_MAX) -> np.ndarray:
    """Array ``T`` of shape ``(4, n, n)`` with ``T[u, i, j] = P(j | i, u)``."""
    n = 8 * (a_max + 1)
    T = np.zeros((N_ACTIONS, n, n))
    PX = np.array(config.source.matrix())
    PH = np.array(config.channel.matrix())
    # (x', h') block of next-state indices for a given (xhat', age')
    move = np.einsum("ab,cd->acbd", PX, PH).reshape(4, 4)  # [(x,h), (x',h')]
    xs, hs = np.divmod(np.arange(4), 2)
    for i, s in enumerate(enumerate_states(a_max)):
        xh_row = move[s.x * 2 + s.h]
        for u in range(N_ACTIONS):
            d = config.channel.delivery_prob(u, s.h)
            for weight, xhat2, age2 in (
                (d, s.x, min(s.x, a_max)),
                (1.0 - d, s.xhat_prev, min(s.age + 1, a_max)),
            ):
                if weight == 0.0:
                    continue
                cols = ((xs * 2 + xhat2) * 2 + hs) * (a_max + 1) + age2
                T[u, i, cols] += weight * xh_row
    T.flags.writeable = False
    return T


@functools.lru_cache(maxsize=32)
def observation_matrix(a_max: int = DEFAULT_A_MAX) -> np.ndarray:
    """Array ``Z`` of shape ``(4, 3, n)`` with ``Z[u, o, j] = Z_j(o, u)``."""
    states = enumerate_states(a_max)
    fresh = np.array([_is_fresh(s.xhat_prev, s.age, a_max) for s in states])
    Z = np.zeros((N_ACTIONS, len(Observation), len(states)))
    Z[:, Observation.NONE] = 1.0
    for u, o in ((1, Observation.RAW), (3, Observation.PROCESSED)):
        Z[u, o] = fresh
        Z[u, Observation.NONE] = ~fresh
    Z.flags.writeable = False
    return Z


def predict(belief, u: int, config: SystemConfig) -> np.ndarray:
    """One-step predicted state law, ignoring the observation."""
    b = np.asarray(belief, dtype=float)
    return b @ transition_matrices(config, a_max_of(b))[u]


def belief_update(belief, u: int, o: int, config: SystemConfig) -> np.ndarray:
    """Bayes update of ``belief`` after taking ``u`` and observing ``o``.

    Raises:
        ImpossibleObservation: if ``o`` has (numerically) zero probability.
    """
    b = np.asarray(belief, dtype=float)
    a_max = a_max_of(b)
    unnorm = observation_matrix(a_max)[u, o] * (b @ transition_matrices(config, a_max)[u])
    total = unnorm.sum()
    if total < BELIEF_EPS:
        raise ImpossibleObservation(f"observation {Observation(o).name} cannot follow action {u}")
    return unnorm / total


def observation_likelihood(belief, u: int, config: SystemConfig) -> np.ndarray:
    """Predictive probability of each observation under ``belief`` and ``u``."""
    b = np.asarray(belief, dtype=float)
    a_max = a_max_of(b)
    return observation_matrix(a_max)[u] @ (b @ transition_matrices(config, a_max)[u])


def point_belief(s: PomdpState, a_max: int) -> np.ndarray:
    b = np.zeros(8 * (a_max + 1))
    b[state_index(s, a_max)] = 1.0
    return b


def step_cost(s: PomdpState, u: int, weights: Sequence[float], costs: CostVector) -> float:
    """Weighted per-slot cost: distortion, age of state 1, and action cost."""
    w_dist, w_age, w_cost = weights
    if min(weights) < 0:
        raise ValueError("weights must be >= 0")
    return w_dist * abs(s.x - s.xhat_prev) + w_age * s.age + w_cost * costs.of(u)
