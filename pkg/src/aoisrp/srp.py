"""Closed-form analysis of a stationary randomized policy.

Under an SRP the destination's estimate is refreshed in each slot with a
fixed probability ``p_s``. Distortion then follows from the 4-state chain on
``(X, X_hat)``. The age of state 1 follows from a 2-D chain on
``(age, distortion)``, which is strongly lumpable to a 1-D chain on age
alone with a geometric stationary law.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DegenerateChain, ZeroSuccessProbability
from .model import (
    SourceChain,
    SrpPolicy,
    SystemConfig,
    expected_cost,
    success_probability,
)

DEFAULT_A_MAX = 512

# row/column order of the joint chain
JOINT_STATES = ((0, 0), (0, 1), (1, 0), (1, 1))


@dataclass(frozen=True)
class SrpMetrics:
    p_s: float
    distortion: float
    age: float  # math.inf when p_s == 0
    cost: float
    prob_xhat0: float


@dataclass(frozen=True)
class JointSteadyState:
    """Stationary law of ``(X, X_hat)`` over (0,0), (0,1), (1,0), (1,1)."""

    pi0: float
    pi1: float
    pi2: float
    pi3: float

    def as_array(self) -> np.ndarray:
        return np.array([self.pi0, self.pi1, self.pi2, self.pi3])


@dataclass(frozen=True)
class AgeDistribution:
    """Stationary age law truncated to ages ``0..len(probs)-1``.

    ``tail_mass`` is the probability of any larger age, so
    ``probs.sum() + tail_mass == 1``.
    """

    probs: np.ndarray
    tail_mass: float
    p_s: float
    p1: float

    def mean(self) -> float:
        """Mean age with the geometric tail beyond the vector added analytically."""
        n = len(self.probs) - 1
        head = float(np.dot(np.arange(n + 1), self.probs))
        r = 1.0 - self.p_s
        # sum_{k > n} k r^(k-1) = ((n+1) r^n - n r^(n+1)) / (1-r)^2
        tail = self.p1 * ((n + 1) * r**n - n * r ** (n + 1)) / self.p_s**2
        return head + tail


def _check_ps(p_s: float) -> None:
    if not 0.0 <= p_s <= 1.0:
        raise ValueError(f"p_s={p_s!r} outside [0, 1]")


def _denominator(s: SourceChain, p_s: float) -> float:
    total = s.p01 + s.p10
    if total <= 0.0:
        raise DegenerateChain("source has p01 = p10 = 0")
    den = total * (1.0 + (1.0 - p_s) * (s.p10 - s.p00))
    if den <= 0.0:
        # only reachable with p_s = 0 and p01 + p10 -> 0
        raise DegenerateChain("joint chain has no unique stationary law")
    return den


def expected_distortion(s: SourceChain, p_s: float) -> float:
    """Long-run probability that the estimate differs from the source state."""
    _check_ps(p_s)
    return 2.0 * (1.0 - p_s) * s.p10 * s.p01 / _denominator(s, p_s)


def distortion_formula(p01, p10, p_s):
    """Array form of :func:`expected_distortion` with no validation."""
    q = 1.0 - np.asarray(p_s)
    return 2.0 * q * p10 * p01 / ((p01 + p10) * (1.0 + q * (p10 - (1.0 - p01))))


def joint_chain(s: SourceChain, p_s: float) -> np.ndarray:
    """4x4 transition matrix of ``(X, X_hat)``, rows ordered as ``JOINT_STATES``.

    The source moves first; a delivery in the new slot copies the new source
    state into the estimate.
    """
    _check_ps(p_s)
    p00, p01, p10, p11 = s.p00, s.p01, s.p10, s.p11
    q = 1.0 - p_s
    return np.array(
        [
            [p00, 0.0, p01 * q, p01 * p_s],
            [p00 * p_s, p00 * q, 0.0, p01],
            [p10, 0.0, p11 * q, p11 * p_s],
            [p10 * p_s, p10 * q, 0.0, p11],
        ]
    )


def joint_steady_state(s: SourceChain, p_s: float) -> JointSteadyState:
    """Closed-form stationary law of :func:`joint_chain`."""
    _check_ps(p_s)
    den = _denominator(s, p_s)
    q = 1.0 - p_s
    mismatch = q * s.p10 * s.p01 / den
    return JointSteadyState(
        pi0=(1.0 - s.p11 * q) * s.p10 / den,
        pi1=mismatch,
        pi2=mismatch,
        pi3=(1.0 - q * s.p00) * s.p01 / den,
    )


def estimate_zero_prob(s: SourceChain, p_s: float) -> float:
    """Stationary probability that the destination's estimate is 0."""
    pi = joint_steady_state(s, p_s)
    return pi.pi0 + pi.pi2


def expected_age(s: SourceChain, p_s: float) -> float:
    """Mean age of state 1 at the destination.

    Raises:
        ZeroSuccessProbability: if ``p_s == 0`` (the age grows without bound).
    """
    _check_ps(p_s)
    if p_s == 0.0:
        raise ZeroSuccessProbability("age diverges when p_s = 0")
    return (1.0 - p_s * estimate_zero_prob(s, p_s)) / p_s


def age_distribution(p_s: float, prob_xhat0: float, n_max: int) -> AgeDistribution:
    """Geometric stationary law of the age for ages ``0..n_max``."""
    _check_ps(p_s)
    if p_s == 0.0:
        raise ZeroSuccessProbability("no stationary age law when p_s = 0")
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    p1 = p_s * (1.0 - p_s * prob_xhat0)
    probs = np.empty(n_max + 1)
    probs[0] = p_s * prob_xhat0
    probs[1:] = p1 * (1.0 - p_s) ** np.arange(n_max)
    tail = (1.0 - p_s) ** n_max * p1 / p_s
    return AgeDistribution(probs=probs, tail_mass=tail, p_s=p_s, p1=p1)


def distortion_transition_probs(s: SourceChain, p_s: float) -> np.ndarray:
    """2x2 distortion transition matrix for slots without a delivery.

    Row ``d`` is the law of the next distortion given distortion ``d``. It is
    obtained by conditioning the joint chain on its stationary law. The
    lumped age chain does not depend on this matrix.
    """
    pi = joint_steady_state(s, p_s)
    matched = pi.pi0 + pi.pi3
    mismatched = pi.pi1 + pi.pi2
    if matched <= 0.0:
        raise DegenerateChain("matched states carry no stationary mass")
    # a mismatch flips to a match when the source moves onto the estimate
    d01 = (pi.pi0 * s.p01 + pi.pi3 * s.p10) / matched
    if mismatched > 0.0:
        d10 = (pi.pi1 * s.p01 + pi.pi2 * s.p10) / mismatched
    else:
        d10 = 0.5 * (s.p01 + s.p10)
    return np.array([[1.0 - d01, d01], [d10, 1.0 - d10]])


def age_chain(p_s: float, prob_xhat0: float, a_max: int) -> np.ndarray:
    """1-D chain on ages ``0..a_max``; ``a_max`` absorbs further increments."""
    _check_ps(p_s)
    n = a_max + 1
    P = np.zeros((n, n))
    P[:, 0] = p_s * prob_xhat0
    P[:, 1] += p_s * (1.0 - prob_xhat0)
    for a in range(n):
        P[a, min(a + 1, a_max)] += 1.0 - p_s
    return P


def age_distortion_chain(
    s: SourceChain,
    p_s: float,
    a_max: int = DEFAULT_A_MAX,
    p_delta: Optional[np.ndarray] = None,
) -> tuple[np.ndarray, list[list[int]]]:
    """2-D chain on ``(age, distortion)`` and the partition that lumps it to age.

    State ``(a, d)`` has index ``2*a + d``. A delivery moves to ``(0, 0)`` or
    ``(1, 0)``. Otherwise the age grows by one (capped at ``a_max``) and the
    distortion moves by row ``d`` of ``p_delta``.
    """
    if a_max < 2:
        raise ValueError("a_max must be >= 2")
    _check_ps(p_s)
    if p_delta is None:
        p_delta = distortion_transition_probs(s, p_s)
    p_delta = np.asarray(p_delta, dtype=float)
    x0 = estimate_zero_prob(s, p_s)
    n = 2 * (a_max + 1)
    P = np.zeros((n, n))
    P[:, 0] = p_s * x0
    P[:, 2] += p_s * (1.0 - x0)
    for a in range(a_max + 1):
        nxt = min(a + 1, a_max)
        for d in (0, 1):
            for d2 in (0, 1):
                P[2 * a + d, 2 * nxt + d2] += (1.0 - p_s) * p_delta[d, d2]
    partition = [[2 * a, 2 * a + 1] for a in range(a_max + 1)]
    return P, partition


def evaluate(config: SystemConfig, policy: SrpPolicy) -> SrpMetrics:
    """All closed-form metrics of ``policy``; age is ``inf`` if nothing is delivered."""
    p_s = success_probability(policy, config.channel)
    # clamp rounding excursions of the affine form
    p_s = min(max(p_s, 0.0), 1.0)
    src = config.source
    age = expected_age(src, p_s) if p_s > 0.0 else math.inf
    return SrpMetrics(
        p_s=p_s,
        distortion=expected_distortion(src, p_s),
        age=age,
        cost=expected_cost(policy, config.costs),
        prob_xhat0=estimate_zero_prob(src, p_s),
    )
