"""System model: source and channel chains, action costs and SRP policies.

Transition probabilities are written ``p<from><to>``: ``SourceChain.p01`` is
the probability that the monitored state moves from 0 to 1 in one slot.
The channel has a bad state 0 and a good state 1. Raw samples never get
through the bad channel, and processed samples always get through the good
one. So each channel state has a single free success probability.

Actions are indexed 0..3:

0. do not sample (free)
1. sample and transmit the raw sample
2. sample, process, do not transmit
3. sample, process, transmit the processed state
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .errors import ConfigError, DegenerateChain

N_ACTIONS = 4
POLICY_SUM_TOL = 1e-9


def _check_prob(path: str, value: float) -> None:
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ConfigError(path, f"expected a number, got {value!r}")
    if not 0.0 <= value <= 1.0:
        raise ConfigError(path, f"probability {value!r} outside [0, 1]")


def _check_nonneg(path: str, value: float) -> None:
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ConfigError(path, f"expected a number, got {value!r}")
    if not value >= 0.0:
        raise ConfigError(path, f"{value!r} must be >= 0")


@dataclass(frozen=True)
class SourceChain:
    """Two-state Markov chain of the monitored process."""

    p01: float
    p10: float

    def __post_init__(self):
        _check_prob("source.p01", self.p01)
        _check_prob("source.p10", self.p10)

    @property
    def p00(self) -> float:
        return 1.0 - self.p01

    @property
    def p11(self) -> float:
        return 1.0 - self.p10

    def matrix(self) -> list[list[float]]:
        return [[self.p00, self.p01], [self.p10, self.p11]]


@dataclass(frozen=True)
class ChannelModel:
    """Gilbert-Elliott ON/OFF channel.

    Attributes:
        p01: bad -> good transition probability.
        p10: good -> bad transition probability.
        p1r: delivery probability of a raw sample on the good channel.
        p0p: delivery probability of a processed sample on the bad channel.
    """

    p01: float
    p10: float
    p1r: float
    p0p: float

    def __post_init__(self):
        for name in ("p01", "p10", "p1r", "p0p"):
            _check_prob(f"channel.{name}", getattr(self, name))

    def matrix(self) -> list[list[float]]:
        return [[1.0 - self.p01, self.p01], [self.p10, 1.0 - self.p10]]

    def delivery_prob(self, action: int, h: int) -> float:
        """Probability that ``action`` delivers an update in channel state ``h``."""
        if action == 1:
            return self.p1r if h == 1 else 0.0
        if action == 3:
            return 1.0 if h == 1 else self.p0p
        return 0.0


@dataclass(frozen=True)
class CostVector:
    """Per-slot cost of actions 1, 2 and 3. Not sampling is free."""

    c1: float
    c2: float
    c3: float

    def __post_init__(self):
        for name in ("c1", "c2", "c3"):
            _check_nonneg(f"costs.{name}", getattr(self, name))

    def of(self, action: int) -> float:
        return (0.0, self.c1, self.c2, self.c3)[action]


@dataclass(frozen=True)
class SrpPolicy:
    """Stationary randomized policy: fixed probabilities of the four actions."""

    p0: float
    p1: float
    p2: float
    p3: float

    def __post_init__(self):
        for name in ("p0", "p1", "p2", "p3"):
            _check_prob(f"policy.{name}", getattr(self, name))
        total = self.p0 + self.p1 + self.p2 + self.p3
        if abs(total - 1.0) > POLICY_SUM_TOL:
            raise ConfigError("policy", f"action probabilities sum to {total!r}, not 1")

    @classmethod
    def from_transmit(cls, p1: float, p3: float) -> "SrpPolicy":
        """Policy that never uses action 2; ``p0`` takes the remaining mass."""
        return cls(max(0.0, 1.0 - p1 - p3), p1, 0.0, p3)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.p0, self.p1, self.p2, self.p3)


@dataclass(frozen=True)
class Constraints:
    a_bar: float
    c_bar: float

    def __post_init__(self):
        _check_nonneg("constraints.a_bar", self.a_bar)
        if self.a_bar == 0:
            raise ConfigError("constraints.a_bar", "must be > 0")
        _check_nonneg("constraints.c_bar", self.c_bar)


@dataclass(frozen=True)
class SystemConfig:
    source: SourceChain
    channel: ChannelModel
    costs: CostVector
    constraints: Constraints


def _two_state_law(p01: float, p10: float) -> tuple[float, float]:
    s = p01 + p10
    if s <= 0.0:
        raise DegenerateChain("both states absorbing; no unique stationary law")
    one = p01 / s
    return 1.0 - one, one


def source_steady_state(s: SourceChain) -> tuple[float, float]:
    """Stationary ``(P{X=0}, P{X=1})`` of the source."""
    return _two_state_law(s.p01, s.p10)


def channel_steady_state(c: ChannelModel) -> tuple[float, float]:
    """Stationary ``(P{h=0}, P{h=1})`` of the channel."""
    return _two_state_law(c.p01, c.p10)


def success_probability(policy: SrpPolicy, c: ChannelModel) -> float:
    """Per-slot delivery probability under ``policy`` with a stationary channel."""
    h0, h1 = channel_steady_state(c)
    return policy.p1 * c.p1r * h1 + policy.p3 * (h1 + c.p0p * h0)


def expected_cost(policy: SrpPolicy, costs: CostVector) -> float:
    return costs.c1 * policy.p1 + costs.c2 * policy.p2 + costs.c3 * policy.p3


def step_distortion(x: int, x_hat: int) -> int:
    return 0 if x == x_hat else 1


def step_age(prev_age: int, delivered: bool, new_estimate: Optional[int] = None) -> int:
    """Next age of state 1 at the destination.

    A delivered 0 resets the age to 0 and a delivered 1 resets it to 1. Any
    other slot adds one.
    """
    if delivered:
        if new_estimate not in (0, 1):
            raise ValueError("a delivery must carry the estimate 0 or 1")
        return new_estimate
    return prev_age + 1
