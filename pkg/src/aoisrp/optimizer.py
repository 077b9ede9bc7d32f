"""Optimal stationary randomized policies under age and cost bounds.

Objective and age constraint depend on ``(p1, p3)`` only through the
delivery probability ``p_s``, which is affine in them. Distortion is
strictly decreasing in ``p_s`` and the age of state 1 is nonincreasing in
it. So the optimum is the vertex of the cost/simplex polygon that maximises
``p_s``, and the age bound only decides feasibility. :func:`solve_grid` is a
brute-force check of that argument.
"""

from __future__ import annotations

import dataclasses
import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import UnknownParameter
from .model import (
    ChannelModel,
    CostVector,
    SrpPolicy,
    SystemConfig,
    channel_steady_state,
    source_steady_state,
)
from .srp import SrpMetrics, distortion_formula, evaluate, expected_age, expected_distortion

SLACK_TOL = 1e-9
GRID_TOL = 1e-12


class Status(str, enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"


@dataclass(frozen=True)
class OptimizationResult:
    status: Status
    policy: Optional[SrpPolicy] = None
    p_s: Optional[float] = None
    metrics: Optional[SrpMetrics] = None
    binding: frozenset = frozenset()

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL


def _rates(c: ChannelModel) -> tuple[float, float]:
    """Delivery probability per unit of ``p1`` and per unit of ``p3``."""
    h0, h1 = channel_steady_state(c)
    return c.p1r * h1, h1 + c.p0p * h0


def _snap(v: float) -> float:
    # intersections on an axis can come out as -1e-17
    return 0.0 if -1e-15 < v < 0.0 else v


def max_success_probability(
    c: ChannelModel, costs: CostVector, c_bar: float
) -> tuple[float, float, float]:
    """Maximise ``p_s`` over ``{p1, p3 >= 0, p1 + p3 <= 1, c1 p1 + c3 p3 <= c_bar}``.

    Enumerates pairwise intersections of the four boundary lines and keeps
    the feasible ones. Ties on ``p_s`` go to the cheaper vertex, then to the
    one with larger ``p3``.

    Returns:
        ``(p1, p3, p_s)`` at the chosen vertex.
    """
    r1, r3 = _rates(c)
    # boundary lines a*p1 + b*p3 = rhs
    lines = [(1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (1.0, 1.0, 1.0), (costs.c1, costs.c3, c_bar)]
    cost_tol = 1e-12 * max(1.0, c_bar)
    vertices = [(0.0, 0.0)]
    for k, (a1, b1, e1) in enumerate(lines):
        for a2, b2, e2 in lines[k + 1:]:
            det = a1 * b2 - a2 * b1
            if det == 0.0:
                continue
            p1 = _snap((e1 * b2 - e2 * b1) / det)
            p3 = _snap((a1 * e2 - a2 * e1) / det)
            if p1 < 0.0 or p3 < 0.0 or p1 + p3 > 1.0 + 1e-12:
                continue
            if costs.c1 * p1 + costs.c3 * p3 > c_bar + cost_tol:
                continue
            vertices.append((p1, p3))

    best = max(r1 * p1 + r3 * p3 for p1, p3 in vertices)
    # treat p_s values equal up to rounding as ties
    tied = [v for v in vertices if r1 * v[0] + r3 * v[1] >= best - 1e-14]
    p1, p3 = min(tied, key=lambda v: (costs.c1 * v[0] + costs.c3 * v[1], -v[1]))
    return p1, p3, min(1.0, r1 * p1 + r3 * p3)


def _binding(config: SystemConfig, policy: SrpPolicy, metrics: SrpMetrics) -> frozenset:
    tags = set()
    c_bar = config.constraints.c_bar
    if abs(metrics.cost - c_bar) <= SLACK_TOL * max(1.0, c_bar):
        tags.add("cost")
    if abs(policy.p1 + policy.p2 + policy.p3 - 1.0) <= SLACK_TOL:
        tags.add("simplex")
    if abs(metrics.age - config.constraints.a_bar) <= SLACK_TOL * max(1.0, config.constraints.a_bar):
        tags.add("age")
    return frozenset(tags)


def _check_age_monotone(config: SystemConfig, p_s: float) -> None:
    hi = min(p_s + 0.1, 1.0)
    if p_s <= 0.0 or hi <= p_s:
        return
    ages = [expected_age(config.source, x) for x in np.linspace(p_s, hi, 11)]
    if any(b > a + 1e-12 * max(1.0, a) for a, b in zip(ages, ages[1:])):
        raise RuntimeError(f"expected age increases in p_s above {p_s!r}")


def solve(config: SystemConfig, check: bool = False) -> OptimizationResult:
    """Minimum-distortion SRP subject to the age and cost bounds.

    ``check=True`` also runs :func:`solve_grid` at resolution 1e-3 and
    raises ``AssertionError`` if the two disagree.
    """
    p1, p3, p_s = max_success_probability(config.channel, config.costs, config.constraints.c_bar)
    _check_age_monotone(config, p_s)
    if p_s <= 0.0 or expected_age(config.source, p_s) > _age_limit(config):
        result = OptimizationResult(Status.INFEASIBLE)
    else:
        policy = SrpPolicy.from_transmit(p1, p3)
        metrics = evaluate(config, policy)
        result = OptimizationResult(
            Status.OPTIMAL, policy, metrics.p_s, metrics, _binding(config, policy, metrics)
        )
    if check:
        grid = solve_grid(config, 1e-3)
        assert grid.status is result.status or _near_age_boundary(config, p_s, 1e-3), (
            f"solve={result.status.value} but solve_grid={grid.status.value}"
        )
        if grid.optimal and result.optimal:
            assert result.metrics.distortion <= grid.metrics.distortion + 1e-12
    return result


def _age_limit(config: SystemConfig) -> float:
    return config.constraints.a_bar * (1.0 + 1e-12)


def _near_age_boundary(config: SystemConfig, p_s: float, resolution: float) -> bool:
    """Whether a grid of step ``resolution`` may miss the whole feasible set.

    Rounding the max-``p_s`` vertex down onto the grid loses at most
    ``resolution * (r1 + r3)`` of delivery probability.
    """
    r1, r3 = _rates(config.channel)
    lo = p_s - resolution * (r1 + r3)
    if lo <= 0.0:
        return True
    return expected_age(config.source, lo) > config.constraints.a_bar


def solve_grid(config: SystemConfig, resolution: float) -> OptimizationResult:
    """Exhaustive search over ``(p1, p3)`` on a grid of step ``resolution``."""
    if not 0.0 < resolution <= 0.1:
        raise ValueError("resolution must lie in (0, 0.1]")
    n = int(round(1.0 / resolution))
    step = 1.0 / n
    i, j = np.meshgrid(np.arange(n + 1), np.arange(n + 1), indexing="ij")
    keep = i + j <= n
    p1 = i[keep] * step
    p3 = j[keep] * step
    r1, r3 = _rates(config.channel)
    c = config.costs
    c_bar = config.constraints.c_bar
    cost = c.c1 * p1 + c.c3 * p3
    p_s = np.minimum(r1 * p1 + r3 * p3, 1.0)
    x0, _ = source_steady_state(config.source)
    with np.errstate(divide="ignore"):
        # the estimate inherits the source's stationary law
        age = np.where(p_s > 0, 1.0 / p_s - x0, np.inf)
    feasible = (cost <= c_bar + GRID_TOL) & (age <= _age_limit(config))
    if not feasible.any():
        return OptimizationResult(Status.INFEASIBLE)
    p1, p3, p_s, cost = p1[feasible], p3[feasible], p_s[feasible], cost[feasible]
    src = config.source
    dist = distortion_formula(src.p01, src.p10, p_s)
    best = np.lexsort((-p3, cost, dist))[0]
    policy = SrpPolicy.from_transmit(float(p1[best]), float(p3[best]))
    metrics = evaluate(config, policy)
    return OptimizationResult(
        Status.OPTIMAL, policy, metrics.p_s, metrics, _binding(config, policy, metrics)
    )


def solve_weighted(config: SystemConfig, weight: float, points: int = 2001) -> OptimizationResult:
    """Minimise ``distortion + weight * age / a_bar`` under both bounds.

    The feasible delivery probabilities form an interval: the age bound gives
    the lower end and the cost polygon the upper end. Any ``p_s`` in it is
    reached by scaling the max-``p_s`` vertex towards the origin. The
    interval is scanned on ``points`` values and refined with a bounded
    scalar search around the best one.
    """
    from scipy.optimize import minimize_scalar

    p1_max, p3_max, ps_max = max_success_probability(
        config.channel, config.costs, config.constraints.c_bar
    )
    a_bar = config.constraints.a_bar
    x0, _ = source_steady_state(config.source)
    ps_min = 1.0 / (a_bar + x0)
    if ps_max <= 0.0 or ps_min > ps_max:
        return OptimizationResult(Status.INFEASIBLE)

    def objective(ps):
        return expected_distortion(config.source, ps) + weight * expected_age(config.source, ps) / a_bar

    grid = np.linspace(ps_min, ps_max, points)
    values = np.array([objective(float(x)) for x in grid])
    k = int(np.argmin(values))
    best_ps, best_val = float(grid[k]), float(values[k])
    lo, hi = float(grid[max(k - 1, 0)]), float(grid[min(k + 1, points - 1)])
    if hi > lo:
        res = minimize_scalar(objective, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
        if res.success and res.fun < best_val:
            best_ps = float(res.x)
    scale = best_ps / ps_max
    policy = SrpPolicy.from_transmit(p1_max * scale, p3_max * scale)
    metrics = evaluate(config, policy)
    return OptimizationResult(Status.OPTIMAL, policy, metrics.p_s, metrics, _binding(config, policy, metrics))


SWEEPABLE = {
    "source": ("p01", "p10"),
    "channel": ("p01", "p10", "p1r", "p0p"),
    "costs": ("c1", "c2", "c3"),
    "constraints": ("a_bar", "c_bar"),
}


def with_parameter(config: SystemConfig, axis: str, value: float) -> SystemConfig:
    """Copy of ``config`` with the scalar at dotted path ``axis`` replaced."""
    section, _, name = axis.partition(".")
    if name not in SWEEPABLE.get(section, ()):
        raise UnknownParameter(f"unknown parameter {axis!r}")
    part = dataclasses.replace(getattr(config, section), **{name: float(value)})
    return dataclasses.replace(config, **{section: part})


def sweep(
    config: SystemConfig,
    axis: str,
    values: Iterable[float],
    weight: Optional[float] = None,
    workers: int = 1,
) -> list[tuple[float, OptimizationResult]]:
    """Solve independently at each value of ``axis``; rows keep input order.

    With ``weight`` set, each point uses :func:`solve_weighted` instead.
    """
    values = [float(v) for v in values]
    configs = [with_parameter(config, axis, v) for v in values]
    if weight is None:
        run = solve
    else:
        def run(cfg):
            return solve_weighted(cfg, weight)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(run, configs))
    else:
        results = [run(cfg) for cfg in configs]
    return list(zip(values, results))


def sweep2d(
    config: SystemConfig,
    axis: str,
    values: Sequence[float],
    axis2: str,
    values2: Sequence[float],
    weight: Optional[float] = None,
) -> list[tuple[float, float, OptimizationResult]]:
    """Row-major grid sweep over two axes."""
    rows = []
    for v in values:
        inner = with_parameter(config, axis, v)
        for v2, res in sweep(inner, axis2, values2, weight=weight):
            rows.append((float(v), v2, res))
    return rows

