"""Command-line front end.

    aoisrp eval          --config cfg.json [--policy p0,p1,p2,p3]
    aoisrp optimize      --config cfg.json [--check]
    aoisrp sweep         --config cfg.json --axis constraints.c_bar --range 0.5:1.8:0.1
    aoisrp simulate      --config cfg.json [--use-optimal] [--slots N]
    aoisrp export-chains --config cfg.json [--a-max N]
    aoisrp export-pomdp  --config cfg.json [--a-max N]
    aoisrp reproduce     fig5b [--out DIR]

Exit codes: 0 success, 2 invalid input, 3 infeasible problem.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import chains, pomdp, srp
from .config import ConfigFile, load_config
from .errors import AoiSrpError, ConfigError, SingularChain, UnknownParameter
from .model import (
    ChannelModel,
    Constraints,
    CostVector,
    SourceChain,
    SrpPolicy,
    SystemConfig,
)
from .optimizer import OptimizationResult, solve, sweep, sweep2d, with_parameter
from .simulator import simulate_batch

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_INFEASIBLE = 3

CSV_HEADER = ["axis", "value", "status", "p1", "p3", "p_s", "distortion", "age", "cost"]

# channel/cost setting of the average-cost-bound figure
FIG5B_BASE = SystemConfig(
    source=SourceChain(0.15, 0.2),
    channel=ChannelModel(p01=0.3, p10=0.2, p1r=0.9, p0p=0.6),
    costs=CostVector(c1=1.2, c2=0.8, c3=1.4),
    constraints=Constraints(a_bar=3.0, c_bar=0.5),
)
FIG5B_SOURCES = ((0.15, 0.2), (0.9, 0.8))
FIG5B_C_BAR = tuple(round(0.5 + 0.1 * k, 10) for k in range(14))


class UsageError(Exception):
    pass


def _num(x) -> object:
    """JSON-safe float: infinities and NaN become strings."""
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return "nan"
    return x


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, np.generic):
        return _clean(obj.item())
    return _num(obj)


def _dump(obj, out) -> None:
    out.write(json.dumps(_clean(obj), indent=2, allow_nan=False))
    out.write("\n")


def _policy_dict(p: Optional[SrpPolicy]):
    return None if p is None else asdict(p)


def result_to_dict(res: OptimizationResult) -> dict:
    return {
        "status": res.status.value,
        "policy": _policy_dict(res.policy),
        "p_s": res.p_s,
        "metrics": None if res.metrics is None else asdict(res.metrics),
        "binding": sorted(res.binding),
    }


def _fmt(x) -> str:
    return "" if x is None else repr(float(x))


def result_row(axis: str, value, res: OptimizationResult) -> list[str]:
    if not res.optimal:
        return [axis, _fmt(value), res.status.value, "", "", "", "", "", ""]
    m = res.metrics
    return [
        axis,
        _fmt(value),
        res.status.value,
        _fmt(res.policy.p1),
        _fmt(res.policy.p3),
        _fmt(m.p_s),
        _fmt(m.distortion),
        _fmt(m.age),
        _fmt(m.cost),
    ]


def write_csv(rows, header, out) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)


def parse_policy(text: str) -> SrpPolicy:
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise ConfigError("--policy", f"cannot parse {text!r}") from None
    if len(vals) != 4:
        raise ConfigError("--policy", "expected four comma-separated probabilities")
    return SrpPolicy(*vals)


def parse_values(values: Optional[str], rng: Optional[str], flag: str) -> list[float]:
    if (values is None) == (rng is None):
        raise UsageError(f"give exactly one of --values{flag} / --range{flag}")
    try:
        if values is not None:
            out = [float(v) for v in values.split(",") if v.strip()]
        else:
            start, stop, step = (float(v) for v in rng.split(":"))
            if step <= 0 or stop < start:
                raise ValueError
            n = int(math.floor((stop - start) / step + 1e-9)) + 1
            out = [round(start + k * step, 12) for k in range(n)]
    except ValueError:
        raise UsageError(f"cannot parse values for axis{flag}") from None
    if not out:
        raise UsageError(f"no values for axis{flag}")
    return out


def _policy_from(args, cfg: ConfigFile) -> SrpPolicy:
    if getattr(args, "policy", None):
        return parse_policy(args.policy)
    if cfg.policy is None:
        raise ConfigError("policy", "missing section (or pass --policy)")
    return cfg.policy


def cmd_eval(args, out) -> int:
    cfg = load_config(args.config)
    metrics = srp.evaluate(cfg.system, _policy_from(args, cfg))
    _dump(asdict(metrics), out)
    return EXIT_OK


def cmd_optimize(args, out) -> int:
    cfg = load_config(args.config)
    res = solve(cfg.system, check=args.check)
    _dump(result_to_dict(res), out)
    return EXIT_OK if res.optimal else EXIT_INFEASIBLE


def cmd_sweep(args, out) -> int:
    cfg = load_config(args.config)
    values = parse_values(args.values, args.range, "")
    buf = io.StringIO()
    if args.axis2:
        values2 = parse_values(args.values2, args.range2, "2")
        rows = []
        for v, v2, res in sweep2d(cfg.system, args.axis, values, args.axis2, values2, weight=args.weight):
            row = result_row(args.axis, v, res)
            rows.append(row[:2] + [args.axis2, _fmt(v2)] + row[2:])
        write_csv(rows, CSV_HEADER[:2] + ["axis2", "value2"] + CSV_HEADER[2:], buf)
    else:
        table = sweep(cfg.system, args.axis, values, weight=args.weight)
        write_csv([result_row(args.axis, v, r) for v, r in table], CSV_HEADER, buf)
    if args.out:
        Path(args.out).write_text(buf.getvalue())
    else:
        out.write(buf.getvalue())
    return EXIT_OK


def _aggregate(runs) -> dict:
    keys = ("avg_distortion", "avg_age", "avg_cost", "delivery_rate", "xhat0_rate")
    errs = {
        "avg_distortion": "stderr_distortion",
        "avg_age": "stderr_age",
        "avg_cost": "stderr_cost",
        "delivery_rate": "stderr_delivery",
    }
    mean, stderr = {}, {}
    for k in keys:
        vals = np.array([getattr(r, k) for r in runs])
        mean[k] = float(vals.mean())
        if len(runs) > 1:
            stderr[k] = float(vals.std(ddof=1) / math.sqrt(len(runs)))
        elif k in errs:
            stderr[k] = getattr(runs[0], errs[k])
    return {"n_runs": len(runs), "mean": mean, "stderr": stderr}


def cmd_simulate(args, out) -> int:
    cfg = load_config(args.config)
    if args.use_optimal:
        res = solve(cfg.system)
        if not res.optimal:
            _dump({"status": res.status.value}, out)
            return EXIT_INFEASIBLE
        policy = res.policy
    else:
        policy = _policy_from(args, cfg)
    slots = args.slots if args.slots is not None else cfg.sim.slots
    warmup = args.warmup if args.warmup is not None else cfg.sim.warmup
    seed = args.seed if args.seed is not None else cfg.sim.seed
    n_runs = args.runs if args.runs is not None else cfg.sim.runs
    if slots < 1:
        raise ConfigError("sim.slots", "must be >= 1")
    if warmup < 0:
        raise ConfigError("sim.warmup", "must be >= 0")
    if n_runs < 1:
        raise ConfigError("sim.runs", "must be >= 1")
    runs = simulate_batch(
        cfg.system,
        policy,
        slots,
        n_runs,
        base_seed=seed,
        warmup=warmup,
        channel_memory=args.channel_memory,
        workers=args.workers,
    )
    _dump(
        {
            "policy": _policy_dict(policy),
            "closed_form": asdict(srp.evaluate(cfg.system, policy)),
            "runs": [r.to_dict() for r in runs],
            "aggregate": _aggregate(runs),
        },
        out,
    )
    return EXIT_OK


def _steady(P):
    try:
        return chains.steady_state(P)
    except SingularChain:
        return None


def export_chains(system: SystemConfig, policy: SrpPolicy, a_max: int) -> dict:
    metrics = srp.evaluate(system, policy)
    p_s = metrics.p_s
    joint = srp.joint_chain(system.source, p_s)
    doc = {
        "p_s": p_s,
        "metrics": asdict(metrics),
        "joint_chain": {
            "states": [f"(X={x},Xhat={xh})" for x, xh in srp.JOINT_STATES],
            "matrix": joint,
            "steady_state": _steady(joint),
            "closed_form_steady_state": srp.joint_steady_state(system.source, p_s).as_array(),
        },
    }
    if p_s == 0.0:
        doc["age_distortion_chain"] = None
        doc["age_chain"] = None
        return doc
    P, part = srp.age_distortion_chain(system.source, p_s, a_max)
    lumped = chains.lump(P, part)
    pi_age = chains.steady_state(lumped)
    tail_bound = (1.0 - p_s) ** a_max * (a_max + 1.0 / p_s)
    doc["age_distortion_chain"] = {
        "states": [f"(age={a},d={d})" for a in range(a_max + 1) for d in (0, 1)],
        "matrix": P,
        "partition": part,
        "lumpable": chains.is_lumpable(P, part),
        "steady_state": _steady(P),
    }
    doc["age_chain"] = {
        "states": [f"age={a}" for a in range(a_max + 1)],
        "matrix": lumped,
        "steady_state": pi_age,
        "mean_age_truncated": float(np.dot(np.arange(a_max + 1), pi_age)),
        "truncation_tail_bound": tail_bound,
    }
    return doc


def cmd_export_chains(args, out) -> int:
    cfg = load_config(args.config)
    if args.a_max < 2:
        raise ConfigError("--a-max", "must be >= 2")
    _dump(export_chains(cfg.system, _policy_from(args, cfg), args.a_max), out)
    return EXIT_OK


def cmd_export_pomdp(args, out) -> int:
    cfg = load_config(args.config)
    a_max = args.a_max if args.a_max is not None else cfg.pomdp.a_max
    if a_max < 1:
        raise ConfigError("--a-max", "must be >= 1")
    states = pomdp.enumerate_states(a_max)
    T = pomdp.transition_matrices(cfg.system, a_max)
    Z = pomdp.observation_matrix(a_max)
    costs = np.array(
        [[pomdp.step_cost(s, u, cfg.pomdp.weights, cfg.system.costs) for s in states] for u in range(4)]
    )
    _dump(
        {
            "states": [list(s) for s in states],
            "observations": [o.name.lower() for o in pomdp.Observation],
            "transition": T,
            "observation": Z,
            "step_cost": costs,
            "weights": list(cfg.pomdp.weights),
        },
        out,
    )
    return EXIT_OK


def reproduce_fig5b() -> dict[str, list[tuple[float, OptimizationResult]]]:
    series = {}
    for p01, p10 in FIG5B_SOURCES:
        base = with_parameter(with_parameter(FIG5B_BASE, "source.p01", p01), "source.p10", p10)
        series[f"fig5b_p01-{p01}_p10-{p10}"] = sweep(base, "constraints.c_bar", FIG5B_C_BAR)
    return series


def cmd_reproduce(args, out) -> int:
    if args.figure != "fig5b":
        raise UsageError(f"unknown figure id {args.figure!r} (available: fig5b)")
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    summary = {}
    for name, table in reproduce_fig5b().items():
        buf = io.StringIO()
        write_csv([result_row("constraints.c_bar", v, r) for v, r in table], CSV_HEADER, buf)
        path = outdir / f"{name}.csv"
        path.write_text(buf.getvalue())
        summary[name] = {
            "file": str(path),
            "c_bar": [v for v, _ in table],
            "distortion": [r.metrics.distortion if r.optimal else None for _, r in table],
        }
    _dump(summary, out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="aoisrp", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_, config=True):
        p = sub.add_parser(name, help=help_)
        if config:
            p.add_argument("--config", required=True, help="JSON configuration file")
        p.set_defaults(func=func)
        return p

    p = add("eval", cmd_eval, "closed-form metrics of a policy")
    p.add_argument("--policy", help="p0,p1,p2,p3 (overrides the config's policy)")

    p = add("optimize", cmd_optimize, "optimal SRP under the age and cost bounds")
    p.add_argument("--check", action="store_true", help="cross-check against a 1e-3 grid search")

    p = add("sweep", cmd_sweep, "solve over a range of one or two parameters")
    p.add_argument("--axis", required=True, help="dotted parameter path, e.g. constraints.c_bar")
    p.add_argument("--values", help="comma-separated values")
    p.add_argument("--range", help="start:stop:step, stop inclusive")
    p.add_argument("--axis2", help="second axis for a 2-D grid")
    p.add_argument("--values2")
    p.add_argument("--range2")
    p.add_argument("--weight", type=float, help="minimise distortion + weight * age / a_bar instead")
    p.add_argument("--out", help="CSV output file (default: stdout)")

    p = add("simulate", cmd_simulate, "Monte Carlo simulation of a policy")
    p.add_argument("--policy")
    p.add_argument("--use-optimal", action="store_true", help="simulate the optimizer's policy")
    p.add_argument("--slots", type=int)
    p.add_argument("--warmup", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--runs", type=int)
    p.add_argument("--channel-memory", choices=("markov", "iid"), default="markov")
    p.add_argument("--workers", type=int, default=1)

    p = add("export-chains", cmd_export_chains, "joint, age-distortion and age chains as JSON")
    p.add_argument("--policy")
    p.add_argument("--a-max", type=int, default=64)

    p = add("export-pomdp", cmd_export_pomdp, "POMDP transition/observation/cost arrays as JSON")
    p.add_argument("--a-max", type=int)

    p = add("reproduce", cmd_reproduce, "regenerate a figure's data series", config=False)
    p.add_argument("figure", help="figure id (fig5b)")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--config", help="ignored; accepted for a uniform grammar")
    return parser


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except (UsageError, UnknownParameter) as exc:
        print(f"aoisrp: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ConfigError as exc:
        print(f"aoisrp: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except AoiSrpError as exc:
        print(f"aoisrp: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
