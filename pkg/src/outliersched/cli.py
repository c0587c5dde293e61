"""``sched``: command-line front end.

Exit codes: 0 success with every bound check passing, 2 declared
infeasibility, 1 anything else (bad usage, unreadable input, failed check).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import secrets
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import dp, flow, gap, generators, oracles, wct
from .core import (FlowInstance, GapInstance, InstanceParseError, ScheduleError, SizeError,
                   WctInstance, fraction_str, read_instance, read_schedule, schedule_to_dict,
                   validate_schedule, write_instance)

REPORT_VERSION = 1
EXIT_OK, EXIT_ERROR, EXIT_INFEASIBLE = 0, 1, 2


class UsageError(Exception):
    pass


class Infeasible(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _jsonable(obj):
    if isinstance(obj, Fraction):
        return fraction_str(obj)
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        return [_jsonable(v) for v in items]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def _check(name: str, ok: bool, **numbers) -> tuple[str, dict]:
    return name, {"pass": bool(ok), **numbers}


def _load(path: str):
    data = Path(path).read_bytes()
    return read_instance(data), hashlib.sha256(data).hexdigest()


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _expect(inst, kind, name):
    if not isinstance(inst, kind):
        raise UsageError(f"{name} expects a {kind.__name__}, got {type(inst).__name__}")


# ---------------------------------------------------------------------------
# commands; each returns (report fields, payload) or raises Infeasible


def cmd_gap(args, inst):
    _expect(inst, GapInstance, "gap")
    sweep = None
    C, T = args.C if args.C is not None else inst.cost_bound, args.T if args.T is not None else inst.makespan_bound
    if args.sweep:
        sweep = gap.gap_sweep(inst, args.eps)
        last = sweep[-1]
        if not last["feasible"]:
            raise Infeasible("sweep found no feasible (C, T)")
        C, T = last["C"], last["T"]
    elif C is None or T is None:
        raise UsageError("instance has no cost/makespan bounds; pass --C and --T or --sweep")
    try:
        res = gap.solve_gap_outliers(inst, args.eps, C, T)
    except gap.GapInfeasible as exc:
        raise Infeasible(str(exc)) from exc
    rep = res.report(inst, args.eps, C, T)
    valid = validate_schedule(inst, res.schedule)
    checks = dict([
        _check("valid_schedule", valid.feasible, violations=valid.violations),
        _check("profit", res.profit >= inst.profit_target - 1e-9, value=res.profit, target=inst.profit_target),
        _check("cost", res.cost <= (1 + args.eps) * C + 1e-9, value=res.cost, bound=(1 + args.eps) * C),
        _check("makespan_3T", res.makespan <= 3 * T + 1e-9, value=res.makespan, bound=3 * T),
        _check("makespan_proof", res.makespan <= rep["makespan_bound_proof"] + 1e-9,
               value=res.makespan, bound=rep["makespan_bound_proof"]),
    ])
    payload = {"schedule": schedule_to_dict(res.schedule), "result": rep}
    if sweep is not None:
        payload["sweep"] = sweep
    return res.cost, checks, payload


def cmd_wct(args, inst):
    _expect(inst, WctInstance, "wct")
    multi = True if args.multi else None
    try:
        res = wct.solve_wct(inst, seed=args.seed, trials=args.trials, multi=multi)
    except (wct.RelaxationInfeasible, wct.RoundingFailure) as exc:
        raise Infeasible(str(exc)) from exc
    valid = validate_schedule(inst, res.schedule)
    checks = dict([_check("valid_schedule", valid.feasible, violations=valid.violations)])
    return valid.objective, checks, {"schedule": schedule_to_dict(res.schedule, valid.objective),
                                     "result": res.report}


def cmd_wct_dp(args, inst):
    _expect(inst, WctInstance, "wct-dp")
    try:
        if args.eps is not None:
            if args.machines not in (None, 1):
                raise UsageError("the FPTAS is single-machine")
            res = dp.fptas(inst, args.eps)
        else:
            res = dp.dp_multi_machine(inst, args.machines)
    except ValueError as exc:
        if "unreachable" in str(exc):
            raise Infeasible(str(exc)) from exc
        raise UsageError(str(exc)) from exc
    triples = []
    for i, order in enumerate(res.orders):
        t = 0
        for j in order:
            p = inst.jobs[j].proc[i] if i < inst.machines else inst.jobs[j].proc[0]
            triples.append((j, min(i, inst.machines - 1), t, t + p))
            t += p
    out = {"value": res.value, "selected": sorted(res.selected), "orders": [list(o) for o in res.orders],
           "K": res.K, "P_max": res.P_max, "table_cells": res.table_cells}
    checks = {}
    if (args.machines or inst.machines) <= inst.machines:
        from .core import SegmentSchedule
        sched = SegmentSchedule.from_times(triples)
        valid = validate_schedule(inst, sched)
        checks = dict([_check("valid_schedule", valid.feasible, violations=valid.violations),
                       _check("value_matches", valid.objective == res.value, value=valid.objective)])
        out["schedule"] = schedule_to_dict(sched, valid.objective)
    return res.value, checks, out


def cmd_flow(args, inst):
    _expect(inst, FlowInstance, "flow")
    try:
        res = flow.solve_flow_outliers(inst)
    except flow.FlowInfeasible as exc:
        raise Infeasible(str(exc)) from exc
    cert = res.certificate
    valid = validate_schedule(inst, res.schedule)
    checks = {k: {"pass": bool(v)} for k, v in cert.checks.items()}
    checks.update(dict([_check("valid_schedule", valid.feasible, violations=valid.violations)]))
    c = cert.to_dict()
    if cert.flow_star > 0:
        c["output_over_lp"] = float(cert.srpt_flow / cert.flow_star)
    if inst.profit_target and math.comb(inst.n, inst.profit_target) <= 5000:
        opt = oracles.brute_flow(inst).objective
        c["opt"] = fraction_str(opt)
        if cert.flow_star > 0:
            c["opt_over_lp"] = float(opt / cert.flow_star)
    return cert.srpt_flow, checks, {"schedule": schedule_to_dict(res.schedule, cert.srpt_flow),
                                    "certificate": c}


def cmd_oracle(args, inst):
    try:
        if isinstance(inst, FlowInstance):
            res = oracles.brute_flow(inst)
        elif isinstance(inst, WctInstance):
            res = oracles.brute_wct(inst)
        else:
            res = oracles.brute_gap(inst)
    except SizeError as exc:
        raise UsageError(str(exc)) from exc
    if not res.feasible:
        raise Infeasible("no feasible solution")
    return res.objective, {}, res.to_dict()


def cmd_verify(args, inst):
    sched, claimed = read_schedule(Path(args.schedule).read_bytes())
    try:
        valid = validate_schedule(inst, sched)
    except ScheduleError as exc:
        raise UsageError(str(exc)) from exc
    out = {"feasible": valid.feasible, "violations": valid.violations, "objective": valid.objective,
           "metrics": valid.metrics}
    checks = {}
    if claimed is not None:
        checks = dict([_check("objective_matches", claimed == valid.objective, claimed=claimed,
                              value=valid.objective)])
    if not valid.feasible:
        raise Infeasible("; ".join(valid.violations))
    return valid.objective, checks, out


def cmd_gen(args):
    rng = np.random.default_rng(args.seed)
    if args.family == "flow-gap":
        if args.k is None:
            raise UsageError("flow-gap needs -k")
        try:
            return flow.gen_gap_instance(args.k).instance
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    n = args.n
    if args.family == "gap":
        return generators.random_gap(rng, n, args.machines)
    if args.family == "wct":
        return generators.random_wct(rng, n, args.machines)
    return generators.random_flow(rng, n)


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="random seed")
    common.add_argument("--out", default=argparse.SUPPRESS, help="write the JSON result here")
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS,
                        help="print the JSON result instead of a summary")
    p = _Parser(prog="sched", description="Scheduling with outliers.")
    p.add_argument("--seed", type=int, default=None, help="random seed (random and printed if absent)")
    p.add_argument("--out", default=None, help="write the JSON result here")
    p.add_argument("--json", action="store_true", help="print the JSON result instead of a summary")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gap", parents=[common], help="GAP with outliers")
    g.add_argument("instance")
    g.add_argument("--eps", type=_positive_float, required=True)
    g.add_argument("--C", type=float, help="cost bound (default: from the instance)")
    g.add_argument("--T", type=float, help="makespan bound (default: from the instance)")
    g.add_argument("--sweep", action="store_true", help="double C and T until feasible")

    w = sub.add_parser("wct", parents=[common], help="weighted completion time, LP rounding")
    w.add_argument("instance")
    w.add_argument("--trials", type=_positive_int, default=200)
    w.add_argument("--multi", action="store_true", help="multi-target rounding")

    d = sub.add_parser("wct-dp", parents=[common], help="exact DP or FPTAS (unit weights)")
    d.add_argument("instance")
    d.add_argument("--eps", type=_positive_float)
    d.add_argument("--machines", type=_positive_int)

    f = sub.add_parser("flow", parents=[common], help="single-machine flow time")
    f.add_argument("instance")

    gen = sub.add_parser("gen", parents=[common], help="generate an instance")
    gen.add_argument("family", choices=["flow-gap", "gap", "wct", "flow"])
    gen.add_argument("-k", type=int)
    gen.add_argument("--n", type=_positive_int, default=6)
    gen.add_argument("--machines", type=_positive_int, default=2)

    o = sub.add_parser("oracle", parents=[common], help="brute-force optimum")
    o.add_argument("instance")

    v = sub.add_parser("verify", parents=[common], help="check a schedule against an instance")
    v.add_argument("instance")
    v.add_argument("schedule")
    return p


COMMANDS = {"gap": cmd_gap, "wct": cmd_wct, "wct-dp": cmd_wct_dp, "flow": cmd_flow,
            "oracle": cmd_oracle, "verify": cmd_verify}


def _emit(args, doc: dict, summary: list[str]):
    text = json.dumps(_jsonable(doc), sort_keys=True, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    if args.json:
        sys.stdout.write(text)
    else:
        for line in summary:
            print(line)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"sched: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_ERROR
    if args.seed is None and args.command in ("wct", "gen"):
        args.seed = secrets.randbelow(2 ** 31)
        print(f"seed: {args.seed}", file=sys.stderr)
    try:
        if args.command == "gen":
            inst = cmd_gen(args)
            data = write_instance(inst)
            if args.out:
                Path(args.out).write_bytes(data)
            if args.json or not args.out:
                sys.stdout.write(data.decode())
            return EXIT_OK
        inst, digest = _load(args.instance)
        started = time.perf_counter()
        try:
            objective, checks, payload = COMMANDS[args.command](args, inst)
            status = "ok" if all(c["pass"] for c in checks.values()) else "check_failed"
        except Infeasible as exc:
            objective, checks, payload, status = None, {}, {"reason": str(exc)}, "infeasible"
        elapsed = time.perf_counter() - started
        report = {"report_version": REPORT_VERSION, "command": args.command, "instance_digest": digest,
                  "seed": args.seed, "status": status, "objective": objective, "bound_checks": checks}
        summary = [f"{args.command}: {status}"]
        if objective is not None:
            summary.append(f"objective: {fraction_str(Fraction(objective).limit_denominator(10 ** 12))}"
                           if isinstance(objective, float) else f"objective: {_jsonable(objective)}")
        summary += [f"  {name}: {'pass' if c['pass'] else 'FAIL'}" for name, c in checks.items()]
        if status == "infeasible":
            summary.append(f"  reason: {payload['reason']}")
        print(f"wall time: {elapsed:.3f}s", file=sys.stderr)
        _emit(args, {"report": report, **payload}, summary)
        return {"ok": EXIT_OK, "infeasible": EXIT_INFEASIBLE}.get(status, EXIT_ERROR)
    except UsageError as exc:
        print(f"sched: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (InstanceParseError, SizeError, OSError, ValueError) as exc:
        print(f"sched: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
