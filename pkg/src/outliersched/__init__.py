"""Scheduling with a hard profit constraint: GAP with outliers, weighted
completion time by LP rounding, single-machine flow time, and brute-force
oracles for checking all of them on small instances."""

from .core import (FlowInstance, FlowJob, GapInstance, GapJob, ProfitTarget, Segment,
                   SegmentSchedule, ValidationReport, WctInstance, WctJob, read_instance,
                   read_schedule, validate_schedule, write_instance, write_schedule)
from .dp import dp_exact, dp_multi_machine, fptas
from .flow import gen_gap_instance, solve_flow_outliers
from .gap import gap_sweep, solve_gap_outliers
from .lp import LpBuilder, LpModel, LpSolution, Status, cut_loop, simplex, solve
from .oracles import brute_flow, brute_gap, brute_wct, srpt
from .wct import solve_relaxation, solve_wct

__all__ = [
    "FlowInstance", "FlowJob", "GapInstance", "GapJob", "ProfitTarget", "Segment",
    "SegmentSchedule", "ValidationReport", "WctInstance", "WctJob", "read_instance",
    "read_schedule", "validate_schedule", "write_instance", "write_schedule",
    "dp_exact", "dp_multi_machine", "fptas", "gen_gap_instance", "solve_flow_outliers",
    "gap_sweep", "solve_gap_outliers", "LpBuilder", "LpModel", "LpSolution", "Status",
    "cut_loop", "simplex", "solve", "brute_flow", "brute_gap", "brute_wct", "srpt",
    "solve_relaxation", "solve_wct",
]
