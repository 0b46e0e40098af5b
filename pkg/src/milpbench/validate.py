"""Independent certificate checking for claimed solutions.

Feasibility is recomputed from raw instance data, never trusted from the
solver; objective values are re-evaluated the same way.  Violations are
normalized by max(1, |reference magnitude|) so one tolerance per category
covers badly scaled rows.  Incumbent claims are adjudicated against a
best-known registry with a strict relative tolerance.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import IO, Optional, Union

from .instance import Instance, Relation
from .runner import RunLog
from .solution_io import read_solution
from .solver import Solution

DEFAULT_ROW_TOL = 1e-6
DEFAULT_BOUND_TOL = 1e-6
DEFAULT_INT_TOL = 1e-6
DEFAULT_STRICT_TOL = 1e-9


@dataclass(frozen=True)
class FeasibilityReport:
    max_row_violation: float
    max_bound_violation: float
    max_integrality_violation: float
    objective_recomputed: float
    feasible: bool


class Verdict(Enum):
    BETTER = "better"
    TIED = "tied"
    WORSE = "worse"
    INFEASIBLE = "infeasible"
    UNVERIFIABLE = "unverifiable"
    SKIPPED = "skipped"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class RegistryEntry:
    objective: float
    sense: str  # "min" or "max"
    source: str = ""


@dataclass(frozen=True)
class BestKnownRegistry:
    entries: dict[str, RegistryEntry]

    def get(self, name: str) -> Optional[RegistryEntry]:
        return self.entries.get(name)


def load_registry(source: Union[str, Path, IO[str], None] = None) -> BestKnownRegistry:
    """Load a registry JSON map; None loads the shipped best-known fixture."""
    if source is None:
        text = resources.files("milpbench").joinpath("data/best_known.json").read_text()
    elif isinstance(source, str) and source.lstrip().startswith("{"):
        text = source
    elif isinstance(source, (str, Path)):
        text = Path(source).read_text()
    else:
        text = source.read()
    doc = json.loads(text)
    entries = {}
    for name, raw in doc.items():
        sense = raw.get("sense", "min")
        if sense not in ("min", "max"):
            raise ValueError(f"registry entry {name!r}: sense must be 'min' or 'max'")
        entries[name] = RegistryEntry(float(raw["objective"]), sense, raw.get("source", ""))
    return BestKnownRegistry(entries)


def check_feasibility(
    inst: Instance,
    sol: Solution,
    row_tol: float = DEFAULT_ROW_TOL,
    bound_tol: float = DEFAULT_BOUND_TOL,
    int_tol: float = DEFAULT_INT_TOL,
) -> FeasibilityReport:
    """Exact violation accounting; missing variable values default to 0."""
    x = []
    missing = []
    for v in inst.variables:
        if v.name in sol.values:
            x.append(float(sol.values[v.name]))
        else:
            x.append(0.0)
            missing.append(v.name)
    if missing:
        warnings.warn(f"solution is missing {len(missing)} variable value(s); defaulting to 0")

    max_bound = 0.0
    max_int = 0.0
    for j, v in enumerate(inst.variables):
        scale = max(1.0, abs(v.lower) if v.lower > -float("inf") else 1.0)
        if x[j] < v.lower:
            max_bound = max(max_bound, (v.lower - x[j]) / scale)
        scale = max(1.0, abs(v.upper) if v.upper < float("inf") else 1.0)
        if x[j] > v.upper:
            max_bound = max(max_bound, (x[j] - v.upper) / scale)
        if v.is_integral:
            max_int = max(max_int, abs(x[j] - round(x[j])))

    max_row = 0.0
    for row in inst.rows:
        act = sum(c * x[j] for j, c in row.coefficients)
        lo, hi = row.interval()
        if act > hi:
            max_row = max(max_row, (act - hi) / max(1.0, abs(hi)))
        if act < lo:
            max_row = max(max_row, (lo - act) / max(1.0, abs(lo)))

    objective = inst.objective_value(x)
    feasible = max_row <= row_tol and max_bound <= bound_tol and max_int <= int_tol
    return FeasibilityReport(
        max_row_violation=max_row,
        max_bound_violation=max_bound,
        max_integrality_violation=max_int,
        objective_recomputed=objective,
        feasible=feasible,
    )


def compare_incumbent(
    new_obj: float,
    registry_entry: Union[RegistryEntry, tuple[float, str]],
    strict_tol: float = DEFAULT_STRICT_TOL,
) -> Verdict:
    """Strictly-better test with a relative tolerance on the previous best."""
    if isinstance(registry_entry, tuple):
        registry_entry = RegistryEntry(registry_entry[0], registry_entry[1])
    prev = registry_entry.objective
    threshold = strict_tol * max(1.0, abs(prev))
    if abs(new_obj - prev) <= threshold:
        return Verdict.TIED
    if registry_entry.sense == "min":
        return Verdict.BETTER if new_obj < prev - threshold else Verdict.WORSE
    return Verdict.BETTER if new_obj > prev + threshold else Verdict.WORSE


@dataclass(frozen=True)
class AuditEntry:
    instance: str
    verdict: Verdict
    report: Optional[FeasibilityReport]
    note: str = ""


def audit_log_incumbents(
    log: RunLog,
    instances: dict[str, Union[str, Path]],
    registry: BestKnownRegistry,
    row_tol: float = DEFAULT_ROW_TOL,
    bound_tol: float = DEFAULT_BOUND_TOL,
    int_tol: float = DEFAULT_INT_TOL,
    strict_tol: float = DEFAULT_STRICT_TOL,
) -> list[AuditEntry]:
    """Re-check every logged solution and classify it against the registry.

    Records without solutions are skipped with a note; unreadable files or
    missing instance paths yield "unverifiable" instead of aborting.
    """
    from .mps import MpsParseError, load_instance

    out: list[AuditEntry] = []
    for record in log.records:
        name = record.instance_name
        if not record.solution_path:
            out.append(AuditEntry(name, Verdict.SKIPPED, None, "record carries no solution"))
            continue
        inst_path = instances.get(name)
        if inst_path is None:
            out.append(AuditEntry(name, Verdict.UNVERIFIABLE, None, "no instance path supplied"))
            continue
        try:
            inst = load_instance(inst_path)
            values, file_obj = read_solution(record.solution_path)
        except (OSError, ValueError, MpsParseError) as exc:
            out.append(AuditEntry(name, Verdict.UNVERIFIABLE, None, f"unreadable: {exc}"))
            continue
        report = check_feasibility(
            inst, Solution(values, file_obj if file_obj is not None else 0.0), row_tol, bound_tol, int_tol
        )
        if not report.feasible:
            out.append(AuditEntry(name, Verdict.INFEASIBLE, report, "feasibility gate failed"))
            continue
        entry = registry.get(name)
        if entry is None:
            out.append(AuditEntry(name, Verdict.UNKNOWN, report, "no registry entry"))
            continue
        verdict = compare_incumbent(report.objective_recomputed, entry, strict_tol)
        out.append(AuditEntry(name, verdict, report))
    return out
