"""Presolve reductions: iterated single-row bound tightening and coefficient
reduction on rows with binary support.

Both passes preserve the variable space, so the back map is an identity on
variable names; redundant rows may be dropped.  Disabled passes leave the
instance structurally untouched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..instance import INF, Instance, LinearRow, Relation, Variable
from .options import ReferenceSolverOptions

_MAX_PASSES = 50
_EPS = 1e-9


@dataclass(frozen=True)
class BackMap:
    """Maps a reduced-space solution to the full space (identity here:
    reductions never remove variables)."""

    var_names: tuple[str, ...]
    dropped_rows: tuple[str, ...]

    def to_full(self, values: dict[str, float]) -> dict[str, float]:
        return {name: values[name] for name in self.var_names}


@dataclass(frozen=True)
class PresolveResult:
    instance: Instance
    back_map: BackMap
    proven_infeasible: bool
    passes: int


def _activity_bounds(coeffs, lb, ub):
    """(min, max) of a row activity over the variable box; inf-aware."""
    lo = hi = 0.0
    for j, a in coeffs:
        if a > 0:
            lo += a * lb[j] if math.isfinite(lb[j]) else -INF
            hi += a * ub[j] if math.isfinite(ub[j]) else INF
        elif a < 0:
            lo += a * ub[j] if math.isfinite(ub[j]) else -INF
            hi += a * lb[j] if math.isfinite(lb[j]) else INF
    return lo, hi


def _tighten_bounds(rows, lb, ub, is_int) -> tuple[bool, bool]:
    """One pass; returns (changed, infeasible)."""
    changed = False
    for row in rows:
        rlo, rup = row.interval()
        for j, a in row.coefficients:
            if a == 0.0:
                continue
            coeffs_others = [(k, v) for k, v in row.coefficients if k != j]
            olo, ohi = _activity_bounds(coeffs_others, lb, ub)
            # a*x_j <= rup - olo   and   a*x_j >= rlo - ohi
            new_lo, new_hi = lb[j], ub[j]
            if math.isfinite(rup) and olo > -INF:
                limit = (rup - olo) / a
                if a > 0:
                    new_hi = min(new_hi, limit)
                else:
                    new_lo = max(new_lo, limit)
            if rlo > -INF and math.isfinite(ohi):
                limit = (rlo - ohi) / a
                if a > 0:
                    new_lo = max(new_lo, limit)
                else:
                    new_hi = min(new_hi, limit)
            if is_int[j]:
                if math.isfinite(new_lo):
                    new_lo = math.ceil(new_lo - 1e-7)
                if math.isfinite(new_hi):
                    new_hi = math.floor(new_hi + 1e-7)
            if new_lo > lb[j] + _EPS:
                lb[j] = new_lo
                changed = True
            if new_hi < ub[j] - _EPS:
                ub[j] = new_hi
                changed = True
            if lb[j] > ub[j] + _EPS:
                return changed, True
    return changed, False


def _reduce_row(row: LinearRow, lb, ub, is_int) -> tuple[LinearRow | None, bool]:
    """Coefficient reduction on one <=/>= row; returns (new row or None if
    redundant, changed)."""
    if row.relation not in (Relation.LE, Relation.GE):
        return row, False
    sign = 1.0 if row.relation is Relation.LE else -1.0
    coeffs = {j: sign * a for j, a in row.coefficients}
    rhs = sign * row.rhs

    _, umax = _activity_bounds(list(coeffs.items()), lb, ub)
    if not math.isfinite(umax):
        return row, False
    if umax <= rhs + _EPS:
        return None, True  # redundant

    changed = False
    for j in sorted(coeffs):
        a = coeffs[j]
        if a == 0.0 or not is_int[j] or lb[j] != 0.0 or ub[j] != 1.0:
            continue
        if a > 0:
            # constraint binds only through x_j = 1
            if umax - a < rhs < umax:
                new_a = umax - rhs
                rhs = umax - a
                umax = umax - a + new_a
                coeffs[j] = new_a
                changed = True
        else:
            # complemented variable carries weight -a; rhs and umax unchanged
            if umax < rhs - a and rhs < umax:
                coeffs[j] = rhs - umax
                changed = True
    if not changed:
        return row, False
    out = tuple(sorted((j, float(sign * a)) for j, a in coeffs.items() if a != 0.0))
    return LinearRow(row.name, out, row.relation, float(sign * rhs), None), True


def presolve(inst: Instance, opts: ReferenceSolverOptions) -> PresolveResult:
    """Apply the enabled reductions; identity when both toggles are off."""
    names = tuple(v.name for v in inst.variables)
    if not (opts.presolve_bound_tighten or opts.presolve_coeff_reduce):
        return PresolveResult(inst, BackMap(names, ()), False, 0)

    lb = np.array([v.lower for v in inst.variables], dtype=float)
    ub = np.array([v.upper for v in inst.variables], dtype=float)
    is_int = np.array([v.is_integral for v in inst.variables], dtype=bool)
    rows = list(inst.rows)
    dropped: list[str] = []
    passes = 0
    infeasible = bool(np.any(lb > ub + _EPS))

    while not infeasible and passes < _MAX_PASSES:
        passes += 1
        changed = False
        if opts.presolve_bound_tighten:
            tightened, infeasible = _tighten_bounds(rows, lb, ub, is_int)
            changed |= tightened
            if infeasible:
                break
        if opts.presolve_coeff_reduce:
            new_rows = []
            for row in rows:
                reduced, row_changed = _reduce_row(row, lb, ub, is_int)
                if reduced is None:
                    dropped.append(row.name)
                    changed = True
                    continue
                changed |= row_changed
                new_rows.append(reduced)
            rows = new_rows
        if not changed:
            break

    variables = tuple(
        Variable(v.name, float(lb[j]), float(ub[j]), v.kind) for j, v in enumerate(inst.variables)
    )
    reduced = Instance(
        name=inst.name,
        sense=inst.sense,
        variables=variables,
        rows=tuple(rows),
        objective=inst.objective,
        objective_constant=inst.objective_constant,
        objective_name=inst.objective_name,
    )
    return PresolveResult(reduced, BackMap(names, tuple(dropped)), infeasible, passes)
