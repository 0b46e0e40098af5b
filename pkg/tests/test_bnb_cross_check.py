"""Cross-validation of the tree search against an independent MILP solver
(scipy's HiGHS backend) on random mixed integer/continuous instances."""

import math

import numpy as np
import pytest
from scipy.optimize import Bounds, LinearConstraint, milp

from milpbench.instance import Instance, Relation, Sense, Variable, VarKind, make_row
from milpbench.solver import (
    BranchRule,
    NodeStrategy,
    ReferenceSolverOptions,
    SolveStatus,
    branch_and_bound,
)


def random_mip(rng: np.random.Generator) -> Instance:
    n = int(rng.integers(2, 7))
    variables = []
    for j in range(n):
        roll = rng.random()
        lo = float(rng.integers(-3, 1))
        if roll < 0.5:
            variables.append(Variable(f"v{j}", 0.0, 1.0, VarKind.BINARY))
        elif roll < 0.75:
            variables.append(Variable(f"v{j}", lo, lo + float(rng.integers(2, 7)), VarKind.INTEGER))
        else:
            variables.append(Variable(f"v{j}", lo, lo + float(rng.integers(2, 9)), VarKind.CONTINUOUS))
    m = int(rng.integers(1, 5))
    rows = []
    for i in range(m):
        k = int(rng.integers(1, n + 1))
        support = sorted(int(j) for j in rng.choice(n, size=k, replace=False))
        coeffs = [(j, float(int(rng.integers(-4, 5)) or 3)) for j in support]
        relation = (Relation.LE, Relation.GE, Relation.EQ)[int(rng.integers(0, 3))]
        mid = sum(c * (variables[j].lower + variables[j].upper) / 2.0 for j, c in coeffs)
        rhs = float(round(mid + rng.integers(-3, 4)))
        rows.append(make_row(f"r{i}", coeffs, relation, rhs))
    objective = [(j, float(int(rng.integers(-5, 6)))) for j in range(n)]
    return Instance(
        name="xmip",
        sense=Sense.MINIMIZE,
        variables=tuple(variables),
        rows=tuple(rows),
        objective=tuple(objective),
    )


def scipy_milp_reference(inst: Instance):
    n = inst.n_vars
    c = np.zeros(n)
    for j, v in inst.objective:
        c[j] = v
    a = np.zeros((len(inst.rows), n))
    lo = np.empty(len(inst.rows))
    hi = np.empty(len(inst.rows))
    for i, row in enumerate(inst.rows):
        for j, v in row.coefficients:
            a[i, j] = v
        lo[i], hi[i] = row.interval()
    integrality = np.array([1 if v.is_integral else 0 for v in inst.variables])
    bounds = Bounds(
        np.array([v.lower for v in inst.variables]),
        np.array([v.upper for v in inst.variables]),
    )
    constraints = LinearConstraint(a, lo, hi) if len(inst.rows) else ()
    # presolve off: the bundled HiGHS (scipy 1.15) mis-reports some feasible
    # mixed instances as infeasible when its presolve runs
    return milp(
        c,
        constraints=constraints,
        integrality=integrality,
        bounds=bounds,
        options={"presolve": False},
    )


OPTS = [
    ReferenceSolverOptions(),
    ReferenceSolverOptions(
        node_strategy=NodeStrategy.DEPTH_FIRST,
        branch_rule=BranchRule.PSEUDOCOST,
        gomory_rounds=2,
        cover_cuts=True,
        presolve_bound_tighten=True,
        presolve_coeff_reduce=True,
        diving=True,
    ),
]


def test_matches_independent_milp_solver():
    rng = np.random.default_rng(161803)
    agree_optimal = agree_infeasible = 0
    for _ in range(120):
        inst = random_mip(rng)
        ref = scipy_milp_reference(inst)
        for opts in OPTS:
            mine = branch_and_bound(inst, opts)
            if ref.status == 0:
                assert mine.status is SolveStatus.OPTIMAL, inst
                assert mine.incumbent.objective == pytest.approx(ref.fun, abs=1e-6, rel=1e-6)
            elif ref.status == 2:
                assert mine.status is SolveStatus.INFEASIBLE, inst
        if ref.status == 0:
            agree_optimal += 1
        elif ref.status == 2:
            agree_infeasible += 1
    assert agree_optimal >= 40
    assert agree_infeasible >= 10


def test_incumbent_objective_consistent_with_values():
    rng = np.random.default_rng(2718)
    for _ in range(40):
        inst = random_mip(rng)
        out = branch_and_bound(inst, OPTS[1])
        if out.incumbent is None:
            continue
        recomputed = inst.objective_value(
            [out.incumbent.values[v.name] for v in inst.variables]
        )
        scale = max(1.0, abs(recomputed))
        assert math.isclose(out.incumbent.objective, recomputed, rel_tol=0, abs_tol=1e-9 * scale)
