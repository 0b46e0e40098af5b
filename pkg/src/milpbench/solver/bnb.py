"""Deterministic branch-and-bound over the bounded-simplex LP engine.

Gomory and cover cuts are separated at the root; node selection and
branching follow the configured strategies with fixed index-based tie
breaking.  The clock is consulted only for termination, so two runs with
identical inputs traverse identical trees.
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

import numpy as np

from ..instance import Instance
from .cuts import cover_cuts, gomory_cuts
from .options import BranchRule, NodeStrategy, ReferenceSolverOptions
from .presolve import presolve
from .simplex import BoundedSimplex, LpStatus, SimplexBreakdown
from .standard_form import StandardForm, to_standard_form

_INT_TOL = 1e-6
_FEAS_TOL = 1e-7
_OPT_TOL = 1e-9
_COVER_ROUNDS = 5


class SolveStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    TIME_LIMIT = "time_limit"
    NODE_LIMIT = "node_limit"
    ERROR = "error"


@dataclass(frozen=True)
class Solution:
    values: dict[str, float]
    objective: float


@dataclass
class SolveOutcome:
    status: SolveStatus
    incumbent: Optional[Solution]
    best_bound: float
    gap: float
    nodes: int
    wall_time_s: float
    deterministic_ticks: int


def compute_gap(incumbent_obj: Optional[float], best_bound: float, sense=None) -> float:
    """Relative optimality gap; infinity when there is no incumbent.

    Symmetric in sense: |incumbent - bound| / max(1e-10, |incumbent|).
    """
    if incumbent_obj is None or not math.isfinite(best_bound):
        return math.inf
    return abs(incumbent_obj - best_bound) / max(1e-10, abs(incumbent_obj))


@dataclass
class _Node:
    bound_est: float
    depth: int
    node_id: int
    lb: np.ndarray
    ub: np.ndarray
    branch_var: int = -1
    branch_up: bool = False
    parent_obj: float = math.nan
    parent_frac: float = math.nan

    def __lt__(self, other: "_Node") -> bool:
        return (self.bound_est, -self.depth, self.node_id) < (
            other.bound_est,
            -other.depth,
            other.node_id,
        )


class _Search:
    """Mutable solve state: extended matrix, counters, pseudocosts."""

    def __init__(self, form: StandardForm, opts: ReferenceSolverOptions):
        self.opts = opts
        self.base = form
        self.A = form.A.copy()
        self.rlo = form.rlo.copy()
        self.rup = form.rup.copy()
        self.c = form.c
        self.is_int = form.is_int
        self.int_idx = np.flatnonzero(form.is_int)
        self.ticks = 0
        self.nodes = 0
        self.pc_up = np.maximum(np.abs(form.c), 1e-6)  # cold start from cost magnitudes
        self.pc_dn = self.pc_up.copy()
        self.pc_up_count = np.zeros(form.n)
        self.pc_dn_count = np.zeros(form.n)

    def lp(self, lb: np.ndarray, ub: np.ndarray):
        form = StandardForm(
            name=self.base.name,
            c=self.c,
            A=self.A,
            rlo=self.rlo,
            rup=self.rup,
            lb=lb,
            ub=ub,
            is_int=self.is_int,
            var_names=self.base.var_names,
            obj_constant=self.base.obj_constant,
            flipped=self.base.flipped,
        )
        splx = BoundedSimplex(form, feas_tol=_FEAS_TOL, opt_tol=_OPT_TOL)
        res = splx.solve()
        self.ticks += res.iterations
        return splx, res.status, res.objective, res.point

    def add_cut_rows(self, cuts: list[tuple[np.ndarray, float]]) -> None:
        for g, rhs in cuts:
            self.A = np.vstack([self.A, g[np.newaxis, :]])
            self.rlo = np.append(self.rlo, rhs)
            self.rup = np.append(self.rup, np.inf)

    def rows_ok(self, x: np.ndarray, tol: float = _INT_TOL) -> bool:
        if not self.A.shape[0]:
            return True
        act = self.A @ x
        scale = np.ones(self.A.shape[0])
        finite_lo = np.isfinite(self.rlo)
        finite_hi = np.isfinite(self.rup)
        scale[finite_lo] = np.maximum(scale[finite_lo], np.abs(self.rlo[finite_lo]))
        scale[finite_hi] = np.maximum(scale[finite_hi], np.abs(self.rup[finite_hi]))
        lo_ok = ~finite_lo | (act >= self.rlo - tol * scale)
        hi_ok = ~finite_hi | (act <= self.rup + tol * scale)
        return bool(np.all(lo_ok & hi_ok))

    def fractional(self, x: np.ndarray) -> np.ndarray:
        f = np.abs(x[self.int_idx] - np.round(x[self.int_idx]))
        return self.int_idx[f > _INT_TOL]

    def pick_branch_var(self, x: np.ndarray, cand: np.ndarray) -> int:
        frac = x[cand] - np.floor(x[cand])
        if self.opts.branch_rule is BranchRule.MOST_FRACTIONAL:
            score = np.minimum(frac, 1.0 - frac)
        else:
            score = np.maximum(self.pc_dn[cand] * frac, 1e-6) * np.maximum(
                self.pc_up[cand] * (1.0 - frac), 1e-6
            )
        best = np.flatnonzero(score == score.max())
        return int(cand[best[0]])  # lowest index wins ties

    def observe_pseudocost(self, node: _Node, child_obj: float) -> None:
        j = node.branch_var
        if j < 0 or not math.isfinite(node.parent_obj):
            return
        degrade = max(0.0, child_obj - node.parent_obj)
        if node.branch_up:
            unit = degrade / max(1.0 - node.parent_frac, 1e-6)
            k = self.pc_up_count[j]
            self.pc_up[j] = (self.pc_up[j] * k + unit) / (k + 1)
            self.pc_up_count[j] = k + 1
        else:
            unit = degrade / max(node.parent_frac, 1e-6)
            k = self.pc_dn_count[j]
            self.pc_dn[j] = (self.pc_dn[j] * k + unit) / (k + 1)
            self.pc_dn_count[j] = k + 1


def branch_and_bound(
    inst: Instance,
    opts: ReferenceSolverOptions,
    clock: Callable[[], float] = time.monotonic,
) -> SolveOutcome:
    """Exact tree search honoring the configured options."""
    t0 = clock()
    deadline = t0 + opts.time_limit_s

    pres = presolve(inst, opts)
    form = to_standard_form(pres.instance)
    names = form.var_names
    n = form.n

    incumbent_obj: Optional[float] = None
    x_inc: Optional[np.ndarray] = None
    search = _Search(form, opts)

    def finish(status: SolveStatus, internal_bound: float) -> SolveOutcome:
        sol = None
        if incumbent_obj is not None and x_inc is not None:
            user_obj = form.user_objective(incumbent_obj + form.obj_constant)
            sol = Solution({names[j]: float(x_inc[j]) for j in range(n)}, user_obj)
            internal_bound = min(internal_bound, incumbent_obj)
        if math.isfinite(internal_bound):
            user_bound = form.user_objective(internal_bound + form.obj_constant)
        else:
            user_bound = -internal_bound if form.flipped else internal_bound
        return SolveOutcome(
            status=status,
            incumbent=sol,
            best_bound=user_bound,
            gap=compute_gap(sol.objective if sol else None, user_bound),
            nodes=search.nodes,
            wall_time_s=clock() - t0,
            deterministic_ticks=search.ticks,
        )

    if pres.proven_infeasible:
        return finish(SolveStatus.INFEASIBLE, math.inf)

    def accept_candidate(x: np.ndarray, lb: np.ndarray, ub: np.ndarray) -> None:
        """Snap integers, exactly complete the continuous part, verify, keep."""
        nonlocal incumbent_obj, x_inc
        snapped = x.copy()
        ii = search.int_idx
        snapped[ii] = np.round(snapped[ii])
        snapped = np.clip(snapped, lb, ub)
        if not search.rows_ok(snapped):
            if ii.size == n:
                return
            lb2, ub2 = lb.copy(), ub.copy()
            lb2[ii] = snapped[ii]
            ub2[ii] = snapped[ii]
            try:
                _, st, _, pt = search.lp(lb2, ub2)
            except SimplexBreakdown:
                return
            if st is not LpStatus.OPTIMAL or not search.rows_ok(pt):
                return
            snapped = pt
            snapped[ii] = np.round(snapped[ii])
        obj = float(search.c @ snapped)
        if incumbent_obj is None or obj < incumbent_obj - 1e-12:
            incumbent_obj = obj
            x_inc = snapped

    # ---- root ----
    root_lb = form.lb.copy()
    root_ub = form.ub.copy()
    try:
        splx, status, obj, x = search.lp(root_lb, root_ub)
        search.nodes += 1
        if status is LpStatus.INFEASIBLE:
            return finish(SolveStatus.INFEASIBLE, math.inf)
        if status is LpStatus.UNBOUNDED:
            return finish(SolveStatus.ERROR, -math.inf)

        max_rounds = max(opts.gomory_rounds, _COVER_ROUNDS if opts.cover_cuts else 0)
        for rnd in range(max_rounds):
            if search.fractional(x).size == 0:
                break
            cuts: list[tuple[np.ndarray, float]] = []
            if rnd < opts.gomory_rounds:
                cuts.extend(gomory_cuts(splx, search.is_int))
            if opts.cover_cuts:
                cuts.extend(
                    cover_cuts(search.A, search.rlo, search.rup, root_lb, root_ub, search.is_int, x)
                )
            if not cuts:
                break
            search.add_cut_rows(cuts)
            splx, status, obj, x = search.lp(root_lb, root_ub)
            if status is LpStatus.INFEASIBLE:
                return finish(SolveStatus.INFEASIBLE, math.inf)
            if status is LpStatus.UNBOUNDED:
                return finish(SolveStatus.ERROR, -math.inf)
    except SimplexBreakdown:
        return finish(SolveStatus.ERROR, -math.inf)

    root_obj, root_x = obj, x

    if opts.diving and search.fractional(root_x).size:
        lbd, ubd = root_lb.copy(), root_ub.copy()
        xd = root_x
        for _ in range(2 * max(1, search.int_idx.size)):
            if clock() >= deadline:
                break
            cand = search.fractional(xd)
            if cand.size == 0:
                accept_candidate(xd, lbd, ubd)
                break
            frac = xd[cand] - np.floor(xd[cand])
            j = int(cand[int(np.argmin(np.minimum(frac, 1.0 - frac)))])
            val = min(max(float(np.round(xd[j])), lbd[j]), ubd[j])
            lbd[j] = ubd[j] = val
            try:
                _, st, _, xd_new = search.lp(lbd, ubd)
            except SimplexBreakdown:
                break
            if st is not LpStatus.OPTIMAL:
                break
            xd = xd_new

    # ---- tree ----
    best_heap: list[_Node] = []
    stack: list[_Node] = []
    next_id = 1
    use_heap = opts.node_strategy is NodeStrategy.BEST_BOUND

    def push(node: _Node) -> None:
        if use_heap:
            heapq.heappush(best_heap, node)
        else:
            stack.append(node)

    def open_bound() -> float:
        if use_heap:
            return best_heap[0].bound_est if best_heap else math.inf
        return min((nd.bound_est for nd in stack), default=math.inf)

    def prune_eps() -> float:
        return 1e-9 * max(1.0, abs(incumbent_obj)) if incumbent_obj is not None else 0.0

    def branch(parent_obj: float, depth: int, lb, ub, x_frac) -> None:
        nonlocal next_id
        cand = search.fractional(x_frac)
        j = search.pick_branch_var(x_frac, cand)
        frac = x_frac[j] - math.floor(x_frac[j])
        dn = _Node(parent_obj, depth, next_id, lb.copy(), ub.copy(), j, False, parent_obj, frac)
        dn.ub[j] = math.floor(x_frac[j])
        up = _Node(parent_obj, depth, next_id + 1, lb.copy(), ub.copy(), j, True, parent_obj, frac)
        up.lb[j] = math.ceil(x_frac[j])
        next_id += 2
        push(up)
        push(dn)

    if search.fractional(root_x).size == 0:
        accept_candidate(root_x, root_lb, root_ub)
        if incumbent_obj is None:  # integral point rejected by the row check
            return finish(SolveStatus.ERROR, root_obj)
        return finish(SolveStatus.OPTIMAL, root_obj)
    branch(root_obj, 1, root_lb, root_ub, root_x)

    limit_status: Optional[SolveStatus] = None
    while best_heap or stack:
        if clock() >= deadline:
            limit_status = SolveStatus.TIME_LIMIT
            break
        if opts.node_limit is not None and search.nodes >= opts.node_limit:
            limit_status = SolveStatus.NODE_LIMIT
            break
        if incumbent_obj is not None:
            bound_now = min(open_bound(), incumbent_obj)
            threshold = max(opts.rel_gap, opts.abs_gap / max(1e-10, abs(incumbent_obj)))
            if compute_gap(incumbent_obj, bound_now) <= threshold:
                break

        node = stack.pop() if not use_heap else heapq.heappop(best_heap)
        if incumbent_obj is not None and node.bound_est >= incumbent_obj - prune_eps():
            continue

        try:
            _, status, obj, x = search.lp(node.lb, node.ub)
        except SimplexBreakdown:
            limit_status = SolveStatus.ERROR
            break
        search.nodes += 1
        if status is LpStatus.INFEASIBLE:
            continue
        if status is LpStatus.UNBOUNDED:
            limit_status = SolveStatus.ERROR
            break
        search.observe_pseudocost(node, obj)
        if incumbent_obj is not None and obj >= incumbent_obj - prune_eps():
            continue
        if search.fractional(x).size == 0:
            accept_candidate(x, node.lb, node.ub)
            continue
        branch(obj, node.depth + 1, node.lb, node.ub, x)

    if limit_status is not None:
        bound = open_bound()
        if limit_status is SolveStatus.ERROR and incumbent_obj is None and not math.isfinite(bound):
            bound = -math.inf
        return finish(limit_status, bound)

    if incumbent_obj is None:
        return finish(SolveStatus.INFEASIBLE, math.inf)
    return finish(SolveStatus.OPTIMAL, open_bound())
