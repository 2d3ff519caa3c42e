"""Small dense SDP engine plus builders and deciders for compatibility questions."""

from __future__ import annotations

from .builders import (
    build_compat,
    build_jordan_compat,
    build_k_extension,
    build_povm_compat,
    build_state_compat,
    two_marginal_problem,
)
from .ipm import solve_ipm
from .problem import SdpOutcome, SdpProblem, compile_ipm, vec_to_herm_many
from .projection import solve_dykstra

DECISION_TOL = 1e-7
IPM_EMBEDDED_CAP = 512
PROJECTION_EMBEDDED_CAP = 2048


def solve(problem: SdpProblem, mode: str = "interior_point", decision_tol: float = DECISION_TOL,
          max_iter: int | None = None, tol: float = 1e-9) -> SdpOutcome:
    """Solve a compatibility program.

    interior_point maximizes t and reports Feasible/Infeasible by the sign
    of the optimum (within the decision band), with dual multipliers for
    certificate extraction.  projection runs Dykstra alternating
    projections and reports Feasible with a primal point or Inconclusive.
    """
    if mode == "interior_point":
        embedded = sum(2 * v.side for v in problem.variables)
        if embedded > IPM_EMBEDDED_CAP:
            raise ValueError(
                f"interior-point cap is {IPM_EMBEDDED_CAP} embedded, got {embedded}"
            )
        comp = compile_ipm(problem)
        res = solve_ipm(comp.C_blocks, comp.A_blocks, comp.b,
                        max_iter=max_iter or 200, tol=tol)
        residuals = {
            "primal": res.res_primal,
            "dual": res.res_dual,
            "gap": res.rel_gap,
            "dual_objective": res.dobj,
            "removed_redundant_rows": comp.removed_redundant,
            "dropped_directions": comp.dropped_directions,
        }
        note = res.note
        loose = (
            not res.converged
            and res.res_primal <= 1e-7
            and res.res_dual <= 1e-7
            and res.rel_gap <= 1e-7
        )
        if loose:
            note = (note + "; " if note else "") + (
                "converged loosely: residuals above the 1e-9 target but "
                "within the 1e-7 certificate tolerance"
            )
        if not res.converged and not loose:
            return SdpOutcome("Inconclusive", res.pobj, residuals=residuals,
                              iterations=res.iterations, decision_tol=decision_tol,
                              note=note or "solver did not converge")
        primal = comp.vars_of(comp.params_of(res.y))
        dual = comp.dual_to_complex(res.Z_blocks)
        alpha = res.pobj
        if abs(alpha) < decision_tol:
            note = (note + "; " if note else "") + "optimum inside the decision band"
        status = "Feasible" if alpha >= -decision_tol else "Infeasible"
        return SdpOutcome(status, alpha, primal=primal, dual=dual, residuals=residuals,
                          iterations=res.iterations, decision_tol=decision_tol, note=note)

    if mode == "projection":
        embedded = sum(2 * v.side for v in problem.variables)
        if embedded > PROJECTION_EMBEDDED_CAP:
            raise ValueError(
                f"projection cap is {PROJECTION_EMBEDDED_CAP} embedded, got {embedded}"
            )
        res = solve_dykstra(problem, max_iter=max_iter or 50000)
        residuals = {"psd_violation": res.violation}
        if not res.feasible:
            return SdpOutcome("Inconclusive", float("nan"), residuals=residuals,
                              iterations=res.iterations, decision_tol=decision_tol,
                              note="projection did not reach feasibility")
        primal = {}
        off = 0
        for v in problem.variables:
            primal[v.name] = vec_to_herm_many(res.params[off : off + v.nparams][None, :], v.side)[0]
            off += v.nparams
        return SdpOutcome("Feasible", 0.0, primal=primal, residuals=residuals,
                          iterations=res.iterations, decision_tol=decision_tol,
                          note="projection mode: feasibility only")

    raise ValueError(f"unknown mode {mode!r}")


__all__ = [
    "DECISION_TOL",
    "SdpOutcome",
    "SdpProblem",
    "build_compat",
    "build_jordan_compat",
    "build_k_extension",
    "build_povm_compat",
    "build_state_compat",
    "two_marginal_problem",
    "solve",
    "solve_dykstra",
    "solve_ipm",
]
