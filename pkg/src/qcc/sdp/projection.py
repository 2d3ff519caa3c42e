"""Dykstra alternating projections for pure feasibility questions.

Alternates between the affine set of the equality constraints (an
orthonormalized dense constraint matrix, applied as two matvecs) and the
PSD cone of each block.  Memory-light compared to the interior-point
path, which is what makes the larger extension problems tractable, but
it forfeits dual certificates: the outcome is Feasible with a verified
point, or Inconclusive.  A stalled violation (typical of infeasible
instances, where the iterates approach the positive gap between the two
sets) exits early.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..linalg import ptranspose_array
from .problem import SdpProblem, _constraint_matrix, herm_to_vec_many, vec_to_herm_many

MAX_ITER = 50000
FEAS_PSD_TOL = 1e-9
CHECK_EVERY = 8
STALL_WINDOW = 400
STALL_FACTOR = 0.95  # require >= 5 percent improvement per window


@dataclass
class ProjectionResult:
    feasible: bool
    params: np.ndarray
    violation: float
    iterations: int


def solve_dykstra(problem: SdpProblem, max_iter: int = MAX_ITER,
                  feas_tol: float = FEAS_PSD_TOL, check_every: int = CHECK_EVERY) -> ProjectionResult:
    for block in problem.blocks:
        if block.kind not in ("identity", "ptranspose"):
            raise ValueError("projection mode supports PSD blocks on the variables only")

    var_offsets = {}
    off = 0
    for v in problem.variables:
        var_offsets[v.name] = off
        off += v.nparams

    kmat, bvec = _constraint_matrix(problem, var_offsets)
    u, s, vh = np.linalg.svd(kmat, full_matrices=False)
    rank = int(np.sum(s > 1e-12 * (s[0] if s.size else 1.0)))
    rows = vh[:rank]  # orthonormal row-space basis, (r, P)
    x0 = rows.T @ ((u[:, :rank].T @ bvec) / s[:rank])
    resid = np.abs(kmat @ x0 - bvec).max() if bvec.size else 0.0
    if resid > 1e-9 * max(1.0, np.abs(bvec).max() if bvec.size else 1.0):
        raise ValueError(f"equality constraints are inconsistent (residual {resid:.3e})")
    c_rows = rows @ x0

    def proj_affine(x):
        return x - rows.T @ (rows @ x - c_rows)

    psd_sets = [(block, problem.variable(block.var)) for block in problem.blocks]

    def proj_psd(x, block, var):
        o = var_offsets[var.name]
        sl = slice(o, o + var.nparams)
        mat = vec_to_herm_many(x[sl][None, :], var.side)[0]
        if block.kind == "ptranspose":
            mat = ptranspose_array(mat, var.factors, block.factor)
        w, v = np.linalg.eigh(mat)
        mat = (v * np.maximum(w, 0.0)) @ v.conj().T
        if block.kind == "ptranspose":
            mat = ptranspose_array(mat, var.factors, block.factor)
        out = x.copy()
        out[sl] = herm_to_vec_many(mat[None, :, :])[0]
        return out

    def violation_of(x):
        worst = 0.0
        for block, var in psd_sets:
            o = var_offsets[var.name]
            mat = vec_to_herm_many(x[o : o + var.nparams][None, :], var.side)[0]
            if block.kind == "ptranspose":
                mat = ptranspose_array(mat, var.factors, block.factor)
            worst = max(worst, -float(np.linalg.eigvalsh(mat).min()))
        return worst

    x = x0
    increments = [np.zeros(x.size) for _ in psd_sets]
    best = x
    best_viol = violation_of(x)
    window_best = best_viol
    it = 0
    for it in range(1, max_iter + 1):
        for k, (block, var) in enumerate(psd_sets):
            y = proj_psd(x + increments[k], block, var)
            increments[k] = x + increments[k] - y
            x = y
        x = proj_affine(x)
        if it % check_every == 0 or it == max_iter:
            viol = violation_of(x)
            if viol < best_viol:
                best, best_viol = x, viol
            if viol <= feas_tol:
                return ProjectionResult(True, x, viol, it)
            if it % STALL_WINDOW == 0:
                if best_viol > window_best * STALL_FACTOR and best_viol > 100 * feas_tol:
                    break
                window_best = best_viol
    return ProjectionResult(False, best, best_viol, it)
