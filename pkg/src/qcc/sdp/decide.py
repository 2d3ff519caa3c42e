"""Three-valued compatibility decisions backed by verified certificates.

A Compatible verdict carries a primal certificate (a compatibilizer Choi
matrix, or the operator behind a generalized Jordan product) that passes
the channel validation checks; an Incompatible verdict carries a witness
that re-verifies in the witness module.  The two never coexist.  When
the solver cannot produce either at the required quality the verdict is
Inconclusive, with residual diagnostics attached.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from ..channels import Channel, apply_to_factor
from ..jordan import GenJordanOperator, gen_jordan
from ..linalg import (
    HermitianMatrix,
    TensorShape,
    embed_identity_array,
    hermitian_basis,
    ptrace_array,
    ptranspose_array,
)
from ..witness import (
    JordanWitness,
    Witness,
    adjoint_sum,
    verify_jordan_witness,
    verify_witness,
)
from . import DECISION_TOL, solve
from .builders import build_compat, build_jordan_compat, two_marginal_problem
from .problem import SdpOutcome, herm_to_vec_many

CERT_TOL = 1e-7

EXIT_CODES = {"Compatible": 0, "Incompatible": 1, "Inconclusive": 2}


@dataclass
class Decision:
    verdict: str
    value: float
    compatibilizer: Optional[HermitianMatrix] = None
    gen_jordan_op: Optional[GenJordanOperator] = None
    witness: Optional[Union[Witness, JordanWitness]] = None
    witness_margin: float = 0.0
    outcome: Optional[SdpOutcome] = None
    note: str = ""
    diagnostics: dict = field(default_factory=dict)

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.verdict]


def _fit_adjoint_pair(zbig: np.ndarray, factors: tuple[int, int, int]) -> tuple[np.ndarray, np.ndarray]:
    """Least-squares split of an operator in the range of the two adjoint embeddings."""
    dx, d1, d2 = factors
    n1, n2 = dx * d1, dx * d2
    cols = []
    for basis, occ, pos in (
        (hermitian_basis(n1), (dx, d1), (0, 1)),
        (hermitian_basis(n2), (dx, d2), (0, 2)),
    ):
        for k in range(basis.shape[0]):
            big = embed_identity_array(basis[k], occ, factors, pos)
            cols.append(herm_to_vec_many(big[None, :, :])[0])
    kmat = np.array(cols).T
    target = herm_to_vec_many(zbig[None, :, :])[0]
    coeff, *_ = np.linalg.lstsq(kmat, target, rcond=None)
    from .problem import vec_to_herm_many

    z1 = vec_to_herm_many(coeff[: n1 * n1][None, :], n1)[0]
    z2 = vec_to_herm_many(coeff[n1 * n1 :][None, :], n2)[0]
    return z1, z2


def _marginal_dev(x: np.ndarray, factors, j1: np.ndarray, j2: np.ndarray) -> float:
    m1 = ptrace_array(x, factors, [2])
    m2 = ptrace_array(x, factors, [1])
    return max(np.abs(m1 - j1).max(), np.abs(m2 - j2).max())


def _extract_witness(out: SdpOutcome, f: Channel, g: Channel, mode: str) -> Optional[tuple]:
    """Build a (Z1, Z2) witness from the solver dual, with a PSD clean-up shift."""
    if not out.dual:
        return None
    dx, d1, d2 = f.d_in, f.d_out, g.d_out
    zbig = out.dual[0]
    z1, z2 = _fit_adjoint_pair(zbig, (dx, d1, d2))
    min_eig = np.linalg.eigvalsh(adjoint_sum(z1, z2, (dx, d1, d2))).min()
    if min_eig < 0:
        # shifting both parts by eps I moves the adjoint sum by 2 eps I and
        # costs only 2 eps d_x of margin
        eps = 0.75 * (-min_eig) + 1e-15
        z1 = z1 + eps * np.eye(dx * d1)
        z2 = z2 + eps * np.eye(dx * d2)
    w = Witness(
        HermitianMatrix(z1, TensorShape((dx, d1))),
        HermitianMatrix(z2, TensorShape((dx, d2))),
        mode=mode,
    )
    report = verify_witness(w, f, g)
    return w, report


def _decide_compat(f: Channel, g: Channel, decision_tol: float, **solve_opts) -> Decision:
    out = solve(build_compat(f, g), decision_tol=decision_tol, **solve_opts)
    factors = (f.d_in, f.d_out, g.d_out)
    if out.status == "Feasible":
        x = out.primal["X"]
        dev = _marginal_dev(x, factors, f.choi.array, g.choi.array)
        min_eig = np.linalg.eigvalsh(x).min()
        if dev <= CERT_TOL and min_eig >= -CERT_TOL:
            cert = HermitianMatrix(x, TensorShape(factors))
            return Decision("Compatible", out.value, compatibilizer=cert, outcome=out,
                            diagnostics={"marginal_dev": dev, "min_eig": float(min_eig)})
        return Decision("Inconclusive", out.value, outcome=out,
                        note=f"primal certificate failed validation (dev {dev:.2e})")
    if out.status == "Infeasible":
        got = _extract_witness(out, f, g, "plain")
        if got is not None:
            w, report = got
            if report.valid:
                return Decision("Incompatible", out.value, witness=w,
                                witness_margin=report.margin, outcome=out)
        return Decision("Inconclusive", out.value, outcome=out,
                        note="dual certificate failed verification")
    return Decision("Inconclusive", out.value, outcome=out, note=out.note)


def _decide_jordan(f: Channel, g: Channel, decision_tol: float, **solve_opts) -> Decision:
    d = f.d_in
    out = solve(build_jordan_compat(f, g), decision_tol=decision_tol, **solve_opts)
    if out.status == "Feasible":
        a = out.primal["A"]
        try:
            op = GenJordanOperator(HermitianMatrix(a, TensorShape((d, d, d))), tol=CERT_TOL)
        except ValueError as exc:
            return Decision("Inconclusive", out.value, outcome=out, note=str(exc))
        image = gen_jordan(f.rep, g.rep, op)
        min_eig = np.linalg.eigvalsh(image.choi.array).min()
        if min_eig >= -CERT_TOL:
            return Decision("Compatible", out.value, gen_jordan_op=op,
                            compatibilizer=image.choi, outcome=out,
                            diagnostics={"min_eig": float(min_eig)})
        return Decision("Inconclusive", out.value, outcome=out,
                        note=f"product image not PSD at certificate tolerance ({min_eig:.2e})")
    if out.status == "Infeasible" and out.dual:
        rho = out.dual[0]
        w_rho, v_rho = np.linalg.eigh(rho)
        rho_clean = (v_rho * np.maximum(w_rho, 0.0)) @ v_rho.conj().T
        dims = (d, f.d_out, g.d_out)
        lhs, cur = apply_to_factor(rho_clean, dims, 1, f.rep, adjoint=True)
        lhs, _ = apply_to_factor(lhs, cur, 2, g.rep, adjoint=True)
        w1, w2 = _fit_jordan_pair(lhs, d)
        witness = JordanWitness(
            HermitianMatrix(w1, TensorShape((d, d))),
            HermitianMatrix(w2, TensorShape((d, d))),
            HermitianMatrix(rho_clean, TensorShape(dims)),
        )
        report = verify_jordan_witness(witness, f, g)
        if report.valid:
            return Decision("Incompatible", out.value, witness=witness,
                            witness_margin=report.margin, outcome=out)
        return Decision("Inconclusive", out.value, outcome=out,
                        note="dual certificate failed verification")
    return Decision("Inconclusive", out.value, outcome=out, note=out.note)


def _fit_jordan_pair(target: np.ndarray, d: int) -> tuple[np.ndarray, np.ndarray]:
    basis = hermitian_basis(d * d)
    cols = []
    for pos in ((0, 1), (0, 2)):
        for k in range(basis.shape[0]):
            big = embed_identity_array(basis[k], (d, d), (d, d, d), pos)
            cols.append(herm_to_vec_many(big[None, :, :])[0])
    kmat = np.array(cols).T
    tvec = herm_to_vec_many(target[None, :, :])[0]
    coeff, *_ = np.linalg.lstsq(kmat, tvec, rcond=None)
    from .problem import vec_to_herm_many

    n = d * d
    w1 = vec_to_herm_many(coeff[: n * n][None, :], n)[0]
    w2 = vec_to_herm_many(coeff[n * n :][None, :], n)[0]
    return w1, w2


def _decide_ppt(f: Channel, g: Channel, decision_tol: float, **solve_opts) -> Decision:
    """Two stages: a transposed-marginal relaxation whose dual is the ppt
    witness, then (if that is feasible) the full program with both the
    variable and its partial transpose PSD."""
    dx, d1, d2 = f.d_in, f.d_out, g.d_out
    j1t = ptranspose_array(f.choi.array, (dx, d1), 0)
    j2t = ptranspose_array(g.choi.array, (dx, d2), 0)
    relax = two_marginal_problem(j1t, j2t, (dx, d1, d2), name="ppt_relaxation")
    out_a = solve(relax, decision_tol=decision_tol, **solve_opts)
    if out_a.status == "Infeasible":
        got = _extract_witness(out_a, f, g, "ppt")
        if got is not None:
            w, report = got
            if report.valid:
                return Decision("Incompatible", out_a.value, witness=w,
                                witness_margin=report.margin, outcome=out_a)
        return Decision("Inconclusive", out_a.value, outcome=out_a,
                        note="dual certificate failed verification")
    if out_a.status != "Feasible":
        return Decision("Inconclusive", out_a.value, outcome=out_a, note=out_a.note)

    out_b = solve(build_compat(f, g, ppt=True), decision_tol=decision_tol, **solve_opts)
    factors = (dx, d1, d2)
    if out_b.status == "Feasible":
        x = out_b.primal["X"]
        dev = _marginal_dev(x, factors, f.choi.array, g.choi.array)
        min_eig = min(
            np.linalg.eigvalsh(x).min(),
            np.linalg.eigvalsh(ptranspose_array(x, factors, 0)).min(),
        )
        if dev <= CERT_TOL and min_eig >= -CERT_TOL:
            cert = HermitianMatrix(x, TensorShape(factors))
            return Decision("Compatible", out_b.value, compatibilizer=cert, outcome=out_b,
                            diagnostics={"marginal_dev": dev, "min_eig": float(min_eig)})
        return Decision("Inconclusive", out_b.value, outcome=out_b,
                        note="primal certificate failed validation")
    return Decision(
        "Inconclusive", out_b.value, outcome=out_b,
        note="transposed-marginal relaxation is feasible but no PPT compatibilizer "
        "was certified; no witness exists in the ppt certificate format",
    )


def decide(f: Channel, g: Channel, mode: str = "compat",
           decision_tol: float = DECISION_TOL, **solve_opts) -> Decision:
    """Decide compatibility of a channel pair in the requested sense.

    Verdicts are Compatible, Incompatible or Inconclusive; the first two
    always carry a certificate that was re-verified after the solve.
    """
    if f.d_in != g.d_in:
        raise ValueError(f"input dimensions differ: {f.d_in} vs {g.d_in}")
    if mode == "compat":
        return _decide_compat(f, g, decision_tol, **solve_opts)
    if mode == "jordan":
        return _decide_jordan(f, g, decision_tol, **solve_opts)
    if mode == "ppt_compat":
        return _decide_ppt(f, g, decision_tol, **solve_opts)
    raise ValueError(f"unknown decision mode {mode!r}")
