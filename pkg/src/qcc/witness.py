"""Solver-independent construction and verification of incompatibility certificates.

A certificate for a pair of channels is a pair of Hermitian operators
whose partial-trace adjoints sum to a PSD operator while pairing
negatively with the channels' Choi matrices (in ppt mode, with their
partial transposes).  Verification uses only dense linear algebra, never
a solver, so certificates are auditable artifacts.  Validity thresholds
are tighter than solver tolerances on purpose: a certificate should be
decisively valid, not borderline.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .channels import Channel, apply_to_factor
from .linalg import HermitianMatrix, TensorShape, embed_identity_array, ptranspose_array

PSD_TOL = 1e-9
PAIRING_TOL = 1e-9
JORDAN_CONSTRAINT_TOL = 1e-8


@dataclass(frozen=True)
class Witness:
    """Dual certificate (Z1, Z2) on X (x) Y1 and X (x) Y2."""

    z1: HermitianMatrix
    z2: HermitianMatrix
    mode: str = "plain"

    def __post_init__(self):
        if self.mode not in ("plain", "ppt"):
            raise ValueError(f"unknown witness mode {self.mode!r}")
        if len(self.z1.shape.factors) != 2 or len(self.z2.shape.factors) != 2:
            raise ValueError("witness parts must carry two-factor shapes")


@dataclass(frozen=True)
class JordanWitness:
    """Certificate (W1, W2, rho) against Jordan compatibility."""

    w1: HermitianMatrix
    w2: HermitianMatrix
    rho: HermitianMatrix


@dataclass(frozen=True)
class WitnessReport:
    valid: bool
    margin: float
    min_eig: float
    constraint_residual: float = 0.0


def _hs(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.tensordot(a.conj(), b, axes=2).real)


def adjoint_sum(z1: np.ndarray, z2: np.ndarray, factors: tuple[int, int, int]) -> np.ndarray:
    """Tr*_{Y2}(Z1) + Tr*_{Y1}(Z2) on X (x) Y1 (x) Y2.

    The embeddings insert identities at the traced positions, preserving
    the ordering of the spaces.
    """
    dx, d1, d2 = factors
    big1 = embed_identity_array(z1, (dx, d1), factors, (0, 1))
    big2 = embed_identity_array(z2, (dx, d2), factors, (0, 2))
    return big1 + big2


def verify_witness(w: Witness, f: Channel, g: Channel,
                   psd_tol: float = PSD_TOL, pairing_tol: float = PAIRING_TOL) -> WitnessReport:
    """Check the two sides of the alternative: PSD adjoint sum, negative pairing.

    The pairing (reported as ``margin``) is against the Choi matrices in
    plain mode and against their partial transposes on X in ppt mode.
    """
    dx, d1, d2 = f.d_in, f.d_out, g.d_out
    if g.d_in != dx:
        raise ValueError("channels must share the input space")
    if w.z1.shape.factors != (dx, d1) or w.z2.shape.factors != (dx, d2):
        raise ValueError(
            f"witness shapes {w.z1.shape.factors}, {w.z2.shape.factors} do not match "
            f"the channel spaces ({dx},{d1}), ({dx},{d2})"
        )
    big = adjoint_sum(w.z1.array, w.z2.array, (dx, d1, d2))
    min_eig = float(np.linalg.eigvalsh(big).min())
    j1, j2 = f.choi.array, g.choi.array
    if w.mode == "ppt":
        j1 = ptranspose_array(j1, (dx, d1), 0)
        j2 = ptranspose_array(j2, (dx, d2), 0)
    margin = _hs(w.z1.array, j1) + _hs(w.z2.array, j2)
    valid = bool(min_eig >= -psd_tol and margin <= -pairing_tol)
    return WitnessReport(valid, margin, min_eig)


def verify_jordan_witness(w: JordanWitness, f: Channel, g: Channel,
                          psd_tol: float = PSD_TOL, pairing_tol: float = PAIRING_TOL,
                          constraint_tol: float = JORDAN_CONSTRAINT_TOL) -> WitnessReport:
    """Check a certificate against Jordan compatibility.

    Conditions: rho PSD, the adjoint maps applied to rho match the
    embedded multipliers, and the pairing of W1 + W2 with the identity
    map's Choi matrix is negative.
    """
    d = f.d_in
    if g.d_in != d:
        raise ValueError("channels must share the input space")
    if w.w1.shape.factors != (d, d) or w.w2.shape.factors != (d, d):
        raise ValueError("multiplier shapes must be (d, d) factors")
    if w.rho.shape.factors != (d, f.d_out, g.d_out):
        raise ValueError("rho must live on X (x) Y1 (x) Y2")
    dims = (d, f.d_out, g.d_out)
    lhs, cur = apply_to_factor(w.rho.array, dims, 1, f.rep, adjoint=True)
    lhs, _ = apply_to_factor(lhs, cur, 2, g.rep, adjoint=True)
    rhs = adjoint_sum_jordan(w.w1.array, w.w2.array, d)
    constraint_residual = float(np.linalg.norm(lhs - rhs))
    rho_min = float(np.linalg.eigvalsh(w.rho.array).min())
    jid = np.zeros((d * d, d * d), dtype=np.complex128)
    for i in range(d):
        for k in range(d):
            jid[i * d + i, k * d + k] = 1.0
    margin = _hs(w.w1.array + w.w2.array, jid)
    valid = bool(
        constraint_residual <= constraint_tol
        and rho_min >= -psd_tol
        and margin <= -pairing_tol
    )
    return WitnessReport(valid, margin, rho_min, constraint_residual)


def adjoint_sum_jordan(w1: np.ndarray, w2: np.ndarray, d: int) -> np.ndarray:
    """Tr*_{X2}(W1) + Tr*_{X1}(W2) on X (x) X1 (x) X2 (all factors of size d)."""
    factors = (d, d, d)
    big1 = embed_identity_array(w1, (d, d), factors, (0, 1))
    big2 = embed_identity_array(w2, (d, d), factors, (0, 2))
    return big1 + big2


def no_broadcast_witness(d: int) -> Witness:
    """The closed-form witness against self-compatibility of near-identity channels.

    Z1 = Z2 = I - 2/(d+1) * J(id); pairs negatively with partially
    depolarizing channels up to noise d / (2(d+1)), with the pairing
    crossing zero exactly at that threshold.
    """
    if d < 2:
        raise ValueError("dimension must be >= 2")
    jid = np.zeros((d * d, d * d))
    for i in range(d):
        for k in range(d):
            jid[i * d + i, k * d + k] = 1.0
    z = np.eye(d * d) - (2.0 / (d + 1)) * jid
    shape = TensorShape((d, d))
    return Witness(HermitianMatrix(z, shape), HermitianMatrix(z, shape), mode="plain")


# ---------------------------------------------------------------------------
# certificate JSON (shared matrix encoding with the channel format)
# ---------------------------------------------------------------------------


def _matrix_to_json(arr: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(arr, dtype=complex)]


def _matrix_from_json(data) -> np.ndarray:
    arr = np.array([[complex(re, im) for re, im in row] for row in data])
    if np.abs(arr - arr.conj().T).max() > 1e-10:
        raise ValueError("certificate matrix is not Hermitian within 1e-10")
    return arr


def certificate_to_json(w: Union[Witness, JordanWitness], margin: Optional[float] = None) -> dict:
    if isinstance(w, Witness):
        data = {
            "mode": w.mode,
            "Z1": _matrix_to_json(w.z1.array),
            "Z2": _matrix_to_json(w.z2.array),
            "shape1": list(w.z1.shape.factors),
            "shape2": list(w.z2.shape.factors),
        }
    else:
        data = {
            "mode": "jordan",
            "W1": _matrix_to_json(w.w1.array),
            "W2": _matrix_to_json(w.w2.array),
            "rho": _matrix_to_json(w.rho.array),
            "rho_shape": list(w.rho.shape.factors),
        }
    if margin is not None:
        data["margin"] = float(margin)
    return data


def certificate_from_json(data: dict) -> Union[Witness, JordanWitness]:
    mode = data["mode"]
    if mode in ("plain", "ppt"):
        z1 = _matrix_from_json(data["Z1"])
        z2 = _matrix_from_json(data["Z2"])
        s1 = tuple(data.get("shape1", (z1.shape[0], 1)))
        s2 = tuple(data.get("shape2", (z2.shape[0], 1)))
        return Witness(
            HermitianMatrix(z1, TensorShape(s1)),
            HermitianMatrix(z2, TensorShape(s2)),
            mode=mode,
        )
    if mode == "jordan":
        w1 = _matrix_from_json(data["W1"])
        w2 = _matrix_from_json(data["W2"])
        rho = _matrix_from_json(data["rho"])
        d = int(round(np.sqrt(w1.shape[0])))
        rho_shape = tuple(data.get("rho_shape"))
        return JordanWitness(
            HermitianMatrix(w1, TensorShape((d, d))),
            HermitianMatrix(w2, TensorShape((d, d))),
            HermitianMatrix(rho, TensorShape(rho_shape)),
        )
    raise ValueError(f"unknown certificate mode {mode!r}")
