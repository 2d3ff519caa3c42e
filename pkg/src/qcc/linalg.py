"""Dense complex linear algebra over tensor-product spaces.

Matrices carry an explicit factorization of their index space (e.g. a
compatibilizer Choi matrix lives on X ⊗ Y1 ⊗ Y2), and all partial
traces / transposes address factors by position in that factorization.
Everything here is a pure function of immutable values.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

HERMITICITY_TOL = 1e-12
# Relative eigenvalue cutoff shared by every support-projector /
# pseudo-inverse computation in the package.  An absolute cutoff breaks
# on scaled inputs.
RANK_CUTOFF = 1e-10


@dataclass(frozen=True)
class TensorShape:
    """Ordered list of tensor-factor dimensions for a matrix index space."""

    factors: tuple[int, ...]

    def __post_init__(self):
        factors = tuple(int(d) for d in self.factors)
        if len(factors) == 0:
            raise ValueError("TensorShape needs at least one factor")
        if any(d < 1 for d in factors):
            raise ValueError(f"factor dimensions must be positive, got {factors}")
        object.__setattr__(self, "factors", factors)

    @property
    def dim(self) -> int:
        return int(np.prod(self.factors))

    def __len__(self) -> int:
        return len(self.factors)

    def drop(self, traced: Iterable[int]) -> "TensorShape":
        """Shape left over after removing the given factor positions."""
        traced = set(traced)
        kept = [d for i, d in enumerate(self.factors) if i not in traced]
        if not kept:
            kept = [1]
        return TensorShape(tuple(kept))


def _as_shape(shape, side: int) -> TensorShape:
    if shape is None:
        return TensorShape((side,))
    if isinstance(shape, TensorShape):
        out = shape
    else:
        out = TensorShape(tuple(shape))
    if out.dim != side:
        raise ValueError(f"shape {out.factors} does not multiply to side {side}")
    return out


class HermitianMatrix:
    """A dense complex Hermitian matrix with a tensor-factor shape.

    Construction symmetrizes (M + M†)/2 when the deviation is within
    ``HERMITICITY_TOL`` (max-norm) and rejects the input otherwise.
    """

    __slots__ = ("array", "shape")

    def __init__(self, entries, shape=None):
        arr = np.asarray(entries, dtype=np.complex128)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {arr.shape}")
        dev = np.abs(arr - arr.conj().T).max() if arr.size else 0.0
        scale = max(1.0, np.abs(arr).max()) if arr.size else 1.0
        if dev > HERMITICITY_TOL * scale:
            raise ValueError(f"matrix is not Hermitian: max |M - M^dag| = {dev:.3e}")
        arr = (arr + arr.conj().T) / 2
        arr.setflags(write=False)
        object.__setattr__(self, "array", arr)
        object.__setattr__(self, "shape", _as_shape(shape, arr.shape[0]))

    def __setattr__(self, name, value):
        raise AttributeError("HermitianMatrix is immutable")

    @property
    def side(self) -> int:
        return self.array.shape[0]

    def reshaped(self, factors: Sequence[int]) -> "HermitianMatrix":
        """Same entries, reinterpreted with a different factorization."""
        return HermitianMatrix(self.array, TensorShape(tuple(factors)))

    def __repr__(self):
        return f"HermitianMatrix(side={self.side}, factors={self.shape.factors})"


# ---------------------------------------------------------------------------
# array-level kernels (used internally and by the SDP machinery)
# ---------------------------------------------------------------------------


def ptrace_array(arr: np.ndarray, dims: Sequence[int], traced: Iterable[int]) -> np.ndarray:
    """Partial trace over the listed factor positions of a dense matrix."""
    dims = list(dims)
    n = len(dims)
    traced = sorted(set(traced))
    for t in traced:
        if not 0 <= t < n:
            raise IndexError(f"factor index {t} out of range for {dims}")
    tens = arr.reshape(*dims, *dims)
    labels = list(range(2 * n))
    for t in traced:
        labels[n + t] = labels[t]
    kept = [i for i in range(n) if i not in traced]
    out_labels = kept + [n + k for k in kept]
    d_out = int(np.prod([dims[k] for k in kept])) if kept else 1
    return np.einsum(tens, labels, out_labels).reshape(d_out, d_out)


def ptranspose_array(arr: np.ndarray, dims: Sequence[int], factor: int) -> np.ndarray:
    """Transpose a single tensor factor of a dense matrix."""
    dims = list(dims)
    n = len(dims)
    if not 0 <= factor < n:
        raise IndexError(f"factor index {factor} out of range for {dims}")
    tens = arr.reshape(*dims, *dims)
    perm = list(range(2 * n))
    perm[factor], perm[n + factor] = perm[n + factor], perm[factor]
    return np.ascontiguousarray(tens.transpose(perm)).reshape(arr.shape)


def embed_identity_array(
    arr: np.ndarray, occ_dims: Sequence[int], full_dims: Sequence[int], positions: Sequence[int]
) -> np.ndarray:
    """Tensor ``arr`` (on the factors at ``positions``) with identities elsewhere.

    This is the adjoint of the partial trace over the complementary
    factors, with the factor ordering of ``full_dims`` preserved.
    """
    full_dims = list(full_dims)
    positions = list(positions)
    if len(positions) != len(occ_dims):
        raise ValueError("positions and occupied dims must align")
    for pos, d in zip(positions, occ_dims):
        if full_dims[pos] != d:
            raise ValueError("occupied factor dimension mismatch")
    n = len(full_dims)
    free = [i for i in range(n) if i not in positions]
    tens = arr.reshape(*occ_dims, *occ_dims)
    for i in free:
        eye = np.eye(full_dims[i])
        tens = np.tensordot(tens, eye, axes=0)
    # current order: occupied rows, occupied cols, then (row, col) per free factor
    k = len(positions)
    row_axes = {p: i for i, p in enumerate(positions)}
    col_axes = {p: k + i for i, p in enumerate(positions)}
    for i, f in enumerate(free):
        row_axes[f] = 2 * k + 2 * i
        col_axes[f] = 2 * k + 2 * i + 1
    perm = [row_axes[i] for i in range(n)] + [col_axes[i] for i in range(n)]
    d = int(np.prod(full_dims))
    return np.ascontiguousarray(tens.transpose(perm)).reshape(d, d)


def hermitian_basis(n: int) -> np.ndarray:
    """Orthonormal real basis of the n x n Hermitian matrices, shape (n^2, n, n).

    Ordering: diagonal units first, then (E_ij + E_ji)/sqrt(2) and
    i(E_ij - E_ji)/sqrt(2) for i < j.  Orthonormal under <A, B> = Tr(AB).
    """
    basis = np.zeros((n * n, n, n), dtype=np.complex128)
    k = 0
    for i in range(n):
        basis[k, i, i] = 1.0
        k += 1
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    for i in range(n):
        for j in range(i + 1, n):
            basis[k, i, j] = inv_sqrt2
            basis[k, j, i] = inv_sqrt2
            k += 1
            basis[k, i, j] = 1j * inv_sqrt2
            basis[k, j, i] = -1j * inv_sqrt2
            k += 1
    return basis


def herm_to_vec(arr: np.ndarray) -> np.ndarray:
    """Real coordinates of a Hermitian matrix in the ``hermitian_basis`` order."""
    n = arr.shape[0]
    out = np.empty(n * n)
    out[:n] = np.diagonal(arr).real
    iu = np.triu_indices(n, k=1)
    upper = arr[iu]
    sqrt2 = np.sqrt(2.0)
    out[n::2] = upper.real * sqrt2
    out[n + 1 :: 2] = upper.imag * sqrt2
    return out


def vec_to_herm(vec: np.ndarray, n: int) -> np.ndarray:
    """Inverse of :func:`herm_to_vec`."""
    arr = np.zeros((n, n), dtype=np.complex128)
    arr[np.diag_indices(n)] = vec[:n]
    iu = np.triu_indices(n, k=1)
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    upper = (vec[n::2] + 1j * vec[n + 1 :: 2]) * inv_sqrt2
    arr[iu] = upper
    arr[(iu[1], iu[0])] = upper.conj()
    return arr


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------


def kron(a: HermitianMatrix, b: HermitianMatrix) -> HermitianMatrix:
    """Kronecker product; the result's factor list is the concatenation."""
    arr = np.kron(a.array, b.array)
    return HermitianMatrix(arr, TensorShape(a.shape.factors + b.shape.factors))


def partial_trace(m: HermitianMatrix, traced) -> HermitianMatrix:
    """Trace out the factor positions in ``traced`` (int or iterable of ints)."""
    if isinstance(traced, (int, np.integer)):
        traced = {int(traced)}
    arr = ptrace_array(m.array, m.shape.factors, traced)
    return HermitianMatrix(arr, m.shape.drop(traced))


def partial_transpose(m: HermitianMatrix, factor: int) -> HermitianMatrix:
    """Transpose one tensor factor; an involution that preserves the trace."""
    arr = ptranspose_array(m.array, m.shape.factors, factor)
    return HermitianMatrix(arr, m.shape)


def hermitian_eig(m) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns (eigenvalues ascending, unitary eigenvector columns) with
    residuals ||M v - lambda v|| <= 1e-10 ||M||.  Raises
    ``numpy.linalg.LinAlgError`` on non-convergence.
    """
    arr = m.array if isinstance(m, HermitianMatrix) else np.asarray(m, dtype=np.complex128)
    return np.linalg.eigh(arr)


def pinv_sqrt(m: HermitianMatrix) -> HermitianMatrix:
    """Moore-Penrose pseudo-inverse of the square root of a PSD matrix.

    Eigenvalues below ``RANK_CUTOFF`` times the largest are treated as
    zero, so sigma^{-1/2} sigma sigma^{-1/2} is the support projector.
    """
    w, v = hermitian_eig(m)
    if w[0] < -1e-8 * max(1.0, abs(w[-1])):
        raise ValueError(f"matrix is not PSD: min eigenvalue {w[0]:.3e}")
    cutoff = RANK_CUTOFF * max(w[-1], 0.0)
    inv = np.where(w > cutoff, 1.0 / np.sqrt(np.maximum(w, cutoff)), 0.0)
    arr = (v * inv) @ v.conj().T
    return HermitianMatrix(arr, m.shape)


def support_projector_array(arr: np.ndarray) -> np.ndarray:
    """Orthogonal projector onto the image of a PSD matrix (shared cutoff)."""
    w, v = np.linalg.eigh(np.asarray(arr, dtype=np.complex128))
    cutoff = RANK_CUTOFF * max(w[-1], 0.0)
    keep = w > cutoff
    vk = v[:, keep]
    return vk @ vk.conj().T


def swap_operator(d: int) -> HermitianMatrix:
    """The unitary W on C^d (x) C^d with W(u (x) v) = v (x) u."""
    if d < 1:
        raise ValueError("dimension must be >= 1")
    w = np.zeros((d * d, d * d))
    for i in range(d):
        for j in range(d):
            w[i * d + j, j * d + i] = 1.0
    return HermitianMatrix(w, TensorShape((d, d)))


def support_projection_absorbs(a: HermitianMatrix, tol: float = 1e-9) -> bool:
    """Check A = (P (x) I) A (P (x) I) for P the support projector of the first marginal.

    The first factor of ``a`` is the marginal system; all remaining
    factors are traced out to form the marginal.  Fails only for inputs
    that are not numerically PSD.
    """
    dims = a.shape.factors
    if len(dims) < 2:
        raise ValueError("need at least two tensor factors")
    marg = ptrace_array(a.array, dims, range(1, len(dims)))
    proj = support_projector_array(marg)
    d_rest = int(np.prod(dims[1:]))
    big = np.kron(proj, np.eye(d_rest))
    resid = np.abs(a.array - big @ a.array @ big).max()
    return bool(resid <= tol * max(1.0, np.abs(a.array).max()))
