"""Dense matrix primitives for bipartite operators.

Composite indices are A-major: the basis vector |i> (x) |a> sits at
position ``k = i * d_B + a``. Every routine in the package relies on this.
"""
import numpy as np

HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-10


class DimensionError(ValueError):
    """Raised when a matrix does not fit the declared local dimensions."""


class SVDConvergenceError(RuntimeError):
    """Raised when the singular value solver fails to converge."""


def _as_finite(M, name="matrix"):
    M = np.asarray(M)
    if M.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} has non-finite entries")
    return M


def _check_composite(rho, d_A, d_B):
    rho = _as_finite(rho, "rho")
    n = d_A * d_B
    if rho.shape != (n, n):
        raise DimensionError(
            f"expected a {n}x{n} operator for d_A={d_A}, d_B={d_B}, got {rho.shape}"
        )
    return rho


def dagger(A):
    return np.conj(np.transpose(A))


def hermiticity_defect(A):
    """Largest entry of ``|A - A^dagger|``."""
    A = np.asarray(A)
    return float(np.max(np.abs(A - dagger(A)))) if A.size else 0.0


def is_hermitian(A, tol=HERMITIAN_TOL):
    A = np.asarray(A)
    return A.shape[0] == A.shape[1] and hermiticity_defect(A) <= tol


def min_eigenvalue(A):
    """Smallest eigenvalue of the Hermitian part of ``A``."""
    A = np.asarray(A)
    return float(np.linalg.eigvalsh((A + dagger(A)) / 2)[0])


def is_psd(A, tol=PSD_TOL):
    return is_hermitian(A) and min_eigenvalue(A) >= -tol


def vectorize(A):
    """Row-major vectorization: component ``i * cols + j`` equals ``A[i, j]``."""
    return np.asarray(A).reshape(-1).copy()


def unvectorize(vec, rows, cols):
    return np.asarray(vec).reshape(rows, cols).copy()


def realign(rho, d_A, d_B):
    r"""Realignment (reshuffling) map.

    Returns the ``d_A**2 x d_B**2`` matrix with
    ``R[i*d_A + j, a*d_B + b] = rho[i*d_B + a, j*d_B + b]``, so that
    ``R(A (x) B) = |A>> <<B*|``.
    """
    rho = _check_composite(rho, d_A, d_B)
    return rho.reshape(d_A, d_B, d_A, d_B).transpose(0, 2, 1, 3).reshape(d_A**2, d_B**2)


def unrealign(R, d_A, d_B):
    """Inverse of :func:`realign`."""
    R = _as_finite(R, "R")
    if R.shape != (d_A**2, d_B**2):
        raise DimensionError(f"expected shape {(d_A**2, d_B**2)}, got {R.shape}")
    n = d_A * d_B
    return R.reshape(d_A, d_A, d_B, d_B).transpose(0, 2, 1, 3).reshape(n, n)


def partial_trace(rho, d_A, d_B, side):
    """Trace out one subsystem.

    ``side="B"`` traces out B and returns rho_A; ``side="A"`` returns rho_B.
    """
    rho = _check_composite(rho, d_A, d_B)
    r4 = rho.reshape(d_A, d_B, d_A, d_B)
    if side == "B":
        return np.einsum("iaja->ij", r4)
    if side == "A":
        return np.einsum("iaib->ab", r4)
    raise ValueError(f"side must be 'A' or 'B', got {side!r}")


def singular_values(M):
    """Singular values in nonincreasing order.

    Accepts a single matrix or a stack ``(..., m, n)``; stacks are handled
    in one LAPACK call.
    """
    M = np.asarray(M)
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    if M.size == 0:
        return np.zeros(M.shape[:-2] + (0,))
    try:
        return np.linalg.svd(M, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise SVDConvergenceError(
            f"SVD did not converge for array of shape {M.shape}, "
            f"max |entry| = {np.max(np.abs(M)):.3e}"
        ) from exc


def trace_norm(M):
    """Sum of singular values; vectorized over leading axes."""
    return np.sum(singular_values(M), axis=-1)
