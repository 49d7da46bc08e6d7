"""Hermitian orthonormal operator bases with the identity as element 0."""
from dataclasses import dataclass

import numpy as np

from .linalg import HERMITIAN_TOL, hermiticity_defect

BASIS_CONVENTION = "gellmann-v1"
GRAM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class OperatorBasis:
    """Ordered basis ``G_0 = I/sqrt(d), G_1, ..., G_{d^2-1}`` of L(C^d).

    ``elements`` has shape ``(d**2, d, d)``.
    """

    dim: int
    elements: np.ndarray

    def __post_init__(self):
        els = np.asarray(self.elements, dtype=complex)
        els.setflags(write=False)
        object.__setattr__(self, "elements", els)

    def __len__(self):
        return self.dim**2

    def __getitem__(self, idx):
        return self.elements[idx]

    def gram(self):
        """Hilbert-Schmidt Gram matrix ``Tr(G_a^dagger G_b)``."""
        return np.einsum("aji,bji->ab", self.elements.conj(), self.elements)

    def validate(self, tol=GRAM_TOL):
        d = self.dim
        els = self.elements
        if els.shape != (d * d, d, d):
            raise ValueError(f"basis must have shape {(d * d, d, d)}, got {els.shape}")
        if np.max(np.abs(els[0] - np.eye(d) / np.sqrt(d))) > tol:
            raise ValueError("element 0 must be I/sqrt(d)")
        for k, g in enumerate(els):
            if hermiticity_defect(g) > tol:
                raise ValueError(f"element {k} is not Hermitian")
        traces = np.abs(np.trace(els[1:], axis1=1, axis2=2))
        if traces.size and traces.max() > tol:
            raise ValueError("elements 1.. must be traceless")
        defect = np.max(np.abs(self.gram() - np.eye(d * d)))
        if defect > tol:
            raise ValueError(f"basis is not orthonormal (Gram defect {defect:.2e})")
        return self

    def rotated(self, Q):
        """Basis whose traceless sector is mixed by the real orthogonal ``Q``."""
        Q = np.asarray(Q, dtype=float)
        els = self.elements.copy()
        els[1:] = np.einsum("ab,bij->aij", Q, self.elements[1:])
        return OperatorBasis(self.dim, els)


def build_basis(d):
    """Generalized Gell-Mann basis normalized to Hilbert-Schmidt unit length.

    Ordering: identity, then the symmetric pairs ``(E_jk + E_kj)/sqrt2``,
    the antisymmetric pairs ``-i(E_jk - E_kj)/sqrt2`` (both for ``j < k`` in
    lexicographic order), then the diagonal ladder
    ``diag(1,..,1,-l,0,..)/sqrt(l(l+1))`` for ``l = 1..d-1``.
    For ``d = 2`` this is ``(I, sx, sy, sz)/sqrt2``.
    """
    d = int(d)
    if d < 2:
        raise ValueError(f"basis dimension must be >= 2, got {d}")
    els = np.zeros((d * d, d, d), dtype=complex)
    els[0] = np.eye(d) / np.sqrt(d)
    pairs = [(j, k) for j in range(d) for k in range(j + 1, d)]
    s = 1 / np.sqrt(2)
    n = 1
    for j, k in pairs:
        els[n, j, k] = els[n, k, j] = s
        n += 1
    for j, k in pairs:
        els[n, j, k] = -1j * s
        els[n, k, j] = 1j * s
        n += 1
    for l in range(1, d):
        diag = np.zeros(d)
        diag[:l] = 1.0
        diag[l] = -l
        els[n] = np.diag(diag) / np.sqrt(l * (l + 1))
        n += 1
    return OperatorBasis(d, els)


def expand(X, basis, tol=HERMITIAN_TOL):
    """Real coefficients ``c_a = Tr(G_a X)`` of a Hermitian ``X``."""
    X = np.asarray(X)
    if X.shape != (basis.dim, basis.dim):
        raise ValueError(f"operator shape {X.shape} does not match basis dim {basis.dim}")
    if hermiticity_defect(X) > tol:
        raise ValueError("expand requires a Hermitian operator")
    coeffs = np.einsum("aji,ij->a", basis.elements, X)
    return coeffs.real.copy()


def reconstruct(coeffs, basis):
    """Inverse of :func:`expand`: ``sum_a c_a G_a``."""
    return np.einsum("a,aij->ij", np.asarray(coeffs, dtype=float), basis.elements)
