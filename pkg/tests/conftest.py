import numpy as np
import pytest

PAULI = [
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
]


def loop_realign(rho, d_A, d_B):
    """Index-shuffle oracle written with explicit loops."""
    R = np.zeros((d_A * d_A, d_B * d_B), dtype=complex)
    for i in range(d_A):
        for j in range(d_A):
            for a in range(d_B):
                for b in range(d_B):
                    R[i * d_A + j, a * d_B + b] = rho[i * d_B + a, j * d_B + b]
    return R


def svd_trace_norm(M):
    return float(np.linalg.svd(np.asarray(M), compute_uv=False).sum())


def pauli_oracle(rho):
    """Two-qubit correlation data from Pauli expectations only.

    Returns ``(T, r_A, r_B, purity_A, purity_B)`` in the (I, sx, sy, sz)/sqrt2
    normalization, built without the package's basis code.
    """
    I2 = np.eye(2)
    ev = lambda op: float(np.real(np.trace(op @ rho)))
    sa = np.array([ev(np.kron(s, I2)) for s in PAULI])
    sb = np.array([ev(np.kron(I2, s)) for s in PAULI])
    ss = np.array([[ev(np.kron(s, t)) for t in PAULI] for s in PAULI])
    T = (ss - np.outer(sa, sb)) / 2
    r_A, r_B = sa / np.sqrt(2), sb / np.sqrt(2)
    purity_A = (1 + sa @ sa) / 2
    purity_B = (1 + sb @ sb) / 2
    return T, r_A, r_B, purity_A, purity_B


def random_orthogonal(n, rng):
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def bell_matrix():
    v = np.array([1, 0, 0, 1]) / np.sqrt(2)
    return np.outer(v, v).astype(complex)
