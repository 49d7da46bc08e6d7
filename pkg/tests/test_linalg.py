import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ccnr.linalg import (
    DimensionError,
    is_psd,
    partial_trace,
    realign,
    singular_values,
    trace_norm,
    unrealign,
    vectorize,
)
from conftest import loop_realign, random_orthogonal, svd_trace_norm


def rand_complex(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def test_vectorize_identity_and_matrix_unit():
    assert np.array_equal(vectorize(np.eye(2)), [1, 0, 0, 1])
    E01 = np.zeros((2, 2))
    E01[0, 1] = 1
    assert np.array_equal(vectorize(E01), [0, 1, 0, 0])


@pytest.mark.parametrize("dims", [(2, 2), (2, 3), (3, 2), (3, 3)])
def test_realign_matches_loop_oracle(dims, rng):
    n = dims[0] * dims[1]
    rho = rand_complex(rng, n, n)
    assert np.array_equal(realign(rho, *dims), loop_realign(rho, *dims))


@pytest.mark.parametrize("dims", [(2, 2), (2, 3), (3, 2)])
def test_realign_of_product_is_outer_of_vectorizations(dims, rng):
    A = rand_complex(rng, dims[0], dims[0])
    B = rand_complex(rng, dims[1], dims[1])
    # |A>> <<B*| : the bra conjugates vec(B*) back to vec(B)
    expected = np.outer(vectorize(A), np.conj(vectorize(np.conj(B))))
    assert np.allclose(realign(np.kron(A, B), *dims), expected, atol=1e-13)
    assert np.allclose(loop_realign(np.kron(A, B), *dims), expected, atol=1e-13)


def test_realign_maximally_mixed_and_bell(bell_matrix):
    assert svd_trace_norm(realign(np.eye(4) / 4, 2, 2)) == pytest.approx(0.5, abs=1e-14)
    assert svd_trace_norm(loop_realign(bell_matrix, 2, 2)) == pytest.approx(2.0, abs=1e-14)
    assert trace_norm(realign(bell_matrix, 2, 2)) == pytest.approx(2.0, abs=1e-14)


def test_realign_dimension_mismatch():
    with pytest.raises(DimensionError):
        realign(np.eye(5), 2, 2)
    with pytest.raises(DimensionError):
        partial_trace(np.eye(6), 2, 2, "A")


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 4), st.integers(2, 4), st.integers(0, 2**32 - 1))
def test_realign_is_invertible(d_A, d_B, seed):
    rng = np.random.default_rng(seed)
    rho = rand_complex(rng, d_A * d_B, d_A * d_B)
    R = realign(rho, d_A, d_B)
    assert R.shape == (d_A**2, d_B**2)
    assert np.array_equal(unrealign(R, d_A, d_B), rho)


def test_partial_trace_cases(bell_matrix, rng):
    assert np.allclose(partial_trace(bell_matrix, 2, 2, "B"), np.eye(2) / 2)
    a = rand_complex(rng, 2, 2)
    rho_A = a @ a.conj().T
    rho_A /= np.trace(rho_A)
    b = rand_complex(rng, 3, 3)
    rho_B = b @ b.conj().T
    rho_B /= np.trace(rho_B)
    rho = np.kron(rho_A, rho_B)
    assert np.allclose(partial_trace(rho, 2, 3, "B"), rho_A, atol=1e-15)
    assert np.allclose(partial_trace(rho, 2, 3, "A"), rho_B, atol=1e-15)
    assert np.trace(partial_trace(rho, 2, 3, "A")) == pytest.approx(1, abs=1e-14)
    with pytest.raises(ValueError):
        partial_trace(rho, 2, 3, "C")


def test_singular_values_examples(rng):
    assert np.allclose(singular_values(np.diag([3.0, -4.0])), [4, 3])
    M = rng.standard_normal((5, 3))
    s = singular_values(M)
    assert np.all(np.diff(s) <= 0)
    assert np.sum(s**2) == pytest.approx(np.sum(M**2), abs=1e-10)
    u = rng.standard_normal(4)
    v = rng.standard_normal(6)
    s = singular_values(np.outer(u / np.linalg.norm(u), v / np.linalg.norm(v)))
    assert s[0] == pytest.approx(1, abs=1e-14)
    assert np.all(s[1:] < 1e-14)


def test_singular_values_rejects_nonfinite():
    with pytest.raises(ValueError):
        singular_values(np.array([[np.nan, 0], [0, 1]]))


@pytest.mark.parametrize("d", [2, 3, 5])
def test_trace_norm_identity(d):
    assert trace_norm(np.eye(d)) == pytest.approx(d, abs=1e-13)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_trace_norm_properties(m, n, seed):
    rng = np.random.default_rng(seed)
    A, B = rng.standard_normal((m, n)), rng.standard_normal((m, n))
    nA = trace_norm(A)
    assert nA >= np.linalg.norm(A) - 1e-12
    assert trace_norm(A + B) <= nA + trace_norm(B) + 1e-12
    U, V = random_orthogonal(m, rng), random_orthogonal(n, rng)
    assert trace_norm(U @ A @ V) == pytest.approx(nA, abs=1e-10)


def test_trace_norm_batched(rng):
    stack = rng.standard_normal((7, 4, 9))
    assert np.allclose(trace_norm(stack), [trace_norm(m) for m in stack], atol=1e-13)


def test_psd_check(bell_matrix):
    assert is_psd(bell_matrix)
    assert not is_psd(np.diag([1.0, -1e-6]))
    assert is_psd(np.diag([1.0, -1e-12]))
