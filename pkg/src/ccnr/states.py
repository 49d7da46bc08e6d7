"""Bipartite density matrices: validation, generators, JSON persistence."""
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .linalg import (
    HERMITIAN_TOL,
    PSD_TOL,
    hermiticity_defect,
    min_eigenvalue,
    partial_trace,
)

TRACE_TOL = 1e-10

FAMILIES = ("haar", "separable", "product", "isotropic", "werner", "maxent",
            "maximally_mixed", "ds", "file")


class InvalidStateError(ValueError):
    """A matrix failed one of the density-matrix invariants."""


@dataclass(frozen=True)
class StateLabel:
    family: str
    params: dict = field(default_factory=dict)
    seed: int | None = None

    def __str__(self):
        parts = [f"{k}={v}" for k, v in sorted(self.params.items())]
        if self.seed is not None:
            parts.append(f"seed={self.seed}")
        return self.family + ("[" + ",".join(parts) + "]" if parts else "")


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Unit-trace PSD operator on C^d_A (x) C^d_B, validated on construction."""

    d_A: int
    d_B: int
    matrix: np.ndarray
    label: StateLabel = field(default_factory=lambda: StateLabel("file"))

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        check_density_matrix(m, self.d_A, self.d_B)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dims(self):
        return self.d_A, self.d_B

    @property
    def rho_A(self):
        return partial_trace(self.matrix, self.d_A, self.d_B, "B")

    @property
    def rho_B(self):
        return partial_trace(self.matrix, self.d_A, self.d_B, "A")

    def purity(self):
        return float(np.real(np.trace(self.matrix @ self.matrix)))


def check_density_matrix(m, d_A, d_B):
    """Raise :class:`InvalidStateError` naming the first failed invariant."""
    if d_A < 2 or d_B < 2:
        raise InvalidStateError(f"local dimensions must be >= 2, got ({d_A}, {d_B})")
    n = d_A * d_B
    if m.shape != (n, n):
        raise InvalidStateError(f"shape: expected {(n, n)}, got {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InvalidStateError("finite: matrix has NaN or Inf entries")
    herm = hermiticity_defect(m)
    if herm > HERMITIAN_TOL:
        raise InvalidStateError(f"hermitian: |rho - rho^dag|_max = {herm:.3e}")
    tr = np.trace(m)
    if abs(tr - 1) > TRACE_TOL:
        raise InvalidStateError(f"unit trace: Tr rho = {tr.real:.12g}")
    lam = min_eigenvalue(m)
    if lam < -PSD_TOL:
        raise InvalidStateError(f"positive semidefinite: min eigenvalue {lam:.3e}")


def _rng(seed):
    return np.random.default_rng(seed)


def _ginibre(rng, rows, cols):
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))


def _normalized(m):
    m = (m + m.conj().T) / 2
    return m / np.trace(m).real


def random_haar_mixed(d_A, d_B, rank=None, seed=None):
    """Induced-measure state ``G G^dag / Tr(G G^dag)`` with Ginibre ``G``."""
    n = d_A * d_B
    rank = n if rank is None else int(rank)
    if not 1 <= rank <= n:
        raise ValueError(f"rank must lie in [1, {n}], got {rank}")
    g = _ginibre(_rng(seed), n, rank)
    label = StateLabel("haar", {"d_A": d_A, "d_B": d_B, "rank": rank}, seed)
    return DensityMatrix(d_A, d_B, _normalized(g @ g.conj().T), label)


def _random_ket(rng, d):
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return v / np.linalg.norm(v)


def random_separable(d_A, d_B, terms=None, seed=None):
    """Dirichlet-weighted mixture of ``terms`` random product pure states."""
    terms = d_A * d_B if terms is None else int(terms)
    if terms < 1:
        raise ValueError("terms must be >= 1")
    rng = _rng(seed)
    weights = rng.dirichlet(np.ones(terms))
    rho = np.zeros((d_A * d_B,) * 2, dtype=complex)
    for w in weights:
        psi = np.kron(_random_ket(rng, d_A), _random_ket(rng, d_B))
        rho += w * np.outer(psi, psi.conj())
    label = StateLabel("separable", {"d_A": d_A, "d_B": d_B, "terms": terms}, seed)
    return DensityMatrix(d_A, d_B, _normalized(rho), label)


def random_product(d_A, d_B, seed=None):
    """``rho_A (x) rho_B`` with independent full-rank induced-measure marginals."""
    rng = _rng(seed)
    ga, gb = _ginibre(rng, d_A, d_A), _ginibre(rng, d_B, d_B)
    rho = np.kron(_normalized(ga @ ga.conj().T), _normalized(gb @ gb.conj().T))
    label = StateLabel("product", {"d_A": d_A, "d_B": d_B}, seed)
    return DensityMatrix(d_A, d_B, _normalized(rho), label)


def product_state(rho_A, rho_B):
    rho_A, rho_B = np.asarray(rho_A), np.asarray(rho_B)
    label = StateLabel("product", {"d_A": len(rho_A), "d_B": len(rho_B)})
    return DensityMatrix(len(rho_A), len(rho_B), np.kron(rho_A, rho_B), label)


def _check_p(p):
    if not 0 <= p <= 1:
        raise ValueError(f"mixing parameter must lie in [0, 1], got {p}")


def _phi_plus(d):
    v = np.zeros(d * d)
    v[[i * d + i for i in range(d)]] = 1 / np.sqrt(d)
    return v


def max_entangled(d):
    """Projector onto ``sum_i |ii> / sqrt(d)``."""
    v = _phi_plus(d)
    return DensityMatrix(d, d, np.outer(v, v), StateLabel("maxent", {"d": d}))


def maximally_mixed(d_A, d_B=None):
    d_B = d_A if d_B is None else d_B
    n = d_A * d_B
    label = StateLabel("maximally_mixed", {"d_A": d_A, "d_B": d_B})
    return DensityMatrix(d_A, d_B, np.eye(n) / n, label)


def isotropic(d, p):
    """``p |phi+><phi+| + (1 - p) I / d^2``."""
    _check_p(p)
    v = _phi_plus(d)
    rho = p * np.outer(v, v) + (1 - p) * np.eye(d * d) / d**2
    return DensityMatrix(d, d, rho, StateLabel("isotropic", {"d": d, "p": p}))


def _swap(d):
    F = np.zeros((d * d, d * d))
    for i in range(d):
        for a in range(d):
            F[a * d + i, i * d + a] = 1.0
    return F


def werner(d, p):
    """Weight ``p`` on the normalized antisymmetric projector, ``1-p`` on the symmetric one."""
    _check_p(p)
    F, I = _swap(d), np.eye(d * d)
    anti = (I - F) / (d * (d - 1))
    sym = (I + F) / (d * (d + 1))
    return DensityMatrix(d, d, p * anti + (1 - p) * sym, StateLabel("werner", {"d": d, "p": p}))


def _ds_vector(d, i, j):
    v = np.zeros(d * d)
    if i == j:
        v[i * d + i] = 1.0
    else:
        v[i * d + j] = v[j * d + i] = 1 / np.sqrt(2)
    return v


def _ds_weights(d, P):
    P = np.asarray(P, dtype=float)
    if P.shape != (d, d):
        raise ValueError(f"P must be {d}x{d}, got {P.shape}")
    if np.any(P < 0):
        raise ValueError("P must be nonnegative")
    lower, upper = np.tril(P, -1), np.triu(P, 1)
    if np.any(lower) and not np.allclose(lower.T, upper, atol=1e-12):
        raise ValueError("P must be symmetric or upper-triangular")
    W = np.triu(P)
    if abs(W.sum() - 1) > 1e-10:
        raise ValueError(f"p_ij over i <= j must sum to 1, got {W.sum():.12g}")
    return W


def diagonal_symmetric(d, P):
    """Diagonal-symmetric state ``sum_{i<=j} p_ij |D_ij><D_ij|``.

    Only the upper triangle (diagonal included) of ``P`` is read; a symmetric
    ``P`` is accepted and its lower triangle ignored.
    """
    W = _ds_weights(d, P)
    rho = np.zeros((d * d, d * d))
    for i in range(d):
        for j in range(i, d):
            if W[i, j]:
                v = _ds_vector(d, i, j)
                rho += W[i, j] * np.outer(v, v)
    return DensityMatrix(d, d, rho, StateLabel("ds", {"d": d}))


def ds_moment_matrix(W):
    """``M_ii = p_ii``, ``M_ij = p_ij / 2``: the partial transpose of a DS
    state restricted to span{|ii>}. The state is PPT iff ``M`` is PSD."""
    W = np.triu(np.asarray(W, dtype=float))
    off = np.triu(W, 1) / 2
    return np.diag(np.diag(W)) + off + off.T


def random_diagonal_symmetric(d, seed=None, ppt=True, max_tries=10_000):
    """Random DS state with Dirichlet-uniform weights on ``p_ij`` (``i <= j``).

    With ``ppt=True`` (default) draws are rejected until the state has a
    positive partial transpose. NPT DS states are generally flagged by
    realignment; e.g. ``|D_01>`` is maximally entangled on a qubit subspace.
    """
    rng = _rng(seed)
    iu = np.triu_indices(d)
    for _ in range(max_tries):
        W = np.zeros((d, d))
        W[iu] = rng.dirichlet(np.ones(len(iu[0])))
        if not ppt or np.linalg.eigvalsh(ds_moment_matrix(W))[0] >= 0:
            rho = diagonal_symmetric(d, W)
            label = StateLabel("ds", {"d": d, "ppt": ppt}, seed)
            return DensityMatrix(d, d, rho.matrix, label)
    raise RuntimeError(f"no PPT DS sample found in {max_tries} draws")


def generate(family, d_A, d_B=None, seed=None, **params):
    """Dispatch to a generator by family tag."""
    d_B = d_A if d_B is None else d_B
    if family == "haar":
        return random_haar_mixed(d_A, d_B, params.get("rank"), seed)
    if family == "separable":
        return random_separable(d_A, d_B, params.get("terms"), seed)
    if family == "product":
        return random_product(d_A, d_B, seed)
    if family == "maximally_mixed":
        return maximally_mixed(d_A, d_B)
    if family in ("isotropic", "werner", "maxent", "ds") and d_A != d_B:
        raise ValueError(f"{family} states need d_A == d_B")
    if family == "isotropic":
        return isotropic(d_A, params.get("p", 1.0))
    if family == "werner":
        return werner(d_A, params.get("p", 1.0))
    if family == "maxent":
        return max_entangled(d_A)
    if family == "ds":
        return random_diagonal_symmetric(d_A, seed, params.get("ppt", True))
    raise ValueError(f"unknown state family {family!r}")


def state_to_dict(state):
    return {
        "d_a": state.d_A,
        "d_b": state.d_B,
        "matrix": [[[float(z.real), float(z.imag)] for z in row] for row in state.matrix],
    }


def state_from_dict(data, label=None):
    try:
        d_A, d_B = int(data["d_a"]), int(data["d_b"])
        raw = np.asarray(data["matrix"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidStateError(f"malformed state record: {exc}") from exc
    if raw.ndim != 3 or raw.shape[-1] != 2:
        raise InvalidStateError(f"matrix entries must be [re, im] pairs, got shape {raw.shape}")
    m = raw[..., 0] + 1j * raw[..., 1]
    return DensityMatrix(d_A, d_B, m, label or StateLabel("file"))


def save_state(state, path):
    Path(path).write_text(json.dumps(state_to_dict(state)) + "\n")


def load_state(path):
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise InvalidStateError(f"{path}: not valid JSON ({exc})") from exc
    return state_from_dict(data, StateLabel("file", {"path": path.name}))
