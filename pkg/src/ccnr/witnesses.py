"""Linear entanglement witnesses of the correlation-tensor family.

Covers the finite (x, y) witnesses, their r -> infinity limits, the witness
that attains the enhanced realignment bound for a given state, and the
certification that this limit is detected at finite (x, y).

Witness operators are assembled from a real coefficient matrix ``K`` as
``W = sum_ab K[a, b] G^A_a (x) G^B_b``. Writing the identity part into
``K[0, 0]`` keeps every entry O(1) at large radius.
"""
import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .basis import BASIS_CONVENTION
from .criteria import (
    VIOLATION_TOL,
    correlation_data,
    enhanced_ccnr,
    enhanced_rhs,
    family_criterion,
    gellmann,
    quadratic_F,
    scan_family,
)
from .linalg import HERMITIAN_TOL, hermiticity_defect, singular_values

ISOMETRY_TOL = 1e-10
MARGINAL_EPS = 1e-9
DEFAULT_R_SCHEDULE = (10.0, 1e2, 1e3, 1e4)
# Bloch combinations shorter than this are treated as zero (eta = 0).
ZERO_VECTOR_TOL = 1e-14


class DegenerateMarginalError(ValueError):
    """A reduced state is pure, so the optimal angle is undefined."""


def a_coefficient(theta, d_A, d_B):
    """``((d_B - 1) cot(theta) + (d_A - 1) tan(theta)) / 2``."""
    return ((d_B - 1) / np.tan(theta) + (d_A - 1) * np.tan(theta)) / 2


def b_coefficient(theta, eta, d_A, d_B):
    return a_coefficient(theta, d_A, d_B) + eta**2 * np.sin(theta) * np.cos(theta) / 2


def a_min(d_A, d_B):
    return float(np.sqrt((d_A - 1) * (d_B - 1)))


def theta_a_min(d_A, d_B):
    """Angle minimizing :func:`a_coefficient`: ``tan(theta)^2 = (d_B - 1)/(d_A - 1)``."""
    return float(np.arctan(np.sqrt((d_B - 1) / (d_A - 1))))


def _check_theta(theta):
    if not 0 < theta < np.pi / 2:
        raise ValueError(f"theta must lie strictly inside (0, pi/2), got {theta}")


def isometry_defect(O):
    """``max |O^T O - I|`` on the smaller side (``O O^T`` for wide matrices)."""
    O = np.asarray(O, dtype=float)
    G = O.T @ O if O.shape[0] >= O.shape[1] else O @ O.T
    return float(np.max(np.abs(G - np.eye(len(G)))))


def check_isometry(O, tol=ISOMETRY_TOL):
    defect = isometry_defect(O)
    if defect > tol:
        raise ValueError(f"matrix is not an isometry (defect {defect:.3e})")
    return defect


def spectral_norm(M):
    return float(singular_values(np.asarray(M, dtype=float))[0])


def operator_from_coefficients(K, basis_A, basis_B):
    """``sum_ab K[a, b] G^A_a (x) G^B_b`` as a ``(d_A d_B)``-square matrix."""
    d_A, d_B = basis_A.dim, basis_B.dim
    W = np.einsum("ab,aij,bkl->ikjl", K, basis_A.elements, basis_B.elements)
    return W.reshape(d_A * d_B, d_A * d_B)


def expectation(W, state):
    """``Re Tr(W rho)``."""
    return float(np.real(np.einsum("ij,ji->", W, state.matrix)))


def _default_bases(d_A, d_B, basis_A, basis_B):
    return basis_A or gellmann(d_A), basis_B or gellmann(d_B)


def _identity_gap(x, y, d_A, d_B):
    # sqrt(d_A-1+x^2) sqrt(d_B-1+y^2) - x y without cancellation
    A, B = d_A - 1, d_B - 1
    p = np.sqrt(A + x * x) * np.sqrt(B + y * y)
    return (A * B + A * y * y + B * x * x) / (p + x * y)


def finite_coefficients(x, y, O, corner=None):
    """Coefficient matrix of the finite-(x, y) witness.

    ``corner`` optionally supplies ``1 + O[0, 0]`` computed without rounding
    loss; near ``O[0, 0] = -1`` this keeps ``K[0, 0]`` accurate at large x y.
    """
    O = np.asarray(O, dtype=float)
    d_A, d_B = int(round(np.sqrt(O.shape[0]))), int(round(np.sqrt(O.shape[1])))
    K = O.copy()
    K[0, :] *= x
    K[:, 0] *= y
    corner = 1 + O[0, 0] if corner is None else corner
    K[0, 0] = _identity_gap(x, y, d_A, d_B) + x * y * corner
    return K


def witness_finite(x, y, O, basis_A=None, basis_B=None, corner=None):
    """``N_A(x) N_B(y) I + sum_ab (D_x)_aa O_ab (D_y)_bb G^A_a (x) G^B_b``.

    ``O`` may be any real ``d_A^2 x d_B^2`` matrix of spectral norm at most 1;
    isometries are the extreme points and give the strongest witnesses.
    """
    if x < 0 or y < 0:
        raise ValueError(f"x and y must be nonnegative, got ({x}, {y})")
    O = np.asarray(O, dtype=float)
    d_A, d_B = int(round(np.sqrt(O.shape[0]))), int(round(np.sqrt(O.shape[1])))
    if O.shape != (d_A**2, d_B**2):
        raise ValueError(f"O must be d_A^2 x d_B^2, got {O.shape}")
    norm = spectral_norm(O)
    if norm > 1 + ISOMETRY_TOL:
        raise ValueError(f"spectral norm of O is {norm:.12g} > 1")
    basis_A, basis_B = _default_bases(d_A, d_B, basis_A, basis_B)
    return operator_from_coefficients(finite_coefficients(x, y, O, corner), basis_A, basis_B)


def finite_expectation(x, y, O, data):
    """``N_A(x) N_B(y) + <D_x O D_y | C>``, the closed form of ``Tr(W rho)``."""
    dA, dB = data.d_A, data.d_B
    nn = np.sqrt((dA - 1 + x * x) / dA) * np.sqrt((dB - 1 + y * y) / dB)
    M = np.asarray(O, dtype=float).copy()
    M[0, :] *= x
    M[:, 0] *= y
    return float(nn + np.sum(M * data.C))


def witness_w3(theta, obold, basis_A, basis_B):
    """Radial limit with fixed isometry: ``a(theta) G_0 (x) G_0 + sum_{a,b>0} O_ab G_a (x) G_b``."""
    _check_theta(theta)
    obold = np.asarray(obold, dtype=float)
    d_A, d_B = basis_A.dim, basis_B.dim
    if obold.shape != (d_A**2 - 1, d_B**2 - 1):
        raise ValueError(f"obold must be {(d_A**2 - 1, d_B**2 - 1)}, got {obold.shape}")
    check_isometry(obold)
    K = np.zeros((d_A**2, d_B**2))
    K[0, 0] = a_coefficient(theta, d_A, d_B)
    K[1:, 1:] = obold
    return operator_from_coefficients(K, basis_A, basis_B)


@dataclass(frozen=True, eq=False)
class WitnessSpec:
    """Parameters of the limiting witness.

    The isometry ``obold`` acts between the traceless sectors. When it is
    wide or square (``d_A <= d_B``) ``v`` is a unit vector and ``u = obold v``;
    when it is tall ``u`` is the unit vector and ``v = obold^T u``. For
    ``d_A == d_B`` both descriptions coincide and ``|u| = |v| = 1``.
    """

    theta: float
    eta: float
    u: np.ndarray
    v: np.ndarray
    obold: np.ndarray
    d_A: int
    d_B: int
    basis_convention: str = BASIS_CONVENTION
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        for name in ("u", "v", "obold"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def wide(self):
        return self.d_A <= self.d_B

    @property
    def tall(self):
        return self.d_A >= self.d_B

    def constraint_defect(self):
        """Largest violation of the unit-norm and coupling constraints."""
        defects = [isometry_defect(self.obold)]
        if self.wide:
            defects += [abs(np.linalg.norm(self.v) - 1),
                        np.max(np.abs(self.u - self.obold @ self.v), initial=0.0)]
        if self.tall:
            defects += [abs(np.linalg.norm(self.u) - 1),
                        np.max(np.abs(self.v - self.obold.T @ self.u), initial=0.0)]
        return float(max(defects))

    def validate(self, tol=ISOMETRY_TOL):
        _check_theta(self.theta)
        if self.eta < 0:
            raise ValueError("eta must be nonnegative")
        m, n = self.d_A**2 - 1, self.d_B**2 - 1
        if self.obold.shape != (m, n) or self.u.shape != (m,) or self.v.shape != (n,):
            raise ValueError("witness parameters have inconsistent shapes")
        defect = self.constraint_defect()
        if defect > tol:
            raise ValueError(f"witness constraints violated (defect {defect:.3e})")
        return self

    def coefficients(self):
        c, s = np.cos(self.theta), np.sin(self.theta)
        K = np.zeros((self.d_A**2, self.d_B**2))
        K[0, 0] = b_coefficient(self.theta, self.eta, self.d_A, self.d_B)
        K[0, 1:] = self.eta * c * self.v
        K[1:, 0] = self.eta * s * self.u
        K[1:, 1:] = self.obold
        return K

    @cached_property
    def operator(self):
        """Materialized witness in the Gell-Mann bases."""
        return witness_w_infinity(self)

    def to_dict(self):
        return {
            "theta": float(self.theta),
            "eta": float(self.eta),
            "u": [float(t) for t in self.u],
            "v": [float(t) for t in self.v],
            "obold": [[float(t) for t in row] for row in self.obold],
            "basis_convention": self.basis_convention,
            "d_a": self.d_A,
            "d_b": self.d_B,
        }

    @classmethod
    def from_dict(cls, data):
        if data.get("basis_convention") != BASIS_CONVENTION:
            raise ValueError(f"unsupported basis convention {data.get('basis_convention')!r}")
        d_A, d_B = int(data["d_a"]), int(data["d_b"])
        obold = np.array(data["obold"], dtype=float).reshape(d_A**2 - 1, d_B**2 - 1)
        spec = cls(float(data["theta"]), float(data["eta"]), data["u"], data["v"],
                   obold, d_A, d_B)
        return spec.validate()


def witness_w_infinity(spec, basis_A=None, basis_B=None):
    """Limiting witness ``b(theta, eta) G_0 (x) G_0 + sum O_ab G_a (x) G_b
    + eta (cos(theta) G_0 (x) v.G + sin(theta) u.G (x) G_0)``."""
    spec.validate()
    basis_A, basis_B = _default_bases(spec.d_A, spec.d_B, basis_A, basis_B)
    W = operator_from_coefficients(spec.coefficients(), basis_A, basis_B)
    if hermiticity_defect(W) > HERMITIAN_TOL:
        raise AssertionError("witness operator is not Hermitian")
    return W


def w_infinity_expectation_formula(spec, data):
    """Closed form of ``Tr(W_inf rho)`` in terms of the correlation data."""
    dA, dB = spec.d_A, spec.d_B
    c, s = np.cos(spec.theta), np.sin(spec.theta)
    return float(
        b_coefficient(spec.theta, spec.eta, dA, dB) / np.sqrt(dA * dB)
        + np.sum(spec.obold * data.Cbold)
        + spec.eta * (c / np.sqrt(dA) * data.r_B @ spec.v + s / np.sqrt(dB) * data.r_A @ spec.u)
    )


def tr2_expectation(spec, data):
    """Value after eliminating the Bloch terms at the optimal ``v`` and ``eta``:
    ``[d_B(1-P_B) cot + d_A(1-P_A) tan] / (2 sqrt(d_A d_B)) + <O|T>``."""
    dA, dB = spec.d_A, spec.d_B
    t = np.tan(spec.theta)
    lead = dB * (1 - data.purity_B) / t + dA * (1 - data.purity_A) * t
    return float(lead / (2 * np.sqrt(dA * dB)) + np.sum(spec.obold * data.Tbold))


def _rotation(r, eta):
    s = eta / r
    c = np.sqrt((1 - s) * (1 + s))
    return c, s, s * s / (1 + c)


def finite_r_isometry(r, spec):
    """Exact isometry ``O(r)`` whose witnesses converge to ``spec`` as ``r`` grows.

    ``O(r) = [[-c, s v^T], [s u, obold - (1 - c) u v^T]]`` with ``s = eta / r``;
    agrees with the leading asymptotic form up to O(r^-2).
    """
    spec.validate()
    if not r > spec.eta or r <= 0:
        raise ValueError(f"radius must exceed eta = {spec.eta}, got {r}")
    c, s, one_minus_c = _rotation(r, spec.eta)
    m, n = spec.obold.shape
    O = np.empty((m + 1, n + 1))
    O[0, 0] = -c
    O[0, 1:] = s * spec.v
    O[1:, 0] = s * spec.u
    O[1:, 1:] = spec.obold - one_minus_c * np.outer(spec.u, spec.v)
    return O


def witness_at_radius(r, spec, basis_A=None, basis_B=None):
    """Finite witness at ``(x, y) = (r cos(theta), r sin(theta))`` with ``O = O(r)``."""
    O = finite_r_isometry(r, spec)
    _, _, one_minus_c = _rotation(r, spec.eta)
    x, y = r * np.cos(spec.theta), r * np.sin(spec.theta)
    return witness_finite(x, y, O, basis_A, basis_B, corner=one_minus_c)


def optimal_witness(state, basis_A=None, basis_B=None, eps=MARGINAL_EPS):
    """Limiting witness minimizing ``Tr(W_inf rho)`` for the given state.

    The minimum equals ``sqrt((1 - Tr rho_A^2)(1 - Tr rho_B^2)) - ||T||_1``.
    ``obold = -U V^T`` from the SVD of the traceless block of ``T``;
    repeated singular values make the factors, and hence ``obold``,
    non-unique while the expectation value is not. If the Bloch
    combination vanishes, ``eta = 0`` and the free unit vector is ``e_1``.
    """
    basis_A, basis_B = _default_bases(state.d_A, state.d_B, basis_A, basis_B)
    data = correlation_data(state, basis_A, basis_B)
    dA, dB = state.d_A, state.d_B
    mixA, mixB = 1 - data.purity_A, 1 - data.purity_B
    if mixA <= eps or mixB <= eps:
        raise DegenerateMarginalError(
            f"pure marginal (1 - Tr rho_A^2 = {mixA:.3e}, 1 - Tr rho_B^2 = {mixB:.3e})"
        )
    U, _, Vt = np.linalg.svd(data.Tbold, full_matrices=False)
    obold = -U @ Vt
    theta = float(np.arctan(np.sqrt(dB * mixB / (dA * mixA))))
    c, s = np.cos(theta), np.sin(theta)
    if dA <= dB:
        w = c / np.sqrt(dA) * data.r_B + s / np.sqrt(dB) * obold.T @ data.r_A
    else:
        w = s / np.sqrt(dB) * data.r_A + c / np.sqrt(dA) * obold @ data.r_B
    wnorm = float(np.linalg.norm(w))
    if wnorm <= ZERO_VECTOR_TOL:
        eta = 0.0
        free = np.zeros(len(w))
        free[0] = 1.0
    else:
        eta = wnorm * np.sqrt(dA * dB) / (s * c)
        free = -w / wnorm
    if dA <= dB:
        v, u = free, obold @ free
    else:
        u, v = free, obold.T @ free
    lemma = enhanced_rhs(data.purity_A, data.purity_B) - float(np.sum(singular_values(data.Tbold)))
    spec = WitnessSpec(theta, float(eta), u, v, obold, dA, dB, meta={"lemma_value": lemma})
    return spec.validate()


def save_witness(spec, path):
    Path(path).write_text(json.dumps(spec.to_dict()) + "\n")


def load_witness(path):
    return WitnessSpec.from_dict(json.loads(Path(path).read_text()))


@dataclass
class EquivalenceReport:
    """Outcome of checking one state against both sides of the equivalence.

    ``status`` is one of ``detected`` (enhanced criterion violated and a
    finite witness found), ``undetected`` (nothing flags the state), or
    ``counterexample`` (the two sides disagree).
    """

    status: str
    enhanced_lhs: float
    enhanced_rhs: float
    enhanced_violated: bool
    F: float
    grid_min_margin: float
    grid_argmin: tuple
    grid_violations: int
    lemma_value: float | None = None
    w_inf_value: float | None = None
    detection_r: float | None = None
    detection_xy: tuple | None = None
    radial: list = field(default_factory=list)
    spec: WitnessSpec | None = None
    note: str = ""

    @property
    def consistent(self):
        return self.status != "counterexample"


def certify_equivalence(state, r_schedule=DEFAULT_R_SCHEDULE, grid=None, tol=VIOLATION_TOL):
    data = correlation_data(state)
    enh = enhanced_ccnr(state, tol)
    F = quadratic_F(state, data)
    scan = scan_family(state, grid, data, tol)
    worst = min(scan, key=lambda rep: rep.margin)
    n_grid = sum(rep.violated for rep in scan)
    report = EquivalenceReport(
        status="undetected",
        enhanced_lhs=enh.lhs,
        enhanced_rhs=enh.rhs,
        enhanced_violated=enh.violated,
        F=F,
        grid_min_margin=worst.margin,
        grid_argmin=(worst.x, worst.y),
        grid_violations=n_grid,
    )
    if not enh.violated:
        if n_grid or F < -tol:
            report.status = "counterexample"
            report.note = "family or F flags a state the enhanced criterion accepts"
        return report

    try:
        spec = optimal_witness(state)
    except DegenerateMarginalError as exc:
        report.status = "counterexample"
        report.note = str(exc)
        return report
    report.spec = spec
    report.lemma_value = enh.rhs - enh.lhs
    report.w_inf_value = expectation(spec.operator, state)
    for r in sorted(r_schedule):
        if r <= spec.eta:
            report.radial.append((float(r), None, None))
            continue
        value = expectation(witness_at_radius(r, spec), state)
        x, y = r * np.cos(spec.theta), r * np.sin(spec.theta)
        fam = family_criterion(state, x, y, data, tol)
        report.radial.append((float(r), value, fam.margin))
        if report.detection_r is None and value < -tol:
            report.detection_r = float(r)
            report.detection_xy = (float(x), float(y))
    if report.w_inf_value < -tol and report.detection_r is not None:
        report.status = "detected"
    else:
        report.status = "counterexample"
        report.note = "enhanced criterion violated but no finite witness in schedule"
    return report
