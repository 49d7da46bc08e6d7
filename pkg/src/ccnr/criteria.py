"""Realignment-type separability criteria built on the correlation tensor."""
import csv
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .basis import build_basis, expand
from .linalg import realign, trace_norm

VIOLATION_TOL = 1e-9
REPORT_VERSION = "ccnr-report v1"
REPORT_COLUMNS = ("state_label", "criterion", "x", "y", "lhs", "rhs", "margin", "violated")


@lru_cache(maxsize=None)
def gellmann(d):
    return build_basis(d)


def _bases(state, basis_A, basis_B):
    basis_A = basis_A or gellmann(state.d_A)
    basis_B = basis_B or gellmann(state.d_B)
    if (basis_A.dim, basis_B.dim) != (state.d_A, state.d_B):
        raise ValueError(
            f"basis dimensions ({basis_A.dim}, {basis_B.dim}) do not match "
            f"state dimensions ({state.d_A}, {state.d_B})"
        )
    return basis_A, basis_B


def is_violated(lhs, rhs, tol=VIOLATION_TOL):
    """``lhs > rhs`` beyond ``tol``, scaled up when the bound itself is large."""
    return bool(lhs > rhs + tol * max(1.0, abs(rhs)))


@dataclass(frozen=True)
class CriterionReport:
    criterion: str
    lhs: float
    rhs: float
    x: float | None = None
    y: float | None = None
    tol: float = VIOLATION_TOL

    @property
    def margin(self):
        return self.rhs - self.lhs

    @property
    def violated(self):
        return is_violated(self.lhs, self.rhs, self.tol)

    def row(self, state_label=""):
        return {
            "state_label": str(state_label),
            "criterion": self.criterion,
            "x": "" if self.x is None else repr(float(self.x)),
            "y": "" if self.y is None else repr(float(self.y)),
            "lhs": repr(float(self.lhs)),
            "rhs": repr(float(self.rhs)),
            "margin": repr(float(self.margin)),
            "violated": str(self.violated).lower(),
        }


def correlation_matrix(operator, basis_A, basis_B):
    """``M[a, b] = Tr(X G^A_a (x) G^B_b)`` for an operator ``X`` on the composite space."""
    d_A, d_B = basis_A.dim, basis_B.dim
    x4 = np.asarray(operator).reshape(d_A, d_B, d_A, d_B)
    return np.einsum("iajb,xji,yba->xy", x4, basis_A.elements, basis_B.elements).real


@dataclass(frozen=True, eq=False)
class CorrelationData:
    """Correlation tensor, Bloch vectors and the connected correlation matrix of a state."""

    d_A: int
    d_B: int
    C: np.ndarray
    r_A: np.ndarray
    r_B: np.ndarray
    Tmat: np.ndarray
    purity_A: float
    purity_B: float

    @property
    def Cbold(self):
        return self.C[1:, 1:]

    @property
    def Tbold(self):
        return self.Tmat[1:, 1:]

    def check(self, tol=1e-10):
        """Assert the block-structure and purity identities; returns the worst defect."""
        dA, dB = self.d_A, self.d_B
        defects = [
            abs(self.C[0, 0] - 1 / np.sqrt(dA * dB)),
            np.max(np.abs(self.C[0, 1:] - self.r_B / np.sqrt(dA))),
            np.max(np.abs(self.C[1:, 0] - self.r_A / np.sqrt(dB))),
            np.max(np.abs(self.Tmat[0, :])),
            np.max(np.abs(self.Tmat[:, 0])),
            np.max(np.abs(self.Tbold - (self.Cbold - np.outer(self.r_A, self.r_B)))),
            abs(self.purity_A - (1 / dA + self.r_A @ self.r_A)),
            abs(self.purity_B - (1 / dB + self.r_B @ self.r_B)),
        ]
        worst = float(max(defects))
        if worst > tol:
            raise AssertionError(f"correlation data inconsistent (defect {worst:.3e})")
        return worst


def correlation_data(state, basis_A=None, basis_B=None):
    basis_A, basis_B = _bases(state, basis_A, basis_B)
    rho = state.matrix
    rho_A, rho_B = state.rho_A, state.rho_B
    C = correlation_matrix(rho, basis_A, basis_B)
    T = correlation_matrix(rho - np.kron(rho_A, rho_B), basis_A, basis_B)
    return CorrelationData(
        d_A=state.d_A,
        d_B=state.d_B,
        C=C,
        r_A=expand(rho_A, basis_A)[1:],
        r_B=expand(rho_B, basis_B)[1:],
        Tmat=T,
        purity_A=float(np.real(np.trace(rho_A @ rho_A))),
        purity_B=float(np.real(np.trace(rho_B @ rho_B))),
    )


def ccnr(state, tol=VIOLATION_TOL):
    """Realignment criterion: ``||R(rho)||_1 <= 1`` for separable states."""
    lhs = trace_norm(realign(state.matrix, state.d_A, state.d_B))
    return CriterionReport("ccnr", float(lhs), 1.0, tol=tol)


def enhanced_rhs(purity_A, purity_B):
    return float(np.sqrt(max(0.0, 1 - purity_A)) * np.sqrt(max(0.0, 1 - purity_B)))


def enhanced_ccnr(state, tol=VIOLATION_TOL):
    """``||R(rho - rho_A (x) rho_B)||_1 <= sqrt((1 - Tr rho_A^2)(1 - Tr rho_B^2))``."""
    rho_A, rho_B = state.rho_A, state.rho_B
    lhs = trace_norm(realign(state.matrix - np.kron(rho_A, rho_B), state.d_A, state.d_B))
    pa = float(np.real(np.trace(rho_A @ rho_A)))
    pb = float(np.real(np.trace(rho_B @ rho_B)))
    return CriterionReport("enhanced", float(lhs), enhanced_rhs(pa, pb), tol=tol)


def family_bound(x, y, d_A, d_B):
    """``N_A(x) N_B(y)`` with ``N(x) = sqrt((d - 1 + x^2) / d)``."""
    return float(np.sqrt((d_A - 1 + x * x) / d_A) * np.sqrt((d_B - 1 + y * y) / d_B))


def _check_xy(x, y):
    if x < 0 or y < 0:
        raise ValueError(f"x and y must be nonnegative, got ({x}, {y})")


def scaled_correlation(C, x, y):
    """``D_x C D_y`` with ``D_x = diag(x, 1, ..., 1)``."""
    M = np.array(C, dtype=float)
    M[0, :] *= x
    M[:, 0] *= y
    return M


def family_criterion(state, x, y, data=None, tol=VIOLATION_TOL):
    """``||D_x C D_y||_1 <= N_A(x) N_B(y)``; (1,1) is CCNR, (0,0) de Vicente."""
    _check_xy(x, y)
    data = data or correlation_data(state)
    lhs = trace_norm(scaled_correlation(data.C, x, y))
    return CriterionReport("family", float(lhs), family_bound(x, y, state.d_A, state.d_B),
                           float(x), float(y), tol)


def esic_parameters(d_A, d_B):
    return float(np.sqrt(d_A + 1)), float(np.sqrt(d_B + 1))


def quadratic_F(state, data=None):
    """Minimal value of the quadratic witness family,
    ``1 - ||T||_1 - (Tr rho_A^2 + Tr rho_B^2) / 2``. Negative values flag entanglement."""
    data = data or correlation_data(state)
    return float(1 - trace_norm(data.Tmat) - (data.purity_A + data.purity_B) / 2)


def quadratic_F_report(state, data=None, tol=VIOLATION_TOL):
    # as a report: lhs = -F against a zero bound, so violated <=> F < -tol
    return CriterionReport("quadratic_F", -quadratic_F(state, data), 0.0, tol=tol)


def default_grid(r_max=1e3, n_theta=16, decades_below=1, per_decade=4):
    """Polar grid of (x, y) points.

    ``r`` runs over 0 and ``per_decade`` log-spaced values per decade from
    ``10**-decades_below`` to ``r_max``; ``theta = k pi / n_theta`` for
    ``k = 0..n_theta/2`` covers the closed quarter plane.
    """
    top = np.log10(r_max)
    n = int(round((top + decades_below) * per_decade)) + 1
    radii = np.logspace(-decades_below, top, n)
    thetas = np.arange(n_theta // 2 + 1) * np.pi / n_theta
    cos, sin = np.cos(thetas), np.sin(thetas)
    if n_theta % 2 == 0:
        cos[-1] = 0.0  # the y axis exactly, not 6e-17
    points = [(0.0, 0.0)]
    for r in radii:
        for c, s in zip(cos, sin):
            points.append((float(r * c), float(r * s)))
    return points


def scan_family(state, grid=None, data=None, tol=VIOLATION_TOL):
    """Evaluate the (x, y) family at every grid point; one report per point."""
    grid = default_grid() if grid is None else list(grid)
    if not grid:
        raise ValueError("scan grid is empty")
    data = data or correlation_data(state)
    xs = np.array([p[0] for p in grid], dtype=float)
    ys = np.array([p[1] for p in grid], dtype=float)
    if np.any(xs < 0) or np.any(ys < 0):
        raise ValueError("grid points must have nonnegative coordinates")
    stack = np.broadcast_to(data.C, (len(grid),) + data.C.shape).copy()
    stack[:, 0, :] *= xs[:, None]
    stack[:, :, 0] *= ys[:, None]
    lhs = trace_norm(stack)
    return [
        CriterionReport("family", float(l), family_bound(x, y, state.d_A, state.d_B),
                        float(x), float(y), tol)
        for l, x, y in zip(lhs, xs, ys)
    ]


def evaluate(state, criteria=("ccnr", "enhanced", "quadratic_F", "family"),
             x=1.0, y=1.0, tol=VIOLATION_TOL):
    data = correlation_data(state)
    out = []
    for name in criteria:
        if name == "ccnr":
            out.append(ccnr(state, tol))
        elif name == "enhanced":
            out.append(enhanced_ccnr(state, tol))
        elif name == "quadratic_F":
            out.append(quadratic_F_report(state, data, tol))
        elif name == "family":
            out.append(family_criterion(state, x, y, data, tol))
        else:
            raise ValueError(f"unknown criterion {name!r}")
    return out


def write_reports_csv(fh, rows):
    """Write ``(state_label, report)`` pairs with a versioned header comment."""
    fh.write(f"# {REPORT_VERSION}\n")
    writer = csv.DictWriter(fh, fieldnames=REPORT_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for label, report in rows:
        writer.writerow(report.row(label))
