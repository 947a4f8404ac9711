"""Error-robustness analysis of the reconstruction linear systems.

The two-norm condition number kappa(A) = sigma_max / sigma_min measures how
strongly relative errors in the observation vector can be amplified in the
reconstructed state; 1/kappa(A) is the relative spectral distance of a
square A to the nearest singular matrix (Gastinel-Kahan).  The normal
matrix C = A^T A ("error matrix") satisfies kappa(C) = kappa(A)^2, and its
smallest singular value is the second robustness figure tabulated here.

Only the two-norm condition number enters the acceptance checks; the
Frobenius variant is exposed as an extra.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np

from .linalg import RANK_RTOL, least_squares_solve, spectral_norm, svd
from .protocols import ProtocolSpec, all_protocols


@dataclass(frozen=True)
class ConditionNumber:
    """sigma_max / sigma_min with an explicit singularity flag.

    A singular matrix is reported through ``is_singular`` (``value`` then
    returns math.inf deliberately, never as a floating-point overflow).
    """

    sigma_max: float
    sigma_min: float
    is_singular: bool

    @property
    def value(self) -> float:
        if self.is_singular:
            return math.inf
        return self.sigma_max / self.sigma_min

    def __float__(self) -> float:
        return self.value


def condition_number(a: np.ndarray) -> ConditionNumber:
    """Two-norm condition number; applies to nonsquare matrices as well."""
    s = svd(a).singular_values
    smax = float(s[0])
    smin = float(s[-1])
    singular = smax == 0.0 or smin <= RANK_RTOL * smax
    return ConditionNumber(smax, smin, singular)


def condition_number_frobenius(a: np.ndarray) -> float:
    """Frobenius-norm condition number ||A||_F ||A^{-1}||_F (square A)."""
    a = np.asarray(a)
    if a.shape[0] != a.shape[1]:
        raise ValueError("Frobenius condition number needs a square matrix")
    s = svd(a).singular_values
    if s[-1] <= RANK_RTOL * s[0]:
        return math.inf
    return float(np.sqrt(np.sum(s**2)) * np.sqrt(np.sum(s**-2)))


def error_matrix(a: np.ndarray) -> np.ndarray:
    """Normal matrix C = A^dag A of the least-squares system."""
    a = np.asarray(a)
    return a.conj().T @ a


def gastinel_kahan_distance(a: np.ndarray) -> tuple[float, np.ndarray]:
    """Relative spectral distance to singularity and a nearest singular matrix.

    The distance equals 1/kappa(A); the minimizer is obtained by removing
    the smallest singular triplet, a - sigma_min u_min v_min^H.
    """
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("distance to singularity is defined for square matrices")
    res = svd(a)
    s = res.singular_values
    if s[-1] <= RANK_RTOL * s[0]:
        raise ValueError("matrix is already singular")
    u_min = res.left_vectors[:, -1]
    v_min = res.right_vectors[:, -1]
    nearest = a - s[-1] * np.outer(u_min, v_min.conj())
    return float(s[-1] / s[0]), nearest


@dataclass(frozen=True)
class PerturbationReport:
    """Observed vs bounded relative change of the solution of A x = b."""

    rel_change_x: float
    rel_change_b: float
    rel_change_a: float
    kappa: float
    lower_bound: float | None  # only for the pure-delta-b theorem
    upper_bound: float
    bounds_hold: bool


def perturbation_bound_check(
    a: np.ndarray,
    b: np.ndarray,
    delta_b: np.ndarray,
    delta_a: np.ndarray | None = None,
    rtol: float = 1e-9,
) -> PerturbationReport:
    """Solve the perturbed system and compare against the condition bounds.

    With ``delta_a`` absent the two-sided bound
    ``(1/kappa) |db|/|b| <= |dx|/|x| <= kappa |db|/|b|`` applies; with a
    matrix perturbation only the one-sided bound holds, under the theorem
    hypothesis ||delta_a|| < 1/||A^{-1}|| (violations are refused).
    """
    a = np.asarray(a, dtype=float)
    if a.shape[0] != a.shape[1]:
        raise ValueError("the perturbation theorem applies to square systems")
    b = np.asarray(b, dtype=float)
    delta_b = np.asarray(delta_b, dtype=float)
    kappa = condition_number(a)
    if kappa.is_singular:
        raise ValueError("matrix is singular")
    x = least_squares_solve(a, b)
    if delta_a is None:
        x_pert = least_squares_solve(a, b + delta_b)
        rel_a = 0.0
    else:
        delta_a = np.asarray(delta_a, dtype=float)
        if spectral_norm(delta_a) >= kappa.sigma_min:  # ||dA|| < 1/||A^-1||
            raise ValueError(
                "perturbation too large: ||delta_a|| >= 1/||A^{-1}||, "
                "A + delta_a may be singular"
            )
        x_pert = least_squares_solve(a + delta_a, b + delta_b)
        rel_a = spectral_norm(delta_a) / kappa.sigma_max
    norm_x = float(np.linalg.norm(x))
    norm_b = float(np.linalg.norm(b))
    rel_x = float(np.linalg.norm(x_pert - x)) / norm_x
    rel_b = float(np.linalg.norm(delta_b)) / norm_b
    k = kappa.value
    if delta_a is None:
        lower = rel_b / k
        upper = k * rel_b
    else:
        lower = None
        upper = k / (1.0 - k * rel_a) * (rel_a + rel_b)
    slack = rtol * max(1.0, rel_x)
    holds = rel_x <= upper + slack and (lower is None or rel_x >= lower - slack)
    return PerturbationReport(
        rel_change_x=rel_x,
        rel_change_b=rel_b,
        rel_change_a=rel_a,
        kappa=k,
        lower_bound=lower,
        upper_bound=upper,
        bounds_hold=holds,
    )


# ---------------------------------------------------------------------------
# per-protocol reports and the comparison table


@dataclass(frozen=True)
class ConditioningReport:
    protocol_id: int | None
    name: str
    based_on: str
    locality: str
    n_elements: int
    shape: tuple[int, int]
    singular_values_a: np.ndarray
    kappa_a: float
    kappa_c: float
    min_svd_c: float
    dist_to_singular: float | None  # 1/kappa for square A, else None
    is_singular: bool


def conditioning_report(spec: ProtocolSpec) -> ConditioningReport:
    a = spec.rotation_matrix
    kappa = condition_number(a)
    c = error_matrix(a)
    sc = svd(c).singular_values
    square = a.shape[0] == a.shape[1]
    dist = None
    if square and not kappa.is_singular:
        dist = 1.0 / kappa.value
    return ConditioningReport(
        protocol_id=spec.id,
        name=spec.name,
        based_on=spec.based_on,
        locality=spec.locality,
        n_elements=spec.n_elements,
        shape=a.shape,
        singular_values_a=svd(a).singular_values,
        kappa_a=kappa.value,
        kappa_c=float(sc[0] / sc[-1]) if sc[-1] > 0 else math.inf,
        min_svd_c=float(sc[-1]),
        dist_to_singular=dist,
        is_singular=kappa.is_singular,
    )


# Expected comparison-table values.  Tolerance policy: exact targets are
# checked to 1e-9 relative; the two values the source reports to limited
# precision carry absolute windows (+-0.1 and +-0.005).
REL = None

TABLE1_EXPECTED = (
    (1, "optimal GPOs", 16, "local & global", (1.0, REL), (1.0, REL)),
    (2, "Pauli operators", 16, "local", (2.0, REL), (1.0, REL)),
    (3, "James et al. basis", 16, "local", (60.1, 0.1), (0.1, 0.005)),
    (4, "standard separable basis", 36, "local", (9.0, REL), (1.0, REL)),
    (5, "mutually unbiased bases", 20, "local & global", (5.0, REL), (1.0, REL)),
    (6, "Gell-Mann GPOs", 16, "local & global", (2.0, REL), (0.5, REL)),
    (7, "Patera-Zassenhaus GPOs", 16, "local & global", (2.0, REL), (4.0, REL)),
)

_REL_TOL = 1e-9


def _within(value: float, target: float, tol: float | None) -> bool:
    if tol is None:
        return abs(value - target) <= _REL_TOL * abs(target)
    return abs(value - target) <= tol


@dataclass(frozen=True)
class Table1Check:
    report: ConditioningReport
    expected_n: int
    expected_kappa_c: float
    expected_min_svd_c: float
    n_ok: bool
    kappa_c_ok: bool
    min_svd_c_ok: bool

    @property
    def all_ok(self) -> bool:
        return self.n_ok and self.kappa_c_ok and self.min_svd_c_ok

    @property
    def failing_cells(self) -> list[str]:
        cells = []
        if not self.n_ok:
            cells.append("n_projectors")
        if not self.kappa_c_ok:
            cells.append("kappa_C")
        if not self.min_svd_c_ok:
            cells.append("min_svd_C")
        return cells


def table1_report(mub_variant: str = "adamson") -> list[ConditioningReport]:
    """Conditioning report for every two-qubit protocol, in table order."""
    return [conditioning_report(spec) for spec in all_protocols(mub_variant)]


def table1_check(
    reports: list[ConditioningReport] | None = None,
    mub_variant: str = "adamson",
) -> list[Table1Check]:
    if reports is None:
        reports = table1_report(mub_variant)
    if len(reports) != len(TABLE1_EXPECTED):
        raise ValueError(
            f"expected {len(TABLE1_EXPECTED)} protocol reports, got {len(reports)}"
        )
    checks = []
    for rep, (pid, _, n, _, kc, mc) in zip(reports, TABLE1_EXPECTED):
        if rep.protocol_id != pid:
            raise ValueError(f"report order mismatch: {rep.protocol_id} vs {pid}")
        checks.append(
            Table1Check(
                report=rep,
                expected_n=n,
                expected_kappa_c=kc[0],
                expected_min_svd_c=mc[0],
                n_ok=rep.n_elements == n,
                kappa_c_ok=_within(rep.kappa_c, kc[0], kc[1]),
                min_svd_c_ok=_within(rep.min_svd_c, mc[0], mc[1]),
            )
        )
    return checks


# ---------------------------------------------------------------------------
# emission helpers

_CSV_FIELDS = (
    "protocol",
    "based_on",
    "n_projectors",
    "locality",
    "kappa_A",
    "kappa_C",
    "min_svd_C",
    "dist_to_singular",
)


def report_row(rep: ConditioningReport) -> dict:
    return {
        "protocol": rep.protocol_id,
        "based_on": rep.based_on,
        "n_projectors": rep.n_elements,
        "locality": rep.locality,
        "kappa_A": rep.kappa_a,
        "kappa_C": rep.kappa_c,
        "min_svd_C": rep.min_svd_c,
        "dist_to_singular": rep.dist_to_singular,
    }


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def reports_to_csv(reports: list[ConditioningReport]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(_CSV_FIELDS)
    for rep in reports:
        row = report_row(rep)
        writer.writerow([_fmt(row[f]) for f in _CSV_FIELDS])
    return buf.getvalue()


def reports_to_json(reports: list[ConditioningReport], indent: int | None = 2) -> str:
    return json.dumps([report_row(r) for r in reports], indent=indent)
