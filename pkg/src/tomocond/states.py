"""Density matrices, the real state-vector convention, and named states.

A Hermitian d x d matrix ``rho`` is packed into a real vector of length d^2
by scanning the upper triangle row by row: each diagonal element first,
then (Re, Im) of every off-diagonal element in that row.  For two qubits:

    x = [rho_00, Re rho_01, Im rho_01, Re rho_02, Im rho_02, Re rho_03,
         Im rho_03, rho_11, Re rho_12, Im rho_12, Re rho_13, Im rho_13,
         rho_22, Re rho_23, Im rho_23, rho_33]

This ordering is frozen; it is the wire format for every rotation matrix
and serialized state in the package.

No trace or positivity constraint is imposed on construction or on
``vec``/``unvec``: a linear-inversion reconstruction from noisy counts is in
general neither normalized nor positive, and the trace itself is a measured
quantity (the detection efficiency of the photon pair).  Physicality is a
*query* (:func:`validity`), and the metrics clip to the PSD cone only when
they must, with a warning.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

HERMITIAN_ATOL = 1e-12
PSD_ATOL = 1e-10


class UnphysicalStateWarning(UserWarning):
    """A metric had to project its input onto the PSD cone."""


def _as_square(rho: np.ndarray, name: str = "rho") -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {rho.shape}")
    return rho


def _require_hermitian(rho: np.ndarray, atol: float = HERMITIAN_ATOL) -> np.ndarray:
    rho = _as_square(rho)
    dev = np.abs(rho - rho.conj().T)
    worst = float(dev.max())
    if worst > atol:
        i, j = np.unravel_index(int(dev.argmax()), dev.shape)
        raise ValueError(
            f"matrix is not Hermitian: |rho - rho^dag| = {worst:.3e} "
            f"at entry ({i}, {j})"
        )
    return rho


# ---------------------------------------------------------------------------
# real vectorization


def slot_labels(dim: int) -> list[str]:
    """Human-readable names of the d^2 state-vector slots, in order."""
    labels = []
    for i in range(dim):
        labels.append(f"rho_{i}{i}")
        for j in range(i + 1, dim):
            labels.append(f"Re rho_{i}{j}")
            labels.append(f"Im rho_{i}{j}")
    return labels


def vec(rho: np.ndarray) -> np.ndarray:
    """Pack a Hermitian matrix into the real state vector (length d^2)."""
    rho = _require_hermitian(rho)
    d = rho.shape[0]
    out = np.empty(d * d)
    pos = 0
    for i in range(d):
        out[pos] = rho[i, i].real
        pos += 1
        for j in range(i + 1, d):
            out[pos] = rho[i, j].real
            out[pos + 1] = rho[i, j].imag
            pos += 2
    return out


def unvec(x: np.ndarray) -> np.ndarray:
    """Inverse of :func:`vec`; input length must be a perfect square."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError("unvec expects a 1-d vector")
    d = math.isqrt(x.size)
    if d * d != x.size:
        raise ValueError(f"state vector length {x.size} is not a perfect square")
    rho = np.zeros((d, d), dtype=complex)
    pos = 0
    for i in range(d):
        rho[i, i] = x[pos]
        pos += 1
        for j in range(i + 1, d):
            rho[i, j] = x[pos] + 1j * x[pos + 1]
            rho[j, i] = x[pos] - 1j * x[pos + 1]
            pos += 2
    return rho


def basis_matrices(dim: int) -> list[np.ndarray]:
    """Hermitian matrices E_i with rho = sum_i x_i E_i under the slot order.

    Diagonal slot: |k><k|.  Re slot (k<l): |k><l| + |l><k|.  Im slot:
    i|k><l| - i|l><k|.
    """
    mats = []
    for i in range(dim):
        m = np.zeros((dim, dim), dtype=complex)
        m[i, i] = 1.0
        mats.append(m)
        for j in range(i + 1, dim):
            m = np.zeros((dim, dim), dtype=complex)
            m[i, j] = 1.0
            m[j, i] = 1.0
            mats.append(m)
            m = np.zeros((dim, dim), dtype=complex)
            m[i, j] = 1.0j
            m[j, i] = -1.0j
            mats.append(m)
    return mats


# ---------------------------------------------------------------------------
# named states

_SQRT2 = math.sqrt(2.0)

QUBIT_KETS = {
    "0": np.array([1.0, 0.0], dtype=complex),
    "1": np.array([0.0, 1.0], dtype=complex),
    "+": np.array([1.0, 1.0], dtype=complex) / _SQRT2,
    "-": np.array([1.0, -1.0], dtype=complex) / _SQRT2,
    "R": np.array([1.0, -1.0j], dtype=complex) / _SQRT2,  # right circular
    "L": np.array([1.0, 1.0j], dtype=complex) / _SQRT2,  # left circular
}

# (amplitude on |01>/|00>, partner ket index pattern) is easier to read as
# explicit vectors over the computational basis 00,01,10,11.
BELL_KETS = {
    "phi+": np.array([1, 0, 0, 1], dtype=complex) / _SQRT2,
    "phi-": np.array([1, 0, 0, -1], dtype=complex) / _SQRT2,
    "psi+": np.array([0, 1, 1, 0], dtype=complex) / _SQRT2,
    "psi-": np.array([0, 1, -1, 0], dtype=complex) / _SQRT2,
    "phibar+": np.array([1, 0, 0, 1j], dtype=complex) / _SQRT2,
    "phibar-": np.array([1, 0, 0, -1j], dtype=complex) / _SQRT2,
    "psibar+": np.array([0, 1, 1j, 0], dtype=complex) / _SQRT2,
    "psibar-": np.array([0, 1, -1j, 0], dtype=complex) / _SQRT2,
}

_UNICODE_BELL = str.maketrans({"Φ": "phi", "Ψ": "psi"})


def _normalize_name(name: str) -> str:
    name = name.strip()
    # Greek capital Phi/Psi, optionally with a combining macron (the
    # "barred" Bell-like states), mapped to ascii.
    name = name.replace("̄", "bar").translate(_UNICODE_BELL)
    return name


def named_state(name: str) -> np.ndarray:
    """Normalized ket for a conventional state name.

    Single qubit: ``0 1 + - R L``.  Two-qubit products: any two of those
    concatenated, e.g. ``"0+"`` or ``"R1"``.  Bell and Bell-like states:
    ``phi+ phi- psi+ psi- phibar+ phibar- psibar+ psibar-`` (Greek
    spellings are accepted).
    """
    raw = name
    name = _normalize_name(name)
    if name in QUBIT_KETS:
        return QUBIT_KETS[name].copy()
    low = name.lower()
    if low in BELL_KETS:
        return BELL_KETS[low].copy()
    if len(name) == 2 and name[0] in QUBIT_KETS and name[1] in QUBIT_KETS:
        return np.kron(QUBIT_KETS[name[0]], QUBIT_KETS[name[1]])
    raise ValueError(
        f"unknown state name {raw!r}; expected one of 0,1,+,-,R,L, a "
        "two-character product, or phi+/phi-/psi+/psi-/phibar+/phibar-/"
        "psibar+/psibar-"
    )


def projector(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


# ---------------------------------------------------------------------------
# physicality and metrics


@dataclass(frozen=True)
class StateValidity:
    """Physicality report; nothing here is enforced anywhere."""

    trace: float
    min_eigenvalue: float
    hermiticity_deviation: float

    def is_physical(self, atol: float = PSD_ATOL) -> bool:
        return (
            self.hermiticity_deviation <= HERMITIAN_ATOL
            and self.min_eigenvalue >= -atol
            and abs(self.trace - 1.0) <= atol
        )


def validity(rho: np.ndarray) -> StateValidity:
    rho = _as_square(rho)
    herm_dev = float(np.abs(rho - rho.conj().T).max())
    w = np.linalg.eigvalsh((rho + rho.conj().T) / 2.0)
    return StateValidity(
        trace=float(rho.trace().real),
        min_eigenvalue=float(w.min()),
        hermiticity_deviation=herm_dev,
    )


def psd_clip(rho: np.ndarray) -> tuple[np.ndarray, bool]:
    """Clip negative eigenvalues to zero; no renormalization.

    Returns (matrix, clipped).  The raw linear-inversion output stays
    inspectable; only metrics go through this.
    """
    rho = _as_square(rho)
    herm = (rho + rho.conj().T) / 2.0
    w, v = np.linalg.eigh(herm)
    if w.min() >= -PSD_ATOL:
        return herm, False
    w = np.clip(w, 0.0, None)
    return (v * w) @ v.conj().T, True


def _sqrtm_psd(rho: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(rho)
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def fidelity(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Uhlmann fidelity F(rho, sigma) = (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.

    Non-PSD inputs are clipped to the PSD cone first and an
    UnphysicalStateWarning is issued.
    """
    rho = _require_hermitian(rho, atol=1e-9)
    sigma = _require_hermitian(sigma, atol=1e-9)
    if rho.shape != sigma.shape:
        raise ValueError(f"dimension mismatch: {rho.shape} vs {sigma.shape}")
    rho, clip_a = psd_clip(rho)
    sigma, clip_b = psd_clip(sigma)
    if clip_a or clip_b:
        warnings.warn(
            "fidelity evaluated on PSD-projected copies", UnphysicalStateWarning
        )
    sq = _sqrtm_psd(rho)
    w = np.linalg.eigvalsh(sq @ sigma @ sq)
    return float(np.sum(np.sqrt(np.clip(w, 0.0, None))) ** 2)


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Half the trace norm of rho - sigma."""
    rho = _require_hermitian(rho, atol=1e-9)
    sigma = _require_hermitian(sigma, atol=1e-9)
    if rho.shape != sigma.shape:
        raise ValueError(f"dimension mismatch: {rho.shape} vs {sigma.shape}")
    w = np.linalg.eigvalsh(rho - sigma)
    return float(np.sum(np.abs(w)) / 2.0)


# ---------------------------------------------------------------------------
# random states


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (g + g.conj().T) / 2.0


def random_density_matrix(
    dim: int, rng: np.random.Generator, rank: int | None = None
) -> np.ndarray:
    """Hilbert-Schmidt random density matrix from a Ginibre factor."""
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return rho / rho.trace().real


# ---------------------------------------------------------------------------
# JSON wire format


def density_matrix_to_dict(rho: np.ndarray) -> dict:
    """{"dim": d, "re": d x d, "im": d x d}; exact float round trip."""
    rho = _as_square(rho)
    return {
        "dim": int(rho.shape[0]),
        "re": rho.real.tolist(),
        "im": rho.imag.tolist(),
    }


def density_matrix_from_dict(data: dict) -> np.ndarray:
    d = int(data["dim"])
    re = np.asarray(data["re"], dtype=float)
    im = np.asarray(data["im"], dtype=float)
    if re.shape != (d, d) or im.shape != (d, d):
        raise ValueError(f"expected {d}x{d} re/im blocks, got {re.shape}, {im.shape}")
    return re + 1j * im


def state_vector_to_dict(x: np.ndarray) -> dict:
    x = np.asarray(x, dtype=float)
    d = math.isqrt(x.size)
    if d * d != x.size:
        raise ValueError(f"state vector length {x.size} is not a perfect square")
    return {"dim": d, "x": x.tolist()}


def state_vector_from_dict(data: dict) -> np.ndarray:
    x = np.asarray(data["x"], dtype=float)
    d = int(data["dim"])
    if x.size != d * d:
        raise ValueError(f"dim {d} inconsistent with vector length {x.size}")
    return x
