"""Polarization-optics algebra for the two measurement setups.

Setup 1 rotates the photon pair with one half-wave plate (HWP) and one
quarter-wave plate (QWP) per arm and then projects either onto |HH> (local
eigenstates, beam splitter removed) or onto the singlet via a balanced
beam splitter ahead of polarizing beam splitters and four detectors.
Setup 2 replaces the Bell projection by an ideal CNOT that disentangles
the Bell-type eigenstates into separable ones.

Angles are degrees at every public interface (as in the settings tables);
conversion to radians is internal.  Qubit convention: |0> = |H>, |1> = |V>.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .protocols import CNOT, optimal_gpo_eigen
from .states import named_state

_SQRT2 = math.sqrt(2.0)


def hwp(theta_deg: float) -> np.ndarray:
    """Half-wave plate at angle theta: [[c, s], [s, -c]], c = cos 2t, s = sin 2t."""
    t = math.radians(theta_deg)
    c, s = math.cos(2 * t), math.sin(2 * t)
    return np.array([[c, s], [s, -c]], dtype=complex)


def qwp(theta_deg: float) -> np.ndarray:
    """Quarter-wave plate: (1/sqrt2) [[i + c, s], [s, i - c]]."""
    t = math.radians(theta_deg)
    c, s = math.cos(2 * t), math.sin(2 * t)
    return np.array([[1j + c, s], [s, 1j - c]], dtype=complex) / _SQRT2


def local_rotation(h1: float, q1: float, h2: float, q2: float) -> np.ndarray:
    """Two-arm plate unitary (Q1 H1) (x) (Q2 H2), QWP after HWP on each arm."""
    return np.kron(qwp(q1) @ hwp(h1), qwp(q2) @ hwp(h2))


@dataclass(frozen=True)
class PlateRow:
    """One row of the wave-plate settings tables."""

    gpo: int
    state: str
    h1: float
    q1: float
    h2: float
    q2: float


# Plate settings that map each separable eigenstate of gamma_1..12 onto
# |00>; first-listed state of each operator first.
TABLE2_ROWS = (
    PlateRow(1, "00", 0, 0, 0, 0),
    PlateRow(2, "01", 0, 0, 45, 0),
    PlateRow(3, "10", 45, 0, 0, 0),
    PlateRow(4, "11", 45, 0, 45, 0),
    PlateRow(5, "0+", 0, 0, 22.5, 0),
    PlateRow(5, "0-", 0, 0, 67.5, 0),
    PlateRow(6, "0R", 0, 0, 0, 45),
    PlateRow(6, "0L", 0, 0, 0, -45),
    PlateRow(7, "+0", 22.5, 0, 0, 0),
    PlateRow(7, "-0", 67.5, 0, 0, 0),
    PlateRow(8, "R0", 0, 45, 0, 0),
    PlateRow(8, "L0", 0, -45, 0, 0),
    PlateRow(9, "1+", 45, 0, 22.5, 0),
    PlateRow(9, "1-", 45, 0, 67.5, 0),
    PlateRow(10, "1R", 45, 0, 0, 45),
    PlateRow(10, "1L", 45, 0, 0, -45),
    PlateRow(11, "+1", 22.5, 0, 45, 0),
    PlateRow(11, "-1", 67.5, 0, 45, 0),
    PlateRow(12, "R1", 0, 45, 45, 0),
    PlateRow(12, "L1", 0, -45, 45, 0),
)

# Settings that map each Bell-type eigenstate of gamma_13..16 onto the
# singlet, which the balanced beam splitter leaves invariant.
TABLE3_ROWS = (
    PlateRow(13, "psi-", 0, 0, 0, 0),
    PlateRow(13, "psi+", 45, -45, 0, 45),
    PlateRow(14, "psibar-", 0, 45, -22.5, 0),
    PlateRow(14, "psibar+", 0, 45, 22.5, 90),
    PlateRow(15, "phi-", 0, -45, 0, 45),
    PlateRow(15, "phi+", 45, 0, 0, 0),
    PlateRow(16, "phibar-", 0, 45, -22.5, 90),
    PlateRow(16, "phibar+", 0, 45, 22.5, 0),
)


def _row_fidelity(row: PlateRow, target: np.ndarray) -> float:
    psi = named_state(row.state)
    rotated = local_rotation(row.h1, row.q1, row.h2, row.q2) @ psi
    return float(abs(np.vdot(target, rotated)) ** 2)


def verify_table2_row(row: PlateRow) -> float:
    """|<00| (Q1 H1 x Q2 H2) |psi>|^2; 1 when the settings are right."""
    return _row_fidelity(row, named_state("00"))


def verify_table3_row(row: PlateRow) -> float:
    """|<psi-| (Q1 H1 x Q2 H2) |psi>|^2 for the Bell-type rows."""
    return _row_fidelity(row, named_state("psi-"))


def verify_table2() -> list[tuple[PlateRow, float]]:
    return [(row, verify_table2_row(row)) for row in TABLE2_ROWS]


def verify_table3() -> list[tuple[PlateRow, float]]:
    return [(row, verify_table3_row(row)) for row in TABLE3_ROWS]


# ---------------------------------------------------------------------------
# two-photon Fock space and the balanced beam splitter

_MODES = ("1H", "1V", "2H", "2V")

# Symmetric two-photon basis over the four modes; frozen wire format for
# amplitude dumps.  "vac" in the unoccupied arm is implied.
FOCK_BASIS = (
    ("1H", "1H"),
    ("1V", "1V"),
    ("1H", "1V"),
    ("1H", "2H"),
    ("1H", "2V"),
    ("1V", "2H"),
    ("1V", "2V"),
    ("2H", "2H"),
    ("2V", "2V"),
    ("2H", "2V"),
)

FOCK_LABELS = (
    "2H,vac",
    "2V,vac",
    "HV,vac",
    "H,H",
    "H,V",
    "V,H",
    "V,V",
    "vac,2H",
    "vac,2V",
    "vac,HV",
)


def _basis_index(m1: str, m2: str) -> int:
    key = tuple(sorted((m1, m2), key=_MODES.index))
    return FOCK_BASIS.index(key)


def dual_rail(state: np.ndarray) -> np.ndarray:
    """Embed a two-qubit ket as one photon per arm (H/V polarization).

    Same-arm double occupations are zero by construction.
    """
    state = np.asarray(state, dtype=complex)
    if state.shape != (4,):
        raise ValueError("dual_rail expects a two-qubit ket")
    out = np.zeros(10, dtype=complex)
    out[_basis_index("1H", "2H")] = state[0]
    out[_basis_index("1H", "2V")] = state[1]
    out[_basis_index("1V", "2H")] = state[2]
    out[_basis_index("1V", "2V")] = state[3]
    return out


def _beam_splitter_matrix() -> np.ndarray:
    # a_{1p} -> (b_{1p} + b_{2p})/sqrt2, a_{2p} -> (b_{1p} - b_{2p})/sqrt2
    mode_map = {
        "1H": (("1H", 1 / _SQRT2), ("2H", 1 / _SQRT2)),
        "1V": (("1V", 1 / _SQRT2), ("2V", 1 / _SQRT2)),
        "2H": (("1H", 1 / _SQRT2), ("2H", -1 / _SQRT2)),
        "2V": (("1V", 1 / _SQRT2), ("2V", -1 / _SQRT2)),
    }
    u = np.zeros((10, 10), dtype=complex)
    for col, (m1, m2) in enumerate(FOCK_BASIS):
        norm_in = 1 / _SQRT2 if m1 == m2 else 1.0  # |2p> = (1/sqrt2) b+^2 |vac>
        for out1, c1 in mode_map[m1]:
            for out2, c2 in mode_map[m2]:
                amp = c1 * c2 * norm_in
                if out1 == out2:
                    amp *= _SQRT2  # b+^2 |vac> = sqrt2 |2p>
                u[_basis_index(out1, out2), col] += amp
    return u


BEAM_SPLITTER_MATRIX = _beam_splitter_matrix()
BEAM_SPLITTER_MATRIX.setflags(write=False)


def beam_splitter(state: np.ndarray) -> np.ndarray:
    """Image of a two-photon amplitude vector under the balanced splitter."""
    state = np.asarray(state, dtype=complex)
    if state.shape != (10,):
        raise ValueError("beam_splitter expects a 10-component amplitude vector")
    return BEAM_SPLITTER_MATRIX @ state


# Detector-pair event behind the per-arm polarizing beam splitters, one per
# Fock basis state; "*2" marks a double fire of a single detector.
COINCIDENCE_EVENTS = (
    "D1H*2",
    "D1V*2",
    "D1H&D1V",
    "D1H&D2H",
    "D1H&D2V",
    "D1V&D2H",
    "D1V&D2V",
    "D2H*2",
    "D2V*2",
    "D2H&D2V",
)


def classify_coincidence(state: np.ndarray) -> dict[str, float]:
    """Probability of each detector-pair event for a two-photon state.

    The detectors are ideal but photon-number blind, so double fires are
    reported as their own events without number resolution.
    """
    state = np.asarray(state, dtype=complex)
    if state.shape != (10,):
        raise ValueError("classify_coincidence expects a 10-component vector")
    norm = float(np.linalg.norm(state))
    if abs(norm - 1.0) > 1e-9:
        raise ValueError(f"two-photon state not normalized (norm {norm})")
    probs = np.abs(state) ** 2
    return {event: float(p) for event, p in zip(COINCIDENCE_EVENTS, probs)}


# ---------------------------------------------------------------------------
# reference identities for the splitter and the CNOT of Setup 2


@dataclass(frozen=True)
class IdentityCheck:
    name: str
    deviation: float
    atol: float

    @property
    def passed(self) -> bool:
        return self.deviation <= self.atol


def fock_amplitudes(amps: dict[str, complex]) -> np.ndarray:
    """Amplitude vector from {basis label: amplitude} over FOCK_LABELS."""
    v = np.zeros(10, dtype=complex)
    for label, a in amps.items():
        v[FOCK_LABELS.index(label)] = a
    return v


def _expected_bs_images() -> dict[str, np.ndarray]:
    c_plus = (1 + 1j) / (2 * _SQRT2)
    c_minus = (1 - 1j) / (2 * _SQRT2)
    anti_h = fock_amplitudes({"2H,vac": 0.5, "vac,2H": -0.5})
    anti_v = fock_amplitudes({"2V,vac": 0.5, "vac,2V": -0.5})
    bunched = fock_amplitudes({"HV,vac": 1.0, "vac,HV": -1.0})
    crossed = fock_amplitudes({"H,V": 1.0, "V,H": -1.0})
    return {
        "psi-": -dual_rail(named_state("psi-")),
        "psi+": bunched / _SQRT2,
        "phi+": anti_h + anti_v,
        "phi-": anti_h - anti_v,
        "phibar+": anti_h + 1j * anti_v,
        "phibar-": anti_h - 1j * anti_v,
        "psibar+": c_plus * bunched - c_minus * crossed,
        "psibar-": c_minus * bunched - c_plus * crossed,
    }


def beam_splitter_identity_checks(atol: float = 1e-12) -> list[IdentityCheck]:
    """Amplitude-level checks of the five Bell/Bell-like splitter images."""
    images = _expected_bs_images()
    groups = (
        ("BS: psi- -> -psi-", ("psi-",)),
        ("BS: psi+ -> bunched HV", ("psi+",)),
        ("BS: phi+- -> double occupations", ("phi+", "phi-")),
        ("BS: psibar+- -> mixed bunching", ("psibar+", "psibar-")),
        ("BS: phibar+- -> double occupations", ("phibar+", "phibar-")),
    )
    checks = []
    for name, members in groups:
        dev = 0.0
        for m in members:
            out = beam_splitter(dual_rail(named_state(m)))
            dev = max(dev, float(np.abs(out - images[m]).max()))
        checks.append(IdentityCheck(name, dev, atol))
    return checks


# Eigenstates of gamma_13..16 disentangle under the CNOT into eigenstates
# of gamma_11, 12, 7, 8 (eigenvalues preserved).
_SETUP2_PAIRS = ((13, 11), (14, 12), (15, 7), (16, 8))


@dataclass(frozen=True)
class Setup2Report:
    """Overlap moduli |<psi_sep| CNOT |psi_ent>| for the eight Bell types."""

    overlaps: dict[tuple[str, str], float]
    involution_deviation: float
    atol: float = 1e-12

    @property
    def all_pass(self) -> bool:
        return (
            min(self.overlaps.values()) >= 1.0 - self.atol
            and self.involution_deviation <= self.atol
        )


def setup2_disentangle_check() -> Setup2Report:
    overlaps = {}
    for k_ent, k_sep in _SETUP2_PAIRS:
        ent = dict((lam, name) for lam, name in optimal_gpo_eigen(k_ent))
        sep = dict((lam, name) for lam, name in optimal_gpo_eigen(k_sep))
        for lam, ent_name in ent.items():
            sep_name = sep[lam]
            image = CNOT @ named_state(ent_name)
            overlaps[(ent_name, sep_name)] = float(
                abs(np.vdot(named_state(sep_name), image))
            )
    twice = CNOT @ (CNOT @ named_state("psi-"))
    involution = float(np.abs(twice - named_state("psi-")).max())
    return Setup2Report(overlaps=overlaps, involution_deviation=involution)


# ---------------------------------------------------------------------------
# consolidated verification for the CLI


@dataclass(frozen=True)
class SetupCheck:
    group: str
    name: str
    value: float
    target: float
    atol: float

    @property
    def passed(self) -> bool:
        return abs(self.value - self.target) <= self.atol


def verify_setup_report() -> list[SetupCheck]:
    """All 33 setup checks: 20 + 8 plate rows and 5 splitter identities."""
    checks = []
    for row, fid in verify_table2():
        checks.append(
            SetupCheck(
                "table2", f"gamma{row.gpo}:|{row.state}>", fid, 1.0, 1e-10
            )
        )
    for row, fid in verify_table3():
        checks.append(
            SetupCheck(
                "table3", f"gamma{row.gpo}:|{row.state}>", fid, 1.0, 1e-10
            )
        )
    for chk in beam_splitter_identity_checks():
        checks.append(SetupCheck("beam-splitter", chk.name, chk.deviation, 0.0, chk.atol))
    return checks
