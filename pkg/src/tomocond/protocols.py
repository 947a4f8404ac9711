"""Measurement protocols for state tomography and their rotation matrices.

Seven two-qubit protocols are provided, numbered as in the robustness
comparison table, together with the single-qubit variants and the
generalizations to qudits and qubit registers:

    1  optimal generalized Pauli operators (12 local + 4 Bell-type)
    2  tensor products of the standard Pauli operators
    3  the 16-projector set used in the James et al. experiment
    4  the 36 separable Pauli-eigenstate projectors
    5  mutually unbiased bases (two published variants)
    6  Gell-Mann operators for SU(4)
    7  Patera-Zassenhaus operators for GL(4)

A protocol is an ordered list of measurement elements: Hermitian operators
carrying analytic eigen-decompositions, pure-state projectors, or unitary
non-Hermitian operators read out through their Hermitian and
anti-Hermitian parts.  Lowering an element yields one or two scalar
*readouts*; the readout functionals evaluated against the real
state-vector basis give the rotation matrix A with b = A x + const.

Element ordering inside every protocol is frozen (it fixes A bit-exactly
and is part of the JSON wire format).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .states import basis_matrices, named_state, projector, vec

_SQRT2 = math.sqrt(2.0)

PAULI = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)

PHASE_GATE = np.diag([1.0, 1.0j])  # S = |0><0| + i|1><1|
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / _SQRT2
CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)

# Eigenvalue ordering of the single-qubit Pauli eigenbases, used to expand
# operator means into projective probabilities:
#   sigma_1 = |+><+| - |-><-|,  sigma_2 = |L><L| - |R><R|,
#   sigma_3 = |0><0| - |1><1|.
PAULI_EIGEN = (
    ((1.0, "0"), (1.0, "1")),  # identity
    ((1.0, "+"), (-1.0, "-")),
    ((1.0, "L"), (-1.0, "R")),
    ((1.0, "0"), (-1.0, "1")),
)

_IMAG_ROW_ATOL = 1e-10
_EIGEN_RECON_ATOL = 1e-12


# ---------------------------------------------------------------------------
# elements and protocol container


@dataclass(frozen=True)
class MeasurementElement:
    """One measured quantity: an operator mean or a projection probability.

    ``kind`` is "operator" or "projector".  Operator elements carry the
    matrix plus, when it is Hermitian, an eigen-decomposition (pairs of
    eigenvalue and eigenstate) that the simulator samples from.
    Non-Hermitian operator elements (protocol 7) carry no eigen list; they
    are lowered to two Hermitian readouts.
    """

    name: str
    kind: str
    operator: np.ndarray | None = None
    state: np.ndarray | None = None
    eigen: tuple[tuple[float, np.ndarray], ...] | None = None

    def __post_init__(self):
        if self.kind == "projector":
            norm = float(np.linalg.norm(self.state))
            if abs(norm - 1.0) > 1e-12:
                raise ValueError(f"projector {self.name!r} not normalized: {norm}")
        elif self.kind == "operator":
            if self.eigen is not None:
                recon = sum(
                    lam * projector(psi) for lam, psi in self.eigen
                )
                if float(np.abs(recon - self.operator).max()) > _EIGEN_RECON_ATOL:
                    raise ValueError(
                        f"eigen-decomposition of {self.name!r} does not "
                        "reproduce the operator"
                    )
        else:
            raise ValueError(f"unknown element kind {self.kind!r}")


@dataclass(frozen=True)
class Readout:
    """A scalar measurement row: label, Hermitian functional, sampling form.

    ``matrix`` defines the row of A (Tr(E_i matrix), times the protocol
    scale); ``eigen`` lists (eigenvalue, eigenstate) pairs whose projection
    probabilities are sampled to estimate the row's mean value.
    """

    label: str
    element_index: int
    matrix: np.ndarray
    eigen: tuple[tuple[float, np.ndarray], ...]


@dataclass(frozen=True)
class ProtocolSpec:
    """An immutable measurement protocol with its precomputed rotation matrix.

    ``rotation_matrix`` has one row per readout (two per element for the
    non-Hermitian protocol 7) and one column per state-vector unknown.
    ``scale`` multiplies every row: the mean values are recorded in units of
    ``scale * Tr(rho M)``.  ``b_offset`` (when present) is added to the
    measured vector before solving; ``trace_one_reduced`` marks the
    three-unknown single-qubit parametrization with the last diagonal
    element eliminated by Tr(rho) = 1.
    """

    name: str
    dim: int
    elements: tuple[MeasurementElement, ...]
    readouts: tuple[Readout, ...]
    rotation_matrix: np.ndarray
    id: int | None = None
    scale: float = 1.0
    locality: str = ""
    based_on: str = ""
    b_offset: np.ndarray | None = None
    trace_one_reduced: bool = False
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        self.rotation_matrix.setflags(write=False)
        if self.b_offset is not None:
            self.b_offset.setflags(write=False)

    @property
    def n_elements(self) -> int:
        return len(self.elements)

    @property
    def n_readouts(self) -> int:
        return len(self.readouts)

    @property
    def n_unknowns(self) -> int:
        return self.rotation_matrix.shape[1]

    def state_coordinates(self, rho: np.ndarray) -> np.ndarray:
        """The unknown vector x for a given state (reduced if applicable)."""
        x = vec(rho)
        if self.trace_one_reduced:
            return x[:-1]
        return x

    def complete_state(self, x: np.ndarray) -> np.ndarray:
        """Full d^2 state vector from the unknown vector."""
        x = np.asarray(x, dtype=float)
        if not self.trace_one_reduced:
            return x
        # last slot is a diagonal element fixed by unit trace
        diag_sum = sum(x[i] for i in _diagonal_slots(self.dim)[:-1])
        return np.concatenate([x, [1.0 - diag_sum]])


def _diagonal_slots(dim: int) -> list[int]:
    slots, pos = [], 0
    for i in range(dim):
        slots.append(pos)
        pos += 1 + 2 * (dim - i - 1)
    return slots


# ---------------------------------------------------------------------------
# rotation matrix assembly


def _rotation_matrix(
    readouts: tuple[Readout, ...],
    dim: int,
    scale: float,
    reduced: bool = False,
) -> tuple[np.ndarray, np.ndarray | None]:
    """Stack the readout functionals against the state-vector basis.

    Returns (A, b_offset).  In the reduced parametrization the last
    diagonal slot is eliminated via unit trace, which both folds its column
    into the other diagonal columns and produces a constant displacement of
    the observation vector.
    """
    basis = basis_matrices(dim)
    rows = np.empty((len(readouts), dim * dim), dtype=complex)
    for r, ro in enumerate(readouts):
        rows[r] = [np.trace(e @ ro.matrix) for e in basis]
    worst = float(np.abs(rows.imag).max(initial=0.0))
    if worst > _IMAG_ROW_ATOL:
        r, _ = np.unravel_index(int(np.abs(rows.imag).argmax()), rows.shape)
        raise ValueError(
            f"readout {readouts[r].label!r} produced a complex row "
            f"(imag residue {worst:.3e}); a non-Hermitian element went "
            "through the Hermitian path"
        )
    a = scale * rows.real
    if not reduced:
        return a, None
    last = _diagonal_slots(dim)[-1]
    keep = [i for i in range(dim * dim) if i != last]
    a_red = a[:, keep].copy()
    for i in _diagonal_slots(dim)[:-1]:
        a_red[:, keep.index(i)] -= a[:, last]
    offset = -a[:, last]  # b + offset = A_red x
    return a_red, offset


def build_rotation_matrix(spec: ProtocolSpec) -> np.ndarray:
    """Recompute A from the protocol's readouts (equals spec.rotation_matrix)."""
    a, _ = _rotation_matrix(
        spec.readouts, spec.dim, spec.scale, reduced=spec.trace_one_reduced
    )
    return a


def _hermitian_eigen_readouts(
    label: str, idx: int, matrix: np.ndarray
) -> Readout:
    """Readout for a Hermitian matrix with numerically computed eigenpairs."""
    w, v = np.linalg.eigh(matrix)
    eigen = tuple(
        (float(w[i]), v[:, i].copy()) for i in range(w.size) if abs(w[i]) > 1e-12
    )
    return Readout(label, idx, matrix, eigen)


def _element_readouts(idx: int, elem: MeasurementElement) -> list[Readout]:
    if elem.kind == "projector":
        psi = elem.state
        return [Readout(elem.name, idx, projector(psi), ((1.0, psi),))]
    op = elem.operator
    if elem.eigen is not None:
        return [Readout(elem.name, idx, op, elem.eigen)]
    herm = (op + op.conj().T) / 2.0
    if float(np.abs(op - herm).max()) <= 1e-14:
        return [_hermitian_eigen_readouts(elem.name, idx, herm)]
    # non-Hermitian: Tr(rho op) is complex; its real and imaginary parts are
    # means of the Hermitian and (1/i times the) anti-Hermitian parts
    skew = (op - op.conj().T) / 2.0j
    return [
        _hermitian_eigen_readouts(f"{elem.name}.re", idx, herm),
        _hermitian_eigen_readouts(f"{elem.name}.im", idx, skew),
    ]


def _make_spec(
    name: str,
    dim: int,
    elements: list[MeasurementElement],
    *,
    id: int | None = None,
    scale: float = 1.0,
    locality: str = "",
    based_on: str = "",
    reduced: bool = False,
    extra: dict | None = None,
) -> ProtocolSpec:
    readouts = []
    for idx, elem in enumerate(elements):
        readouts.extend(_element_readouts(idx, elem))
    readouts = tuple(readouts)
    a, offset = _rotation_matrix(readouts, dim, scale, reduced=reduced)
    return ProtocolSpec(
        name=name,
        dim=dim,
        elements=tuple(elements),
        readouts=readouts,
        rotation_matrix=a,
        id=id,
        scale=scale,
        locality=locality,
        based_on=based_on,
        b_offset=offset,
        trace_one_reduced=reduced,
        extra=extra or {},
    )


def _operator_element(name, op, eigen_names) -> MeasurementElement:
    eigen = tuple((lam, named_state(s)) for lam, s in eigen_names)
    return MeasurementElement(name, "operator", operator=op, eigen=eigen)


def _projector_element(name, psi) -> MeasurementElement:
    return MeasurementElement(name, "projector", state=psi)


# ---------------------------------------------------------------------------
# optimal GPOs (protocol 1) and their qudit generalization


def symmetric_x(dim: int, k: int, l: int) -> np.ndarray:
    """(|k><l| + |l><k|) / 2 for k != l; |k><k| for k == l.

    Its mean value on rho is Re(rho_kl) (or the diagonal element itself).
    """
    m = np.zeros((dim, dim), dtype=complex)
    if k == l:
        m[k, k] = 1.0
    else:
        m[k, l] = 0.5
        m[l, k] = 0.5
    return m


def symmetric_y(dim: int, k: int, l: int) -> np.ndarray:
    """(-i|k><l| + i|l><k|) / 2; its mean value on rho is -Im(rho_kl)."""
    m = np.zeros((dim, dim), dtype=complex)
    m[k, l] = -0.5j
    m[l, k] = 0.5j
    return m


# Matrix-element slot monitored by each two-qubit optimal GPO: gamma_1..4
# pick the diagonal, gamma_5..16 pick Re/Im of one off-diagonal element.
_GPO_SLOTS = (
    (0, 0, "x"),
    (1, 1, "x"),
    (2, 2, "x"),
    (3, 3, "x"),
    (0, 1, "x"),
    (0, 1, "y"),
    (0, 2, "x"),
    (0, 2, "y"),
    (2, 3, "x"),
    (2, 3, "y"),
    (1, 3, "x"),
    (1, 3, "y"),
    (1, 2, "x"),
    (1, 2, "y"),
    (0, 3, "x"),
    (0, 3, "y"),
)

# Eigen-decompositions of gamma_1..16, stored analytically in the same
# order as the wave-plate setting tables (first listed state first).
_GPO_EIGEN = {
    1: ((1.0, "00"),),
    2: ((1.0, "01"),),
    3: ((1.0, "10"),),
    4: ((1.0, "11"),),
    5: ((0.5, "0+"), (-0.5, "0-")),
    6: ((-0.5, "0R"), (0.5, "0L")),
    7: ((0.5, "+0"), (-0.5, "-0")),
    8: ((-0.5, "R0"), (0.5, "L0")),
    9: ((0.5, "1+"), (-0.5, "1-")),
    10: ((-0.5, "1R"), (0.5, "1L")),
    11: ((0.5, "+1"), (-0.5, "-1")),
    12: ((-0.5, "R1"), (0.5, "L1")),
    13: ((-0.5, "psi-"), (0.5, "psi+")),
    14: ((-0.5, "psibar-"), (0.5, "psibar+")),
    15: ((-0.5, "phi-"), (0.5, "phi+")),
    16: ((-0.5, "phibar-"), (0.5, "phibar+")),
}


def optimal_gpo(k: int) -> np.ndarray:
    """gamma_k for k in 1..16 (two qubits)."""
    if not 1 <= k <= 16:
        raise ValueError(f"gamma index {k} out of range 1..16")
    i, j, part = _GPO_SLOTS[k - 1]
    return symmetric_x(4, i, j) if part == "x" else symmetric_y(4, i, j)


def optimal_gpo_eigen(k: int) -> tuple[tuple[float, str], ...]:
    """Analytic (eigenvalue, state name) pairs of gamma_k (zero modes omitted)."""
    return _GPO_EIGEN[k]


def protocol_1_optimal() -> ProtocolSpec:
    elements = [
        _operator_element(f"gamma{k}", optimal_gpo(k), _GPO_EIGEN[k])
        for k in range(1, 17)
    ]
    return _make_spec(
        "optimal GPOs",
        4,
        elements,
        id=1,
        locality="local & global",
        based_on="optimal GPOs",
    )


def optimal_gpos_qudit(d: int) -> ProtocolSpec:
    """The d^2 element-selective operators for a d-level system.

    Ordering: the d diagonal projectors |k><k|, then the symmetrized real
    parts for k < l (row-major), then the imaginary parts.  Every rotation
    matrix row has a single +-1 entry, so kappa(A) = 1 in any dimension.
    For d = 4 the set coincides with the two-qubit gamma_1..16.
    """
    if d < 2:
        raise ValueError("qudit dimension must be >= 2")
    elements = []
    for k in range(d):
        op = symmetric_x(d, k, k)
        psi = np.zeros(d, dtype=complex)
        psi[k] = 1.0
        elements.append(
            MeasurementElement(f"X{k}{k}", "operator", operator=op, eigen=((1.0, psi),))
        )
    pairs = [(k, l) for k in range(d) for l in range(k + 1, d)]
    for k, l in pairs:
        elements.append(_qudit_offdiag_element("X", d, k, l))
    for k, l in pairs:
        elements.append(_qudit_offdiag_element("Y", d, k, l))
    return _make_spec(
        f"optimal GPOs (d={d})",
        d,
        elements,
        locality="local & global" if d > 2 else "local",
        based_on="optimal GPOs",
    )


def _qudit_offdiag_element(part: str, d: int, k: int, l: int) -> MeasurementElement:
    ek = np.zeros(d, dtype=complex)
    el = np.zeros(d, dtype=complex)
    ek[k] = 1.0
    el[l] = 1.0
    if part == "X":
        op = symmetric_x(d, k, l)
        plus = (ek + el) / _SQRT2
        minus = (ek - el) / _SQRT2
    else:
        op = symmetric_y(d, k, l)
        # eigenstates (|k> +- i|l>)/sqrt2 with eigenvalues +-1/2
        plus = (ek + 1j * el) / _SQRT2
        minus = (ek - 1j * el) / _SQRT2
    return MeasurementElement(
        f"{part}{k}{l}",
        "operator",
        operator=op,
        eigen=((0.5, plus), (-0.5, minus)),
    )


# ---------------------------------------------------------------------------
# protocol 2 and the multiqubit Pauli products


def _pauli_product_element(indices: tuple[int, ...], scale_name: str = "s") -> MeasurementElement:
    op = PAULI[indices[0]]
    for i in indices[1:]:
        op = np.kron(op, PAULI[i])
    eigen = []
    for combo in _iter_eigen_products(indices):
        lam = 1.0
        names = []
        for val, name in combo:
            lam *= val
            names.append(name)
        psi = named_state(names[0])
        for n in names[1:]:
            psi = np.kron(psi, named_state(n))
        eigen.append((lam, psi))
    label = scale_name + scale_name.join(str(i) for i in indices)
    return MeasurementElement(label, "operator", operator=op, eigen=tuple(eigen))


def _iter_eigen_products(indices):
    if len(indices) == 1:
        for pair in PAULI_EIGEN[indices[0]]:
            yield (pair,)
        return
    for pair in PAULI_EIGEN[indices[0]]:
        for rest in _iter_eigen_products(indices[1:]):
            yield (pair,) + rest


def protocol_2_pauli_products() -> ProtocolSpec:
    """All sixteen sigma_i (x) sigma_j, ordered by 4i + j + 1.

    The mean values enter the linear system in half units (rows of A carry
    a factor 1/2); this is the normalization under which the comparison
    table's min svd(C) = 1 holds.
    """
    elements = [
        _pauli_product_element((i, j)) for i in range(4) for j in range(4)
    ]
    return _make_spec(
        "Pauli operators",
        4,
        elements,
        id=2,
        scale=0.5,
        locality="local",
        based_on="Pauli operators",
    )


def pauli_tensor_protocol(n_qubits: int) -> ProtocolSpec:
    """All 4^N Pauli tensor products on N qubits, multi-index base 4.

    kappa(A) = sqrt(2) independent of N (the identity-vs-traceless split of
    the operator basis never matches the diagonal/off-diagonal weighting of
    the real state vector).
    """
    if n_qubits < 1:
        raise ValueError("need at least one qubit")
    elements = []
    for n in range(4**n_qubits):
        digits = []
        for p in range(n_qubits - 1, -1, -1):
            digits.append((n >> (2 * p)) & 3)
        elements.append(_pauli_product_element(tuple(digits)))
    return _make_spec(
        f"Pauli tensor products (N={n_qubits})",
        2**n_qubits,
        elements,
        locality="local",
        based_on="Pauli operators",
    )


# ---------------------------------------------------------------------------
# projector-based protocols 3, 4, 5


_JAMES_STATES = (
    "00", "01", "0+", "0L",
    "10", "11", "1+", "1L",
    "R0", "R1", "R+", "RL",
    "+0", "+1", "++", "+R",
)


def protocol_3_james() -> ProtocolSpec:
    elements = [_projector_element(s, named_state(s)) for s in _JAMES_STATES]
    return _make_spec(
        "James et al. basis",
        4,
        elements,
        id=3,
        locality="local",
        based_on="James et al. basis",
    )


_SEPARABLE36 = (
    "00", "01", "10", "11",
    "++", "-+", "+-", "--",
    "0+", "0-", "+0", "-0",
    "1+", "1-", "+1", "-1",
    "0R", "R0", "1R", "R1",
    "0L", "L0", "1L", "L1",
    "R+", "R-", "+R", "-R",
    "L+", "L-", "+L", "-L",
    "RR", "RL", "LR", "LL",
)


def protocol_4_separable36() -> ProtocolSpec:
    """Every tensor product of the six single-qubit Pauli eigenstates."""
    elements = [_projector_element(s, named_state(s)) for s in _SEPARABLE36]
    return _make_spec(
        "standard separable basis",
        4,
        elements,
        id=4,
        locality="local",
        based_on="standard separable basis",
    )


def _superposition(name_a: str, name_b: str, phase: complex) -> np.ndarray:
    return (named_state(name_a) + phase * named_state(name_b)) / _SQRT2


def _mub_bases(variant: str) -> list[tuple[str, list[tuple[str, np.ndarray]]]]:
    comp = [(s, named_state(s)) for s in ("00", "01", "10", "11")]
    if variant == "adamson":
        b = [(s, named_state(s)) for s in ("R+", "R-", "L+", "L-")]
        c = [(s, named_state(s)) for s in ("+R", "-R", "+L", "-L")]
        d = [
            ("R0+iL1", _superposition("R0", "L1", 1j)),
            ("R0-iL1", _superposition("R0", "L1", -1j)),
            ("R1+iL0", _superposition("R1", "L0", 1j)),
            ("R1-iL0", _superposition("R1", "L0", -1j)),
        ]
        e = [
            ("RR+iLL", _superposition("RR", "LL", 1j)),
            ("RR-iLL", _superposition("RR", "LL", -1j)),
            ("RL+iLR", _superposition("RL", "LR", 1j)),
            ("RL-iLR", _superposition("RL", "LR", -1j)),
        ]
    elif variant == "bandyopadhyay":
        b = [(s, named_state(s)) for s in ("++", "-+", "+-", "--")]
        c = [(s, named_state(s)) for s in ("RR", "RL", "LR", "LL")]
        d = [
            ("L0+R1", _superposition("L0", "R1", 1)),
            ("L0-R1", _superposition("L0", "R1", -1)),
            ("R0+L1", _superposition("R0", "L1", 1)),
            ("R0-L1", _superposition("R0", "L1", -1)),
        ]
        e = [
            ("0L+1R", _superposition("0L", "1R", 1)),
            ("0L-1R", _superposition("0L", "1R", -1)),
            ("0R+1L", _superposition("0R", "1L", 1)),
            ("0R-1L", _superposition("0R", "1L", -1)),
        ]
    else:
        raise ValueError(f"unknown MUB variant {variant!r}")
    return [("A", comp), ("B", b), ("C", c), ("D", d), ("E", e)]


def protocol_5_mub(variant: str = "adamson") -> ProtocolSpec:
    """Five mutually unbiased bases, 20 projectors (4 per basis)."""
    elements = []
    for _, basis in _mub_bases(variant):
        for name, psi in basis:
            elements.append(_projector_element(name, psi))
    return _make_spec(
        f"mutually unbiased bases ({variant})",
        4,
        elements,
        id=5,
        locality="local & global",
        based_on="mutually unbiased bases",
        extra={"variant": variant},
    )


def mub_cross_overlaps(variant: str = "adamson") -> list[tuple[str, str, float]]:
    """|<psi^X_m | psi^Y_n>| for all 160 cross-basis pairs (should be 1/2)."""
    bases = _mub_bases(variant)
    out = []
    for xi in range(5):
        for yi in range(xi + 1, 5):
            for name_m, psi_m in bases[xi][1]:
                for name_n, psi_n in bases[yi][1]:
                    out.append(
                        (name_m, name_n, float(abs(np.vdot(psi_m, psi_n))))
                    )
    return out


def mub_local_equivalence_checks(variant: str = "adamson") -> list[tuple[str, str, float]]:
    """Overlap moduli between the Bell-like MUB states and local Bell images.

    Each entangled MUB state equals a fixed local unitary applied to a Bell
    state, up to a global phase.  For the Adamson set the unitaries are
    S H S (x) sigma_2 (basis D) and S H S (x) S H (basis E); for the
    Bandyopadhyay set they are S H (x) I and I (x) S H.  Returns
    (state label, bell name, |overlap|) for the eight entangled states.
    Note the E-basis +- labels pair with the opposite-sign Bell states.
    """
    bases = dict(_mub_bases(variant))
    shs = PHASE_GATE @ HADAMARD @ PHASE_GATE
    sh = PHASE_GATE @ HADAMARD
    eye = np.eye(2, dtype=complex)
    if variant == "adamson":
        pairings = [
            ("D", np.kron(shs, PAULI[2]), ("phi+", "phi-", "psi+", "psi-")),
            ("E", np.kron(shs, sh), ("phi-", "phi+", "psi-", "psi+")),
        ]
    else:
        pairings = [
            ("D", np.kron(sh, eye), ("phi+", "phi-", "psi+", "psi-")),
            ("E", np.kron(eye, sh), ("phi+", "phi-", "psi+", "psi-")),
        ]
    out = []
    for basis_name, unitary, bells in pairings:
        for (label, psi), bell in zip(bases[basis_name], bells):
            target = unitary @ named_state(bell)
            out.append((label, bell, float(abs(np.vdot(psi, target)))))
    return out


# ---------------------------------------------------------------------------
# protocols 6 and 7


def protocol_6_gellmann() -> ProtocolSpec:
    """Gell-Mann operators for SU(4) plus the normalized identity.

    The twelve off-diagonal operators coincide with gamma_5..16; the four
    diagonal ones are traceless ladders (except the identity term).
    """
    comp = [named_state(s) for s in ("00", "01", "10", "11")]
    diag_specs = [
        ("Gamma1", np.array([1, 1, 1, 1]) / 2.0),
        ("Gamma2", np.array([1, -1, 0, 0]) / 2.0),
        ("Gamma3", np.array([1, 1, -2, 0]) / (2.0 * math.sqrt(3.0))),
        ("Gamma4", np.array([1, 1, 1, -3]) / (2.0 * math.sqrt(6.0))),
    ]
    elements = []
    for name, diag in diag_specs:
        op = np.diag(diag).astype(complex)
        eigen = tuple(
            (float(diag[i]), comp[i]) for i in range(4) if abs(diag[i]) > 1e-15
        )
        elements.append(
            MeasurementElement(name, "operator", operator=op, eigen=eigen)
        )
    for k in range(5, 17):
        elements.append(
            _operator_element(f"Gamma{k}", optimal_gpo(k), _GPO_EIGEN[k])
        )
    return _make_spec(
        "Gell-Mann GPOs",
        4,
        elements,
        id=6,
        locality="local & global",
        based_on="Gell-Mann GPOs",
    )


def patera_zassenhaus_generators() -> tuple[np.ndarray, np.ndarray]:
    """The diagonal clock D and the cyclic shift B (with B^4 = -I)."""
    d = np.exp(1j * np.pi / 4) * np.diag([1.0, 1.0j, -1.0, -1.0j])
    b = np.array(
        [[0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1], [-1, 0, 0, 0]], dtype=complex
    )
    return d, b


def protocol_7_patera_zassenhaus() -> ProtocolSpec:
    """Patera-Zassenhaus unitary operator basis for GL(4).

    The operators are unitary but not Hermitian, so each contributes two
    real readouts: Re Tr(rho Gamma) through its Hermitian part and
    Im Tr(rho Gamma) through its anti-Hermitian part.  (Reducing to the
    Hermitian parts alone is singular: D^2 and B^2, for example, have
    vanishing Hermitian part.)  The stacked 32 x 16 rotation matrix
    reproduces the comparison-table values kappa(C) = 2, min svd(C) = 4.
    """
    d, b = patera_zassenhaus_generators()
    powers_d = {1: d, 2: d @ d, 3: d @ d @ d}
    powers_b = {1: b, 2: b @ b, 3: b @ b @ b}
    ordered: list[tuple[str, np.ndarray]] = [
        ("D", powers_d[1]),
        ("D2", powers_d[2]),
        ("D3", powers_d[3]),
        ("B", powers_b[1]),
        ("B2", powers_b[2]),
        ("B3", powers_b[3]),
    ]
    for i in (1, 2, 3):
        for j in (1, 2, 3):
            prefix = "B" if i == 1 else f"B{i}"
            suffix = "D" if j == 1 else f"D{j}"
            ordered.append((prefix + suffix, powers_b[i] @ powers_d[j]))
    ordered.append(("I", np.eye(4, dtype=complex)))
    elements = [
        MeasurementElement(name, "operator", operator=op) for name, op in ordered
    ]
    return _make_spec(
        "Patera-Zassenhaus GPOs",
        4,
        elements,
        id=7,
        locality="local & global",
        based_on="Patera-Zassenhaus GPOs",
        extra={"construction": "re/im row split of complex operator means"},
    )


# ---------------------------------------------------------------------------
# single-qubit suite


def single_qubit_protocols() -> dict[str, ProtocolSpec]:
    """The three reference single-qubit reconstructions.

    ``optimal``: the four element-selective operators, kappa(A) = 1.
    ``pauli4``: sigma_1, sigma_2, sigma_3 and the identity, kappa(A) = sqrt(2).
    ``pauli3_reduced``: sigma_1..3 only, three unknowns with the second
    diagonal element fixed by unit trace; the observation vector must be
    displaced by [0, 0, 1] before solving, and kappa(A) = 1.
    """
    optimal = optimal_gpos_qudit(2)
    pauli4 = _make_spec(
        "single-qubit Pauli + identity",
        2,
        [
            _pauli_product_element((1,)),
            _pauli_product_element((2,)),
            _pauli_product_element((3,)),
            _pauli_product_element((0,)),
        ],
        locality="local",
        based_on="Pauli operators",
    )
    pauli3 = _make_spec(
        "single-qubit Pauli, trace-reduced",
        2,
        [
            _pauli_product_element((1,)),
            _pauli_product_element((2,)),
            _pauli_product_element((3,)),
        ],
        locality="local",
        based_on="Pauli operators",
        reduced=True,
    )
    return {"optimal": optimal, "pauli4": pauli4, "pauli3_reduced": pauli3}


# ---------------------------------------------------------------------------
# catalog access


def all_protocols(mub_variant: str = "adamson") -> list[ProtocolSpec]:
    return [
        protocol_1_optimal(),
        protocol_2_pauli_products(),
        protocol_3_james(),
        protocol_4_separable36(),
        protocol_5_mub(mub_variant),
        protocol_6_gellmann(),
        protocol_7_patera_zassenhaus(),
    ]


_BUILDERS = {
    1: protocol_1_optimal,
    2: protocol_2_pauli_products,
    3: protocol_3_james,
    4: protocol_4_separable36,
    5: protocol_5_mub,
    6: protocol_6_gellmann,
    7: protocol_7_patera_zassenhaus,
}


def protocol_by_id(protocol_id: int, mub_variant: str = "adamson") -> ProtocolSpec:
    if protocol_id not in _BUILDERS:
        raise ValueError(f"protocol id must be 1..7, got {protocol_id}")
    if protocol_id == 5:
        return protocol_5_mub(mub_variant)
    return _BUILDERS[protocol_id]()


# ---------------------------------------------------------------------------
# CNOT disentangling of the Bell-type operators


@dataclass(frozen=True)
class CnotDisentangleReport:
    """Entrywise deviations of the CNOT conjugation identities.

    ``pair_deviations`` maps (k, k') to max |CNOT gamma_k CNOT - gamma_k'|;
    ``local_deviations`` covers the phase-gate / bit-flip relations that
    express gamma_14..16 through gamma_13; ``involution_deviation`` checks
    that conjugating twice returns gamma_13.
    """

    pair_deviations: dict[tuple[int, int], float]
    local_deviations: dict[int, float]
    involution_deviation: float
    atol: float = 1e-12

    @property
    def all_pass(self) -> bool:
        worst = max(
            max(self.pair_deviations.values()),
            max(self.local_deviations.values()),
            self.involution_deviation,
        )
        return worst <= self.atol


def cnot_disentangle_check() -> CnotDisentangleReport:
    eye = np.eye(2, dtype=complex)
    pair_dev = {}
    for k, kp in ((13, 11), (14, 12), (15, 7), (16, 8)):
        conj = CNOT @ optimal_gpo(k) @ CNOT
        pair_dev[(k, kp)] = float(np.abs(conj - optimal_gpo(kp)).max())
    g13 = optimal_gpo(13)
    local = {
        14: np.kron(PHASE_GATE, eye) @ g13 @ np.kron(PHASE_GATE.conj().T, eye),
        15: np.kron(eye, PAULI[1]) @ g13 @ np.kron(eye, PAULI[1]),
        16: np.kron(PHASE_GATE, PAULI[1]) @ g13 @ np.kron(PHASE_GATE.conj().T, PAULI[1]),
    }
    local_dev = {
        k: float(np.abs(m - optimal_gpo(k)).max()) for k, m in local.items()
    }
    twice = CNOT @ (CNOT @ g13 @ CNOT) @ CNOT
    return CnotDisentangleReport(
        pair_deviations=pair_dev,
        local_deviations=local_dev,
        involution_deviation=float(np.abs(twice - g13).max()),
    )


# ---------------------------------------------------------------------------
# JSON wire format


def _complex_to_dict(m: np.ndarray) -> dict:
    m = np.asarray(m, dtype=complex)
    return {"re": m.real.tolist(), "im": m.imag.tolist()}


def _complex_from_dict(data: dict) -> np.ndarray:
    return np.asarray(data["re"], dtype=float) + 1j * np.asarray(
        data["im"], dtype=float
    )


def protocol_to_dict(spec: ProtocolSpec) -> dict:
    """Stable JSON form: metadata, per-element entries, rotation matrix."""
    elements = []
    for elem in spec.elements:
        entry: dict = {"name": elem.name, "kind": elem.kind}
        if elem.kind == "projector":
            entry["state"] = _complex_to_dict(elem.state)
        else:
            entry["operator"] = _complex_to_dict(elem.operator)
        elements.append(entry)
    out = {
        "id": spec.id,
        "name": spec.name,
        "dim": spec.dim,
        "locality": spec.locality,
        "based_on": spec.based_on,
        "scale": spec.scale,
        "elements": elements,
        "rotation_matrix": spec.rotation_matrix.tolist(),
    }
    if spec.b_offset is not None:
        out["b_offset"] = spec.b_offset.tolist()
    if spec.trace_one_reduced:
        out["trace_one_reduced"] = True
    return out


def protocol_from_dict(data: dict) -> ProtocolSpec:
    """Rebuild a protocol from its JSON form.

    The stored rotation matrix is kept verbatim (it is the artifact under
    test when a catalog file is checked), so a tampered file is detectable.
    """
    elements = []
    for entry in data["elements"]:
        if entry["kind"] == "projector":
            elements.append(
                MeasurementElement(
                    entry["name"], "projector", state=_complex_from_dict(entry["state"])
                )
            )
        else:
            elements.append(
                MeasurementElement(
                    entry["name"], "operator", operator=_complex_from_dict(entry["operator"])
                )
            )
    readouts = []
    for idx, elem in enumerate(elements):
        readouts.extend(_element_readouts(idx, elem))
    offset = data.get("b_offset")
    return ProtocolSpec(
        name=data["name"],
        dim=int(data["dim"]),
        elements=tuple(elements),
        readouts=tuple(readouts),
        rotation_matrix=np.asarray(data["rotation_matrix"], dtype=float),
        id=data.get("id"),
        scale=float(data.get("scale", 1.0)),
        locality=data.get("locality", ""),
        based_on=data.get("based_on", ""),
        b_offset=None if offset is None else np.asarray(offset, dtype=float),
        trace_one_reduced=bool(data.get("trace_one_reduced", False)),
    )


def catalog_to_json(specs: list[ProtocolSpec], indent: int | None = 2) -> str:
    return json.dumps([protocol_to_dict(s) for s in specs], indent=indent)


def catalog_from_json(text: str) -> list[ProtocolSpec]:
    return [protocol_from_dict(d) for d in json.loads(text)]
