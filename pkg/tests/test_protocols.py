import json

import numpy as np
import pytest

from tomocond.linalg import singular_values
from tomocond.protocols import (
    CNOT,
    PAULI,
    MeasurementElement,
    all_protocols,
    build_rotation_matrix,
    catalog_from_json,
    catalog_to_json,
    cnot_disentangle_check,
    mub_cross_overlaps,
    mub_local_equivalence_checks,
    optimal_gpo,
    optimal_gpos_qudit,
    pauli_tensor_protocol,
    patera_zassenhaus_generators,
    protocol_1_optimal,
    protocol_2_pauli_products,
    protocol_3_james,
    protocol_4_separable36,
    protocol_5_mub,
    protocol_6_gellmann,
    protocol_7_patera_zassenhaus,
    protocol_by_id,
    _rotation_matrix,
    Readout,
)
from tomocond.states import named_state, projector, random_density_matrix, vec


def _mat(entries, factor=1.0):
    """4x4 matrix from {(row, col): value} entries."""
    m = np.zeros((4, 4), dtype=complex)
    for (i, j), v in entries.items():
        m[i, j] = v
    return factor * m


# The sixteen optimal GPOs transcribed literally from their explicit
# computational-basis forms (independent of the package construction).
GAMMA_REFERENCE = {
    1: np.diag([1, 0, 0, 0]).astype(complex),
    2: np.diag([0, 1, 0, 0]).astype(complex),
    3: np.diag([0, 0, 1, 0]).astype(complex),
    4: np.diag([0, 0, 0, 1]).astype(complex),
    5: _mat({(0, 1): 1, (1, 0): 1}, 0.5),
    6: _mat({(0, 1): -1j, (1, 0): 1j}, 0.5),
    7: _mat({(0, 2): 1, (2, 0): 1}, 0.5),
    8: _mat({(0, 2): -1j, (2, 0): 1j}, 0.5),
    9: _mat({(2, 3): 1, (3, 2): 1}, 0.5),
    10: _mat({(2, 3): -1j, (3, 2): 1j}, 0.5),
    11: _mat({(1, 3): 1, (3, 1): 1}, 0.5),
    12: _mat({(1, 3): -1j, (3, 1): 1j}, 0.5),
    13: _mat({(1, 2): 1, (2, 1): 1}, 0.5),
    14: _mat({(1, 2): -1j, (2, 1): 1j}, 0.5),
    15: _mat({(0, 3): 1, (3, 0): 1}, 0.5),
    16: _mat({(0, 3): -1j, (3, 0): 1j}, 0.5),
}

# Protocol 1 rotation matrix: row -> (column, sign), 1-indexed, s = -1.
A_2QUBITS_PATTERN = {
    1: (1, 1), 2: (8, 1), 3: (13, 1), 4: (16, 1),
    5: (2, 1), 6: (3, -1), 7: (4, 1), 8: (5, -1),
    9: (14, 1), 10: (15, -1), 11: (11, 1), 12: (12, -1),
    13: (9, 1), 14: (10, -1), 15: (6, 1), 16: (7, -1),
}


def a_2qubits_reference():
    a = np.zeros((16, 16))
    for row, (col, sign) in A_2QUBITS_PATTERN.items():
        a[row - 1, col - 1] = sign
    return a


def kappa_of(a):
    s = singular_values(a)
    return s[0] / s[-1]


def error_matrix_spectrum(a):
    return singular_values(a.T @ a)


# ---------------------------------------------------------------------------
# protocol 1


def test_gamma_matrices_match_reference():
    for k, ref in GAMMA_REFERENCE.items():
        assert np.array_equal(optimal_gpo(k), ref), f"gamma_{k}"


def test_gamma5_explicit_form():
    psi00, psi01 = named_state("00"), named_state("01")
    expected = 0.5 * (np.outer(psi00, psi01.conj()) + np.outer(psi01, psi00.conj()))
    assert np.allclose(optimal_gpo(5), expected, atol=1e-15)


def test_gamma_hilbert_schmidt_orthogonality():
    for k in range(1, 17):
        for l in range(1, 17):
            if k != l:
                overlap = np.trace(optimal_gpo(k) @ optimal_gpo(l))
                assert abs(overlap) == 0.0, (k, l)


def test_gamma_eigen_decompositions_reproduce_operators():
    spec = protocol_1_optimal()
    for k, elem in enumerate(spec.elements, start=1):
        recon = sum(lam * projector(psi) for lam, psi in elem.eigen)
        assert np.abs(recon - optimal_gpo(k)).max() <= 1e-15
        expected_vals = {1.0} if k <= 4 else {0.5, -0.5}
        assert {lam for lam, _ in elem.eigen} == expected_vals


def test_protocol1_rotation_matrix_exact():
    spec = protocol_1_optimal()
    assert np.array_equal(spec.rotation_matrix, a_2qubits_reference())
    assert np.array_equal(build_rotation_matrix(spec), spec.rotation_matrix)


def test_protocol1_singular_values_all_one():
    s = singular_values(protocol_1_optimal().rotation_matrix)
    assert np.abs(s - 1.0).max() <= 1e-12


def test_protocol1_bell_observation():
    spec = protocol_1_optimal()
    b = spec.rotation_matrix @ vec(projector(named_state("phi+")))
    expected = np.zeros(16)
    expected[0] = expected[3] = expected[14] = 0.5  # b1, b4, b15
    assert np.abs(b - expected).max() <= 1e-15
    assert abs(b[15]) <= 1e-16  # b16


def test_b_vector_mapping():
    # b = (x1, x8, x13, x16, x2, -x3, x4, -x5, x14, -x15, x11, -x12,
    #      x9, -x10, x6, -x7)
    rng = np.random.default_rng(2)
    spec = protocol_1_optimal()
    for _ in range(10):
        rho = random_density_matrix(4, rng)
        x = vec(rho)
        b = spec.rotation_matrix @ x
        order = [1, 8, 13, 16, 2, -3, 4, -5, 14, -15, 11, -12, 9, -10, 6, -7]
        expected = np.array([np.sign(i) * x[abs(i) - 1] for i in order])
        assert np.array_equal(b, expected)


# ---------------------------------------------------------------------------
# protocol 2 and Pauli tensor products


def test_protocol2_elements():
    spec = protocol_2_pauli_products()
    assert spec.n_elements == 16
    assert np.array_equal(spec.elements[0].operator, np.eye(4, dtype=complex))
    assert np.array_equal(
        spec.elements[15].operator, np.diag([1, -1, -1, 1]).astype(complex)
    )
    # ordering 4i + j + 1
    assert np.array_equal(spec.elements[6].operator, np.kron(PAULI[1], PAULI[2]))


def test_protocol2_conditioning():
    spec = protocol_2_pauli_products()
    sc = error_matrix_spectrum(spec.rotation_matrix)
    assert sc[0] / sc[-1] == pytest.approx(2.0, rel=1e-12)
    assert sc[-1] == pytest.approx(1.0, rel=1e-12)


def test_protocol2_matches_pauli_tensor_as_set():
    a = {e.name: e.operator for e in protocol_2_pauli_products().elements}
    b = {e.name: e.operator for e in pauli_tensor_protocol(2).elements}
    assert a.keys() == b.keys()
    for name in a:
        assert np.array_equal(a[name], b[name])


@pytest.mark.parametrize("n_qubits", [1, 2, 3])
def test_pauli_tensor_kappa(n_qubits):
    spec = pauli_tensor_protocol(n_qubits)
    assert spec.n_elements == 4**n_qubits
    assert kappa_of(spec.rotation_matrix) == pytest.approx(np.sqrt(2.0), rel=1e-12)


def test_pauli_tensor_single_qubit_ordering():
    spec = pauli_tensor_protocol(1)
    for i in range(4):
        assert np.array_equal(spec.elements[i].operator, PAULI[i])


# ---------------------------------------------------------------------------
# protocols 3 and 4


def test_protocol3_states():
    spec = protocol_3_james()
    assert [e.name for e in spec.elements[:4]] == ["00", "01", "0+", "0L"]
    assert spec.n_elements == 16
    for elem in spec.elements:
        assert np.linalg.norm(elem.state) == pytest.approx(1.0, abs=1e-12)


def test_protocol3_conditioning():
    sc = error_matrix_spectrum(protocol_3_james().rotation_matrix)
    assert abs(sc[0] / sc[-1] - 60.1) <= 0.1
    assert abs(sc[-1] - 0.1) <= 0.005


def test_protocol4_shape_and_conditioning():
    spec = protocol_4_separable36()
    assert spec.n_elements == 36
    assert spec.rotation_matrix.shape == (36, 16)
    sc = error_matrix_spectrum(spec.rotation_matrix)
    assert sc[0] / sc[-1] == pytest.approx(9.0, rel=1e-12)


# ---------------------------------------------------------------------------
# protocol 5 (MUB)


@pytest.mark.parametrize("variant", ["adamson", "bandyopadhyay"])
def test_protocol5_mub_property(variant):
    overlaps = mub_cross_overlaps(variant)
    assert len(overlaps) == 160
    for name_m, name_n, value in overlaps:
        assert abs(value - 0.5) <= 1e-12, (name_m, name_n)


@pytest.mark.parametrize("variant", ["adamson", "bandyopadhyay"])
def test_protocol5_conditioning(variant):
    spec = protocol_5_mub(variant)
    assert spec.n_elements == 20
    sc = error_matrix_spectrum(spec.rotation_matrix)
    assert sc[0] / sc[-1] == pytest.approx(5.0, rel=1e-12)


@pytest.mark.parametrize("variant", ["adamson", "bandyopadhyay"])
def test_protocol5_local_equivalences(variant):
    checks = mub_local_equivalence_checks(variant)
    assert len(checks) == 8
    for label, bell, modulus in checks:
        assert modulus == pytest.approx(1.0, abs=1e-12), (label, bell)


def test_protocol5_equivalence_example():
    # first Bell-like state of the Adamson D basis vs the local image of phi+
    s, h = np.diag([1.0, 1.0j]), np.array([[1, 1], [1, -1]]) / np.sqrt(2.0)
    unitary = np.kron(s @ h @ s, PAULI[2])
    psi = (named_state("R0") + 1j * named_state("L1")) / np.sqrt(2.0)
    assert abs(np.vdot(psi, unitary @ named_state("phi+"))) == pytest.approx(
        1.0, abs=1e-12
    )


def test_protocol5_unknown_variant():
    with pytest.raises(ValueError, match="variant"):
        protocol_5_mub("wootters")


# ---------------------------------------------------------------------------
# protocol 6 (Gell-Mann)


def test_protocol6_diagonal_operators():
    spec = protocol_6_gellmann()
    assert np.array_equal(spec.elements[0].operator, 0.5 * np.eye(4, dtype=complex))
    assert np.array_equal(
        spec.elements[1].operator, 0.5 * np.diag([1, -1, 0, 0]).astype(complex)
    )
    assert np.allclose(
        spec.elements[2].operator,
        np.diag([1, 1, -2, 0]) / (2 * np.sqrt(3.0)),
        atol=1e-15,
    )
    assert np.allclose(
        spec.elements[3].operator,
        np.diag([1, 1, 1, -3]) / (2 * np.sqrt(6.0)),
        atol=1e-15,
    )
    for elem in spec.elements[4:]:
        assert elem.name.startswith("Gamma")


def test_protocol6_traceless_except_identity():
    spec = protocol_6_gellmann()
    for elem in spec.elements[1:]:
        assert abs(np.trace(elem.operator)) <= 1e-14, elem.name


def test_protocol6_conditioning():
    sc = error_matrix_spectrum(protocol_6_gellmann().rotation_matrix)
    assert sc[0] / sc[-1] == pytest.approx(2.0, rel=1e-12)
    assert sc[-1] == pytest.approx(0.5, rel=1e-12)


# ---------------------------------------------------------------------------
# protocol 7 (Patera-Zassenhaus)


def test_pz_generators():
    d, b = patera_zassenhaus_generators()
    assert np.allclose(np.linalg.matrix_power(b, 4), -np.eye(4), atol=1e-15)
    assert np.allclose(d @ d.conj().T, np.eye(4), atol=1e-15)
    assert np.allclose(b @ b.conj().T, np.eye(4), atol=1e-15)


def test_protocol7_structure():
    spec = protocol_7_patera_zassenhaus()
    assert spec.n_elements == 16
    # two rows (re/im) per non-Hermitian operator; B2D2 and I are Hermitian
    # and keep a single row each
    assert spec.n_readouts == 30
    assert spec.rotation_matrix.shape == (30, 16)
    assert [e.name for e in spec.elements[:6]] == ["D", "D2", "D3", "B", "B2", "B3"]
    assert spec.elements[-1].name == "I"
    assert [r.label for r in spec.readouts[:4]] == ["D.re", "D.im", "D2.re", "D2.im"]
    assert not np.iscomplexobj(spec.rotation_matrix)


def test_protocol7_conditioning():
    sc = error_matrix_spectrum(protocol_7_patera_zassenhaus().rotation_matrix)
    assert sc[0] / sc[-1] == pytest.approx(2.0, rel=1e-12)
    assert sc[-1] == pytest.approx(4.0, rel=1e-12)


def test_protocol7_observation_matches_complex_means():
    # the re/im readouts of each element reproduce Tr(rho Gamma); Hermitian
    # elements carry a single (purely real) readout
    rng = np.random.default_rng(4)
    spec = protocol_7_patera_zassenhaus()
    rho = random_density_matrix(4, rng)
    b = dict(zip([r.label for r in spec.readouts], spec.rotation_matrix @ vec(rho)))
    for elem in spec.elements:
        mean = np.trace(rho @ elem.operator)
        if elem.name in b:  # Hermitian: one row, imaginary part vanishes
            assert b[elem.name] == pytest.approx(mean.real, abs=1e-12)
            assert abs(mean.imag) <= 1e-12
        else:
            assert b[f"{elem.name}.re"] == pytest.approx(mean.real, abs=1e-12)
            assert b[f"{elem.name}.im"] == pytest.approx(mean.imag, abs=1e-12)


# ---------------------------------------------------------------------------
# rotation-matrix oracle across all protocols


@pytest.mark.parametrize("protocol_id", [1, 2, 3, 4, 5, 6, 7])
def test_rotation_matrix_against_direct_means(protocol_id):
    spec = protocol_by_id(protocol_id)
    rng = np.random.default_rng(100 + protocol_id)
    for _ in range(8):
        rho = random_density_matrix(4, rng)
        b = spec.rotation_matrix @ vec(rho)
        direct = np.array(
            [
                spec.scale
                * sum(lam * (psi.conj() @ rho @ psi).real for lam, psi in r.eigen)
                for r in spec.readouts
            ]
        )
        assert np.abs(b - direct).max() <= 1e-12


def test_rotation_matrix_rejects_non_hermitian_readout():
    bad = np.zeros((4, 4), dtype=complex)
    bad[0, 1] = 1.0  # not Hermitian
    readout = Readout("bad-row", 0, bad, ((1.0, named_state("00")),))
    with pytest.raises(ValueError, match="bad-row"):
        _rotation_matrix((readout,), 4, 1.0)


def test_element_validation():
    with pytest.raises(ValueError, match="not normalized"):
        MeasurementElement("x", "projector", state=np.array([1.0, 1.0]))
    with pytest.raises(ValueError, match="does not reproduce"):
        MeasurementElement(
            "x",
            "operator",
            operator=np.eye(2, dtype=complex),
            eigen=((0.5, named_state("0")),),
        )
    with pytest.raises(ValueError, match="kind"):
        MeasurementElement("x", "povm")


# ---------------------------------------------------------------------------
# CNOT disentangling


def test_cnot_disentangle_report():
    report = cnot_disentangle_check()
    assert report.all_pass
    assert report.pair_deviations[(13, 11)] == 0.0
    assert report.pair_deviations[(15, 7)] == 0.0
    assert set(report.pair_deviations) == {(13, 11), (14, 12), (15, 7), (16, 8)}
    assert report.involution_deviation == 0.0


def test_cnot_pairs_explicitly():
    for k, kp in ((13, 11), (14, 12), (15, 7), (16, 8)):
        conj = CNOT @ optimal_gpo(k) @ CNOT
        assert np.array_equal(conj, optimal_gpo(kp))


# ---------------------------------------------------------------------------
# qudit generalization and single-qubit suite


def test_qudit_d2_matches_single_qubit_reference():
    spec = optimal_gpos_qudit(2)
    expected = [
        np.diag([1, 0]).astype(complex),
        np.diag([0, 1]).astype(complex),
        0.5 * PAULI[1],
        0.5 * PAULI[2],
    ]
    for elem, ref in zip(spec.elements, expected):
        assert np.array_equal(elem.operator, ref)


@pytest.mark.parametrize("d", [2, 3, 5])
def test_qudit_kappa_is_one(d):
    spec = optimal_gpos_qudit(d)
    assert spec.n_elements == d * d
    assert kappa_of(spec.rotation_matrix) == pytest.approx(1.0, abs=1e-12)


def test_qudit_d4_equals_gamma_set():
    ops = [e.operator for e in optimal_gpos_qudit(4).elements]
    gammas = [optimal_gpo(k) for k in range(1, 17)]
    matched = set()
    for op in ops:
        hits = [
            k
            for k, g in enumerate(gammas)
            if k not in matched and np.abs(op - g).max() <= 1e-12
        ]
        assert hits, "qudit operator missing from the gamma set"
        matched.add(hits[0])
    assert len(matched) == 16


def test_qudit_rejects_bad_dimension():
    with pytest.raises(ValueError):
        optimal_gpos_qudit(1)


def test_single_qubit_suite_matrices():
    from tomocond.protocols import single_qubit_protocols

    suite = single_qubit_protocols()
    a_opt = np.array(
        [[1, 0, 0, 0], [0, 0, 0, 1], [0, 1, 0, 0], [0, 0, -1, 0]], dtype=float
    )
    a_pauli4 = np.array(
        [[0, 2, 0, 0], [0, 0, -2, 0], [1, 0, 0, -1], [1, 0, 0, 1]], dtype=float
    )
    a_pauli3 = 2.0 * np.array([[0, 1, 0], [0, 0, -1], [1, 0, 0]], dtype=float)
    assert np.array_equal(suite["optimal"].rotation_matrix, a_opt)
    assert np.array_equal(suite["pauli4"].rotation_matrix, a_pauli4)
    assert np.array_equal(suite["pauli3_reduced"].rotation_matrix, a_pauli3)
    assert np.array_equal(suite["pauli3_reduced"].b_offset, np.array([0.0, 0.0, 1.0]))
    assert kappa_of(a_opt) == pytest.approx(1.0, abs=1e-12)
    assert kappa_of(a_pauli4) == pytest.approx(np.sqrt(2.0), rel=1e-12)
    assert kappa_of(a_pauli3) == pytest.approx(1.0, abs=1e-12)


# ---------------------------------------------------------------------------
# JSON catalog


def test_catalog_round_trip_and_stability():
    specs = all_protocols()
    text = catalog_to_json(specs)
    assert text == catalog_to_json(all_protocols())  # frozen ordering
    back = catalog_from_json(text)
    assert len(back) == 7
    for orig, loaded in zip(specs, back):
        assert loaded.name == orig.name
        assert loaded.scale == orig.scale
        assert np.array_equal(loaded.rotation_matrix, orig.rotation_matrix)
        for e_orig, e_load in zip(orig.elements, loaded.elements):
            assert e_orig.name == e_load.name
            if e_orig.kind == "projector":
                assert np.array_equal(e_orig.state, e_load.state)
            else:
                assert np.array_equal(e_orig.operator, e_load.operator)


def test_catalog_is_valid_json():
    data = json.loads(catalog_to_json(all_protocols()))
    assert [entry["id"] for entry in data] == [1, 2, 3, 4, 5, 6, 7]
    assert data[0]["rotation_matrix"] == a_2qubits_reference().tolist()
