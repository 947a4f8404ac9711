import numpy as np
import pytest

from tomocond.optics import (
    COINCIDENCE_EVENTS,
    FOCK_LABELS,
    BEAM_SPLITTER_MATRIX,
    PlateRow,
    beam_splitter,
    beam_splitter_identity_checks,
    classify_coincidence,
    dual_rail,
    fock_amplitudes,
    hwp,
    local_rotation,
    qwp,
    setup2_disentangle_check,
    verify_setup_report,
    verify_table2,
    verify_table2_row,
    verify_table3,
    verify_table3_row,
    TABLE2_ROWS,
    TABLE3_ROWS,
)
from tomocond.protocols import PHASE_GATE
from tomocond.states import named_state

HADAMARD = np.array([[1, 1], [1, -1]]) / np.sqrt(2.0)


def test_hwp_special_angles():
    assert np.allclose(hwp(22.5), HADAMARD, atol=1e-14)
    assert np.allclose(hwp(0), np.diag([1.0, -1.0]), atol=1e-14)  # phase flip
    assert np.allclose(hwp(45), np.array([[0, 1], [1, 0]]), atol=1e-14)  # NOT


def test_qwp_zero_is_phase_gate_up_to_global_phase():
    assert np.allclose(np.exp(-1j * np.pi / 4) * qwp(0), PHASE_GATE, atol=1e-14)


def test_qwp_inverse_relation():
    rng = np.random.default_rng(73)
    for theta in rng.uniform(-180, 180, size=25):
        assert np.abs(qwp(theta).conj().T + qwp(theta + 90)).max() <= 1e-13


def test_waveplates_unitary():
    rng = np.random.default_rng(75)
    eye = np.eye(2)
    for theta in rng.uniform(-360, 360, size=100):
        assert np.abs(hwp(theta) @ hwp(theta).conj().T - eye).max() <= 1e-13
        assert np.abs(qwp(theta) @ qwp(theta).conj().T - eye).max() <= 1e-13


def test_circular_states_from_horizontal():
    assert np.allclose(-1j * qwp(45) @ named_state("0"), named_state("R"), atol=1e-14)
    assert np.allclose(-1j * qwp(-45) @ named_state("0"), named_state("L"), atol=1e-14)


def test_table2_counts_and_all_rows_pass():
    results = verify_table2()
    assert len(results) == 20
    for row, fid in results:
        assert fid == pytest.approx(1.0, abs=1e-10), row


def test_table2_specific_rows():
    assert verify_table2_row(PlateRow(5, "0+", 0, 0, 22.5, 0)) == pytest.approx(
        1.0, abs=1e-12
    )
    assert verify_table2_row(PlateRow(8, "R0", 0, 45, 0, 0)) == pytest.approx(
        1.0, abs=1e-12
    )
    assert verify_table2_row(PlateRow(1, "00", 0, 0, 0, 0)) == pytest.approx(
        1.0, abs=1e-12
    )
    # wrong settings must not project onto |00>
    assert verify_table2_row(PlateRow(5, "0+", 0, 0, 0, 0)) < 0.99


def test_table3_counts_and_all_rows_pass():
    results = verify_table3()
    assert len(results) == 8
    for row, fid in results:
        assert fid == pytest.approx(1.0, abs=1e-10), row


def test_table3_specific_rows():
    assert verify_table3_row(PlateRow(13, "psi-", 0, 0, 0, 0)) == pytest.approx(
        1.0, abs=1e-12
    )
    assert verify_table3_row(PlateRow(15, "phi+", 45, 0, 0, 0)) == pytest.approx(
        1.0, abs=1e-12
    )
    assert verify_table3_row(
        PlateRow(14, "psibar+", 0, 45, 22.5, 90)
    ) == pytest.approx(1.0, abs=1e-12)


def test_table_rows_cover_all_gpos():
    assert sorted({row.gpo for row in TABLE2_ROWS}) == list(range(1, 13))
    assert sorted({row.gpo for row in TABLE3_ROWS}) == [13, 14, 15, 16]


def test_local_rotation_shape():
    u = local_rotation(10, 20, 30, 40)
    assert u.shape == (4, 4)
    assert np.abs(u @ u.conj().T - np.eye(4)).max() <= 1e-13


# ---------------------------------------------------------------------------
# beam splitter


def test_dual_rail_embedding():
    v = dual_rail(named_state("psi+"))
    assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-14)
    # no same-arm double occupation for one photon per arm
    for label in ("2H,vac", "2V,vac", "HV,vac", "vac,2H", "vac,2V", "vac,HV"):
        assert v[FOCK_LABELS.index(label)] == 0.0


def test_beam_splitter_is_unitary():
    u = BEAM_SPLITTER_MATRIX
    assert np.abs(u.conj().T @ u - np.eye(10)).max() <= 1e-12


def test_beam_splitter_norm_preserved():
    rng = np.random.default_rng(77)
    v = rng.normal(size=10) + 1j * rng.normal(size=10)
    v /= np.linalg.norm(v)
    assert np.linalg.norm(beam_splitter(v)) == pytest.approx(1.0, abs=1e-12)


def test_singlet_invariant():
    v = dual_rail(named_state("psi-"))
    assert np.abs(beam_splitter(v) + v).max() <= 1e-12  # picks up a minus sign


def test_triplet_bunches():
    out = beam_splitter(dual_rail(named_state("psi+")))
    expected = fock_amplitudes(
        {"HV,vac": 1 / np.sqrt(2.0), "vac,HV": -1 / np.sqrt(2.0)}
    )
    assert np.abs(out - expected).max() <= 1e-12


def test_phibar_images():
    out = beam_splitter(dual_rail(named_state("phibar+")))
    expected = fock_amplitudes(
        {"2H,vac": 0.5, "vac,2H": -0.5, "2V,vac": 0.5j, "vac,2V": -0.5j}
    )
    assert np.abs(out - expected).max() <= 1e-12


def test_beam_splitter_identities_all_pass():
    checks = beam_splitter_identity_checks()
    assert len(checks) == 5
    for chk in checks:
        assert chk.passed, chk.name


# ---------------------------------------------------------------------------
# coincidence classification


def test_coincidence_singlet_signature():
    probs = classify_coincidence(beam_splitter(dual_rail(named_state("psi-"))))
    assert probs["D1H&D2V"] + probs["D1V&D2H"] == pytest.approx(1.0, abs=1e-12)
    assert probs["D1H&D2V"] == pytest.approx(0.5, abs=1e-12)


def test_coincidence_triplet_signature():
    probs = classify_coincidence(beam_splitter(dual_rail(named_state("psi+"))))
    assert probs["D1H&D1V"] + probs["D2H&D2V"] == pytest.approx(1.0, abs=1e-12)


def test_coincidence_phi_plus_double_fires_only():
    probs = classify_coincidence(beam_splitter(dual_rail(named_state("phi+"))))
    doubles = ("D1H*2", "D1V*2", "D2H*2", "D2V*2")
    for event, p in probs.items():
        if event in doubles:
            assert p == pytest.approx(0.25, abs=1e-12)
        else:
            assert p <= 1e-12


def test_coincidence_probabilities_sum_to_one():
    rng = np.random.default_rng(79)
    for _ in range(10):
        v = rng.normal(size=10) + 1j * rng.normal(size=10)
        v /= np.linalg.norm(v)
        probs = classify_coincidence(v)
        assert sum(probs.values()) == pytest.approx(1.0, abs=1e-12)
        assert set(probs) == set(COINCIDENCE_EVENTS)


# ---------------------------------------------------------------------------
# setup 2 (CNOT disentangling)


def test_setup2_disentangle():
    report = setup2_disentangle_check()
    assert report.all_pass
    assert len(report.overlaps) == 8
    # spot checks: the singlet maps onto a gamma_11 eigenstate, phi+ onto a
    # gamma_7 eigenstate
    assert report.overlaps[("psi-", "-1")] == pytest.approx(1.0, abs=1e-12)
    assert report.overlaps[("phi+", "+0")] == pytest.approx(1.0, abs=1e-12)
    assert report.involution_deviation <= 1e-15


def test_verify_setup_report_33_checks():
    checks = verify_setup_report()
    assert len(checks) == 33
    assert sum(c.group == "table2" for c in checks) == 20
    assert sum(c.group == "table3" for c in checks) == 8
    assert sum(c.group == "beam-splitter" for c in checks) == 5
    assert all(c.passed for c in checks)
