import numpy as np
import pytest

from tomocond.linalg import (
    RankDeficiencyError,
    frobenius_norm,
    is_hermitian,
    kron,
    least_squares_solve,
    singular_values,
    spectral_norm,
    svd,
)

SIGMA_1 = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_3 = np.array([[1, 0], [0, -1]], dtype=complex)

# the ill-conditioned 2x2 reference system
A_REF = np.array([[6.0, 7.0], [5.0, 6.0]])


def kron_bruteforce(a, b):
    """Definition of the Kronecker product as a 4-index loop."""
    p, q = a.shape
    r, s = b.shape
    out = np.zeros((p * r, q * s), dtype=complex)
    for i in range(p):
        for j in range(q):
            for k in range(r):
                for l in range(s):
                    out[i * r + k, j * s + l] = a[i, j] * b[k, l]
    return out


def test_kron_identity():
    assert np.array_equal(kron(np.eye(2), np.eye(2)), np.eye(4))


def test_kron_diagonal():
    assert np.array_equal(kron(SIGMA_3, SIGMA_3), np.diag([1, -1, -1, 1]).astype(complex))


def test_kron_matches_bruteforce():
    assert np.array_equal(kron(SIGMA_1, SIGMA_2), kron_bruteforce(SIGMA_1, SIGMA_2))
    rng = np.random.default_rng(7)
    for shape_a, shape_b in (((2, 3), (4, 2)), ((3, 3), (2, 5))):
        a = rng.normal(size=shape_a) + 1j * rng.normal(size=shape_a)
        b = rng.normal(size=shape_b) + 1j * rng.normal(size=shape_b)
        # vectorized complex multiply may differ from the scalar loop by 1 ulp
        assert np.allclose(kron(a, b), kron_bruteforce(a, b), rtol=1e-15, atol=0)


def test_svd_diagonal():
    res = svd(np.diag([3.0, 0.0]))
    assert np.allclose(res.singular_values, [3.0, 0.0])


def test_svd_condition_of_reference_system():
    s = singular_values(A_REF)
    kappa = s[0] / s[-1]
    assert 145.9 <= kappa <= 146.1


@pytest.mark.parametrize("shape", [(3, 3), (6, 4), (4, 7), (36, 16), (20, 16)])
@pytest.mark.parametrize("complex_entries", [False, True])
def test_svd_contracts(shape, complex_entries):
    rng = np.random.default_rng(hash(shape) % 2**32)
    m = rng.normal(size=shape)
    if complex_entries:
        m = m + 1j * rng.normal(size=shape)
    res = svd(m)
    s = res.singular_values
    assert np.all(s >= 0)
    assert np.all(np.diff(s) <= 0)
    rel_err = np.linalg.norm(res.reconstruct() - m) / np.linalg.norm(m)
    assert rel_err <= 1e-10
    k = min(shape)
    u, v = res.left_vectors, res.right_vectors
    assert np.abs(u.conj().T @ u - np.eye(k)).max() <= 1e-10
    assert np.abs(v.conj().T @ v - np.eye(k)).max() <= 1e-10


def test_svd_real_input_gives_real_factors():
    res = svd(np.random.default_rng(1).normal(size=(5, 3)))
    assert not np.iscomplexobj(res.left_vectors)
    assert not np.iscomplexobj(res.right_vectors)


def test_svd_rejects_nonfinite():
    with pytest.raises(ValueError, match="finite"):
        svd(np.array([[1.0, np.nan], [0.0, 1.0]]))


def test_least_squares_reference_solutions():
    x = least_squares_solve(A_REF, np.array([0.7, 0.6]))
    assert np.abs(x - np.array([0.0, 0.1])).max() <= 1e-12
    x = least_squares_solve(A_REF, np.array([0.71, 0.59]))
    assert np.abs(x - np.array([0.13, -0.01])).max() <= 1e-12


def test_least_squares_identity():
    b = np.array([0.3, -1.2, 4.0, 0.0])
    assert np.allclose(least_squares_solve(np.eye(4), b), b, atol=0, rtol=0)


def test_least_squares_residual_orthogonality():
    rng = np.random.default_rng(11)
    for _ in range(20):
        a = rng.normal(size=(9, 4))
        b = rng.normal(size=9)
        x = least_squares_solve(a, b)
        grad = a.T @ (a @ x - b)
        bound = 1e-8 * spectral_norm(a) * np.linalg.norm(b)
        assert np.linalg.norm(grad) <= bound


def test_least_squares_rank_deficient():
    a = np.array([[1.0, 2.0], [2.0, 4.0]])  # rank 1
    with pytest.raises(RankDeficiencyError, match="rank 1") as exc:
        least_squares_solve(a, np.array([1.0, 2.0]))
    assert exc.value.rank == 1
    assert exc.value.needed == 2


def test_norms_identity():
    assert spectral_norm(np.eye(4)) == pytest.approx(1.0, abs=1e-14)
    assert frobenius_norm(np.eye(4)) == pytest.approx(2.0, abs=1e-14)


def test_spectral_norm_reference():
    # oracle: sigma_1 sigma_2 = |det| = 1 and sigma_1^2 + sigma_2^2 = 146,
    # so sigma_1^2 solves t + 1/t = 146
    t = (146.0 + np.sqrt(146.0**2 - 4.0)) / 2.0
    assert spectral_norm(A_REF) == pytest.approx(np.sqrt(t), rel=1e-12)
    assert frobenius_norm(A_REF) == pytest.approx(np.sqrt(146.0), rel=1e-14)


def test_norm_inequalities():
    rng = np.random.default_rng(23)
    for _ in range(20):
        m = rng.normal(size=(5, 7)) + 1j * rng.normal(size=(5, 7))
        spec = spectral_norm(m)
        fro = frobenius_norm(m)
        rank = np.linalg.matrix_rank(m)
        assert spec <= fro + 1e-12
        assert fro <= np.sqrt(rank) * spec + 1e-12


def test_is_hermitian():
    assert is_hermitian(SIGMA_2)
    assert not is_hermitian(np.ones((2, 3)))
    # deviations inside / outside the 1e-12 tolerance window
    assert is_hermitian(SIGMA_1 + 1e-14j * SIGMA_3)
    assert not is_hermitian(SIGMA_1 + 1e-11j * SIGMA_3)
