import numpy as np
import pytest

from asymmetry_kit.linalg import EigenPair, eig_leading, leading_moduli, matrix_power


def test_eig_leading_identity():
    pairs = eig_leading(np.eye(3, dtype=complex), 1)
    assert abs(pairs[0].value - 1.0) < 1e-12


def test_eig_leading_diagonal_sorted_by_modulus():
    m = np.diag([0.5, -0.9, 0.2]).astype(complex)
    pairs = eig_leading(m, 2)
    assert abs(pairs[0].value - (-0.9)) < 1e-12
    assert abs(pairs[1].value - 0.5) < 1e-12


def test_eig_leading_matches_dense_oracle():
    rng = np.random.default_rng(3)
    m = rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16))
    got = [p.value for p in eig_leading(m, 3)]
    dense = np.linalg.eigvals(m)
    dense = dense[np.argsort(-np.abs(dense))][:3]
    assert np.allclose(sorted(np.abs(got)), sorted(np.abs(dense)), atol=1e-8)


def test_eig_leading_biorthogonal_and_residual():
    # residual bound over seeded random matrices of several sizes
    for dim in (4, 16, 64):
        for seed in range(100):
            rng = np.random.default_rng(1000 * dim + seed)
            m = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
            pair = eig_leading(m, 1)[0]
            norm_f = np.linalg.norm(m)
            assert np.linalg.norm(m @ pair.right - pair.value * pair.right) <= 1e-10 * norm_f
            assert abs(pair.left @ pair.right - 1.0) < 1e-8


def test_projector_is_rank_one_idempotent():
    rng = np.random.default_rng(9)
    m = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
    p = eig_leading(m, 1)[0].projector()
    assert np.allclose(p @ p, p, atol=1e-9)
    assert abs(np.trace(p) - 1.0) < 1e-9


def test_how_many_out_of_range():
    with pytest.raises(ValueError):
        eig_leading(np.eye(2, dtype=complex), 3)


def test_matrix_power_trivial_cases():
    m = np.array([[1.0, 2.0], [3.0, 4.0]], dtype=complex)
    assert np.array_equal(matrix_power(m, 0), np.eye(2))
    d = matrix_power(np.diag([0.5, 2.0]).astype(complex), 3)
    assert np.allclose(d, np.diag([0.125, 8.0]))


def test_matrix_power_matches_sequential_multiplication():
    rng = np.random.default_rng(5)
    m = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
    m /= np.linalg.norm(m)
    ref = np.eye(8, dtype=complex)
    for _ in range(13):
        ref = ref @ m
    got = matrix_power(m, 13)
    assert np.max(np.abs(got - ref)) <= 1e-12 * np.linalg.norm(ref)


def test_matrix_power_additivity():
    rng = np.random.default_rng(6)
    for seed in range(10):
        r = np.random.default_rng(seed)
        m = r.standard_normal((5, 5)) + 1j * r.standard_normal((5, 5))
        m /= np.abs(np.linalg.eigvals(m)).max()
        k1, k2 = int(rng.integers(0, 6)), int(rng.integers(0, 6))
        lhs = matrix_power(m, k1 + k2)
        rhs = matrix_power(m, k1) @ matrix_power(m, k2)
        denom = max(np.linalg.norm(lhs), 1e-30)
        assert np.linalg.norm(lhs - rhs) / denom < 1e-10


def test_leading_moduli_handles_degeneracy():
    m = np.diag([1.0, 1.0, 0.3]).astype(complex)
    mods = leading_moduli(m, 2)
    assert np.allclose(mods, [1.0, 1.0])
