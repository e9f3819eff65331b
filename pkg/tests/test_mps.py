import numpy as np
import pytest

from asymmetry_kit import (
    MpsTensor,
    NonUnitary,
    ZeroTensor,
    block_sites,
    build_charged_transfer,
    build_transfer_operator,
    clustering_check,
    fixed_point_projector,
    normalize,
    numerical_radius,
    spectral_radius,
    tensor_from_json,
    tensor_to_json,
)
from asymmetry_kit.errors import DegenerateLeading
from asymmetry_kit.groups import rotation_about_y
from asymmetry_kit.linalg import matrix_power
from asymmetry_kit.mps import TransferOperator
from asymmetry_kit.states import aklt, ferromagnet, ghz, random_tensor

from conftest import charge_structured_tensor, charge_unitary, rand_unitary


def transfer_loop_oracle(t):
    """Brute-force evaluation of the transfer sum over all index tuples."""
    d, dd = t.phys_dim, t.bond_dim
    out = np.zeros((dd * dd, dd * dd), dtype=complex)
    for a in range(dd):
        for ap in range(dd):
            for b in range(dd):
                for bp in range(dd):
                    out[a * dd + ap, b * dd + bp] = sum(
                        t.data[s, a, b] * np.conj(t.data[s, ap, bp]) for s in range(d)
                    )
    return out


def test_transfer_product_state():
    r = build_transfer_operator(ferromagnet())
    assert r.matrix.shape == (1, 1)
    assert abs(r.matrix[0, 0] - 1.0) < 1e-15


def test_transfer_two_branch_tensor_against_loop_oracle():
    # expected values computed with the brute-force loop: the transfer
    # matrix of this diagonal two-branch tensor is diag(p, 0, 0, 1-p)
    p = 0.3
    data = np.zeros((2, 2, 2), dtype=complex)
    data[0, 0, 0] = np.sqrt(p)
    data[1, 1, 1] = np.sqrt(1 - p)
    t = MpsTensor(data)
    r = build_transfer_operator(t).matrix
    assert np.max(np.abs(r - transfer_loop_oracle(t))) < 1e-15
    assert np.max(np.abs(r - np.diag([p, 0.0, 0.0, 1 - p]))) < 1e-15
    mods = np.sort(np.abs(np.linalg.eigvals(r)))[::-1]
    assert np.allclose(mods, [0.7, 0.3, 0.0, 0.0], atol=1e-14)


def test_transfer_random_tensor_against_loop_oracle():
    t = random_tensor(21, 3, 2)
    r = build_transfer_operator(t).matrix
    assert np.max(np.abs(r - transfer_loop_oracle(t))) < 1e-13


def test_normalize_cases():
    t = ferromagnet()
    again = normalize(t)
    assert np.max(np.abs(again.data - t.data)) < 1e-12
    scaled = t.scaled(3.0)
    back = normalize(scaled)
    assert abs(spectral_radius(build_transfer_operator(back)) - 1.0) < 1e-12
    t4 = normalize(MpsTensor(np.random.default_rng(2).standard_normal((2, 4, 4))))
    assert abs(spectral_radius(build_transfer_operator(t4)) - 1.0) < 1e-12
    with pytest.raises(ZeroTensor):
        normalize(MpsTensor(np.zeros((2, 2, 2))))


def test_charged_transfer_identity_equals_plain():
    t = random_tensor(4, 3, 2)
    plain = build_transfer_operator(t).matrix
    charged = build_charged_transfer(t, np.eye(2)).matrix
    assert np.max(np.abs(plain - charged)) < 1e-15


def test_charged_transfer_ferromagnet_rotations():
    t = ferromagnet()
    r_quarter = build_charged_transfer(t, rotation_about_y(np.pi / 2))
    assert abs(r_quarter.matrix[0, 0] - np.cos(np.pi / 4)) < 1e-14
    assert abs(spectral_radius(r_quarter) - 2 ** -0.5) < 1e-14
    r_half = build_charged_transfer(t, rotation_about_y(np.pi))
    assert abs(r_half.matrix[0, 0]) < 1e-14


def test_charged_transfer_rejects_non_unitary():
    with pytest.raises(NonUnitary):
        build_charged_transfer(ferromagnet(), np.array([[1.0, 0.0], [0.0, 2.0]]))


def test_spectral_radius_cases(rng):
    t = random_tensor(8, 3, 2)
    assert abs(spectral_radius(build_transfer_operator(t)) - 1.0) < 1e-10
    u = rand_unitary(2, rng)
    r = build_charged_transfer(t, u)
    val = spectral_radius(r)
    dense = np.abs(np.linalg.eigvals(r.matrix)).max()
    assert abs(val - dense) < 1e-10
    assert 0.0 < val <= 1.0 + 1e-10


def test_charged_radius_bounded_for_many_random_tensors(rng):
    # spectral radius of any charged transfer of a normalized tensor is <= 1
    for case in range(200):
        dd = 2 + case % 3
        d = 2 + case % 2
        t = random_tensor(5000 + case, dd, d)
        u = rand_unitary(d, rng)
        assert spectral_radius(build_charged_transfer(t, u)) <= 1.0 + 1e-8


def test_numerical_radius_examples():
    assert abs(numerical_radius(TransferOperator(np.eye(4, dtype=complex))) - 1.0) < 1e-12
    assert abs(numerical_radius(TransferOperator(np.diag([0.5, -0.5]).astype(complex))) - 0.5) < 1e-12
    nilp = TransferOperator(np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex))
    val = numerical_radius(nilp)
    assert abs(val - 0.5) < 1e-9
    # grid-search lower bound over random unit vectors can only come in below
    rng = np.random.default_rng(1)
    best = 0.0
    for _ in range(2000):
        v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        v /= np.linalg.norm(v)
        best = max(best, abs(np.vdot(v, nilp.matrix @ v)))
    assert val >= best - 1e-9


def test_clustering_check_cases():
    rep = clustering_check(ferromagnet())
    assert rep.is_clustering and rep.gap_ratio == 0.0

    rep = clustering_check(ghz(0.5))
    assert not rep.is_clustering
    assert rep.correlation_length == np.inf

    rep = clustering_check(aklt())
    assert rep.is_clustering
    assert abs(rep.gap_ratio - 1.0 / 3.0) < 1e-12


def test_fixed_point_projector_cases():
    pair = fixed_point_projector(build_transfer_operator(ferromagnet()))
    assert abs(pair.value - 1.0) < 1e-12
    assert np.allclose(pair.left, [1.0]) and np.allclose(pair.right, [1.0])

    pair = fixed_point_projector(build_transfer_operator(aklt()))
    proj = pair.projector()
    assert np.allclose(proj @ proj, proj, atol=1e-10)
    assert abs(np.trace(proj) - 1.0) < 1e-10

    with pytest.raises(DegenerateLeading):
        fixed_point_projector(build_transfer_operator(ghz(0.5)))


def test_block_sites():
    t = random_tensor(3, 2, 2)
    assert block_sites(t, 1) is t

    f2 = block_sites(ferromagnet(), 2)
    assert f2.phys_dim == 4 and f2.bond_dim == 1
    expect = np.zeros(4)
    expect[0] = 1.0
    assert np.allclose(f2.data[:, 0, 0], expect)

    t3 = block_sites(t, 3)
    r3 = build_transfer_operator(t3).matrix
    rp = matrix_power(build_transfer_operator(t).matrix, 3)
    assert np.max(np.abs(r3 - rp)) < 1e-12
    assert t3.block_size == 3


def test_blocking_consistency_random(rng):
    for k in (2, 4):
        t = random_tensor(int(rng.integers(0, 100)), 2, 2)
        lhs = build_transfer_operator(block_sites(t, k)).matrix
        rhs = matrix_power(build_transfer_operator(t).matrix, k)
        assert np.max(np.abs(lhs - rhs)) < 1e-12


def test_symmetric_element_has_unimodular_leading_eigenvalue():
    # tensors satisfying the gauge relation exactly: spectrum of the charged
    # operator is the plain spectrum rotated by the global phase
    t = charge_structured_tensor(7)
    for alpha, phi in ((0.7, 0.0), (1.3, 0.4), (2.2, -1.1)):
        u = charge_unitary(alpha, phi)
        r_u = build_charged_transfer(t, u)
        lam = r_u.leading_pairs(1)[0].value
        assert abs(abs(lam) - 1.0) < 1e-10
        spec_plain = np.sort_complex(np.linalg.eigvals(build_transfer_operator(t).matrix))
        spec_charged = np.sort_complex(np.linalg.eigvals(r_u.matrix) * np.exp(-1j * phi))
        order = np.argsort(-np.abs(spec_plain))
        order_c = np.argsort(-np.abs(spec_charged))
        assert np.allclose(
            np.abs(spec_plain[order]), np.abs(spec_charged[order_c]), atol=1e-8
        )
        assert np.max(np.abs(np.sort(spec_plain) - np.sort(spec_charged))) < 1e-8


def test_json_round_trip_bit_exact():
    t = random_tensor(17, 3, 2)
    text = tensor_to_json(t)
    back = tensor_from_json(text)
    assert back.phys_dim == t.phys_dim and back.bond_dim == t.bond_dim
    assert np.array_equal(back.data, t.data)  # bit exact
    b = block_sites(t, 2)
    back2 = tensor_from_json(tensor_to_json(b))
    assert back2.block_size == 2
    assert np.array_equal(back2.data, b.data)


def test_tensor_validation():
    with pytest.raises(ValueError):
        MpsTensor(np.zeros((2, 2, 3)))
    bad = np.zeros((2, 2, 2))
    bad[0, 0, 0] = np.nan
    with pytest.raises(ValueError):
        MpsTensor(bad)
