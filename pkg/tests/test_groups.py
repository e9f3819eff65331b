import numpy as np
import pytest

from asymmetry_kit import (
    NonAbelian,
    NonUnitary,
    OrderExceeded,
    abelian_irrep_projectors,
    blocked_representation,
    detect_invariant_subalgebra,
    detect_invariant_subgroup,
    generate_group,
    group_from_json,
    group_to_json,
    haar_nodes_u1,
    haar_sample_su2,
    quotient_global_phases,
    rotation_about_y,
    spin_flip_z2,
    spin_matrices,
    su2_rep,
    u1_z_rep,
    y_rotation_group,
    y_rotation_z4_blocked,
    y_rotation_z4_physical,
)
from asymmetry_kit.groups import PAULI_X, PAULI_Z, LieGroupRep, QuadratureSpec
from asymmetry_kit.oracle import site_action
from asymmetry_kit.states import ferromagnet, neel, tilted_product

from conftest import charge_structured_tensor


def test_generate_group_quarter_turn_has_order_eight():
    # the spin-1/2 quarter turn squares back to the identity only after a
    # double winding: the single-spin representation is projective
    g = y_rotation_group()
    assert g.order == 8
    assert np.allclose(g.elements[0], np.eye(2))


def test_generate_group_trivial_and_z2():
    assert generate_group([np.eye(2)]).order == 1
    g = generate_group([PAULI_X])
    assert g.order == 2
    assert np.allclose(g.elements[g.cayley[1, 1]], np.eye(2))


def test_generate_group_rejects_non_unitary_and_unbounded():
    with pytest.raises(NonUnitary):
        generate_group([np.array([[1.0, 1.0], [0.0, 1.0]])])
    # an irrational rotation never closes
    with pytest.raises(OrderExceeded):
        generate_group([np.diag([1.0, np.exp(1j * 0.1234567)])], max_order=64)


def test_group_tables_are_consistent():
    g = y_rotation_group()
    rng = np.random.default_rng(0)
    for _ in range(100):
        i, j, k = rng.integers(0, g.order, 3)
        # associativity through the table
        assert g.cayley[g.cayley[i, j], k] == g.cayley[i, g.cayley[j, k]]
        prod = g.elements[i] @ g.elements[j]
        assert np.max(np.abs(prod - g.elements[g.cayley[i, j]])) < 1e-10
    for i in range(g.order):
        assert np.max(np.abs(g.elements[g.inverse[i]] @ g.elements[i] - np.eye(2))) < 1e-10


def test_quotient_global_phases_gives_physical_z4():
    g = y_rotation_z4_physical()
    assert g.order == 4
    assert g.projective
    assert np.allclose(g.elements[0], np.eye(2))
    # rays multiply like Z4: the quarter turn has ray-order 4
    k, power = 1, 1
    for power in range(2, 6):
        k = g.cayley[k, 1]
        if k == 0:
            break
    assert power == 4
    # blocked two-site action is an honest (non-projective) Z4
    gb = y_rotation_z4_blocked()
    assert gb.order == 4 and not gb.projective


def test_detect_invariant_subgroup_cases():
    t = ferromagnet()
    sub = detect_invariant_subgroup(t, y_rotation_group())
    assert sub.order == 2  # identity and the global-phase element -1
    assert 0 in sub.indices
    phases = sorted(abs(v) for v in sub.phases.values())
    assert abs(phases[0]) < 1e-9 and abs(phases[1] - np.pi) < 1e-9

    trivial = generate_group([np.eye(2)])
    sub = detect_invariant_subgroup(t, trivial)
    assert sub.order == 1

    sub = detect_invariant_subgroup(neel(), blocked_representation(y_rotation_z4_physical()))
    assert sub.indices == [0]


def test_fully_symmetric_state_keeps_whole_group():
    t = charge_structured_tensor(3)
    g = generate_group([np.diag([1.0, 1j])])
    sub = detect_invariant_subgroup(t, g)
    assert sub.order == g.order == 4


def test_haar_nodes_u1():
    nodes = haar_nodes_u1(4)
    assert np.allclose([a for a, _ in nodes], [0, np.pi / 2, np.pi, 3 * np.pi / 2])
    assert np.allclose([w for _, w in nodes], 0.25)

    val = sum(w * np.exp(1j * a) for a, w in haar_nodes_u1(16))
    assert abs(val) < 1e-14

    val = sum(w * np.cos(a / 2) ** 4 for a, w in haar_nodes_u1(64))
    assert abs(val - 3.0 / 8.0) < 1e-12


def test_u1_quadrature_exact_for_low_harmonics():
    # any product of harmonics below half the node count integrates exactly
    nodes = haar_nodes_u1(32)
    for k in range(1, 16):
        val = sum(w * np.exp(1j * k * a) for a, w in nodes)
        assert abs(val) < 1e-12


def test_haar_sample_su2_characters():
    qs = haar_sample_su2(100000, 7)
    assert np.allclose(np.linalg.norm(qs, axis=1), 1.0)
    # fundamental character integrates to 0, |chi|^2 to 1 (3 sigma)
    chi = 2.0 * qs[:, 0]  # Tr u = 2 w
    assert abs(chi.mean()) < 3.0 * chi.std() / np.sqrt(len(chi))
    chi2 = chi**2
    assert abs(chi2.mean() - 1.0) < 3.0 * chi2.std() / np.sqrt(len(chi2))
    # spin-1 character via the 3-dimensional representation
    rep = su2_rep(two_j=2)
    sub = qs[:4000]
    chi3 = np.array([np.trace(rep.element_from_quaternion(q)).real for q in sub])
    assert abs(chi3.mean()) < 3.0 * chi3.std() / np.sqrt(len(chi3))
    assert abs((chi3**2).mean() - 1.0) < 3.0 * (chi3**2).std() / np.sqrt(len(chi3))
    # determinism
    assert np.array_equal(qs, haar_sample_su2(100000, 7))


def test_su2_fundamental_fast_path_matches_expm():
    rep = su2_rep()
    assert rep._fundamental
    slow = LieGroupRep("su2", rep.generators, rep.quadrature)
    slow._fundamental = False
    for q in haar_sample_su2(20, 3):
        assert np.max(np.abs(rep.element_from_quaternion(q) - slow.element_from_quaternion(q))) < 1e-12


def test_lie_rep_validation():
    with pytest.raises(NonUnitary):
        LieGroupRep("u1", [np.eye(2)])  # not anti-Hermitian
    sx, sy, sz = spin_matrices(1)
    with pytest.raises(ValueError):
        LieGroupRep("su2", [-1j * sx, -1j * sy, -0.5j * sz])  # broken algebra
    rep = su2_rep(two_j=2)
    for coords in ([0.3, 0, 0], [0.1, -0.4, 0.2]):
        u = rep.element(coords)
        assert np.max(np.abs(u @ u.conj().T - np.eye(3))) < 1e-9


def test_detect_invariant_subalgebra():
    gsu2 = su2_rep()
    sub = detect_invariant_subalgebra(ferromagnet(), gsu2)
    assert sub.dim_h == 1 and sub.dim_g == 3
    # the invariant direction is the z rotation
    h_dir = sub.h_basis[0]
    assert abs(abs(h_dir[2]) - 1.0) < 1e-6

    sub = detect_invariant_subalgebra(tilted_product(np.pi / 2), u1_z_rep())
    assert sub.dim_h == 0

    sub = detect_invariant_subalgebra(ferromagnet(), u1_z_rep())
    assert sub.dim_h == 1


def test_abelian_irrep_projectors_cases():
    g = generate_group([PAULI_Z])
    projs = abelian_irrep_projectors(g, list(g.elements))
    assert len(projs) == 2
    for p, target in zip(projs, (np.diag([1.0, 0]), np.diag([0, 1.0]))):
        assert any(np.allclose(p, t) for t in (np.diag([1.0, 0]), np.diag([0, 1.0])))

    z4 = generate_group([np.diag([1.0, 1j])])
    action = [site_action(u, 2) for u in z4.elements]
    projs = abelian_irrep_projectors(z4, action)
    assert sum(int(round(np.trace(p).real)) for p in projs) == 4
    total = sum(projs)
    assert np.allclose(total, np.eye(4), atol=1e-10)
    for i, p in enumerate(projs):
        for j, q in enumerate(projs):
            expected = p if i == j else np.zeros_like(p)
            assert np.allclose(p @ q, expected, atol=1e-10)

    trivial = generate_group([np.eye(3)])
    projs = abelian_irrep_projectors(trivial, [np.eye(3)])
    assert len(projs) == 1 and np.allclose(projs[0], np.eye(3))


def test_abelian_irrep_projectors_rejects_nonabelian():
    from asymmetry_kit.groups import generate_group

    s3ish = generate_group([PAULI_X, PAULI_Z])  # order 8, non-abelian
    with pytest.raises(NonAbelian):
        abelian_irrep_projectors(s3ish, list(s3ish.elements))


def test_group_json_round_trip():
    g = y_rotation_group()
    back = group_from_json(group_to_json(g))
    assert back.order == g.order

    rep = su2_rep(quadrature=QuadratureSpec("montecarlo", 64, 5000, 11))
    back = group_from_json(group_to_json(rep))
    assert back.kind == "su2"
    assert back.quadrature.samples == 5000
    assert back.quadrature.seed == 11
    for a, b in zip(back.generators, rep.generators):
        assert np.max(np.abs(a - b)) < 1e-15
