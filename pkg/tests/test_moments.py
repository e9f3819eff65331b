import numpy as np
import pytest

from asymmetry_kit import (
    BadParam,
    FitIllConditioned,
    MCVarianceTooLarge,
    NonClustering,
    ProductNotIdentity,
    ReplicaPermutation,
    TermCapExceeded,
    asymmetry_finite_group,
    asymmetry_lie_group,
    build_charged_transfer,
    build_transfer_operator,
    charged_moment,
    fit_exponential_to_constant,
    fit_log_slope,
    free_energy_density,
    generate_group,
    hessian_at_subgroup,
    permutation_matrix,
    renyi_entropy,
    rotation_about_y,
    subleading_correction_fit,
    su2_rep,
    u1_z_rep,
    y_rotation_z4_physical,
)
from asymmetry_kit.groups import QuadratureSpec
from asymmetry_kit.linalg import matrix_power
from asymmetry_kit.moments import _make_context, pairwise_sum
from asymmetry_kit.oracle import (
    charged_moment_ed,
    dense_state,
    reduced_density_matrix,
    renyi_moment_ed,
    site_action,
)
from asymmetry_kit.states import aklt, ferromagnet, ghz, neel, random_tensor, tilted_product

from conftest import charge_structured_tensor, charge_unitary, rand_unitary


# --- permutation -------------------------------------------------------------


def test_permutation_rule_properties():
    with pytest.raises(BadParam):
        ReplicaPermutation(1)
    for n in (2, 3, 4):
        p = permutation_matrix(n, 2)
        acc = np.eye(p.shape[0])
        for _ in range(n):
            acc = p @ acc
        assert np.array_equal(acc, np.eye(p.shape[0]))  # n applications = identity
    # n = 2: swaps the two primed slots
    p = permutation_matrix(2, 2)
    idx_in = np.arange(16).reshape(2, 2, 2, 2)  # (a1, b1, a2, b2)
    for a1 in range(2):
        for b1 in range(2):
            for a2 in range(2):
                for b2 in range(2):
                    col = idx_in[a1, b1, a2, b2]
                    row = idx_in[a1, b2, a2, b1]
                    assert p[row, col] == 1.0


def test_rank_one_contraction_equals_dense_permutation_reference(rng):
    # the implicit ring contraction must equal the materialized D^(2n)
    # permutation-matrix formula
    for n in (2, 3):
        t = random_tensor(31 + n, 2, 2)
        ctx = _make_context(t)
        us = [rand_unitary(2, rng) for _ in range(n - 1)]
        closing = np.eye(2, dtype=complex)
        for u in us:
            closing = closing @ u
        us.append(closing.conj().T)
        ell = 2
        mats = [matrix_power(build_charged_transfer(t, u).matrix, ell) for u in us]
        big = mats[0]
        for m in mats[1:]:
            big = np.kron(big, m)
        pi = np.outer(ctx.r_mat.reshape(-1), ctx.l_mat.reshape(-1))
        env = pi
        for _ in range(n - 1):
            env = np.kron(env, pi)
        p = permutation_matrix(n, t.bond_dim)
        ref = np.trace(big @ p @ env @ p.T)
        got = charged_moment(t, us, ell).value
        assert abs(ref - got) < 1e-12


# --- charged moments ----------------------------------------------------------


def test_ferromagnet_charged_moment_values():
    t = ferromagnet()
    u = rotation_about_y(np.pi / 2)
    res = charged_moment(t, [u, u.conj().T], 3)
    assert abs(res.value - 0.125) < 1e-14
    assert np.allclose(res.dominant_moduli, [2**-0.5, 2**-0.5])

    u_pi = rotation_about_y(np.pi)
    res = charged_moment(t, [u_pi, u_pi.conj().T], 5)
    assert abs(res.value) < 1e-14


def test_identity_insertion_reduces_to_renyi_moment():
    t = random_tensor(41, 3, 2)
    for n in (2, 3):
        res = charged_moment(t, [np.eye(2)] * n, 4)
        s_n = renyi_entropy(t, n, 4)
        assert abs(res.value.real - np.exp((1 - n) * s_n)) < 1e-12
        assert abs(res.value.imag) < 1e-12


def test_charged_moment_requires_identity_product(rng):
    t = random_tensor(42, 2, 2)
    u = rand_unitary(2, rng)
    with pytest.raises(ProductNotIdentity):
        charged_moment(t, [u, u], 2)


def test_charged_moment_matches_oracle_on_finite_chain(rng):
    for seed in (50, 51, 52):
        t = random_tensor(seed, 2, 2)
        L, ell = 14, 2
        rho = reduced_density_matrix(dense_state(t, L), ell)
        u = rand_unitary(2, rng)
        us = [u, u.conj().T]
        ed = charged_moment_ed(rho, [site_action(x, ell) for x in us])
        res = charged_moment(t, us, ell, mode="finite", chain_length=L)
        assert abs(ed - res.value) < 1e-10


def test_charged_moment_phase_prediction_for_symmetric_tuple():
    t = charge_structured_tensor(19)
    u = charge_unitary(0.8, 0.3)
    res = charged_moment(t, [u, np.linalg.inv(u)], 5)
    assert res.phase_prediction is not None
    trn = np.exp((1 - 2) * renyi_entropy(t, 2, 5))
    # symmetric tuple: moment = Tr(rho^n) * predicted phase
    assert abs(res.value - trn * res.phase_prediction) < 1e-8


def test_normalized_moment_bounded_by_one(rng):
    t = random_tensor(60, 3, 2)
    trn = np.exp(-renyi_entropy(t, 2, 3))
    for _ in range(20):
        u = rand_unitary(2, rng)
        res = charged_moment(t, [u, u.conj().T], 3)
        assert abs(res.value) <= trn + 1e-8


# --- Renyi entropies ----------------------------------------------------------


def test_renyi_entropy_product_state_vanishes():
    for ell in (1, 5, None):
        assert abs(renyi_entropy(tilted_product(0.9), 2, ell)) < 1e-12
        assert abs(renyi_entropy(tilted_product(0.9), 3, ell)) < 1e-12


def test_renyi_entropy_aklt_values():
    t = aklt()
    assert abs(renyi_entropy(t, 2, None) - np.log(4)) < 1e-10
    for ell in (2, 5):
        expect = -np.log((1 + 3 * 9.0**-ell) / 4)
        assert abs(renyi_entropy(t, 2, ell) - expect) < 1e-12


def test_renyi_entropy_matches_oracle_for_random_tensor():
    t = random_tensor(8, 3, 2)
    L = 14
    rho = reduced_density_matrix(dense_state(t, L), 3)
    for n in (2, 3):
        ed = renyi_moment_ed(rho, n)
        got = renyi_entropy(t, n, 3, mode="finite", chain_length=L)
        assert abs(got - np.log(ed) / (1 - n)) < 1e-10


def test_renyi_entropy_refuses_cat_states():
    with pytest.raises(NonClustering):
        renyi_entropy(ghz(0.5), 2, 3)
    with pytest.raises(NonClustering):
        renyi_entropy(ghz(0.25), 2, 3)


# --- finite-group asymmetry -----------------------------------------------------


def test_ferromagnet_z4_asymmetry_analytic():
    t = ferromagnet()
    g = y_rotation_z4_physical()
    ells = [1, 5, 20]
    rep = asymmetry_finite_group(t, g, 2, ells)
    for ell, got in zip(ells, rep.delta_s):
        expect = -np.log((1 + 2.0 * 2.0**-ell) / 4)
        assert abs(got - expect) < 1e-10
    assert abs(rep.delta_s[0] - np.log(2)) < 1e-12


def test_fully_symmetric_state_has_zero_asymmetry():
    t = charge_structured_tensor(23)
    g = generate_group([np.diag([1.0, 1j])])
    for n in (2, 3):
        rep = asymmetry_finite_group(t, g, n, [1, 4, 9])
        assert max(abs(v) for v in rep.delta_s) < 1e-10


def test_term_cap():
    t = ferromagnet()
    g = y_rotation_z4_physical()
    with pytest.raises(TermCapExceeded):
        asymmetry_finite_group(t, g, 4, [2], term_cap=10)


def test_group_sum_deterministic_across_threads():
    t = random_tensor(9, 2, 2)
    g = y_rotation_z4_physical()
    rep1 = asymmetry_finite_group(t, g, 2, [2, 6, 10], threads=1)
    rep3 = asymmetry_finite_group(t, g, 2, [2, 6, 10], threads=3)
    assert rep1.delta_s == rep3.delta_s  # bitwise identical


def test_pairwise_sum_matches_plain_sum():
    rng = np.random.default_rng(3)
    vals = list(rng.standard_normal(37) + 1j * rng.standard_normal(37))
    assert abs(pairwise_sum(vals) - sum(vals)) < 1e-12


# --- Lie-group asymmetry --------------------------------------------------------


def test_u1_symmetric_state_zero_asymmetry():
    rep = asymmetry_lie_group(ferromagnet(), u1_z_rep(), 2, [4, 32])
    assert max(abs(v) for v in rep.delta_s) < 1e-12


def test_u1_tilted_matches_closed_form():
    from scipy.special import gammaln

    rep = asymmetry_lie_group(tilted_product(np.pi / 2), u1_z_rep(), 2, [4, 16, 64, 256])
    for ell, got in zip(rep.ell_grid, rep.delta_s):
        exact = float(-(gammaln(2 * ell + 1) - 2 * gammaln(ell + 1) - ell * np.log(4.0)))
        assert abs(got - exact) < 1e-10


def test_u1_three_replica_grid_quadrature():
    # two integration angles still use the deterministic product grid
    t = tilted_product(np.pi / 2)
    rep = asymmetry_lie_group(t, u1_z_rep(), 3, [2, 6])
    assert rep.mc_std_err is None
    assert all(v >= -1e-8 for v in rep.delta_s)


def test_su2_montecarlo_ferromagnet_short():
    quad = QuadratureSpec("montecarlo", samples=4000, seed=5)
    rep = asymmetry_lie_group(ferromagnet(), su2_rep(quadrature=quad), 2, [4, 8, 16])
    for ell, got, err in zip(rep.ell_grid, rep.delta_s, rep.mc_std_err):
        assert abs(got - np.log(ell + 1.0)) < 6 * max(err, 1e-3)


def test_su2_montecarlo_requires_seed():
    quad = QuadratureSpec("montecarlo", samples=1000, seed=None)
    with pytest.raises(BadParam):
        asymmetry_lie_group(ferromagnet(), su2_rep(quadrature=quad), 2, [4])


def test_mc_variance_cap_raises():
    quad = QuadratureSpec("montecarlo", samples=400, seed=2)
    with pytest.raises(MCVarianceTooLarge):
        asymmetry_lie_group(ferromagnet(), su2_rep(quadrature=quad), 2, [4096])


# --- free energy and Hessian ----------------------------------------------------


def test_free_energy_density_cases():
    t = ferromagnet()
    assert abs(free_energy_density(t, [np.eye(2), np.eye(2)])) < 1e-12
    u = rotation_about_y(np.pi / 2)
    val = free_energy_density(t, [u, u.conj().T])
    assert abs(val - np.log(2)) < 1e-12
    # symmetric inverse pair: free energy vanishes entirely
    tc = charge_structured_tensor(29)
    uc = charge_unitary(1.1, 0.7)
    val = free_energy_density(tc, [uc, np.linalg.inv(uc)])
    assert abs(val.real) < 1e-10 and abs(val.imag) < 1e-10


def test_hessian_u1_tilted():
    rep = hessian_at_subgroup(tilted_product(np.pi / 2), u1_z_rep(), n=2)
    assert rep.matrix.shape == (1, 1)
    assert abs(rep.matrix[0, 0] - 0.5) < 1e-4
    assert rep.gradient_norm < 1e-6
    assert rep.positive_definite
    # stability under step halving within 1%
    rep2 = hessian_at_subgroup(tilted_product(np.pi / 2), u1_z_rep(), n=2, step=5e-4)
    assert abs(rep2.matrix[0, 0] - rep.matrix[0, 0]) < 0.01 * abs(rep.matrix[0, 0])


def test_hessian_symmetric_group_empty():
    rep = hessian_at_subgroup(ferromagnet(), u1_z_rep(), n=2)
    assert rep.matrix.shape == (0, 0)
    assert rep.positive_definite


def test_hessian_su2_ferromagnet():
    rep = hessian_at_subgroup(ferromagnet(), su2_rep(), n=2)
    assert rep.matrix.shape == (2, 2)
    assert rep.positive_definite
    assert rep.gradient_norm < 1e-6
    assert np.allclose(rep.matrix, 0.5 * np.eye(2), atol=1e-4)


# --- fits -------------------------------------------------------------------------


def test_subleading_fit_random_tensor_matches_gap():
    fit = subleading_correction_fit(random_tensor(5, 3, 2), 2, range(20, 62, 2))
    assert fit.extras["rate_matches_subleading"]
    sub = fit.extras["subleading_modulus"]
    assert abs(fit.params["rate"] - sub) <= 0.02 * sub


def test_subleading_fit_aklt_sees_squared_rate():
    # the AKLT two-boundary degeneracy cancels the linear correction term:
    # Tr(rho^2) approaches its plateau at |lambda_2|^2 = 1/9, not 1/3
    fit = subleading_correction_fit(aklt(), 2, range(1, 11))
    assert abs(fit.params["rate"] - 1.0 / 9.0) < 0.02 / 9.0
    assert not fit.extras["rate_matches_subleading"]


def test_subleading_fit_product_state_ill_conditioned():
    with pytest.raises(FitIllConditioned):
        subleading_correction_fit(tilted_product(0.4), 2, range(2, 20, 2))


def test_fit_log_slope_constant_data():
    fit = fit_log_slope([4, 8, 16, 32, 64, 128], [0.7] * 6)
    assert abs(fit.params["slope"]) < 1e-10


def test_fit_exponential_to_constant_ferromagnet_curve():
    ells = list(range(4, 42, 3))
    vals = [-np.log((1 + 2.0 * 2.0**-l) / 4) for l in ells]
    fit = fit_exponential_to_constant(ells, vals)
    assert abs(fit.params["constant"] - np.log(4)) < 1e-3
    assert abs(fit.params["rate"] - 0.5) < 0.02


def test_fit_exponential_rejects_constant_data():
    with pytest.raises(FitIllConditioned):
        fit_exponential_to_constant([1, 2, 3, 4, 5], [1.0] * 5)


# --- positivity monitoring --------------------------------------------------------


def test_renyi2_asymmetry_nonnegative_random_states(rng):
    g = y_rotation_z4_physical()
    for seed in (70, 71, 72, 73):
        t = random_tensor(seed, 2, 2)
        rep = asymmetry_finite_group(t, g, 2, [1, 3, 7])
        assert min(rep.delta_s) >= -1e-8


def test_symmetric_terms_equal_renyi_moment_with_phases():
    # charged moments of exactly symmetric tuples factor into Tr(rho^n)
    # times the accumulated fixed-point phase
    t = charge_structured_tensor(37)
    for n, ell in ((2, 4), (3, 3)):
        us = [charge_unitary(0.5 * j + 0.2, 0.1 * j) for j in range(n - 1)]
        closing = np.eye(2, dtype=complex)
        for u in us:
            closing = closing @ u
        us.append(np.linalg.inv(closing))
        res = charged_moment(t, us, ell)
        trn = np.exp((1 - n) * renyi_entropy(t, n, ell))
        assert res.phase_prediction is not None
        assert abs(res.value - trn * res.phase_prediction) < 1e-8
