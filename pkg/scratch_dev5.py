"""Dev scratch 5: SU(2) QMC path end-to-end, TEBD, A4-style ED loop timing."""
import time
import numpy as np

from asymmetry_kit import *
from asymmetry_kit.states import ferromagnet, random_tensor
from asymmetry_kit.groups import QuadratureSpec, su2_rep
from asymmetry_kit.oracle import dense_state, reduced_density_matrix, charged_moment_ed, renyi_moment_ed, site_action, xxz_ed_ground_energy
from asymmetry_kit.states import XxzSpec, xxz_ground_state

# --- SU(2) QMC end-to-end
t = ferromagnet()
gsu2 = su2_rep(quadrature=QuadratureSpec(scheme="montecarlo", samples=20000, seed=20240817))
ells = [4, 6, 8, 12, 16, 24, 32, 48, 64, 96, 128]
t0 = time.time()
rep = asymmetry_lie_group(t, gsu2, 2, ells)
print("su2 qmc time:", round(time.time() - t0, 1), "s")
for l, ds, er in zip(rep.ell_grid, rep.delta_s, rep.mc_std_err):
    print(f"  ell={l}: DS2={ds:.5g} (err {er:.4f}) exact={np.log(l+1):.5g} diff={ds-np.log(l+1):+.4f}")
fit = fit_log_slope(rep.ell_grid, rep.delta_s)
print("  slope:", fit.params["slope"])

# check a few more seeds quickly
for seed in (1, 2, 3):
    g2 = su2_rep(quadrature=QuadratureSpec(scheme="montecarlo", samples=20000, seed=seed))
    r2 = asymmetry_lie_group(t, g2, 2, ells)
    print("  seed", seed, "slope:", fit_log_slope(r2.ell_grid, r2.delta_s).params["slope"])

# --- A4-style ED loop timing (random tensors, L=20)
rng = np.random.default_rng(0)
def rand_unitary(d, rng):
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))

t0 = time.time()
worst_fin, worst_inf = 0.0, 0.0
count = 0
seed = 0
while count < 10:
    seed += 1
    tt = random_tensor(seed, int(rng.integers(2, 4)), 2)
    if clustering_check(tt).gap_ratio > 0.35:
        continue
    count += 1
    L = 20
    psi = dense_state(tt, L)
    for n in (2, 3):
        for ell in (2, 3):
            rho = reduced_density_matrix(psi, ell)
            us = [rand_unitary(2, rng) for _ in range(n - 1)]
            closing = np.eye(2, dtype=complex)
            for u in us:
                closing = closing @ u
            us.append(closing.conj().T)
            ed = charged_moment_ed(rho, [site_action(u, ell) for u in us])
            fin = charged_moment(tt, us, ell, mode="finite", chain_length=L).value
            inf = charged_moment(tt, us, ell, mode="infinite").value
            worst_fin = max(worst_fin, abs(ed - fin))
            worst_inf = max(worst_inf, abs(ed - inf))
print(f"A4 sample (10 tensors): worst finite diff {worst_fin:.2e}, worst infinite diff {worst_inf:.2e}, time {time.time()-t0:.1f}s")

# --- TEBD XXZ
for delta, hint in ((4.0, "antiferro"), (-2.0, "ferro")):
    t0 = time.time()
    spec = XxzSpec(delta=delta, bond_dim_cap=16, trotter_schedule=((0.1, 500), (0.01, 500), (0.001, 500)), energy_tol=1e-9)
    res = xxz_ground_state(spec, hint)
    print(f"TEBD Delta={delta}: e={res.energy_density:.8f}, D_used={res.tensor.bond_dim}, "
          f"trunc={res.truncation_weight:.2e}, time={time.time()-t0:.1f}s")
    if delta > 1:
        ed16 = xxz_ed_ground_energy(16, delta)
        ed14 = xxz_ed_ground_energy(14, delta)
        print(f"  ED L=14: {ed14:.8f}  L=16: {ed16:.8f}  diff(TEBD-ED16)={res.energy_density-ed16:.2e}")
    rep = clustering_check(res.tensor)
    print(f"  clustering: {rep.is_clustering}, gap_ratio={rep.gap_ratio:.4f}")
