"""Dev scratch 2: asymmetry pipelines, groups, TEBD."""
import time
import numpy as np
from scipy.special import comb

from asymmetry_kit import *
from asymmetry_kit.states import ferromagnet, neel, tilted_product, random_tensor, aklt
from asymmetry_kit.groups import QuadratureSpec

# --- groups
g8 = y_rotation_group()
print("order-8 group:", g8.order)
g4 = y_rotation_z4_physical()
print("physical Z4:", g4.order, "projective:", g4.projective)
g4b = y_rotation_z4_blocked()
print("blocked Z4:", g4b.order, "projective:", g4b.projective)

t = ferromagnet()
sub = detect_invariant_subgroup(t, g8)
print("ferro H in order-8 group:", sub.indices, "phases:", {k: round(v,4) for k,v in sub.phases.items()})

# --- finite-group asymmetry: ferromagnet
for grp, name in ((g4, "Z4 physical"), (g8, "order-8")):
    rep = asymmetry_finite_group(t, grp, 2, [1, 5, 20, 40])
    print(f"ferro {name}: DS2 =", [round(x, 8) for x in rep.delta_s],
          "expect", [round(-np.log((1+2*2.0**-l)/4), 8) for l in [1,5,20,40]])

rep3 = asymmetry_finite_group(t, g4, 3, [1, 10, 40])
print("ferro Z4 n=3:", [round(x, 8) for x in rep3.delta_s], "log4 =", round(np.log(4),8))

# --- Neel blocked
tn = neel()
rep = asymmetry_finite_group(tn, blocked_representation(g4), 2, [2, 10, 40])
print("neel blocked Z4:", [round(x, 8) for x in rep.delta_s])
subn = detect_invariant_subgroup(tn, blocked_representation(g4))
print("neel H:", subn.indices)

# neel charged moment example: theta=pi/2 blocked, ell blocks -> 2^{-2*ell_blocks}
u = rotation_about_y(np.pi/2)
ub = np.kron(u, u)
for ellb in (1, 3):
    res = charged_moment(tn, [ub, ub.conj().T], ellb)
    print(f"neel moment ell_blocks={ellb}: {res.value:.8g} expect {2.0**(-2*ellb):.8g}")

# --- U(1) tilted
tt = tilted_product(np.pi/2)
gu1 = u1_z_rep()
ells = [4, 16, 64, 256, 1024, 4096]
t0 = time.time()
rep = asymmetry_lie_group(tt, gu1, 2, ells)
print("tilted U(1) time:", round(time.time()-t0, 2), "s; nodes:", rep.meta["nodes_used"])
from scipy.special import gammaln
for l, ds in zip(rep.ell_grid, rep.delta_s):
    exact = -(gammaln(2*l+1) - 2*gammaln(l+1) - l*np.log(4.0))
    print(f"  ell={l}: DS2={ds:.8g} exact={float(exact):.8g} diff={abs(ds-float(exact)):.2e}")
fit = fit_log_slope(rep.ell_grid, rep.delta_s, window="all")
print("  slope (all):", fit.params["slope"])

# z-ferromagnet with U(1): symmetric
rep0 = asymmetry_lie_group(t, gu1, 2, [8, 64])
print("z-ferro U(1) DS2:", rep0.delta_s)

# --- SU(2) z-ferromagnet MC
gsu2 = su2_rep(quadrature=QuadratureSpec(scheme="montecarlo", samples=20000, seed=77))
ells = [6, 8, 12, 16, 24, 32, 48, 64, 96, 128, 192]
t0 = time.time()
rep = asymmetry_lie_group(t, gsu2, 2, ells)
print("su2 time:", round(time.time()-t0, 1), "s")
for l, ds, er in zip(rep.ell_grid, rep.delta_s, rep.mc_std_err):
    print(f"  ell={l}: DS2={ds:.5g} (err {er:.4f}) exact={np.log(l+1):.5g}")
fit = fit_log_slope(rep.ell_grid, rep.delta_s)
print("  fitted slope (last half):", fit.params["slope"])

# --- subalgebra detection
subL = detect_invariant_subalgebra(t, gsu2)
print("z-ferro su2 dim_h:", subL.dim_h, "quad eigs:", np.round(subL.quad_eigenvalues, 6))
subT = detect_invariant_subalgebra(tt, gu1)
print("tilted u1 dim_h:", subT.dim_h)

# --- hessian
hr = hessian_at_subgroup(tt, gu1, n=2)
print("tilted U(1) hessian:", hr.matrix, "grad:", hr.gradient_norm, "PD:", hr.positive_definite)
hr2 = hessian_at_subgroup(t, gsu2, n=2)
print("z-ferro SU(2) hessian:\n", np.round(hr2.matrix, 6), "grad:", hr2.gradient_norm, "PD:", hr2.positive_definite)
hr0 = hessian_at_subgroup(t, gu1, n=2)
print("z-ferro U(1) hessian dim:", hr0.matrix.shape, "PD:", hr0.positive_definite)

# --- free energy
u = rotation_about_y(np.pi/2)
F = free_energy_density(t, [u, u.conj().T])
print("ferro F(theta=pi/2 pair):", F, "expect", np.log(2))

# --- subleading fits
tr = random_tensor(5, 3, 2)
fit = subleading_correction_fit(tr, 2, list(range(4, 40, 2)))
print("random D=3 subleading:", fit.params["rate"], "lambda2:", fit.extras["subleading_modulus"],
      "match:", fit.extras["rate_matches_subleading"])
fa = subleading_correction_fit(aklt(), 2, list(range(2, 16)))
print("AKLT subleading rate:", fa.params["rate"], "vs |l2|=1/3; vs |l2|^2=1/9:", fa.extras)

# --- numerical radius
from asymmetry_kit.mps import TransferOperator
print("nr identity:", numerical_radius(TransferOperator(np.eye(4, dtype=complex))))
print("nr diag(.5,-.5):", numerical_radius(TransferOperator(np.diag([0.5, -0.5]).astype(complex))))
print("nr nilpotent:", numerical_radius(TransferOperator(np.array([[0, 1], [0, 0]], dtype=complex))))
