"""Dev scratch 6: TEBD with default schedule + fast SU(2) + A3b pipeline."""
import time
import numpy as np

from asymmetry_kit import *
from asymmetry_kit.states import ferromagnet, XxzSpec, xxz_ground_state
from asymmetry_kit.groups import QuadratureSpec, su2_rep, y_rotation_z4_blocked
from asymmetry_kit.oracle import xxz_ed_ground_energy

# --- fast SU(2) with D=1 fast path
t = ferromagnet()
gsu2 = su2_rep(quadrature=QuadratureSpec(scheme="montecarlo", samples=20000, seed=1))
ells = [4, 6, 8, 12, 16, 24, 32, 48, 64, 96, 128]
t0 = time.time()
rep = asymmetry_lie_group(t, gsu2, 2, ells)
print("su2 qmc time (fast path):", round(time.time() - t0, 1), "s; slope:",
      fit_log_slope(rep.ell_grid, rep.delta_s).params["slope"])

# --- TEBD with default-ish schedule
for delta, hint in ((4.0, "antiferro"), (1.5, "antiferro"), (-2.0, "ferro")):
    t0 = time.time()
    spec = XxzSpec(delta=delta, bond_dim_cap=32)
    res = xxz_ground_state(spec, hint)
    dt = time.time() - t0
    line = f"TEBD Delta={delta}: e={res.energy_density:.8f} D={res.tensor.bond_dim} " \
           f"trunc={res.truncation_weight:.1e} t={dt:.1f}s sweeps={len(res.convergence_log)}"
    rep_c = clustering_check(res.tensor)
    line += f" clustering={rep_c.is_clustering} gap={rep_c.gap_ratio:.3f}"
    print(line)
    if delta == 4.0:
        ed16 = xxz_ed_ground_energy(16, delta)
        print(f"   ED L=16 e={ed16:.8f} diff={abs(res.energy_density-ed16):.2e}")
    # asymmetry at ell=200 sites (100 blocks)
    t0 = time.time()
    repA = asymmetry_finite_group(res.tensor, y_rotation_z4_blocked(), 2, [50, 100, 200])
    print("   DS2(ell=50,100,200 sites):", [round(x, 5) for x in repA.delta_s],
          "log4=", round(np.log(4), 5), f"t={time.time()-t0:.1f}s")
