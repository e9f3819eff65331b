"""Dev scratch 7: Delta=4 energy error source."""
import time
import numpy as np
from asymmetry_kit.states import XxzSpec, xxz_ground_state
from asymmetry_kit.oracle import xxz_ed_ground_energy

for L in (12, 14, 16):
    print(f"ED L={L}: {xxz_ed_ground_energy(L, 4.0):.10f}")

for schedule in (
    ((0.1, 2000), (0.01, 2000), (0.001, 20000)),
    ((0.1, 2000), (0.01, 2000), (0.001, 20000), (0.0002, 60000)),
):
    t0 = time.time()
    spec = XxzSpec(delta=4.0, bond_dim_cap=32, trotter_schedule=schedule, energy_tol=1e-11)
    res = xxz_ground_state(spec, "antiferro")
    print(f"schedule last dtau={schedule[-1][0]}: e={res.energy_density:.10f} "
          f"sweeps={len(res.convergence_log)} t={time.time()-t0:.1f}s")
