"""Dev scratch 4: pick the SU(2) grid + sampler; subleading window check."""
import numpy as np
from scipy.stats import qmc
from scipy.special import ndtri
import warnings
warnings.filterwarnings("ignore")


def slope_last_half(ells, vals):
    k = len(ells) // 2
    x = np.log(np.asarray(ells, float)[k:]); y = np.asarray(vals)[k:]
    a = np.vstack([x, np.ones_like(x)]).T
    return np.linalg.lstsq(a, y, rcond=None)[0][0]


def sobol_quaternions(n_batches, batch, seed):
    out = []
    for b in range(n_batches):
        eng = qmc.Sobol(d=4, scramble=True, seed=seed + b)
        u = eng.random(batch)
        g = ndtri(np.clip(u, 1e-12, 1 - 1e-12))
        out.append(g / np.linalg.norm(g, axis=1, keepdims=True))
    return np.concatenate(out)


def mc_quaternions(n, seed):
    rng = np.random.default_rng(seed)
    q = rng.standard_normal((n, 4))
    return q / np.linalg.norm(q, axis=1, keepdims=True)


grids = {
    "A [6..192]": [6, 8, 12, 16, 24, 32, 48, 64, 96, 128, 192],
    "B [4..128]": [4, 6, 8, 12, 16, 24, 32, 48, 64, 96, 128],
    "C [4..96]":  [4, 6, 8, 12, 16, 24, 32, 48, 64, 80, 96],
    "D [8..128]": [8, 12, 16, 24, 32, 48, 64, 96, 128],
    "E [8..96]":  [8, 12, 16, 24, 32, 48, 64, 80, 96],
}
for name, grid in grids.items():
    grid = np.array(grid)
    exact = np.array([np.log(l + 1.0) for l in grid])
    s_exact = slope_last_half(grid, exact)
    for sampler, lab in ((sobol_quaternions, "qmc"), (None, "mc")):
        slopes = []
        for seed in range(40):
            if lab == "qmc":
                qs = sobol_quaternions(20, 1000, seed * 991 + 3)
            else:
                qs = mc_quaternions(20000, seed * 991 + 3)
            x = qs[:, 0] ** 2 + qs[:, 3] ** 2
            ds = np.array([-np.log(np.mean(x ** l)) for l in grid])
            slopes.append(slope_last_half(grid, ds))
        slopes = np.array(slopes)
        fails = np.sum((slopes < 0.95) | (slopes > 1.05))
        print(f"{name} {lab}: exact={s_exact:.4f} mean={slopes.mean():.4f} "
              f"std={slopes.std():.4f} range=[{slopes.min():.3f},{slopes.max():.3f}] fails={fails}/40")

# subleading window checks
from asymmetry_kit.states import random_tensor, aklt
from asymmetry_kit import subleading_correction_fit
fit = subleading_correction_fit(random_tensor(5, 3, 2), 2, list(range(20, 62, 2)))
print("seed5 window[20..60]: rate", fit.params["rate"], "match", fit.extras)
fit = subleading_correction_fit(random_tensor(2, 3, 2), 2, list(range(24, 72, 2)))
print("seed2 window[24..70]: rate", fit.params["rate"], "match", fit.extras)
fit = subleading_correction_fit(aklt(), 2, list(range(1, 11)))
print("aklt window[1..10]: rate", fit.params["rate"], "= 1/9?", fit.params["rate"]*9)
