"""Dev scratch 3: SU(2) sampling strategy, subleading spectra, runtimes."""
import time
import numpy as np
from scipy.stats import qmc
from scipy.special import ndtri

ells = np.array([6, 8, 12, 16, 24, 32, 48, 64, 96, 128, 192])


def slope_last_half(ells, vals):
    k = len(ells) // 2
    x = np.log(ells[k:]); y = vals[k:]
    a = np.vstack([x, np.ones_like(x)]).T
    return np.linalg.lstsq(a, y, rcond=None)[0][0]


def mc_quaternions(n, seed):
    rng = np.random.default_rng(seed)
    q = rng.standard_normal((n, 4))
    return q / np.linalg.norm(q, axis=1, keepdims=True)


def sobol_quaternions(n_batches, batch, seed):
    out = []
    for b in range(n_batches):
        eng = qmc.Sobol(d=4, scramble=True, seed=seed + b)
        u = eng.random(batch)
        g = ndtri(np.clip(u, 1e-12, 1 - 1e-12))
        out.append(g / np.linalg.norm(g, axis=1, keepdims=True))
    return np.concatenate(out)


def run(qs, label):
    x = qs[:, 0] ** 2 + qs[:, 3] ** 2  # |u00|^2 for the fundamental rep
    ds = np.array([-np.log(np.mean(x ** l)) for l in ells])
    return slope_last_half(ells, ds)

slopes_mc, slopes_qmc = [], []
for seed in range(40):
    slopes_mc.append(run(mc_quaternions(20000, seed * 1000 + 1), "mc"))
    slopes_qmc.append(run(sobol_quaternions(20, 1000, seed * 1000 + 1), "qmc"))
slopes_mc = np.array(slopes_mc); slopes_qmc = np.array(slopes_qmc)
print("plain MC slope: mean %.4f std %.4f min %.4f max %.4f  |fail 0.95..1.05|: %d/40"
      % (slopes_mc.mean(), slopes_mc.std(), slopes_mc.min(), slopes_mc.max(),
         np.sum((slopes_mc < 0.95) | (slopes_mc > 1.05))))
print("sobol QMC slope: mean %.4f std %.4f min %.4f max %.4f  |fail|: %d/40"
      % (slopes_qmc.mean(), slopes_qmc.std(), slopes_qmc.min(), slopes_qmc.max(),
         np.sum((slopes_qmc < 0.95) | (slopes_qmc > 1.05))))

# exact reference slope of log(l+1)
exact = np.array([np.log(l + 1.0) for l in ells])
print("exact-curve slope:", slope_last_half(ells, exact))

# --- subleading spectrum of random D=3 tensors
from asymmetry_kit.states import random_tensor
from asymmetry_kit.mps import build_transfer_operator
for seed in range(12):
    t = random_tensor(seed, 3, 2)
    ev = np.linalg.eigvals(build_transfer_operator(t).matrix)
    ev = ev[np.argsort(-np.abs(ev))]
    print(f"seed {seed}: l2 = {ev[1]:.4f} |l2|={abs(ev[1]):.4f} |l3|/|l2| = {abs(ev[2])/abs(ev[1]):.3f}")
