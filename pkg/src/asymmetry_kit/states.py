"""Catalog of analytically known uniform MPS and a desk-scale XXZ
ground-state finder.

The ground-state finder runs two-site imaginary-time evolution (second
order Trotter) in the Vidal canonical form, seeded from a symmetry-broken
product state; for the gapped XXZ phases this lands on the clustering,
finite-correlation-length branch rather than the finite-size hybrid.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import BadParam, CriticalRegime, NoConvergence, NonClustering
from .mps import (
    MpsTensor,
    block_sites,
    build_operator_transfer,
    build_transfer_operator,
    clustering_check,
    fixed_point_projector,
    normalize,
)

log = logging.getLogger("asymmetry_kit")


# --- catalog -------------------------------------------------------------------


def ferromagnet() -> MpsTensor:
    """Product state with every spin up along z (D = 1)."""
    return MpsTensor(np.array([[[1.0]], [[0.0]]], dtype=np.complex128))


def tilted_product(theta: float) -> MpsTensor:
    """Product state cos(theta/2)|up> + sin(theta/2)|down> per site."""
    data = np.array(
        [[[np.cos(theta / 2.0)]], [[np.sin(theta / 2.0)]]], dtype=np.complex128
    )
    return normalize(MpsTensor(data))


def neel() -> MpsTensor:
    """Neel state as a two-site-blocked product tensor (d = 4, D = 1)."""
    data = np.zeros((4, 1, 1), dtype=np.complex128)
    data[1, 0, 0] = 1.0  # (up, down) component of the block
    return MpsTensor(data, block_size=2)


def ghz(p: float) -> MpsTensor:
    """Two-branch cat tensor (D = 2).

    For p in {0, 1} this degenerates to a single polarized branch and the
    state is clustering.  For 0 < p < 1 both branches must survive the
    infinite-volume limit, which forces equal transfer weights: the leading
    transfer eigenvalue is then doubly degenerate and the asymmetry
    pipeline refuses the tensor.  Unequal cat weights are a finite-chain
    notion; use the brute-force oracle (ghz_dense_state) for those."""
    if not 0.0 <= p <= 1.0:
        raise BadParam("p must lie in [0, 1]")
    data = np.zeros((2, 2, 2), dtype=np.complex128)
    if p == 1.0:
        data[0, 0, 0] = 1.0
    elif p == 0.0:
        data[1, 1, 1] = 1.0
    else:
        data[0, 0, 0] = 1.0
        data[1, 1, 1] = 1.0
    return normalize(MpsTensor(data))


def aklt() -> MpsTensor:
    """Spin-1 valence-bond tensor (d = 3, D = 2); transfer eigenvalues
    after normalization are {1, -1/3, -1/3, -1/3}."""
    sp = np.array([[0, 1], [0, 0]], dtype=np.complex128)
    sm = np.array([[0, 0], [1, 0]], dtype=np.complex128)
    sz = np.array([[1, 0], [0, -1]], dtype=np.complex128)
    data = np.stack(
        [np.sqrt(2.0 / 3.0) * sp, -np.sqrt(1.0 / 3.0) * sz, -np.sqrt(2.0 / 3.0) * sm]
    )
    return normalize(MpsTensor(data))


def random_tensor(seed: int, bond_dim: int = 2, phys_dim: int = 2) -> MpsTensor:
    """Seeded i.i.d. complex Gaussian tensor, normalized."""
    rng = np.random.default_rng(seed)
    data = rng.standard_normal((phys_dim, bond_dim, bond_dim)) + 1j * rng.standard_normal(
        (phys_dim, bond_dim, bond_dim)
    )
    return normalize(MpsTensor(data))


def catalog(name: str, **params) -> MpsTensor:
    """State factory driven by CLI descriptors, e.g. {"state": "ghz", "p": 0.5}."""
    try:
        if name == "ferromagnet":
            return ferromagnet()
        if name == "tilted":
            return tilted_product(float(params["theta"]))
        if name == "neel":
            return neel()
        if name == "ghz":
            return ghz(float(params["p"]))
        if name == "aklt":
            return aklt()
        if name == "random":
            return random_tensor(
                int(params["seed"]),
                int(params.get("D", 2)),
                int(params.get("d", 2)),
            )
    except KeyError as exc:
        raise BadParam(f"state {name!r} is missing parameter {exc}") from exc
    raise BadParam(f"unknown catalog state {name!r}")


# --- XXZ ground state via imaginary-time evolution ------------------------------


@dataclass(frozen=True)
class XxzSpec:
    """H = sum_j (sx sx + sy sy) + Delta sz sz in Pauli convention."""

    delta: float
    bond_dim_cap: int = 32
    # the final stage needs room: near the critical point the per-sweep
    # energy drift decays slowly at small imaginary-time steps
    trotter_schedule: tuple = ((0.1, 2000), (0.01, 2000), (0.001, 20000))
    energy_tol: float = 1e-10
    unit_cell: int = 2

    def __post_init__(self):
        if self.bond_dim_cap < 2:
            raise BadParam("bond dimension cap must be >= 2")
        taus = [dt for dt, _ in self.trotter_schedule]
        if any(b >= a for a, b in zip(taus, taus[1:])):
            raise BadParam("trotter step sizes must be strictly decreasing")


@dataclass
class GroundStateResult:
    tensor: MpsTensor            # blocked two-site tensor, normalized
    energy_density: float        # per site
    truncation_weight: float     # largest discarded weight of the final stage
    convergence_log: list = field(default_factory=list)  # (sweep, dtau, e, trunc)


def _xxz_bond_hamiltonian(delta: float) -> np.ndarray:
    sx = np.array([[0, 1], [1, 0]], dtype=np.complex128)
    sy = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
    sz = np.array([[1, 0], [0, -1]], dtype=np.complex128)
    return np.kron(sx, sx) + np.kron(sy, sy) + delta * np.kron(sz, sz)


def _theta(gam_a, lam_left, lam_mid, gam_b, lam_right):
    """Two-site wavefunction tensor (a, s0, s1, b) in canonical form."""
    th = np.einsum("a,sab->sab", lam_left, gam_a)
    th = np.einsum("sab,b->sab", th, lam_mid)
    th = np.einsum("sab,tbc->satc", th, gam_b)
    th = np.einsum("satc,c->satc", th, lam_right)
    return th.transpose(1, 0, 2, 3)  # (a, s0, s1, c)


def _bond_energy(theta, h_bond) -> float:
    th = theta.transpose(1, 2, 0, 3).reshape(4, -1)  # (s0 s1, a c)
    norm = np.vdot(th, th).real
    return float(np.vdot(th, h_bond @ th).real / norm)


def uniform_energy_per_site(block: MpsTensor, h_bond: np.ndarray) -> float:
    """Exact nearest-neighbour energy density of a normalized two-site
    blocked uniform MPS via the transfer fixed points (unbiased, unlike the
    in-sweep canonical-form monitor)."""
    pair = fixed_point_projector(build_transfer_operator(block))
    lvec, rvec = pair.left, pair.right
    e_inner = np.einsum(
        "i,ij,j", lvec, build_operator_transfer(block, np.kron(np.eye(1), h_bond)).matrix, rvec
    )
    two = block_sites(block, 2)
    cross = np.kron(np.kron(np.eye(2), h_bond), np.eye(2))
    e_cross = np.einsum("i,ij,j", lvec, build_operator_transfer(two, cross).matrix, rvec)
    return float(0.5 * (e_inner.real + e_cross.real))


def xxz_ground_state(spec: XxzSpec, phase_hint: str = "antiferro") -> GroundStateResult:
    """Imaginary-time TEBD ground state in the gapped regime |Delta| > 1.

    Returns the uniform two-site blocked tensor.  The initial product state
    (Neel for the antiferromagnet, polarized for the ferromagnet) seeds the
    symmetry-broken clustering branch; a NonClustering result signals a
    hybridized state, in which case re-seed from the other product state."""
    if abs(spec.delta) <= 1.0:
        raise CriticalRegime(
            f"|Delta| = {abs(spec.delta)} <= 1 is outside the gapped phases"
        )
    if phase_hint not in ("antiferro", "ferro"):
        raise BadParam("phase_hint must be 'antiferro' or 'ferro'")
    chi = spec.bond_dim_cap
    d = 2
    h_bond = _xxz_bond_hamiltonian(spec.delta)
    w, v = np.linalg.eigh(h_bond)

    gammas = [np.zeros((d, chi, chi), dtype=np.complex128) for _ in range(2)]
    lams = [np.zeros(chi) for _ in range(2)]
    up, down = 0, 1
    first = up
    second = down if phase_hint == "antiferro" else up
    gammas[0][first, 0, 0] = 1.0
    gammas[1][second, 0, 0] = 1.0
    lams[0][0] = 1.0
    lams[1][0] = 1.0

    conv_log = []
    sweep_count = 0
    trunc_last = 0.0
    converged_final = False
    energy = np.inf
    for stage, (dtau, max_steps) in enumerate(spec.trotter_schedule):
        gate = (v @ np.diag(np.exp(-dtau * w)) @ v.conj().T).reshape(2, 2, 2, 2)
        half = (v @ np.diag(np.exp(-0.5 * dtau * w)) @ v.conj().T).reshape(2, 2, 2, 2)
        is_final = stage == len(spec.trotter_schedule) - 1
        stage_tol = spec.energy_tol if is_final else max(spec.energy_tol, 1e-3 * dtau**2)
        energy_prev = np.inf  # each stage must earn its own convergence
        for step in range(max_steps):
            # second-order sweep: half step on even bonds, full on odd, half on even
            for bond, g in ((0, half), (1, gate), (0, half)):
                a, b = bond, 1 - bond
                th = _theta(gammas[a], lams[b], lams[a], gammas[b], lams[b])
                th = np.einsum("astb,uvst->auvb", th, g.reshape(2, 2, 2, 2))
                mat = th.transpose(1, 0, 2, 3).reshape(d * chi, d * chi)
                u, s, vh = np.linalg.svd(mat, full_matrices=False)
                keep = min(chi, int(np.sum(s > 1e-14)))
                keep = max(keep, 1)
                total = float(np.sum(s**2))
                trunc_last = float(np.sum(s[keep:] ** 2) / total)
                s_keep = s[:keep] / np.linalg.norm(s[:keep])
                lam_new = np.zeros(chi)
                lam_new[:keep] = s_keep
                inv_edge = np.where(lams[b] > 1e-12, 1.0 / np.where(lams[b] > 1e-12, lams[b], 1.0), 0.0)
                ga = u[:, :keep].reshape(d, chi, keep)
                ga = np.einsum("sak,a->sak", ga, inv_edge)
                gb = vh[:keep].reshape(keep, d, chi).transpose(1, 0, 2)
                gb = np.einsum("skb,b->skb", gb, inv_edge)
                gam_a_new = np.zeros((d, chi, chi), dtype=np.complex128)
                gam_b_new = np.zeros((d, chi, chi), dtype=np.complex128)
                gam_a_new[:, :, :keep] = ga
                gam_b_new[:, :keep, :] = gb
                gammas[a], gammas[b] = gam_a_new, gam_b_new
                lams[a] = lam_new
            sweep_count += 1
            e0 = _bond_energy(_theta(gammas[0], lams[1], lams[0], gammas[1], lams[1]), h_bond)
            e1 = _bond_energy(_theta(gammas[1], lams[0], lams[1], gammas[0], lams[0]), h_bond)
            energy = 0.5 * (e0 + e1)
            conv_log.append((sweep_count, dtau, energy, trunc_last))
            if step >= 2 and abs(energy - energy_prev) < stage_tol:
                if is_final:
                    converged_final = True
                break
            energy_prev = energy
    if not converged_final:
        raise NoConvergence(
            f"imaginary-time evolution did not reach energy tolerance {spec.energy_tol}"
        )

    block = np.einsum(
        "a,sab,b,tbc->stac", lams[1], gammas[0], lams[0], gammas[1]
    ).reshape(4, chi, chi)
    # drop unused bond directions so dead zero rows do not inflate D
    used = max(int(np.sum(lams[1] > 1e-12)), 1)
    block = block[:, :used, :used]
    tensor = normalize(MpsTensor(block, block_size=2))
    report = clustering_check(tensor)
    if not report.is_clustering:
        raise NonClustering(
            "ground-state search produced a non-clustering tensor (hybridized "
            "branches); re-seed from a polarized product state"
        )
    return GroundStateResult(
        tensor=tensor,
        energy_density=uniform_energy_per_site(tensor, h_bond),
        truncation_weight=trunc_last,
        convergence_log=conv_log,
    )
