"""Brute-force ground truth on finite chains.

Builds full state vectors from MPS tensors (periodic trace evaluation),
forms exact reduced density matrices, symmetrizes them by explicit group
averaging (four independent routes), and computes exact asymmetries.
Everything here is deliberately simple and dense; it exists to validate
the transfer-operator pipeline, not to scale.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from .errors import BadParam, CapExceeded, DecompositionFailed, StructureViolation
from .groups import FiniteGroupRep, LieGroupRep, haar_sample_su2
from .linalg import as_matrix
from .mps import MpsTensor

DENSE_CAP = 2**22          # max amplitudes of a dense chain state
SYMMETRIZE_CAP = 4096      # max dimension for symmetrization paths


@dataclass(frozen=True)
class DenseState:
    """Normalized amplitudes of a chain state; index is (s_1 ... s_L) row-major."""

    sites: int
    local_dim: int
    amplitudes: np.ndarray


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, positive semi-definite, unit-trace matrix."""

    matrix: np.ndarray

    def __post_init__(self):
        m = as_matrix(self.matrix)
        if np.max(np.abs(m - m.conj().T)) > 1e-12:
            raise ValueError("density matrix is not Hermitian within 1e-12")
        evals = np.linalg.eigvalsh(m)
        if evals.min() < -1e-10:
            raise ValueError(f"density matrix has negative eigenvalue {evals.min():.3g}")
        if abs(np.trace(m).real - 1.0) > 1e-10:
            raise ValueError("density matrix trace differs from 1 beyond 1e-10")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def dense_state(t: MpsTensor, sites: int) -> DenseState:
    """Amplitudes Tr(M[s1] ... M[sL]) on a ring of `sites` tensors, normalized."""
    d, dd = t.phys_dim, t.bond_dim
    if d**sites > DENSE_CAP:
        raise CapExceeded(f"{d}**{sites} exceeds the dense cap {DENSE_CAP}")
    # Iteratively contract the chain, keeping open bond indices.
    acc = t.data  # shape (d^k, D, D)
    for _ in range(sites - 2):
        acc = np.einsum("xab,sbc->xsac", acc, t.data).reshape(-1, dd, dd)
    if sites >= 2:
        amps = np.einsum("xab,sba->xs", acc, t.data).reshape(-1)
    else:
        amps = np.einsum("saa->s", acc)
    norm = np.linalg.norm(amps)
    if norm < 1e-300:
        raise BadParam("dense state has zero norm")
    return DenseState(sites, d, amps / norm)


def ghz_dense_state(p: float, sites: int, local_dim: int = 2) -> DenseState:
    """Two-branch cat state sqrt(p)|00..0> + sqrt(1-p)|11..1>.

    Unequal branch weights are a finite-size notion (a fixed uniform tensor
    cannot hold them in the infinite-volume limit), so the exact-weight cat
    is built directly here rather than through an MPS tensor."""
    if not 0.0 <= p <= 1.0:
        raise BadParam("p must be in [0, 1]")
    dim = local_dim**sites
    if dim > DENSE_CAP:
        raise CapExceeded(f"{local_dim}**{sites} exceeds the dense cap")
    amps = np.zeros(dim, dtype=np.complex128)
    amps[0] = np.sqrt(p)
    idx_down = sum((local_dim - 1) * local_dim**k for k in range(sites))
    amps[idx_down] = np.sqrt(1.0 - p)
    return DenseState(sites, local_dim, amps)


def reduced_density_matrix(psi: DenseState, ell: int) -> DensityMatrix:
    """Partial trace over all but the first `ell` sites."""
    if not 0 < ell <= psi.sites:
        raise BadParam(f"ell={ell} out of range for {psi.sites} sites")
    d = psi.local_dim
    x = psi.amplitudes.reshape(d**ell, d ** (psi.sites - ell))
    rho = x @ x.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(rho / np.trace(rho).real)


def site_action(u: np.ndarray, ell: int) -> np.ndarray:
    """u acting identically on each of `ell` sites (u x u x ... x u)."""
    out = np.eye(1, dtype=np.complex128)
    for _ in range(ell):
        out = np.kron(out, u)
    return out


def site_generator(x: np.ndarray, ell: int) -> np.ndarray:
    """Algebra generator of a site-wise action: sum over positions of x."""
    d = x.shape[0]
    total = np.zeros((d**ell, d**ell), dtype=np.complex128)
    for pos in range(ell):
        term = np.eye(1, dtype=np.complex128)
        for q in range(ell):
            term = np.kron(term, x if q == pos else np.eye(d))
        total += term
    return total


def charged_moment_ed(rho: DensityMatrix, unitaries) -> complex:
    """Tr(rho U_1 rho U_2 ... rho U_n) for explicit subsystem unitaries."""
    acc = np.eye(rho.dim, dtype=np.complex128)
    for u in unitaries:
        acc = acc @ rho.matrix @ as_matrix(u)
    return complex(np.trace(acc))


def renyi_moment_ed(rho: DensityMatrix, n: int) -> float:
    return float(np.trace(np.linalg.matrix_power(rho.matrix, n)).real)


def exact_asymmetry(rho: DensityMatrix, rho_tilde: DensityMatrix, n: int) -> float:
    """Renyi-n entropy difference between the symmetrized and bare states."""
    if n < 2:
        raise BadParam("n must be >= 2")
    num = renyi_moment_ed(rho_tilde, n)
    den = renyi_moment_ed(rho, n)
    return float(np.log(num / den) / (1.0 - n))


# --- symmetrization paths ----------------------------------------------------


def _check_cap(dim: int):
    if dim > SYMMETRIZE_CAP:
        raise CapExceeded(f"dimension {dim} exceeds symmetrization cap {SYMMETRIZE_CAP}")


def symmetrize_exact(rho: DensityMatrix, g: FiniteGroupRep, ell: int = 1) -> DensityMatrix:
    """Exact group average (1/|G|) sum_g U_g rho U_g^dagger with the group
    acting site-wise on `ell` sites."""
    _check_cap(rho.dim)
    if g.dim**ell != rho.dim:
        raise BadParam(f"group dim {g.dim}^{ell} does not match rho dim {rho.dim}")
    acc = np.zeros_like(rho.matrix)
    for u in g.elements:
        big = site_action(u, ell)
        acc += big @ rho.matrix @ big.conj().T
    acc /= g.order
    acc = 0.5 * (acc + acc.conj().T)
    return DensityMatrix(acc / np.trace(acc).real)


def symmetrize_haar_mc(
    rho: DensityMatrix, g: LieGroupRep, ell: int, n_samples: int, seed: int
) -> tuple[DensityMatrix, float]:
    """Monte Carlo Haar average of U rho U^dagger; returns (rho_tilde,
    commutant defect), the defect being the largest commutator norm with
    the site-wise algebra generators."""
    _check_cap(rho.dim)
    rng = np.random.default_rng(seed)
    acc = np.zeros_like(rho.matrix)
    if g.kind == "u1":
        angles = rng.uniform(0.0, 2.0 * np.pi, size=n_samples)
        for a in angles:
            big = site_action(g.element([a]), ell)
            acc += big @ rho.matrix @ big.conj().T
    else:
        for q in haar_sample_su2(n_samples, seed):
            big = site_action(g.element_from_quaternion(q), ell)
            acc += big @ rho.matrix @ big.conj().T
    acc /= n_samples
    acc = 0.5 * (acc + acc.conj().T)
    evals = np.linalg.eigvalsh(acc)
    if evals.min() < 0:  # MC noise can push eigenvalues slightly negative
        acc += (abs(evals.min()) + 1e-15) * np.eye(rho.dim)
    out = DensityMatrix(acc / np.trace(acc).real)
    defect = 0.0
    for x in g.generators:
        big = site_generator(x, ell)
        defect = max(defect, float(np.max(np.abs(big @ out.matrix - out.matrix @ big))))
    return out, defect


def symmetrize_abelian_blocks(rho: DensityMatrix, projectors) -> DensityMatrix:
    """Block-diagonal projection sum_sigma P_sigma rho P_sigma.

    For abelian groups this equals the exact group average (character
    orthogonality)."""
    _check_cap(rho.dim)
    acc = np.zeros_like(rho.matrix)
    for p in projectors:
        acc += p @ rho.matrix @ p
    acc = 0.5 * (acc + acc.conj().T)
    return DensityMatrix(acc / np.trace(acc).real)


def u1_charge_projectors(g: LieGroupRep, ell: int) -> list[np.ndarray]:
    """Projectors onto the total-charge sectors of a site-wise U(1) action
    (exact dephasing oracle)."""
    if g.kind != "u1":
        raise BadParam("charge projectors need a u1 group")
    total = site_generator(1j * g.generators[0], ell)  # Hermitian charge
    w, v = np.linalg.eigh(total)
    projs = []
    i = 0
    while i < len(w):
        j = i
        while j < len(w) and w[j] - w[i] < 1e-8:
            j += 1
        block = v[:, i:j]
        projs.append(block @ block.conj().T)
        i = j
    return projs


# --- isotypic decomposition and the invariant-basis path ---------------------


@dataclass
class IsotypicClass:
    irrep_dim: int
    copies: list[np.ndarray]  # orthonormal bases, aligned so the restricted
    #                           representation matrices agree across copies


@dataclass
class IsotypicDecomposition:
    dim: int
    classes: list[IsotypicClass]


def _commutant_sample(matrices, kind: str, dim: int, seed: int) -> np.ndarray:
    """A generic Hermitian element of the commutant of the action."""
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    x = 0.5 * (x + x.conj().T)
    if kind == "finite":
        acc = np.zeros_like(x)
        for u in matrices:
            acc += u @ x @ u.conj().T
        return acc / len(matrices)
    # Lie case: project onto the null space of all ad_{G_a} (row-major vec:
    # vec(AC - CA) = (A x I - I x A^T) vec(C)).
    eye = np.eye(dim)
    rows = [np.kron(a, eye) - np.kron(eye, a.T) for a in matrices]
    stack = np.vstack(rows)
    _, s, vh = np.linalg.svd(stack)
    tolrank = max(stack.shape) * np.finfo(float).eps * (s[0] if len(s) else 1.0)
    null = vh[np.sum(s > max(tolrank, 1e-10)):].conj().T  # (dim^2, r)
    if null.shape[1] == 0:
        raise DecompositionFailed("action has trivial commutant basis")
    coeff = null.conj().T @ x.reshape(-1)
    c = (null @ coeff).reshape(dim, dim)
    return 0.5 * (c + c.conj().T)


def _intertwiner(b_list_i, b_list_j) -> np.ndarray | None:
    """Unitary S with B_i S = S B_j for all paired restricted matrices, or
    None when the copies carry inequivalent irreps."""
    k = b_list_i[0].shape[0]
    eye = np.eye(k)
    rows = [np.kron(bi, eye) - np.kron(eye, bj.T) for bi, bj in zip(b_list_i, b_list_j)]
    stack = np.vstack(rows)
    _, s, vh = np.linalg.svd(stack)
    null_mask = s < 1e-8 * max(1.0, s[0] if len(s) else 1.0)
    n_null = int(np.sum(null_mask))
    if n_null == 0:
        return None
    svec = vh[-1].conj()
    smat = svec.reshape(k, k)
    smat *= np.sqrt(k) / np.linalg.norm(smat)
    if np.max(np.abs(smat @ smat.conj().T - eye)) > 1e-6:
        raise DecompositionFailed("intertwiner is not proportional to a unitary")
    return smat


def isotypic_decomposition(matrices, kind: str = "finite", seed: int = 11) -> IsotypicDecomposition:
    """Split the action space into aligned irreducible copies.

    `matrices` is the full element list (kind="finite") or the generator
    list (kind="lie") of the action on the target space.  Eigenspaces of a
    generic commutant element are single irrep copies; copies are grouped
    into isotypic classes by searching for intertwiners and their bases are
    aligned so every copy carries identical representation matrices."""
    mats = [as_matrix(m) for m in matrices]
    dim = mats[0].shape[0]
    _check_cap(dim)
    for attempt in range(6):
        c = _commutant_sample(mats, kind, dim, seed + attempt)
        w, v = np.linalg.eigh(c)
        copies = []
        i = 0
        scale = max(1.0, np.abs(w).max())
        while i < dim:
            j = i
            while j < dim and w[j] - w[i] < 1e-7 * scale:
                j += 1
            copies.append(v[:, i:j].copy())
            i = j
        # each copy must be invariant under the action
        invariant = all(
            np.max(np.abs((np.eye(dim) - q @ q.conj().T) @ (m @ q))) < 1e-8
            for q in copies
            for m in mats
        )
        if not invariant:
            continue
        restricted = [[q.conj().T @ m @ q for m in mats] for q in copies]
        classes: list[IsotypicClass] = []
        class_restricted: list[list[np.ndarray]] = []
        failed = False
        for q, b in zip(copies, restricted):
            placed = False
            for cls, bref in zip(classes, class_restricted):
                if cls.irrep_dim != q.shape[1]:
                    continue
                s = _intertwiner(bref, b)
                if s is not None:
                    cls.copies.append(q @ s.conj().T)
                    placed = True
                    break
            if not placed:
                classes.append(IsotypicClass(q.shape[1], [q]))
                class_restricted.append(b)
        if failed:
            continue
        return IsotypicDecomposition(dim, classes)
    raise DecompositionFailed("could not build an isotypic decomposition")


def symmetrize_nonabelian_basis(
    rho: DensityMatrix, decomposition: IsotypicDecomposition
) -> DensityMatrix:
    """Project rho onto the orthonormal invariant-operator basis
    I_{sigma,jj'} = (dim sigma)^{-1/2} sum_a |sigma,j,a><sigma,j',a|."""
    if decomposition.dim != rho.dim:
        raise BadParam("decomposition dimension does not match rho")
    acc = np.zeros_like(rho.matrix)
    for cls in decomposition.classes:
        scale = 1.0 / np.sqrt(cls.irrep_dim)
        for qj in cls.copies:
            for qk in cls.copies:
                basis_op = scale * (qj @ qk.conj().T)
                acc += np.trace(basis_op.conj().T @ rho.matrix) * basis_op
    acc = 0.5 * (acc + acc.conj().T)
    return DensityMatrix(acc / np.trace(acc).real)


@dataclass(frozen=True)
class BlockStructureReport:
    max_cross_block: float
    max_identity_deviation: float
    max_trace_mismatch: float


def block_structure_check(
    rho_tilde: DensityMatrix,
    decomposition: IsotypicDecomposition,
    rho: DensityMatrix | None = None,
    tol: float = 1e-10,
) -> BlockStructureReport:
    """Verify the block structure of a symmetrized state.

    Blocks connecting distinct irreps must vanish; blocks connecting two
    copies of one irrep must be proportional to the identity; each block's
    trace must match the corresponding block of the pre-symmetrization
    state (when provided).  Raises StructureViolation on failure."""
    max_cross = 0.0
    max_dev = 0.0
    max_trace = 0.0
    classes = decomposition.classes
    for a, cls_a in enumerate(classes):
        for b, cls_b in enumerate(classes):
            for i, qi in enumerate(cls_a.copies):
                for j, qj in enumerate(cls_b.copies):
                    block = qi.conj().T @ rho_tilde.matrix @ qj
                    if a != b:
                        val = float(np.max(np.abs(block)))
                        max_cross = max(max_cross, val)
                        if val > tol:
                            raise StructureViolation(
                                f"cross-irrep block ({a},{i})x({b},{j}) has weight {val:.3g}"
                            )
                    else:
                        k = cls_a.irrep_dim
                        coef = np.trace(block) / k
                        dev = float(np.max(np.abs(block - coef * np.eye(k))))
                        max_dev = max(max_dev, dev)
                        if dev > tol:
                            raise StructureViolation(
                                f"block ({a},{i})x({a},{j}) deviates from identity by {dev:.3g}"
                            )
                        if rho is not None:
                            ref = np.trace(qi.conj().T @ rho.matrix @ qj)
                            miss = abs(np.trace(block) - ref)
                            max_trace = max(max_trace, float(miss))
                            if miss > tol:
                                raise StructureViolation(
                                    f"block trace mismatch {miss:.3g} at ({a},{i})x({a},{j})"
                                )
    return BlockStructureReport(max_cross, max_dev, max_trace)


# --- XXZ exact diagonalization ------------------------------------------------


def xxz_ed_ground_energy(sites: int, delta: float) -> float:
    """Ground energy density of the periodic XXZ ring
    H = sum_j (sx sx + sy sy) + Delta sz sz (Pauli convention), via sparse
    Lanczos; used to cross-check the imaginary-time ground-state finder."""
    dim = 1 << sites
    states = np.arange(dim, dtype=np.int64)
    bits = ((states[:, None] >> np.arange(sites)) & 1).astype(np.int8)
    z = 1 - 2 * bits  # bit 0 -> +1
    rows, cols, vals = [states], [states], []
    diag = np.zeros(dim)
    for i in range(sites):
        j = (i + 1) % sites
        diag += delta * z[:, i] * z[:, j]
        anti = bits[:, i] != bits[:, j]
        src = states[anti]
        dst = src ^ ((1 << i) | (1 << j))
        rows.append(dst)
        cols.append(src)
        vals.append(np.full(len(src), 2.0))
    vals.insert(0, diag)
    h = scipy.sparse.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(dim, dim),
    ).tocsr()
    e0 = scipy.sparse.linalg.eigsh(h, k=1, which="SA", return_eigenvectors=False)[0]
    return float(e0) / sites
