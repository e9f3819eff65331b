"""Symmetry groups represented on the physical leg.

Finite groups are stored as explicit lists of d x d unitaries with a Cayley
table; compact Lie groups (U(1), SU(2)) as anti-Hermitian generator lists
plus a quadrature/sampling specification for the Haar measure.

Group elements are identified during closure by exact matrix equality at
tolerance 1e-8 with NO global-phase quotient: global phases change the
phases of charged moments and must not be silently identified.  Projective
actions (e.g. the spin-1/2 quarter-turn, whose fourth power is -1) can be
reduced with `quotient_global_phases`, which keeps one representative
unitary per ray; alternating charged moments are insensitive to that
choice because the closing element is taken as a matrix inverse.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .errors import (
    ClosureViolation,
    DecompositionFailed,
    NonAbelian,
    NonUnitary,
    OrderExceeded,
)
from .linalg import as_matrix
from .mps import MpsTensor, build_charged_transfer, spectral_radius

MATCH_TOL = 1e-8
UNITARY_TOL = 1e-10

# --- spin helpers -----------------------------------------------------------

PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)


def spin_matrices(two_j: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(Sx, Sy, Sz) for spin j = two_j / 2."""
    j = two_j / 2.0
    dim = two_j + 1
    mz = j - np.arange(dim)
    sz = np.diag(mz).astype(np.complex128)
    sp = np.zeros((dim, dim), dtype=np.complex128)
    for k in range(1, dim):
        m = mz[k]
        sp[k - 1, k] = np.sqrt(j * (j + 1) - m * (m + 1))
    sm = sp.conj().T
    sx = 0.5 * (sp + sm)
    sy = -0.5j * (sp - sm)
    return sx, sy, sz


def rotation_about_y(theta: float, two_j: int = 1) -> np.ndarray:
    """exp(-i theta Sy) for spin j = two_j / 2 (theta in radians)."""
    _, sy, _ = spin_matrices(two_j)
    return expm(-1j * theta * sy)


# --- finite groups ----------------------------------------------------------


@dataclass
class FiniteGroupRep:
    """Finite group given by explicit unitaries; element 0 is the identity.

    When projective is True the unitaries are ray representatives only and
    the Cayley table holds up to a global phase."""

    elements: list[np.ndarray]
    cayley: np.ndarray
    inverse: np.ndarray
    projective: bool = False

    @property
    def order(self) -> int:
        return len(self.elements)

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    def is_abelian(self) -> bool:
        return bool(np.array_equal(self.cayley, self.cayley.T))


def _check_unitary(u: np.ndarray):
    d = u.shape[0]
    if np.max(np.abs(u @ u.conj().T - np.eye(d))) > UNITARY_TOL:
        raise NonUnitary("generator is not unitary within 1e-10")


def _find(elements: list[np.ndarray], candidate: np.ndarray) -> int:
    for i, e in enumerate(elements):
        if np.max(np.abs(e - candidate)) < MATCH_TOL:
            return i
    return -1


def generate_group(generators, max_order: int = 1024) -> FiniteGroupRep:
    """Close a set of unitaries under multiplication.

    Raises OrderExceeded when the closure grows past max_order, which
    signals a non-finite group or numerical drift past the matching
    tolerance."""
    gens = [as_matrix(g) for g in generators]
    d = gens[0].shape[0]
    for g in gens:
        if g.shape != (d, d):
            raise ValueError("generators must share one dimension")
        _check_unitary(g)
    elements = [np.eye(d, dtype=np.complex128)]
    queue = [0]
    while queue:
        i = queue.pop(0)
        for g in gens:
            prod = elements[i] @ g
            if _find(elements, prod) == -1:
                if len(elements) >= max_order:
                    raise OrderExceeded(
                        f"group closure exceeded max_order={max_order}"
                    )
                elements.append(prod)
                queue.append(len(elements) - 1)
    n = len(elements)
    cayley = np.empty((n, n), dtype=np.int64)
    for i in range(n):
        for j in range(n):
            k = _find(elements, elements[i] @ elements[j])
            if k == -1:
                raise ClosureViolation("closure table lookup failed; drifting products")
            cayley[i, j] = k
    inverse = np.empty(n, dtype=np.int64)
    for i in range(n):
        (js,) = np.where(cayley[i] == 0)
        if len(js) != 1:
            raise ClosureViolation(f"element {i} has no unique inverse")
        inverse[i] = js[0]
    return FiniteGroupRep(elements, cayley, inverse)


def quotient_global_phases(g: FiniteGroupRep) -> FiniteGroupRep:
    """Quotient of a finite group by its global-phase elements.

    Keeps the first-seen representative of each ray (two unitaries are in
    one ray iff |Tr(A^dagger B)| = d).  The result is marked projective:
    its Cayley table holds only up to a phase, which cancels in alternating
    charged moments where the closing element is a matrix inverse."""
    d = g.dim
    reps: list[np.ndarray] = []
    for e in g.elements:
        if not any(abs(abs(np.trace(r.conj().T @ e)) - d) < 1e-8 for r in reps):
            reps.append(e)
    # identity ray representative must stay the identity matrix
    for i, r in enumerate(reps):
        if abs(abs(np.trace(r)) - d) < 1e-8:
            reps[0], reps[i] = reps[i], reps[0]
            break
    reps[0] = np.eye(d, dtype=np.complex128)
    n = len(reps)

    def ray_index(mat: np.ndarray) -> int:
        for i, r in enumerate(reps):
            if abs(abs(np.trace(r.conj().T @ mat)) - d) < 1e-8:
                return i
        raise ClosureViolation("ray not found in quotient")

    cayley = np.empty((n, n), dtype=np.int64)
    for i in range(n):
        for j in range(n):
            cayley[i, j] = ray_index(reps[i] @ reps[j])
    inverse = np.empty(n, dtype=np.int64)
    for i in range(n):
        (js,) = np.where(cayley[i] == 0)
        inverse[i] = js[0]
    return FiniteGroupRep(reps, cayley, inverse, projective=True)


def blocked_representation(g: FiniteGroupRep, k: int = 2) -> FiniteGroupRep:
    """Same abstract group acting site-wise on a k-site block (u -> u x u x ...)."""
    elements = []
    for e in g.elements:
        b = e
        for _ in range(k - 1):
            b = np.kron(b, e)
        elements.append(b)
    return FiniteGroupRep(elements, g.cayley.copy(), g.inverse.copy(), g.projective)


# Common concrete groups -----------------------------------------------------


def y_rotation_group(two_j: int = 1) -> FiniteGroupRep:
    """Group generated by the quarter turn about y.

    On a single spin-1/2 this has order 8 (the turn squares to -1 at a full
    winding); use quotient_global_phases or the blocked representation for
    the physical four-element action."""
    return generate_group([rotation_about_y(np.pi / 2, two_j)])


def y_rotation_z4_physical(two_j: int = 1) -> FiniteGroupRep:
    return quotient_global_phases(y_rotation_group(two_j))


def y_rotation_z4_blocked() -> FiniteGroupRep:
    u = rotation_about_y(np.pi / 2)
    return generate_group([np.kron(u, u)])


def spin_flip_z2() -> FiniteGroupRep:
    return generate_group([PAULI_X])


# --- invariant subgroup detection -------------------------------------------


@dataclass
class SubgroupInfo:
    """Detected invariant subgroup H (finite case) or subalgebra h (Lie case)."""

    kind: str  # "finite" | "lie"
    indices: list[int] | None = None
    order: int | None = None
    phases: dict[int, float] | None = None
    h_basis: np.ndarray | None = None      # (dim_h, dim_g) real coefficients
    coset_basis: np.ndarray | None = None  # (dim_g - dim_h, dim_g)
    dim_h: int | None = None
    dim_g: int | None = None
    quad_eigenvalues: np.ndarray | None = None


def detect_invariant_subgroup(
    t: MpsTensor, g: FiniteGroupRep, tol: float = 1e-8
) -> SubgroupInfo:
    """H = elements whose charged transfer operator has spectral radius 1.

    Records the phase of the leading eigenvalue for each symmetric element
    and verifies that the detected set is closed under products and
    inverses (a failure signals a mis-tuned tolerance)."""
    indices = []
    phases: dict[int, float] = {}
    for i, u in enumerate(g.elements):
        r = build_charged_transfer(t, u)
        if spectral_radius(r) >= 1.0 - tol:
            lam = r.leading_pairs(1)[0].value
            indices.append(i)
            phases[i] = float(np.angle(lam))
    members = set(indices)
    for i in indices:
        if int(g.inverse[i]) not in members:
            raise ClosureViolation(f"detected H not closed under inverse of {i}")
        for j in indices:
            if int(g.cayley[i, j]) not in members:
                raise ClosureViolation(f"detected H not closed: {i} * {j}")
    return SubgroupInfo(kind="finite", indices=indices, order=len(indices), phases=phases)


# --- compact Lie groups -----------------------------------------------------


@dataclass(frozen=True)
class QuadratureSpec:
    """Haar integration settings: equispaced nodes for U(1), seeded Monte
    Carlo for higher-dimensional integrals."""

    scheme: str = "equispaced"  # "equispaced" | "montecarlo"
    nodes: int = 64
    samples: int = 20000
    seed: int | None = None


@dataclass
class LieGroupRep:
    """U(1) or SU(2) acting through anti-Hermitian generators.

    For SU(2) the generators must satisfy [X_a, X_b] = eps_abc X_c (take
    X_a = -i S_a for spin-j operators S_a)."""

    kind: str  # "u1" | "su2"
    generators: list[np.ndarray]
    quadrature: QuadratureSpec = field(default_factory=QuadratureSpec)

    def __post_init__(self):
        gens = [as_matrix(x) for x in self.generators]
        self.generators = gens
        expected = {"u1": 1, "su2": 3}.get(self.kind)
        if expected is None:
            raise ValueError(f"unknown Lie group kind {self.kind!r}")
        if len(gens) != expected:
            raise ValueError(f"{self.kind} needs {expected} generators, got {len(gens)}")
        for x in gens:
            if np.max(np.abs(x + x.conj().T)) > 1e-9:
                raise NonUnitary("generators must be anti-Hermitian")
        self._fundamental = False
        if self.kind == "su2":
            eps = np.zeros((3, 3, 3))
            eps[0, 1, 2] = eps[1, 2, 0] = eps[2, 0, 1] = 1.0
            eps[0, 2, 1] = eps[2, 1, 0] = eps[1, 0, 2] = -1.0
            for a in range(3):
                for b in range(3):
                    comm = gens[a] @ gens[b] - gens[b] @ gens[a]
                    target = sum(eps[a, b, c] * gens[c] for c in range(3))
                    if np.max(np.abs(comm - target)) > 1e-9:
                        raise ValueError("generators violate su(2) commutation relations")
            if self.dim == 2:
                paulis = (PAULI_X, PAULI_Y, PAULI_Z)
                self._fundamental = all(
                    np.max(np.abs(g + 0.5j * p)) < 1e-12 for g, p in zip(gens, paulis)
                )

    @property
    def dim_g(self) -> int:
        return len(self.generators)

    @property
    def dim(self) -> int:
        return self.generators[0].shape[0]

    def element(self, coords) -> np.ndarray:
        """Unitary exp(sum_a coords[a] * X_a) for real algebra coordinates."""
        coords = np.atleast_1d(np.asarray(coords, dtype=float))
        x = sum(c * g for c, g in zip(coords, self.generators))
        return expm(x)

    def element_from_quaternion(self, q) -> np.ndarray:
        """Push an SU(2) Haar sample (unit quaternion) through this
        representation via its axis-angle coordinates."""
        if self.kind != "su2":
            raise ValueError("quaternion parameters are for su2 groups")
        w, vx, vy, vz = (float(c) for c in q)
        if self._fundamental:
            # closed form exp(-i phi/2 n.sigma) = w - i v.sigma
            return w * np.eye(2) - 1j * (vx * PAULI_X + vy * PAULI_Y + vz * PAULI_Z)
        vn = np.sqrt(vx * vx + vy * vy + vz * vz)
        if vn < 1e-300:
            return np.eye(self.dim, dtype=np.complex128)
        phi = 2.0 * np.arctan2(vn, w)
        return self.element(np.array([vx, vy, vz]) * (phi / vn))


def u1_z_rep(two_j: int = 1, quadrature: QuadratureSpec | None = None) -> LieGroupRep:
    _, _, sz = spin_matrices(two_j)
    return LieGroupRep("u1", [-1j * sz], quadrature or QuadratureSpec())


def su2_rep(two_j: int = 1, quadrature: QuadratureSpec | None = None) -> LieGroupRep:
    sx, sy, sz = spin_matrices(two_j)
    quad = quadrature or QuadratureSpec(scheme="montecarlo")
    return LieGroupRep("su2", [-1j * sx, -1j * sy, -1j * sz], quad)


def blocked_lie_rep(g: LieGroupRep, k: int = 2) -> LieGroupRep:
    """Site-wise action on a k-site block: X -> X x 1 + 1 x X (and so on)."""
    d = g.dim
    gens = []
    for x in g.generators:
        total = np.zeros((d**k, d**k), dtype=np.complex128)
        for pos in range(k):
            term = np.eye(1, dtype=np.complex128)
            for q in range(k):
                term = np.kron(term, x if q == pos else np.eye(d))
            total += term
        gens.append(total)
    return LieGroupRep(g.kind, gens, g.quadrature)


def haar_nodes_u1(nodes: int) -> list[tuple[float, float]]:
    """Equispaced angles with uniform weights on [0, 2pi).

    The periodic trapezoid rule: exact for harmonics below the node count,
    spectrally accurate for smooth periodic integrands."""
    if nodes < 2:
        raise ValueError("need at least 2 nodes")
    return [(2.0 * np.pi * k / nodes, 1.0 / nodes) for k in range(nodes)]


def haar_sample_su2(n_samples: int, seed: int) -> np.ndarray:
    """(n_samples, 4) unit quaternions, i.i.d. Haar on SU(2).

    Normalized 4-component Gaussians are uniform on the 3-sphere, which is
    the Haar measure in quaternion coordinates.  Deterministic given seed."""
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    rng = np.random.default_rng(seed)
    q = rng.standard_normal((n_samples, 4))
    return q / np.linalg.norm(q, axis=1, keepdims=True)


def sobol_uniform_batches(n_batches: int, batch: int, dim: int, seed: int) -> np.ndarray:
    """(n_batches, batch, dim) points in [0,1): independently scrambled
    Sobol sequences per batch.  Within-batch points are low discrepancy;
    across batches the scrambles are independent, so batch means admit an
    honest standard error."""
    import warnings

    from scipy.stats import qmc

    out = np.empty((n_batches, batch, dim))
    for b in range(n_batches):
        eng = qmc.Sobol(d=dim, scramble=True, seed=seed + 7919 * b)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", UserWarning)  # non power-of-2 batch
            out[b] = eng.random(batch)
    return out


def sobol_haar_su2_batches(n_batches: int, batch: int, copies: int, seed: int) -> np.ndarray:
    """(n_batches, batch, copies, 4) unit quaternions: scrambled-Sobol Haar
    samples on SU(2)^copies (Gaussian-mapped Sobol points, normalized)."""
    from scipy.special import ndtri

    u = sobol_uniform_batches(n_batches, batch, 4 * copies, seed)
    g = ndtri(np.clip(u, 1e-12, 1.0 - 1e-12)).reshape(n_batches, batch, copies, 4)
    return g / np.linalg.norm(g, axis=-1, keepdims=True)


def quaternion_to_su2(q) -> np.ndarray:
    """Fundamental (spin-1/2) matrix of a unit quaternion,
    exp(-i phi/2 n.sigma) for the axis-angle pair of q."""
    w, x, y, z = (float(c) for c in q)
    return w * np.eye(2) - 1j * (x * PAULI_X + y * PAULI_Y + z * PAULI_Z)


def detect_invariant_subalgebra(
    t: MpsTensor,
    g: LieGroupRep,
    step: float = 1e-3,
    threshold: float = 1e-6,
) -> SubgroupInfo:
    """Lie-algebra directions along which the state stays symmetric.

    The spectral-radius deficit of the charged transfer operator is
    quadratic near symmetric directions, deficit(exp(s X)) ~ s^2 Q(X).
    The quadratic form Q is estimated by finite differences over the
    generator basis; its (near-)kernel is the invariant subalgebra h and
    the orthogonal complement spans the coset directions."""
    k = g.dim_g

    def deficit(coords) -> float:
        u = g.element(coords)
        return 1.0 - spectral_radius(build_charged_transfer(t, u))

    q = np.zeros((k, k))
    diag = np.empty(k)
    for a in range(k):
        e = np.zeros(k)
        e[a] = step
        diag[a] = deficit(e) / step**2
        q[a, a] = diag[a]
    for a in range(k):
        for b in range(a + 1, k):
            e = np.zeros(k)
            e[a] = step
            e[b] = step
            q[a, b] = q[b, a] = 0.5 * (deficit(e) / step**2 - diag[a] - diag[b])
    q = 0.5 * (q + q.T)
    w, v = np.linalg.eigh(q)
    h_mask = w < threshold
    h_basis = v[:, h_mask].T.copy()
    coset_basis = v[:, ~h_mask].T.copy()
    return SubgroupInfo(
        kind="lie",
        h_basis=h_basis,
        coset_basis=coset_basis,
        dim_h=int(h_mask.sum()),
        dim_g=k,
        quad_eigenvalues=w,
    )


# --- abelian irrep projectors -----------------------------------------------


def abelian_irrep_projectors(
    g: FiniteGroupRep, action, tol: float = 1e-8, seed: int = 7
) -> list[np.ndarray]:
    """Orthogonal projectors onto the character eigenspaces of a
    represented abelian group action.

    `action` is the list of |G| unitaries the group elements act through on
    the target space (e.g. site-wise products on a few-site block).  The
    joint eigenspaces are found by diagonalizing a random Hermitian
    combination of the commuting unitaries; the result is verified to
    commute with every element and to resolve the identity."""
    if not g.is_abelian():
        raise NonAbelian("abelian_irrep_projectors requires an abelian group")
    us = [as_matrix(u) for u in action]
    if len(us) != g.order:
        raise ValueError("action must list one unitary per group element")
    dim = us[0].shape[0]
    for attempt in range(8):
        rng = np.random.default_rng(seed + attempt)
        coeff = rng.standard_normal(len(us)) + 1j * rng.standard_normal(len(us))
        h = np.zeros((dim, dim), dtype=np.complex128)
        for c, u in zip(coeff, us):
            h += c * u + np.conj(c) * u.conj().T
        w, v = np.linalg.eigh(h)
        splits = [0]
        for i in range(1, dim):
            if w[i] - w[i - 1] > 1e-6 * max(1.0, np.abs(w).max()):
                splits.append(i)
        splits.append(dim)
        projectors = []
        good = True
        for lo, hi in zip(splits[:-1], splits[1:]):
            block = v[:, lo:hi]
            p = block @ block.conj().T
            if any(np.max(np.abs(p @ u - u @ p)) > tol for u in us):
                good = False
                break
            projectors.append(p)
        if good:
            total = sum(projectors)
            if np.max(np.abs(total - np.eye(dim))) > 1e-10:
                raise DecompositionFailed("projectors do not resolve the identity")
            return projectors
    raise DecompositionFailed("could not split the action into character sectors")


# --- JSON specification -----------------------------------------------------


def _matrix_to_json(m: np.ndarray):
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def _matrix_from_json(doc) -> np.ndarray:
    arr = np.array(doc, dtype=np.float64)
    return arr[..., 0] + 1j * arr[..., 1]


def group_to_json(g: FiniteGroupRep | LieGroupRep) -> str:
    if isinstance(g, FiniteGroupRep):
        return json.dumps(
            {"kind": "finite", "generators": [_matrix_to_json(e) for e in g.elements[1:]]}
        )
    quad = g.quadrature
    return json.dumps(
        {
            "kind": g.kind,
            "generators": [_matrix_to_json(x) for x in g.generators],
            "quadrature": {
                "scheme": quad.scheme,
                "K": quad.nodes,
                "N": quad.samples,
                "seed": quad.seed,
            },
        }
    )


def group_from_json(text: str) -> FiniteGroupRep | LieGroupRep:
    doc = json.loads(text)
    kind = doc.get("kind")
    if kind == "finite":
        gens = [_matrix_from_json(m) for m in doc["generators"]]
        return generate_group(gens, max_order=int(doc.get("max_order", 1024)))
    if kind in ("u1", "su2"):
        gens = [_matrix_from_json(m) for m in doc["generators"]]
        qd = doc.get("quadrature", {})
        quad = QuadratureSpec(
            scheme=qd.get("scheme", "equispaced" if kind == "u1" else "montecarlo"),
            nodes=int(qd.get("K", 64)),
            samples=int(qd.get("N", 20000)),
            seed=qd.get("seed"),
        )
        return LieGroupRep(kind, gens, quad)
    raise ValueError(f"unknown group kind {kind!r}")
