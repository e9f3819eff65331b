"""Uniform matrix product states and their transfer operators.

A state is a single site tensor M with components M[s, a, b] (physical
index s, left/right bond indices a, b); amplitudes on a ring of L sites
are Tr(M[s1] ... M[sL]).

Transfer operators are D^2 x D^2 matrices with the fixed index convention
(a, a')(b, b'): row index a*D + a', column index b*D + b', where the primed
index belongs to the conjugated layer.  The plain operator is
R[(a,a'),(b,b')] = sum_s M[s,a,b] conj(M[s,a',b']); the charged operator
dressed by a unitary u is
R_u[(a,a'),(b,b')] = sum_{s,s'} M[s,a,b] conj(M[s',a',b']) u[s',s].
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateLeading, NonUnitary, ZeroTensor
from .linalg import EigenPair, as_matrix, eig_leading, leading_moduli, matrix_power

UNITARY_TOL = 1e-10
CLUSTERING_TOL = 1e-8


@dataclass(frozen=True)
class MpsTensor:
    """Site tensor of a uniform MPS.

    data has shape (d, D, D) and must be finite.  block_size records how
    many physical lattice sites one tensor index spans (2 for two-site
    blocked tensors); it only matters for bookkeeping in reports.
    """

    data: np.ndarray
    block_size: int = 1

    def __post_init__(self):
        a = np.asarray(self.data, dtype=np.complex128)
        if a.ndim != 3 or a.shape[1] != a.shape[2]:
            raise ValueError(f"tensor data must have shape (d, D, D), got {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("tensor contains non-finite entries")
        if self.block_size < 1:
            raise ValueError("block_size must be >= 1")
        object.__setattr__(self, "data", a)

    @property
    def phys_dim(self) -> int:
        return self.data.shape[0]

    @property
    def bond_dim(self) -> int:
        return self.data.shape[1]

    def scaled(self, factor: complex) -> "MpsTensor":
        return MpsTensor(self.data * factor, self.block_size)


@dataclass
class TransferOperator:
    """A D^2 x D^2 transfer matrix with cached spectral data.

    kind is "plain" or "charged"; the matrix is immutable after
    construction.  Spectral data is computed once under a lock and is safe
    for concurrent readers."""

    matrix: np.ndarray
    kind: str = "plain"
    label: str = ""
    _cache: list[EigenPair] | None = field(default=None, repr=False)
    _moduli: np.ndarray | None = field(default=None, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def bond_dim(self) -> int:
        return int(round(np.sqrt(self.dim)))

    def leading_pairs(self, how_many: int = 1) -> list[EigenPair]:
        with self._lock:
            if self._cache is None or len(self._cache) < how_many:
                self._cache = eig_leading(self.matrix, min(how_many, self.dim))
            return self._cache[:how_many]

    def leading_moduli(self, how_many: int = 2) -> np.ndarray:
        with self._lock:
            if self._moduli is None or len(self._moduli) < how_many:
                self._moduli = leading_moduli(self.matrix, min(how_many, self.dim))
            return self._moduli[:how_many]


@dataclass(frozen=True)
class ClusteringReport:
    leading_modulus: float
    subleading_modulus: float
    gap_ratio: float
    is_clustering: bool
    correlation_length: float


def build_transfer_operator(t: MpsTensor) -> TransferOperator:
    """Plain transfer operator R of the tensor (see module docstring)."""
    m = t.data
    d2 = t.bond_dim ** 2
    r = np.einsum("sab,scd->acbd", m, m.conj()).reshape(d2, d2)
    return TransferOperator(r, kind="plain")


def build_charged_transfer(t: MpsTensor, u) -> TransferOperator:
    """Charged transfer operator R_u; u must be d x d unitary.

    The conjugated layer carries the primed indices and the unitary is
    contracted as u[s', s] with s' from the conjugated layer."""
    um = as_matrix(u)
    d = t.phys_dim
    if um.shape != (d, d):
        raise ValueError(f"unitary shape {um.shape} does not match phys_dim {d}")
    if np.max(np.abs(um @ um.conj().T - np.eye(d))) > UNITARY_TOL:
        raise NonUnitary("charge matrix is not unitary within 1e-10")
    m = t.data
    d2 = t.bond_dim ** 2
    r = np.einsum("sab,tcd,ts->acbd", m, m.conj(), um, optimize=True).reshape(d2, d2)
    return TransferOperator(r, kind="charged")


def build_operator_transfer(t: MpsTensor, op) -> TransferOperator:
    """Transfer operator dressed by an arbitrary (not necessarily unitary)
    physical-leg operator; same index placement as the charged builder.
    Used for expectation values of local observables."""
    om = as_matrix(op)
    d = t.phys_dim
    if om.shape != (d, d):
        raise ValueError(f"operator shape {om.shape} does not match phys_dim {d}")
    m = t.data
    d2 = t.bond_dim ** 2
    r = np.einsum("sab,tcd,ts->acbd", m, m.conj(), om, optimize=True).reshape(d2, d2)
    return TransferOperator(r, kind="charged", label="operator")


def spectral_radius(r: TransferOperator) -> float:
    """Modulus of the largest-modulus eigenvalue (cached)."""
    return float(r.leading_moduli(1)[0])


def normalize(t: MpsTensor) -> MpsTensor:
    """Rescale the tensor so its transfer operator has spectral radius 1."""
    rho = spectral_radius(build_transfer_operator(t))
    if rho < 1e-14:
        raise ZeroTensor("transfer operator has zero spectral radius")
    return t.scaled(rho ** -0.5)


def numerical_radius(r: TransferOperator, iters: int = 181) -> float:
    """Lower-bound estimate of the numerical radius sup |<v|R|v>| / <v|v>.

    Scans `iters` phases theta and takes max over theta of the largest
    eigenvalue of the Hermitian part of e^{i theta} R; each phase node is
    the exact maximum of Re(e^{i theta} <v|R|v>) over unit vectors, so the
    scan is a true lower bound of the sup.  Diagnostic only: decay-rate
    statements in this package use the spectral radius instead."""
    m = r.matrix if isinstance(r, TransferOperator) else as_matrix(r)
    best = 0.0
    for theta in np.linspace(0.0, 2.0 * np.pi, max(int(iters), 2), endpoint=False):
        h = 0.5 * (np.exp(1j * theta) * m + np.exp(-1j * theta) * m.conj().T)
        best = max(best, float(np.linalg.eigvalsh(h)[-1]))
    return best


def clustering_check(t: MpsTensor, tol: float = CLUSTERING_TOL) -> ClusteringReport:
    """Two largest transfer eigenvalue moduli; clustering iff gapped.

    Non-clustering states (degenerate leading eigenvalue) are refused by
    the asymmetry pipeline because the universal plateau derivation needs
    a rank-one infinite-volume fixed point."""
    r = build_transfer_operator(t)
    mods = r.leading_moduli(2)
    lead = float(mods[0])
    sub = float(mods[1]) if len(mods) > 1 else 0.0
    gap_ratio = sub / lead if lead > 0 else 0.0
    is_clustering = gap_ratio < 1.0 - tol
    if gap_ratio >= 1.0 - 1e-15:
        xi = np.inf
    else:
        xi = np.inf if gap_ratio == 0.0 else -1.0 / np.log(gap_ratio)
    return ClusteringReport(lead, sub, gap_ratio, is_clustering, xi)


def fixed_point_projector(r: TransferOperator, tol: float = CLUSTERING_TOL) -> EigenPair:
    """Leading eigenpair of R normalized so left @ right == 1.

    The rank-one matrix right (x) left^T is the infinite-power limit of R
    (after peeling the leading eigenvalue); requires a spectral gap."""
    mods = r.leading_moduli(2)
    if len(mods) > 1 and mods[0] > 0 and mods[1] / mods[0] >= 1.0 - tol:
        raise DegenerateLeading(
            f"leading transfer eigenvalue is degenerate (gap ratio {mods[1] / mods[0]:.3g})"
        )
    pair = r.leading_pairs(1)[0]
    # eig_leading already enforces left @ right == 1.
    return pair


def block_sites(t: MpsTensor, k: int) -> MpsTensor:
    """Blocked tensor with phys_dim d**k: data indexed by the concatenated
    physical index (row-major), entries M[s1] @ ... @ M[sk]."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if k == 1:
        return t
    d, dd = t.phys_dim, t.bond_dim
    out = t.data
    for _ in range(k - 1):
        out = np.einsum("xab,sbc->xsac", out, t.data).reshape(-1, dd, dd)
    assert out.shape[0] == d ** k
    return MpsTensor(out, block_size=t.block_size * k)


def transfer_matrix_power(t: MpsTensor, k: int) -> np.ndarray:
    """R**k of the plain transfer operator (convenience for tests)."""
    return matrix_power(build_transfer_operator(t).matrix, k)


# ---------------------------------------------------------------------------
# JSON import/export
#
# Schema: {"d": int, "D": int, "data": [per-s flat list of [re, im] pairs in
# (a, b) row-major order]}.  Round trips are bit exact because floats are
# serialized with repr (shortest round-trip representation).  A non-default
# block_size is stored under the optional "block_size" key.


def tensor_to_json(t: MpsTensor) -> str:
    d, dd = t.phys_dim, t.bond_dim
    data = [
        [[float(z.real), float(z.imag)] for z in t.data[s].ravel()]
        for s in range(d)
    ]
    doc = {"d": d, "D": dd, "data": data}
    if t.block_size != 1:
        doc["block_size"] = t.block_size
    return json.dumps(doc)


def tensor_from_json(text: str) -> MpsTensor:
    doc = json.loads(text)
    d, dd = int(doc["d"]), int(doc["D"])
    data = np.empty((d, dd, dd), dtype=np.complex128)
    for s in range(d):
        flat = np.array(doc["data"][s], dtype=np.float64)
        if flat.shape != (dd * dd, 2):
            raise ValueError(f"bad data block for s={s}: shape {flat.shape}")
        data[s] = (flat[:, 0] + 1j * flat[:, 1]).reshape(dd, dd)
    return MpsTensor(data, block_size=int(doc.get("block_size", 1)))
