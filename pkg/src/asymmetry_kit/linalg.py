"""Dense complex linear algebra kernel.

Matrices are plain complex128 numpy arrays in row-major order. The kernel
provides leading-eigenpair extraction for general (non-Hermitian) matrices
via two-sided power iteration with modulus-sorted deflation, falling back
to a dense eigendecomposition, plus integer matrix powers.

All functions are pure; arrays are never mutated in place.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonConvergence

# Dense eigendecomposition is always acceptable up to this dimension.
DENSE_FALLBACK_DIM = 4096

_POWER_MAX_ITERS = 5000
_POWER_CHECK_EVERY = 10


def as_matrix(m, square: bool = True) -> np.ndarray:
    """Validate and return `m` as a complex128 2-D array.

    Rejects non-finite entries; this is the construction invariant for
    every matrix value handled by the kit.
    """
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2:
        raise ValueError(f"expected a matrix, got ndim={a.ndim}")
    if square and a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix contains non-finite entries")
    return a


@dataclass(frozen=True)
class EigenPair:
    """One eigenvalue with right/left eigenvectors, normalized so that
    left @ right == 1 (biorthogonal pairing, plain dot product, no
    conjugation).  right @ left^T is then an oblique rank-one projector."""

    value: complex
    left: np.ndarray
    right: np.ndarray

    def projector(self) -> np.ndarray:
        return np.outer(self.right, self.left)


def _sort_key(values: np.ndarray):
    # Descending modulus; ties broken by largest real part, then imag.
    return np.lexsort((-values.imag, -values.real, -np.abs(values)))


def _dense_eigenpairs(m: np.ndarray) -> list[EigenPair]:
    values, vecs = np.linalg.eig(m)
    try:
        lefts = np.linalg.inv(vecs)  # rows are left eigenvectors, l_i @ r_j = delta_ij
    except np.linalg.LinAlgError as exc:
        raise NonConvergence(f"defective eigenbasis in dense fallback: {exc}") from exc
    order = _sort_key(values)
    return [EigenPair(complex(values[i]), lefts[i].copy(), vecs[:, i].copy()) for i in order]


def _fix_phase(v: np.ndarray) -> np.ndarray:
    """Rotate v so its largest-modulus component is real positive.

    Without this, power iteration with a complex dominant eigenvalue never
    settles (the iterate keeps rotating in phase)."""
    k = int(np.argmax(np.abs(v)))
    piv = v[k]
    if abs(piv) == 0.0:
        return v
    return v * (abs(piv) / piv)


def _power_pair(m: np.ndarray, tol: float, rng: np.random.Generator):
    """Two-sided power iteration for the dominant eigenpair of `m`.

    Returns (value, left, right) or None on stagnation (degenerate moduli,
    conjugate pairs, etc.).  left is a row vector with left @ m = value * left.
    """
    n = m.shape[0]
    norm_f = np.linalg.norm(m)
    if norm_f == 0.0:
        return 0.0 + 0.0j, np.eye(n, dtype=np.complex128)[0], np.eye(n, dtype=np.complex128)[0]
    v = _fix_phase(rng.standard_normal(n) + 1j * rng.standard_normal(n))
    v /= np.linalg.norm(v)
    w = _fix_phase(rng.standard_normal(n) + 1j * rng.standard_normal(n))
    w /= np.linalg.norm(w)
    mt = m.T
    lam = 0.0 + 0.0j
    for it in range(_POWER_MAX_ITERS):
        v_new = m @ v
        w_new = mt @ w
        nv, nw = np.linalg.norm(v_new), np.linalg.norm(w_new)
        if nv < 1e-300 or nw < 1e-300:
            return None  # dominant eigenvalue is (numerically) zero; let dense decide
        v_new = _fix_phase(v_new / nv)
        w_new = _fix_phase(w_new / nw)
        if it % _POWER_CHECK_EVERY == 0 or it == _POWER_MAX_ITERS - 1:
            denom = w_new @ v_new
            if abs(denom) > 1e-12:
                lam = (w_new @ (m @ v_new)) / denom
                res_r = np.linalg.norm(m @ v_new - lam * v_new)
                res_l = np.linalg.norm(mt @ w_new - lam * w_new)
                if res_r <= tol * norm_f and res_l <= tol * norm_f:
                    return complex(lam), w_new, v_new
        v, w = v_new, w_new
    return None


def eig_leading(m, how_many: int = 1, tol: float = 1e-12) -> list[EigenPair]:
    """Eigenpairs of largest modulus, sorted by descending modulus.

    Two-sided power iteration with deflation is tried first; if any stage
    stagnates the whole problem falls back to a dense eigendecomposition
    (allowed up to dimension DENSE_FALLBACK_DIM, else NonConvergence).
    Ties between equal-modulus eigenvalues are broken by largest real part.
    Degenerate leading eigenvalues are not an error at this layer.
    """
    a = as_matrix(m)
    n = a.shape[0]
    if not 1 <= how_many <= n:
        raise ValueError(f"how_many={how_many} out of range for dimension {n}")
    tol = max(tol, 1e-14)

    rng = np.random.default_rng(0x5EED)
    pairs: list[EigenPair] = []
    work = a.copy()
    ok = True
    for _ in range(how_many):
        got = _power_pair(work, tol, rng)
        if got is None:
            ok = False
            break
        lam, w, v = got
        denom = w @ v
        if abs(denom) < 1e-10:
            ok = False  # nearly defective pair; dense handles it better
            break
        pairs.append(EigenPair(complex(lam), w / denom, v))
        work = work - lam * np.outer(v, w / denom)
    if ok and len(pairs) == how_many:
        # Deflation order is not guaranteed to be modulus-sorted when moduli
        # are close; re-sort before returning.
        pairs.sort(key=lambda p: (-abs(p.value), -p.value.real, -p.value.imag))
        return pairs

    if n > DENSE_FALLBACK_DIM:
        raise NonConvergence(
            f"power iteration stagnated and dimension {n} exceeds the dense "
            f"fallback cap {DENSE_FALLBACK_DIM}"
        )
    return _dense_eigenpairs(a)[:how_many]


def leading_moduli(m, how_many: int = 1) -> np.ndarray:
    """Moduli of the `how_many` largest-modulus eigenvalues (descending).

    Cheaper than eig_leading when eigenvectors are not needed and the
    spectrum may be degenerate (uses dense eigvals directly for small
    matrices)."""
    a = as_matrix(m)
    n = a.shape[0]
    if n <= DENSE_FALLBACK_DIM:
        mods = np.sort(np.abs(np.linalg.eigvals(a)))[::-1]
        return mods[:how_many]
    pairs = eig_leading(a, how_many)
    return np.array([abs(p.value) for p in pairs])


def matrix_power(m, k: int) -> np.ndarray:
    """m**k by exponentiation-by-squaring; k = 0 gives the identity."""
    a = as_matrix(m)
    if k < 0:
        raise ValueError("negative powers are not supported")
    return np.linalg.matrix_power(a, k)
