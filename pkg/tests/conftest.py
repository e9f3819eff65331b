import numpy as np
import pytest


def rand_unitary(d, rng):
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_density(dim, seed):
    from asymmetry_kit.oracle import DensityMatrix

    rng = np.random.default_rng(seed)
    x = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    m = x @ x.conj().T
    return DensityMatrix(m / np.trace(m).real)


def charge_structured_tensor(seed, bond_charges=(0, 1, 2), phys_charges=(0, 1)):
    """Tensor with exact U(1) charge structure on the bonds: M[s][a,b] is
    nonzero only when q_b - q_a equals the physical charge of s.  Such a
    tensor satisfies the symmetry gauge relation exactly for the unitaries
    u(alpha) = exp(i alpha * diag(phys_charges)) up to a global phase."""
    from asymmetry_kit import MpsTensor, normalize

    rng = np.random.default_rng(seed)
    dd, d = len(bond_charges), len(phys_charges)
    data = np.zeros((d, dd, dd), dtype=np.complex128)
    for s, c in enumerate(phys_charges):
        for a, qa in enumerate(bond_charges):
            for b, qb in enumerate(bond_charges):
                if qb - qa == c:
                    data[s, a, b] = rng.standard_normal() + 1j * rng.standard_normal()
    return normalize(MpsTensor(data))


def charge_unitary(alpha, phi=0.0, phys_charges=(0, 1)):
    return np.exp(1j * phi) * np.diag(np.exp(1j * alpha * np.array(phys_charges)))


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240811)
