"""Dev scratch 8: symmetrization paths, isotypic decomposition, GHZ oracle."""
import numpy as np

from asymmetry_kit import *
from asymmetry_kit.oracle import (
    DensityMatrix, dense_state, ghz_dense_state, reduced_density_matrix,
    symmetrize_exact, symmetrize_haar_mc, symmetrize_abelian_blocks,
    symmetrize_nonabelian_basis, isotypic_decomposition, block_structure_check,
    exact_asymmetry, u1_charge_projectors, site_action,
)
from asymmetry_kit.groups import (
    spin_flip_z2, generate_group, su2_rep, u1_z_rep, abelian_irrep_projectors,
    PAULI_X, PAULI_Z,
)
from asymmetry_kit.states import tilted_product

rng = np.random.default_rng(0)

def random_density(dim, seed):
    r = np.random.default_rng(seed)
    x = r.standard_normal((dim, dim)) + 1j * r.standard_normal((dim, dim))
    m = x @ x.conj().T
    return DensityMatrix(m / np.trace(m).real)

# --- GHZ oracle closed form (A2)
for p in (0.0, 0.25, 0.5, 1.0):
    for n in (2, 3):
        psi = ghz_dense_state(p, 8)
        rho = reduced_density_matrix(psi, 3)
        g = spin_flip_z2()
        rho_t = symmetrize_exact(rho, g, ell=3)
        ds = exact_asymmetry(rho, rho_t, n)
        expect = np.log(2) - np.log(p**n + (1 - p) ** n) / (1 - n)
        print(f"GHZ p={p} n={n}: {ds:.12f} expect {expect:.12f} diff {abs(ds-expect):.2e}")

# --- abelian: Z2 on 2 sites
g = spin_flip_z2()
rho = random_density(4, 1)
action = [site_action(u, 2) for u in g.elements]
projs = abelian_irrep_projectors(g, action)
print("Z2 projectors:", len(projs), "ranks", [int(round(np.trace(p).real)) for p in projs])
r_exact = symmetrize_exact(rho, g, ell=2)
r_blocks = symmetrize_abelian_blocks(rho, projs)
print("Z2 exact vs blocks:", np.max(np.abs(r_exact.matrix - r_blocks.matrix)))

# Z4 diagonal rep on 2 sites
z4 = generate_group([np.diag([1, 1j]).astype(complex)])
print("Z4 order:", z4.order, "abelian:", z4.is_abelian())
rho = random_density(4, 2)
action = [site_action(u, 2) for u in z4.elements]
projs = abelian_irrep_projectors(z4, action)
r_exact = symmetrize_exact(rho, z4, ell=2)
r_blocks = symmetrize_abelian_blocks(rho, projs)
print("Z4 exact vs blocks:", np.max(np.abs(r_exact.matrix - r_blocks.matrix)),
      "ranks", [int(round(np.trace(p).real)) for p in projs])

# --- nonabelian: S3 on 3 qubits via swaps
def swap_matrix(i, j, n):
    dim = 2 ** n
    perm = np.zeros((dim, dim))
    for idx in range(dim):
        bits = [(idx >> k) & 1 for k in range(n)]
        bits[i], bits[j] = bits[j], bits[i]
        jdx = sum(b << k for k, b in enumerate(bits))
        perm[jdx, idx] = 1.0
    return perm.astype(complex)

s3 = generate_group([swap_matrix(0, 1, 3), swap_matrix(1, 2, 3)])
print("S3 order:", s3.order)
rho = random_density(8, 3)
dec = isotypic_decomposition(s3.elements, kind="finite")
print("S3 isotypic classes:", [(c.irrep_dim, len(c.copies)) for c in dec.classes])
acc = np.zeros((8, 8), dtype=complex)
for u in s3.elements:
    acc += u @ rho.matrix @ u.conj().T
r_avg = DensityMatrix(acc / 6)
r_basis = symmetrize_nonabelian_basis(rho, dec)
print("S3 group-average vs invariant-basis:", np.max(np.abs(r_avg.matrix - r_basis.matrix)))
rep = block_structure_check(r_basis, dec, rho)
print("S3 block check:", rep)

# --- SU(2) two sites: |up up><up up|
gsu2 = su2_rep()
up2 = np.zeros((4, 4), dtype=complex); up2[0, 0] = 1.0
rho = DensityMatrix(up2)
from asymmetry_kit.oracle import site_generator
gens2 = [site_generator(x, 2) for x in gsu2.generators]
dec = isotypic_decomposition(gens2, kind="lie")
print("SU2 2-site classes:", [(c.irrep_dim, len(c.copies)) for c in dec.classes])
r_basis = symmetrize_nonabelian_basis(rho, dec)
print("SU2 |upup| symmetrized diag:", np.round(np.diag(r_basis.matrix).real, 6))
r_mc, defect = symmetrize_haar_mc(rho, gsu2, 2, 20000, 5)
print("SU2 MC vs basis:", np.max(np.abs(r_mc.matrix - r_basis.matrix)), "defect:", defect)

# --- U(1) dephasing: tilted product on 2 sites
t = tilted_product(np.pi / 2)
psi = dense_state(t, 8)
rho = reduced_density_matrix(psi, 2)
gu1 = u1_z_rep()
projs = u1_charge_projectors(gu1, 2)
r_deph = symmetrize_abelian_blocks(rho, projs)
r_mc, defect = symmetrize_haar_mc(rho, gu1, 2, 40000, 9)
print("U1 dephase vs MC:", np.max(np.abs(r_deph.matrix - r_mc.matrix)), "defect:", defect)
print("Tr rho_tilde^2 <= Tr rho^2:", np.trace(r_deph.matrix @ r_deph.matrix).real,
      np.trace(rho.matrix @ rho.matrix).real)

# negative control for block check
bad = r_basis.matrix.copy()
bad[0, 3] += 1e-3
try:
    block_structure_check(DensityMatrix(0.5*(bad+bad.conj().T)/np.trace(bad).real), dec)
    print("negative control FAILED to raise")
except StructureViolation as e:
    print("negative control raised:", str(e)[:60])
