"""Exception hierarchy for the asymmetry kit.

Exit-code mapping used by the CLI: configuration problems exit 2,
numerical failures exit 3, clustering refusals exit 4.
"""


class AsymmetryKitError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(AsymmetryKitError):
    """Invalid configuration file, descriptor, or CLI arguments."""


class BadParam(AsymmetryKitError):
    """Invalid parameter passed to a catalog or pipeline function."""


class NonConvergence(AsymmetryKitError):
    """Eigen-iteration failed and the dense fallback is not applicable."""


class ZeroTensor(AsymmetryKitError):
    """Tensor whose transfer operator has (numerically) zero spectral radius."""


class NonUnitary(AsymmetryKitError):
    """Matrix expected to be unitary is not, within tolerance."""


class DegenerateLeading(AsymmetryKitError):
    """Leading transfer eigenvalue is degenerate; no rank-one fixed point."""


class NonClustering(AsymmetryKitError):
    """State lacks exponential clustering (degenerate leading transfer
    eigenvalue); the universal asymmetry analysis does not apply."""


class OrderExceeded(AsymmetryKitError):
    """Group closure exceeded the configured maximum order."""


class ClosureViolation(AsymmetryKitError):
    """Numerically detected invariant subgroup is not closed."""


class NonAbelian(AsymmetryKitError):
    """Operation requires an abelian group."""


class ProductNotIdentity(AsymmetryKitError):
    """Charged-moment unitaries do not multiply to the identity."""


class TermCapExceeded(AsymmetryKitError):
    """Group sum would exceed the configured term cap."""


class MCVarianceTooLarge(AsymmetryKitError):
    """Monte Carlo standard error exceeds the configured fraction of the value."""


class CapExceeded(AsymmetryKitError):
    """Dense-state dimension exceeds the brute-force cap."""


class CriticalRegime(AsymmetryKitError):
    """|Delta| <= 1 requested from the gapped-phase ground-state finder."""


class NoConvergence(AsymmetryKitError):
    """Imaginary-time evolution did not reach the energy tolerance."""


class FitIllConditioned(AsymmetryKitError):
    """Requested fit is ill conditioned (no signal above the noise floor)."""


class DecompositionFailed(AsymmetryKitError):
    """Isotypic decomposition of the group action failed."""


class StructureViolation(AsymmetryKitError):
    """Symmetrized density matrix violates the expected block structure."""
