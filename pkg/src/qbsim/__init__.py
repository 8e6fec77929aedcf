"""Simulation toolkit for quadratic bosonic lattices.

Squeezing interactions make the Heisenberg dynamics of a Hermitian
quadratic bosonic Hamiltonian effectively non-Hermitian in the doubled
(particle-hole) representation.  This package builds those dynamical
matrices from declarative models and exposes their consequences: spectra
and exceptional points, quadrature-nonreciprocal transport, point-gap
winding and skin-effect metrics, and Gaussian squeezing/entanglement
dynamics.
"""

from .bdg import (
    Basis,
    BlochMatrix,
    DynMatrix,
    build_bloch,
    build_real_space,
    from_quadrature,
    quadrature_transform,
    rotate_gauge,
    sample_momenta,
    strip_wrap_terms,
    symplectic_form,
    to_quadrature,
)
from .dynamics import (
    GaussianState,
    Propagator,
    SqueezeTrace,
    classify_trace,
    evolve_state,
    logarithmic_negativity,
    propagate,
    regime_map,
    squeezing_factor,
)
from .errors import (
    GapClosedError,
    NonDiagonalizableError,
    NumericalError,
    ParseError,
    QbsimError,
    ValidationError,
)
from .model import (
    Boundary,
    CouplingKind,
    CouplingTerm,
    QbsModel,
    build_preset,
    load_model,
    save_model,
    validate,
)
from .spectral import (
    EpCandidate,
    SpectralResult,
    analytic_spectrum,
    classify_regime,
    detect_ep,
    eig,
)
from .topology import (
    BogoliubovTransform,
    ObcPbcSpectra,
    SkinMetrics,
    WindingResult,
    band_windings,
    bogoliubov_diagonalize,
    obc_pbc_spectra,
    skin_metrics,
    winding_number,
)
from .transport import (
    ChainScan,
    PairAsymmetry,
    PortSpec,
    ResponseMatrix,
    chain_scattering_scan,
    nonreciprocity_report,
    scattering,
    susceptibility,
)

__version__ = "0.1.0"
