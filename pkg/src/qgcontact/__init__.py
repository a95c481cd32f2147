"""Contact interactions on quantum graphs: star-graph vertex couplings,
geometric scatterers, and band spectra of rectangular graph lattices."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    InvalidInputError,
    NumericalError,
    QGraphError,
)
from .vertex import (  # noqa: E402
    BoundState,
    Delta,
    DeltaPrime,
    DeltaPrimeS,
    PermInvariant,
    ScatteringData,
    bc_residual,
    bound_states,
    perm_reflection_asymptotic,
    singular_limits,
    star_smatrix,
)
from .geoscatter import (  # noqa: E402
    OnionGraph,
    high_energy_smatrix,
    onion_limit_smatrix,
    onion_smatrix,
    tau_equivalent,
)
from .bands import (  # noqa: E402
    LatticeSpec,
    Spectrum,
    SpectralInterval,
    delta_spectrum,
    dprime_spectrum,
    dps_spectrum,
    kp_spectrum,
    lattice_spectrum,
)
from .diophantine import (  # noqa: E402
    approx_quality,
    cf_expand,
    convergents,
    hurwitz_sequence,
    parse_theta,
)
from .analysis import (  # noqa: E402
    critical_coupling,
    enhancement,
    gap_census,
    verify_propositions,
)
