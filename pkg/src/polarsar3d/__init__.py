"""Fast 3-D radar imaging from polarization-diverse measurements.

Simulates concentric (azimuth, roll, frequency) monostatic acquisitions of
point-scatterer scenes and reconstructs three joint backscatter maps
(xx, yy, xy) by minimum-norm least squares.
"""

from .errors import (
    CannotSuggestError,
    ConditioningError,
    FormatError,
    FrameSingularityError,
    IdentityViolatedError,
    InfeasibleError,
    InvalidInputError,
    OutOfBandError,
    PolarSARError,
    SizeCapError,
)
from .forward import (
    Hologram,
    Scatterer,
    Scene,
    ThreeMaps,
    apply_adjoint,
    apply_forward,
    classical_ms_hologram,
    dense_matrix,
    simulate_hologram,
)
from .geometry import (
    SPEED_OF_LIGHT,
    Acquisition,
    AntennaFrame,
    MeasurementDescriptor,
    antenna_frame,
    expand_sweep,
    jones_emission,
    jones_projection,
    wave_vector,
)
from .inversion import (
    ReconstructionReport,
    aadagger_diagonal,
    constrained_min_norm,
    ls_residual,
    mnls_dense,
    mnls_fast,
)
from .kgrid import (
    GriddedSpectrum,
    KGrid,
    extract,
    on_grid_acquisition,
    regrid,
    sample_location,
    suggest_grid,
)
from .polarimetry import (
    KAPPA_MIN,
    Mode,
    ModeWeights,
    ScatteringMatrix,
    closed_form_weights,
    effective_coefficient,
    inversion_weights,
    kappa,
)

__version__ = "0.1.0"
