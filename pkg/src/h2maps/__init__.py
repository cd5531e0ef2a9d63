"""Schrodinger maps into the hyperbolic plane and their gauge-equivalent fields.

Submodules:

- :mod:`h2maps.minkowski`: Minkowski 3-space, H^2 and su(1,1) / SU(1,1) algebra
- :mod:`h2maps.grid`: planar grids, Wirtinger stencils, radial quadrature, snapshot I/O
- :mod:`h2maps.exact`: explicit blow-up family and the radial-ansatz embedding
- :mod:`h2maps.gauge`: residuals, frame integration, reconstruction and decomposition
- :mod:`h2maps.spin`: direct time stepping of the spin field
- :mod:`h2maps.radial`: the one-dimensional radial equation
- :mod:`h2maps.experiments`, :mod:`h2maps.cli`: reproducible studies and their front end
"""

__version__ = "0.1.0"

from .errors import (  # noqa: F401
    AdmissibilityError,
    AmplitudeError,
    BlowupTimeError,
    ConeExitError,
    ConfigError,
    InvariantError,
    ParameterSignError,
    ProjectionError,
    SheetError,
)
from .exact import BlowupParams, blowup_fields, blowup_profile  # noqa: F401
from .grid import Grid2D, PowerTail, ZeroTail  # noqa: F401
from .spin import EvolveConfig, SpinField  # noqa: F401
