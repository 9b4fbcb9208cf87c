"""osclab: a numerical laboratory for relatively cscK geometry on Hirzebruch
model fibrations.

The package builds relatively cscK metrics and geodesics between them on
``P(O + O(a)) -> P1``, evaluates the log-norm energy through both its
defining derivative and its closed Chen-Tian style form, computes fibration
stability invariants (DF, W0, W1, minimum norm) by exact intersection
theory with dual-path verification, and checks the structural identities
(geodesic equation, convexity, adiabatic expansions, slope limits) at desk
scale.
"""

from .grids import LogGrid, ScalarField
from .forms import Form11, ddbar, wedge_density, volume_density
from .model import FibrationModel, ProjectiveLine
from .lab import Lab
from . import operators
from . import functionals
from . import geodesics
from . import harmonics
from . import stability
from . import rays
from . import errors

__version__ = "0.1.0"

__all__ = [
    "LogGrid", "ScalarField", "Form11", "ddbar", "wedge_density",
    "volume_density", "FibrationModel", "ProjectiveLine", "Lab",
    "operators", "functionals", "geodesics", "harmonics", "stability",
    "rays", "errors",
]
