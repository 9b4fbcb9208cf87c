"""Exception types shared across the laboratory."""


class OsclabError(Exception):
    """Base class for all laboratory errors."""


class PositivityError(OsclabError):
    """A form required to be (fiberwise) positive is not; reports the worst node."""

    def __init__(self, message, worst_node=None, worst_value=None):
        super().__init__(message)
        self.worst_node = worst_node
        self.worst_value = worst_value


class BoundaryClosureError(OsclabError):
    """A derivative stencil ran out of valid guard-band data near a boundary."""

    def __init__(self, axis, needed, available):
        super().__init__(
            f"stencil underflow on axis {axis!r}: needs {needed} guard layers, "
            f"{available} valid"
        )
        self.axis = axis


class RelativeCscKError(OsclabError):
    """Fiberwise constant scalar curvature violated beyond tolerance."""

    def __init__(self, message, worst_fiber=None, defect=None):
        super().__init__(message)
        self.worst_fiber = worst_fiber
        self.defect = defect


class MatchingError(OsclabError):
    """Fiberwise flow matching between two potentials failed."""

    def __init__(self, message, worst_node=None, residual=None):
        super().__init__(message)
        self.worst_node = worst_node
        self.residual = residual


class HorizonError(OsclabError):
    """A flow left the truncation window; suggests enlarging t_range."""


class AlignmentError(OsclabError):
    """A degeneration is not aligned with the torus-invariant representation."""


class WeightDataError(OsclabError):
    """Dimension/weight samples are not consistent with a polynomial of the
    expected degree."""


class NefWindowError(OsclabError):
    """Cohomological positivity fails for the chosen twisting parameter;
    enlarge j."""


class ScenarioError(OsclabError):
    """Scenario configuration is malformed or invalid."""

    def __init__(self, message, line=None, column=None):
        super().__init__(message)
        self.line = line
        self.column = column
