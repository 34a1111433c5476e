"""Exception taxonomy shared by all hslab modules.

Input/schema problems and contract violations raise ``InputError`` subclasses
(CLI exit code 2); numeric checks that fail at runtime raise ``CheckError``
subclasses (CLI exit code 1).
"""


class HslabError(Exception):
    """Base class for all hslab errors."""


class InputError(HslabError):
    """Malformed input: schema violations, bad shapes, contract breaches."""


class SymmetryError(InputError):
    """A matrix argument was not symmetric within tolerance."""


class DomainError(InputError):
    """A scalar argument fell outside its admissible range."""


class DegenerateEdgeError(InputError):
    """A polyline contains a zero-length edge or too few vertices."""


class WindowError(InputError):
    """Hessian eigenvalues left the admissible elliptic window."""


class ResolutionError(InputError):
    """A requested radius is below the resolved scale of the point cloud."""


class SupportViolationError(InputError):
    """A test field does not vanish where compact support is required."""


class CheckError(HslabError):
    """A numerical validity check failed during computation."""


class MetricDegeneracyError(CheckError):
    """Induced metric failed the positivity check at some sample."""

    def __init__(self, message, sample_index=None):
        super().__init__(message)
        self.sample_index = sample_index


class LagrangianDefectError(CheckError):
    """Frame or patch is not Lagrangian within tolerance."""

    def __init__(self, message, defect=None):
        super().__init__(message)
        self.defect = defect


class RankDeficiencyError(CheckError):
    """Immersion differential lost full rank at some sample."""


class UnwrapError(CheckError):
    """Phase unwrapping hit a neighbor jump of pi or more."""


class FoldError(CheckError):
    """Coordinate rotation folded over (non-positive Jacobian)."""


class CoverageError(CheckError):
    """Rotated image failed to cover the guaranteed ball."""

    def __init__(self, message, achieved_radius=None):
        super().__init__(message)
        self.achieved_radius = achieved_radius
