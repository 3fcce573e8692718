"""Exception hierarchy.  Each class carries a stable ``code`` used in CLI error JSON."""


class LieperError(Exception):
    code = "domain_error"


class DimensionMismatch(LieperError, ValueError):
    code = "dimension_mismatch"


class InvalidLieAlgebra(LieperError, ValueError):
    code = "invalid_lie_algebra"


class NotInvariant(LieperError):
    code = "not_invariant"


class NotMorphism(LieperError):
    code = "not_morphism"


class NotDerivation(LieperError):
    code = "not_derivation"


class NotSkew(LieperError):
    code = "not_skew"


class InputNotComplementary(LieperError):
    code = "input_not_complementary"


class GridTooCoarse(LieperError):
    code = "grid_too_coarse"


class BoundaryMismatch(LieperError):
    code = "boundary_mismatch"


class TwistMismatch(LieperError):
    code = "twist_mismatch"


class IncompatibleKappa(LieperError):
    code = "incompatible_kappa"


class SingularTwist(LieperError):
    code = "singular_twist"


class OrderBoundExceeded(LieperError):
    code = "order_bound_exceeded"


class NumericModeUnsupported(LieperError):
    code = "numeric_mode_unsupported"


class StepOutOfPatch(LieperError):
    code = "step_out_of_patch"
