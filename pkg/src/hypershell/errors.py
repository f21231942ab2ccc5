"""Exception hierarchy shared by all hypershell modules."""


class HypershellError(Exception):
    """Base class for all package errors."""


class NotSymmetric(HypershellError):
    pass


class NotPositiveDefinite(HypershellError):
    def __init__(self, block_id: str = ""):
        self.block_id = block_id
        super().__init__(f"block {block_id!r} is not positive definite" if block_id
                         else "matrix is not positive definite")


class ZeroDimensionBlock(HypershellError):
    pass


class Degenerate(HypershellError):
    """Smallest eigenvalue magnitude indistinguishable from zero."""


class DimensionMismatch(HypershellError):
    pass


class NotBlockType(HypershellError):
    pass


class BudgetExceeded(HypershellError):
    def __init__(self, estimated_work: float, budget: float):
        self.estimated_work = estimated_work
        self.budget = budget
        super().__init__(f"estimated work {estimated_work:.3g} exceeds budget {budget:.3g}")


class EmptyValueSet(HypershellError):
    pass


class BadSampleCount(HypershellError):
    pass


class QuadratureDimTooHigh(HypershellError):
    pass


class EnumerationBudgetExceeded(HypershellError):
    pass


class Underdetermined(HypershellError):
    """Lattice basis reduction failed to produce full rank."""


class DimensionTooSmall(HypershellError):
    pass


class TruncationTooLoose(HypershellError):
    pass


class SingularMatrix(HypershellError):
    pass


class NotInSiegelHalfPlane(HypershellError):
    pass


class ThetaDomainError(HypershellError):
    """Gaussian weight of a theta sum/integral is not convergent at this z."""


class PreconditionViolated(HypershellError):
    def __init__(self, check: str, context: str):
        self.check = check
        self.context = context
        super().__init__(f"precondition of {check} violated: {context}")


class ConfigParse(HypershellError):
    pass
