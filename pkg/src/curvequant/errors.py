"""Exception hierarchy shared by all modules."""


class CurveQuantError(Exception):
    """Base class for engine errors."""


class PrecisionError(CurveQuantError):
    """A requested coefficient is not provable at the current truncation."""


class InsufficientPrecision(PrecisionError):
    pass


class EmptyResultWindow(PrecisionError):
    """No provable coefficient survives an operation."""


class WindowTooSmall(PrecisionError):
    """A mode fell outside the managed window."""


class BadConstantTerm(CurveQuantError):
    """Series functional applied to an argument with the wrong constant term."""


class IncompatibleShape(CurveQuantError):
    """Tensor operands with mismatched arity, charts or completion kinds."""


class ExpansionDirectionMismatch(IncompatibleShape):
    """Mixing tensors expanded in incompatible variable orderings."""


class NotLagrangian(CurveQuantError):
    """Custom (R, Lambda) data fails isotropy or complementarity."""


class BadDifferential(CurveQuantError):
    """omega density is not a unit times a monomial on some chart."""


class MembershipFailed(CurveQuantError):
    """An element failed a subspace membership test it was required to pass."""


class IdTauFailed(CurveQuantError):
    pass


class NoSolutionAtOrder(CurveQuantError):
    def __init__(self, order, message=""):
        self.order = order
        super().__init__(message or f"kernel solver inconsistent at hbar order {order}")


class CompatFailed(CurveQuantError):
    """The two-sided vertex relation compatibility identity fails."""


class DegenerateRelation(CurveQuantError):
    """Both sides of a vertex relation define the same ideal."""


class DegreeCapExceeded(CurveQuantError):
    pass


class BudgetExceeded(CurveQuantError):
    """Word length / hbar order budget exhausted during rewriting."""


class KernelMismatch(CurveQuantError):
    """A relation payload failed a required hbar-divisibility check."""


class RelationCheckFailed(CurveQuantError):
    """A morphism failed to preserve a sampled defining relation."""


class GramSingular(CurveQuantError):
    """A dual-basis Gram block is singular on the window."""


class AntisymmetryFailed(CurveQuantError):
    """Discrete q-table violates q(z,w) q(w,z) = 1."""


class SigmaNotInvertible(CurveQuantError):
    pass


class SigmaNotId(CurveQuantError):
    pass


class NotInSubalgebra(CurveQuantError):
    pass


class ConfigInvalid(CurveQuantError):
    pass
