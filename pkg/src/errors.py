"""
Exception hierarchy for the Kisin module toolkit
"""


class ToolkitError(Exception):
    """Base class for every error raised by the toolkit"""


# Arithmetic

class DivisionByZero(ToolkitError, ZeroDivisionError):
    """Inversion of zero in k_E or of a non-unit Witt scalar"""


class NotDivisible(ToolkitError, ArithmeticError):
    """Exact division requested on a non-divisible pair"""


class NotTopologicallyNilpotent(ToolkitError, ArithmeticError):
    """Binomial series (1+z)^alpha requested with v_R(z) <= 0"""


class IndeterminateValuation(ToolkitError, ArithmeticError):
    """An element vanishes up to precision N but is not provably zero"""

    def __init__(self, precision):
        super().__init__(f"element vanishes below x^{precision}; raise the precision")
        self.precision = precision


class SingularMatrix(ToolkitError, ArithmeticError):
    """Height check requested on a matrix with zero determinant"""


class InsufficientPrecision(ToolkitError):
    """A comparison window exceeds the precision the data carries"""


class BudgetExceeded(ToolkitError):
    """A brute-force system is larger than the configured budget"""


# Input validation

class DimensionTooLarge(ToolkitError, ValueError):
    pass


class BadWeights(ToolkitError, ValueError):
    pass


class BadDiagonal(ToolkitError, ValueError):
    """A diagonal entry of A_phi is not of the form a*u^t with a != 0"""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class NoHom(ToolkitError, ValueError):
    pass


class HypothesisViolated(ToolkitError, ValueError):
    """f_{i,j} != 0 at a position with i < j and t_i > t_j"""

    def __init__(self, position):
        super().__init__(f"f{position} must vanish: t_i > t_j above the diagonal")
        self.position = position


class DocumentError(ToolkitError, ValueError):
    """Parse or schema error in an input document, annotated with its position"""

    def __init__(self, message, position=None):
        where = f" at {position}" if position else ""
        super().__init__(f"{message}{where}")
        self.position = position


# Pipeline

class AmbiguousSplit(ToolkitError):
    """An above-diagonal term fits both the pattern part and u^p*N"""

    def __init__(self, position, candidates):
        super().__init__(f"ambiguous split at {position}")
        self.position = position
        self.candidates = candidates


class PreconditionFailed(ToolkitError):
    pass


class NotGeneric(ToolkitError):
    """chi_i * chi_j^{-1} equals the mod p cyclotomic character"""

    def __init__(self, witness):
        super().__init__(f"characters {witness[0]} and {witness[1]} violate genericity")
        self.witness = witness


class ShapeViolation(ToolkitError):
    """Raised by pipelines that require a clean shape report"""

    def __init__(self, diagnostics):
        codes = ', '.join(sorted({d.code for d in diagnostics}))
        super().__init__(f"shape violations: {codes}")
        self.diagnostics = diagnostics


class InvariantFailure(ToolkitError, AssertionError):
    """A property guaranteed by a theorem failed to hold on computed data"""
