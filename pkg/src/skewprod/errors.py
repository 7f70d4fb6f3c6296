"""Exception hierarchy. Every error carries a short machine-readable code."""
from __future__ import annotations


class SkewError(Exception):
    code = "error"

    def __init__(self, message: str = "", **info):
        super().__init__(message or self.code)
        self.info = info


class InvalidParameter(SkewError):
    code = "invalid-parameter"


class InvalidElement(SkewError):
    code = "invalid-element"


class NotAGroup(SkewError):
    code = "not-a-group"


class TooLarge(SkewError):
    code = "too-large"


class InvalidSubgroup(SkewError):
    code = "invalid-subgroup"


class IdentityNotFixed(SkewError):
    code = "identity-not-fixed"


class AxiomViolated(SkewError):
    code = "axiom-violated"


class PiInconsistent(SkewError):
    code = "pi-not-consistent-mod-order"


class NotComplementary(SkewError):
    code = "not-complementary"


class ConstructionInconsistent(SkewError):
    code = "construction-inconsistent"


class BudgetExceeded(SkewError):
    code = "budget-exceeded"


class ExtensionInvalid(SkewError):
    code = "extension-invalid"


class CoreNotTrivial(SkewError):
    code = "core-not-trivial"


class TauNotAutomorphism(SkewError):
    code = "tau-not-automorphism"


class CoreShapeUnexpected(SkewError):
    code = "core-shape-unexpected"


class HypothesesNotMet(SkewError):
    code = "hypotheses-not-met"


class ParseError(SkewError):
    code = "parse-error"
