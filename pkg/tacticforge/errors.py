class TacticForgeError(Exception):
    """Root of every error raised deliberately by tacticforge."""


# kernel

class KernelError(TacticForgeError):
    pass


class TypeMismatch(KernelError):
    pass


class UnknownConstant(KernelError):
    pass


class ArityError(KernelError):
    pass


class RuleMismatch(KernelError):
    pass


class NotAnEquation(RuleMismatch):
    pass


class FreeVarCapture(RuleMismatch):
    pass


class Redefinition(KernelError):
    pass


class FreeVariablesInDefinition(KernelError):
    pass


# sexpr

class SExprError(TacticForgeError):
    pass


class EmptyInput(SExprError):
    pass


class UnbalancedParens(SExprError):

    def __init__(self, position: int, message: str = "unbalanced parentheses"):
        super().__init__(f"{message} at position {position}")
        self.position = position


class TrailingGarbage(SExprError):

    def __init__(self, position: int):
        super().__init__(f"trailing input at position {position}")
        self.position = position


class UnknownTag(SExprError):
    pass


class IllTypedTerm(SExprError):
    pass


class NestingTooDeep(SExprError):
    pass


# tactics / fol

class RewriteLimitExceeded(TacticForgeError):
    pass


class NotFirstOrderizable(TacticForgeError):
    pass


class UnificationError(TacticForgeError):
    pass


class Clash(UnificationError):
    pass


class OccursCheck(UnificationError):
    pass


class DeadlineExceeded(TacticForgeError):
    """Raised internally when a per-call wall-clock budget runs out."""


# service

class FingerprintMismatch(TacticForgeError):
    pass


class UnknownFingerprint(TacticForgeError):
    pass


class CorruptSnapshot(TacticForgeError):
    pass


class ProtocolError(TacticForgeError):
    pass


# data

class ScriptFailure(TacticForgeError):

    def __init__(self, theorem_name: str, step_index: int, reason: str):
        super().__init__(f"proof of {theorem_name} failed at step {step_index}: {reason}")
        self.theorem_name = theorem_name
        self.step_index = step_index
        self.reason = reason


class ForwardReference(TacticForgeError):
    pass


class TheoryFormatError(TacticForgeError):
    pass


# policy / loop

class NonFiniteLoss(TacticForgeError):
    pass


class CorruptCheckpoint(TacticForgeError):
    pass


class AllPoolsEmpty(TacticForgeError):
    pass


class LoopConfigError(TacticForgeError):
    pass


# checker

class CheckFailure(TacticForgeError):

    def __init__(self, step: int, reason: str):
        super().__init__(f"step {step}: {reason}")
        self.step = step
        self.reason = reason


class UnresolvableArgument(TacticForgeError):
    pass


class ImportedArgument(UnresolvableArgument):
    """A proof cites a theorem sealed by trusted import rather than proved by the kernel."""


# cli

class NotFound(TacticForgeError):
    pass


class LockedSplit(TacticForgeError):
    pass


class TacticFailure(TacticForgeError):
    """Raised inside a tactic when it does not apply; reported as a Failure result."""
