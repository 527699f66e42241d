"""Exception hierarchy shared by every stage of the toolchain.

Each error class names the module that raised it; the CLI prints that name in
its ``error[<module>]:`` prefix and maps the class onto an exit code.
"""

from __future__ import annotations


class HlsError(Exception):
    module = "core"

    def __init__(self, message: str, *, line: int | None = None, col: int | None = None):
        self.message = message
        self.line = line
        self.col = col
        super().__init__(self._render())

    def _render(self) -> str:
        if self.line is not None:
            return f"{self.line}:{self.col}: {self.message}"
        return self.message


# frontend
class FrontendError(HlsError):
    module = "frontend"


class DslSyntaxError(FrontendError):
    def __init__(self, message: str, *, line: int, col: int, expected: tuple[str, ...] = ()):
        self.expected = expected
        if expected:
            message = f"{message} (expected {', '.join(expected)})"
        super().__init__(message, line=line, col=col)


class SemanticError(FrontendError):
    pass


class PragmaError(FrontendError):
    pass


# cdfg
class CdfgError(HlsError):
    module = "cdfg"


class ExpansionLimit(CdfgError):
    pass


class InlineError(CdfgError):
    pass


class WidthError(CdfgError):
    pass


# macrodb
class MacroDbError(HlsError):
    module = "macrodb"


class DuplicateSignature(MacroDbError):
    pass


class FormatError(MacroDbError):
    pass


class DatabaseIoError(MacroDbError):
    pass


# scheduler
class SchedulerError(HlsError):
    module = "scheduler"


class CycleError(SchedulerError):
    pass


class InfeasibleConstraint(SchedulerError):
    pass


# binder
class BinderError(HlsError):
    module = "binder"


class MissingMacro(BinderError):
    pass


class StaleMacro(BinderError):
    """Database entry matches the call signature but not the callee body."""


class ShareConflict(BinderError):
    pass


# pe_model
class PeModelError(HlsError):
    module = "pe_model"


class PlacementError(PeModelError):
    pass


class AdjacencyError(PeModelError):
    pass


# emitter
class EmitterError(HlsError):
    module = "emitter"


class ConsistencyError(EmitterError):
    pass


# estimator
class EstimatorError(HlsError):
    module = "estimator"


class UnknownOp(EstimatorError):
    pass


class CostModelError(EstimatorError):
    pass


# simulator / netlist reader
class SimulatorError(HlsError):
    module = "simulator"


class NetlistParseError(SimulatorError):
    pass


class UninitializedRegister(SimulatorError):
    pass


class DivByZero(SimulatorError):
    pass


class VectorError(SimulatorError):
    pass


class SynthesisError(HlsError):
    module = "pipeline"
