from typing import Any, Dict, Optional


class StableTailsError(Exception):
    """Base error carrying an error category and a human-readable message"""

    error = "Computation error"

    def __init__(self, message: str, error: Optional[str] = None):
        super().__init__(message)
        self.message = message
        if error is not None:
            self.error = error

    def detail(self) -> Dict[str, Any]:
        return {"error": self.error, "message": self.message}


class DomainError(StableTailsError):
    error = "Domain error"


class ConvergenceError(StableTailsError):
    error = "Convergence failure"


class CapabilityError(StableTailsError):
    error = "Capability error"

    def __init__(self, message: str, node: Optional[str] = None):
        if node is not None:
            message = f"{message} (region node: {node})"
        super().__init__(message)
        self.node = node


class UnsupportedMeasureError(StableTailsError):
    error = "Unsupported measure"


class ZeroColumnError(StableTailsError):
    error = "Zero column"


class NoReachabilityError(StableTailsError):
    error = "No reachability"


class AccuracyError(StableTailsError):
    error = "Accuracy error"


class InsufficientDataError(StableTailsError):
    error = "Insufficient data"


class UnknownExampleError(StableTailsError):
    error = "Unknown example"


class ScenarioError(StableTailsError):
    """Scenario or region parse/validation failure, with position when known"""

    error = "Scenario error"

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column
