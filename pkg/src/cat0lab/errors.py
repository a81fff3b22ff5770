"""Exception hierarchy shared by every module."""


class Cat0LabError(Exception):
    """Base class for all library errors."""


class DomainError(Cat0LabError, ValueError):
    """Operands from different groups/spaces, or an argument outside its domain."""


class RadiusExceeded(Cat0LabError):
    def __init__(self, cap, message=None):
        self.cap = cap
        super().__init__(message or f"element not found within radius cap {cap}")


class ResourceError(Cat0LabError):
    """A configured support/memory/sampling budget was exceeded."""


class ConvergenceError(Cat0LabError):
    def __init__(self, message, last_iterate=None, grad_norm=None):
        self.last_iterate = last_iterate
        self.grad_norm = grad_norm
        super().__init__(f"{message} (grad_norm={grad_norm})")


class SchemaError(Cat0LabError, ValueError):
    """Experiment configuration or descriptor failed validation."""
