"""Exception types shared across the package."""


class VolbenchError(Exception):
    pass


class CircuitFormatError(VolbenchError, ValueError):
    """Base for problems reading serialized circuits."""


class ParseError(CircuitFormatError):
    pass


class SchemaError(CircuitFormatError):
    pass


class InvariantError(CircuitFormatError):
    pass


class DomainError(VolbenchError, ValueError):
    pass


class CapacityError(VolbenchError):
    """Requested width exceeds what an engine is allowed to simulate."""


class UnsupportedTopologyError(VolbenchError, ValueError):
    pass


class ClassificationError(VolbenchError, ValueError):
    pass


class DatasetError(VolbenchError, ValueError):
    def __init__(self, message, row=None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
