class LatentTreeError(Exception):
    """Base class for errors raised by this package."""


class ParameterError(LatentTreeError, ValueError):
    """An argument violates a documented constraint."""


class ModelAssumptionError(LatentTreeError, ValueError):
    """A model does not satisfy the conditions an operation relies on."""


class ShapeError(LatentTreeError, ValueError):
    """Two inputs that must agree in shape or topology do not."""
