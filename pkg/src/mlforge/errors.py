"""Exception hierarchy shared by the library, the service and the CLI."""


class MlforgeError(Exception):
    """Base class for all toolkit errors."""


class UsageError(MlforgeError):
    """Invalid parameters, flags or configuration (caller error)."""


class IngestError(MlforgeError):
    """A dataset, prediction or model file could not be read or validated."""


class DimensionError(MlforgeError):
    """Matrix shapes, label names or model/data widths do not line up."""
