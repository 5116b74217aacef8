"""Exception types raised across the package."""


class FGBError(Exception):
    """Base class for all package errors."""


class ParameterError(FGBError, ValueError):
    """A constructor or generator received an out-of-range parameter.

    The offending field name is kept on ``field`` so callers (the CLI) can
    report it without parsing the message.
    """

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class GraphError(FGBError, ValueError):
    pass


class ModelError(FGBError, ValueError):
    pass


class CertificateError(FGBError, ValueError):
    pass


class PreconditionError(FGBError, ValueError):
    pass


class StateError(FGBError, RuntimeError):
    pass


class ConfigError(FGBError, ValueError):
    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")
