"""Exception hierarchy shared by every module of the package."""


class CoverEmbedError(Exception):
    """Base class for all errors raised by coverembed."""


class ExprSyntaxError(CoverEmbedError):
    """Malformed expression text.  ``position`` is a 0-based column."""

    def __init__(self, message, position=None):
        self.position = position
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)


class UnknownIdentifierError(ExprSyntaxError):
    pass


class ArityError(ExprSyntaxError):
    pass


class ExprEvaluationError(CoverEmbedError):
    """Domain error while evaluating an expression; carries the offending node."""

    def __init__(self, message, node=None):
        self.node = node
        if node is not None:
            message = f"{message} in subexpression '{node}'"
        super().__init__(message)


class MetricError(CoverEmbedError):
    pass


class SpiralError(CoverEmbedError):
    pass


class GroupError(CoverEmbedError):
    pass


class OracleError(CoverEmbedError):
    pass


class ExtensionUnavailable(CoverEmbedError):
    """An element of the group cannot be extended to the ambient space."""


class ConfigError(CoverEmbedError):
    pass
