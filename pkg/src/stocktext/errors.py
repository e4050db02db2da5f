"""Exception hierarchy shared by every stage of the pipeline.

The CLI maps :class:`ValidationError` to exit code 1 and
:class:`PipelineRuntimeError` to exit code 2.
"""


class StocktextError(Exception):
    """Base class for all package errors."""


class ValidationError(StocktextError, ValueError):
    """Input data or configuration violates a documented precondition."""


class PipelineRuntimeError(StocktextError, RuntimeError):
    """A well-formed run failed while executing (network, divergence, ...)."""
