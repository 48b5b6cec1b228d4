"""Common exception base for user-facing input errors.

Every error raised for bad input data (as opposed to bugs) derives from
:class:`EvalCardsError` so callers, the CLI in particular, can map the
whole family to a single "user input" exit status.
"""


class EvalCardsError(Exception):
    """Base class for all input-validation errors raised by this package."""
