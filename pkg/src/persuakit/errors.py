"""Exception hierarchy shared across the toolkit.

Contract violations (bad labels, malformed files, misaligned matrices)
raise ValidationError; anything involving an external provider raises
ProviderError. The CLI maps these onto its exit codes.
"""
from __future__ import annotations


class PersuakitError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(PersuakitError):
    """A contract or format violation in user-supplied data."""


class ProviderError(PersuakitError):
    """An external paraphrase/translation provider failed."""


class PlanExecutionError(ProviderError):
    """A provider failed mid-plan; carries the instances built so far."""

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial
