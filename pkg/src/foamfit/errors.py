"""Exception types raised by foamfit."""


class FoamfitError(Exception):
    """Base class for all library errors."""


class DomainError(FoamfitError, ValueError):
    """Input outside the admissible domain (non-positive stretch, bad geometry, ...)."""


class SaturationError(FoamfitError, OverflowError):
    """An exponential energy term overflowed."""

    def __init__(self, term_id, message=None):
        self.term_id = term_id
        super().__init__(message or f"term {term_id}: exponential overflow")


class NormalizationError(FoamfitError, ValueError):
    """A loading mode has no non-zero stress to normalize by."""


class TrainingError(FoamfitError, RuntimeError):
    """Loss became non-finite during optimization."""

    def __init__(self, epoch, message=None):
        self.epoch = epoch
        super().__init__(message or f"non-finite loss at epoch {epoch}")


class ModelFormatError(FoamfitError, ValueError):
    """A serialized model document could not be parsed or validated."""
