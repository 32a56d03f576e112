"""Exception hierarchy shared by every cohexp module.

Each exception carries a short machine-readable ``code`` so the CLI can
emit one-line errors of the form ``error[CODE]: message`` and map the
failure class onto its exit code (input problems exit 2, broken
mathematical contracts exit 3).
"""

from __future__ import annotations


class CohexpError(Exception):
    """Base class for all errors raised by this package."""

    code = "E_INTERNAL"


class ValidationError(CohexpError):
    """Malformed input: bad arities, out-of-range values, unknown kinds."""

    code = "E_INPUT"


class CapacityError(ValidationError):
    """Request exceeds a documented size cap (e.g. vertex enumeration)."""

    code = "E_CAPACITY"


class SerializationError(ValidationError):
    """A document does not conform to the interchange schema."""

    code = "E_FORMAT"


class ContractError(CohexpError):
    """A mathematical contract failed: the requested construction exists
    syntactically but violates a guarantee it is required to provide
    (for example a repair that is still incoherent)."""

    code = "E_CONTRACT"


class TrainingError(ContractError):
    """Training diverged or otherwise failed to produce a usable model."""

    code = "E_TRAINING"
