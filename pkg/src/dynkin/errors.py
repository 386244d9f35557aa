"""Exception types shared across the package."""


class StructureError(ValueError):
    """Structurally malformed input (ragged tables, empty partitions, bad owners).

    Distinct from a *failed check*: a failed check is a well-formed instance
    that violates a semantic condition and is reported, not raised.
    """


class OwnerMismatchError(StructureError):
    """A strategy was used for the wrong player or the wrong filtration shape."""


class CapacityError(RuntimeError):
    """A requested enumeration exceeds the configured cap."""
