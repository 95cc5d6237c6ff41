class ValidationError(ValueError):
    """Input violates a documented precondition or invariant."""


class PNMParseError(ValueError):
    """Malformed PNM data. ``offset`` is the byte position of the fault."""

    def __init__(self, message, offset):
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset


class UnsupportedFormatError(ValueError):
    """Well-formed PNM that this package deliberately does not read."""


class SchemaError(ValidationError):
    """Serialized hypergraph does not match the JSON schema.

    ``path`` is a JSONPath-like locator such as ``$.hyperedges[2].runs[0]``.
    """

    def __init__(self, message, path):
        super().__init__(f"{path}: {message}")
        self.path = path
