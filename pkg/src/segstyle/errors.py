"""Exception types shared across the package.

All inherit ValueError so callers that only care about "bad input" can
catch one base class; the CLI maps them onto distinct exit codes.
"""


class SegstyleError(ValueError):
    """Base class for all segstyle input errors."""


class EmptyLabel(SegstyleError):
    """A semantic label with zero pixels was used where pixels are required."""


class DimensionMismatch(SegstyleError):
    """Images, masks, superpixel maps, or code sets disagree in shape."""


class NonFinite(SegstyleError):
    """A computation produced NaN or infinity."""


class ShapeMismatch(SegstyleError):
    """Paired feature stacks differ in layer count or per-layer shape."""


class EmptyInput(SegstyleError):
    """An empty array was passed where at least one element is required."""


class LengthMismatch(SegstyleError):
    """Parallel lists that must have equal length do not."""


class LabelAbsentInDonor(SegstyleError):
    """A label requested from a donor code set is absent there."""


class CodeLengthMismatch(SegstyleError):
    """Raw code length does not match the superpixel count of its label."""


class SchemaError(SegstyleError):
    """A JSON document does not match its expected schema."""
