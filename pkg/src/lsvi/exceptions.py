"""Exception taxonomy shared across the package."""


class LsviError(Exception):
    """Base class for all package errors."""


class DimensionMismatchError(LsviError):
    """Operands have incompatible shapes or lengths."""


class SingularScaleError(LsviError):
    """The scale matrix is singular where an inverse or log-det is required."""


class GridRangeError(LsviError):
    """A table lookup fell outside the tabulated (a, b) ranges."""

    def __init__(self, a: float, b: float, a_range: tuple, b_range: tuple):
        self.a = float(a)
        self.b = float(b)
        super().__init__(
            f"query (a={a!r}, b={b!r}) outside table ranges "
            f"a in [{a_range[0]!r}, {a_range[1]!r}], b in [{b_range[0]!r}, {b_range[1]!r}]"
        )


class ConfigError(LsviError):
    """Malformed experiment configuration."""


class DataError(LsviError):
    """Malformed or inconsistent dataset input."""
