"""Exception types shared across the package."""


class TagTopicsError(Exception):
    """Base class for all package-specific errors."""


class DataError(TagTopicsError):
    """Malformed or inconsistent input data (files, vocabularies, ids)."""


class ConfigError(TagTopicsError, ValueError):
    """Invalid configuration or argument combination."""


class DegeneracyError(TagTopicsError, ArithmeticError):
    """A probability computation lost all support (all-zero numerator)."""
