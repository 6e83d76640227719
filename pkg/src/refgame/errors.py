"""Shared exception type for data and domain errors."""


class DataError(ValueError):
    """Invalid input data or an operation applied outside its domain.

    Everything user-fixable raises this: malformed resource files,
    vocabulary mismatches, degenerate configurations. Programming
    errors keep their native exception types.
    """
