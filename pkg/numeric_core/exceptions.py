"""
Shared exception types for the numerical toolkit
"""


class ArgumentError(ValueError):
    """Raised when an operation is called with arguments outside its domain"""
