"""
Exception hierarchy shared by the library and the CLI
"""
from typing import Optional


class OTBoundsError(Exception):
    """Base class for all toolkit errors"""


class DistributionError(OTBoundsError, ValueError):
    """Invalid probability data or mismatched dimensions"""


class ParseError(OTBoundsError, ValueError):
    """Malformed channel or joint-distribution text"""

    def __init__(self, message: str, line_number: Optional[int] = None):
        self.line_number = line_number
        self.message = message
        prefix = f"line {line_number}: " if line_number is not None else ""
        super().__init__(f"{prefix}{message}")


class BudgetExceededError(OTBoundsError, ValueError):
    """Brute-force lattice search would exceed the evaluation budget"""


class UsageError(OTBoundsError):
    """Invalid command-line usage"""
