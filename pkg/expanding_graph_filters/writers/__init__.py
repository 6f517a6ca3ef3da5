"""Writers package."""

from .base import DataWriter
from .csv import CsvWriter

__all__ = [
    "CsvWriter",
    "DataWriter",
]
