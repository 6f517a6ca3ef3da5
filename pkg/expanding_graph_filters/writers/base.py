"""Writer interface for experiment result tables."""

from typing import Protocol

import polars as pl

from expanding_graph_filters.models import WriteResult


class DataWriter(Protocol):
    """Anything that can persist the error, regret and selection tables of a run."""

    def write(self, df: pl.DataFrame, relative_path: str) -> WriteResult:
        """Persist one table under the run directory.

        ``relative_path`` carries the file name, e.g. ``tables/errors.csv``.
        Returns the written location and its row count.
        """
        ...

    def write_tables(self, tables: dict[str, pl.DataFrame]) -> list[WriteResult]:
        """Persist every table of a run, keyed by relative path, in key order."""
        ...
