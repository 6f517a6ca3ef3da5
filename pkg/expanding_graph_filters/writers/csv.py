"""CSV writer implementation."""

import logging
from pathlib import Path

import polars as pl

from expanding_graph_filters.models import WriteResult

logger = logging.getLogger(__name__)


class CsvWriter:
    """Write DataFrames to local CSV files.

    Implements the DataWriter protocol.
    """

    def __init__(self, base_path: str | Path):
        self.base_path = Path(base_path)

    def write(self, df: pl.DataFrame, relative_path: str) -> WriteResult:
        """Write DataFrame to a single CSV file.

        Args:
            df: DataFrame to write
            relative_path: Path including filename (e.g., runs/filter/dogf/realization_0/steps.csv)
        """
        full_path = self.base_path / relative_path
        full_path.parent.mkdir(parents=True, exist_ok=True)

        df.write_csv(full_path)

        logger.info(f"Wrote {len(df)} records to {full_path}")
        return WriteResult(path=str(full_path), records_written=len(df))

    def write_tables(self, tables: dict[str, pl.DataFrame]) -> list[WriteResult]:
        """Write each table to its relative path, in sorted path order."""
        return [self.write(tables[path], path) for path in sorted(tables)]
