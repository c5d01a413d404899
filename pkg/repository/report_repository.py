import csv
import logging
from pathlib import Path
from typing import Iterable

from pydantic import BaseModel

from custom_utilities.custom_exception import DataLoadError

logger = logging.getLogger(__name__)


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


class ReportRepository:
    """Writes pydantic rows as CSV"""

    def write_rows(self, path: str | Path, rows: Iterable[BaseModel], columns: list[str] | None = None) -> int:
        rows = list(rows)
        if columns is None:
            columns = list(type(rows[0]).model_fields) if rows else []
        path = Path(path)
        try:
            if path.parent and not path.parent.exists():
                path.parent.mkdir(parents=True, exist_ok=True)
            with open(path, "w", newline="") as handle:
                writer = csv.writer(handle)
                writer.writerow(columns)
                for row in rows:
                    data = row.model_dump()
                    writer.writerow([_cell(data.get(column)) for column in columns])
        except OSError as exc:
            raise DataLoadError(f"cannot write report: {exc.strerror}", path=path) from exc
        logger.info("wrote %d rows to %s", len(rows), path)
        return len(rows)

    def read_rows(self, path: str | Path) -> list[dict[str, str]]:
        with open(path, newline="") as handle:
            return list(csv.DictReader(handle))
