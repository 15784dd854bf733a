import csv
import logging
from pathlib import Path
from typing import Iterable, List, Optional, Tuple

import pandas as pd
from pydantic import ValidationError

from frugal.connectors.artifacts import save_frame
from frugal.errors import DatasetError
from frugal.models import Corpus, RawDocument
from frugal.services.corpus import build_corpus

logger = logging.getLogger(__name__)

COLUMNS = ["id", "text", "severity"]


class CsvDatasetReader:
    """
    Bug-report CSV ingestion: UTF-8, header row `id,text,severity`, RFC 4180
    quoting (text may span lines inside quotes). Errors name the physical
    line a record starts on, counting the header as line 1.
    """

    def __init__(self, path: str):
        self.path = Path(path)
        self.name = self.path.stem

    def _read_records(self) -> List[Tuple[int, List[str]]]:
        """(first physical line, fields) for every non-blank record, header included."""
        if not self.path.exists():
            raise DatasetError(f"dataset file not found: {self.path}")

        records = []
        last_line = 0
        try:
            with open(self.path, "r", encoding="utf-8-sig", newline="") as f:
                reader = csv.reader(f, strict=True)
                for fields in reader:
                    start, last_line = last_line + 1, reader.line_num
                    if fields:
                        records.append((start, fields))
        except csv.Error as e:
            raise DatasetError(f"malformed CSV row at line {last_line + 1}: {e}") from e
        except UnicodeDecodeError as e:
            raise DatasetError(f"{self.path} is not UTF-8: {e}") from e
        return records

    def _read_frame(self) -> Tuple[pd.DataFrame, List[int]]:
        records = self._read_records()
        if not records:
            raise DatasetError("no documents")

        _, header = records[0]
        unknown = [c for c in header if c not in COLUMNS]
        if unknown:
            raise DatasetError(f"unknown column(s): {', '.join(unknown)}")
        missing = [c for c in COLUMNS if c not in header]
        if missing:
            raise DatasetError(f"missing column(s): {', '.join(missing)}")
        if len(set(header)) != len(header):
            raise DatasetError(f"repeated column in header: {','.join(header)}")

        for line, fields in records[1:]:
            if len(fields) != len(header):
                raise DatasetError(
                    f"malformed CSV row at line {line}: expected {len(header)} fields, found {len(fields)}"
                )

        frame = pd.DataFrame([fields for _, fields in records[1:]], columns=header, dtype=str)
        return frame.reindex(columns=COLUMNS), [line for line, _ in records[1:]]

    def fetch_reports(self) -> List[RawDocument]:
        frame, lines = self._read_frame()
        if frame.empty:
            raise DatasetError("no documents")

        reports = []
        for line, row in zip(lines, frame.itertuples(index=False)):
            if not row.id.strip():
                raise DatasetError(f"malformed CSV row at line {line}: empty id")
            if not row.severity.strip():
                raise DatasetError(f"malformed CSV row at line {line}: empty severity")
            try:
                reports.append(RawDocument(id=row.id.strip(), text=row.text, severity=row.severity.strip()))
            except ValidationError as e:
                raise DatasetError(f"malformed CSV row at line {line}: {e}") from e

        logger.info(f"Read {len(reports)} reports from {self.path}")
        return reports

    def load_corpus(self, min_doc_freq: int = 1, stopwords: Optional[Iterable[str]] = None) -> Corpus:
        return build_corpus(self.fetch_reports(), name=self.name, min_doc_freq=min_doc_freq, stopwords=stopwords)


def write_reports(path: str, reports: Iterable[RawDocument]) -> Path:
    """Writes reports in the same CSV layout the reader accepts."""
    frame = pd.DataFrame([r.model_dump() for r in reports], columns=COLUMNS)
    return save_frame(path, frame)
