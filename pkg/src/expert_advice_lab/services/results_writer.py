"""rounds.csv / summary.json output and the matching CSV reader.

Floats are written with ``repr`` (what ``csv`` does for ``float``), which
round-trips exactly, so a parsed row compares equal to the record it came from.
"""

import csv
import logging
import time
from pathlib import Path
from typing import Iterable, List, Union

from pydantic import BaseModel

from ..exceptions import InputError
from .protocols import RoundRecord

logger = logging.getLogger(__name__)

ROUNDS_FILE = "rounds.csv"
SUMMARY_FILE = "summary.json"

CSV_COLUMNS = [
    "seed",
    "t",
    "expert",
    "action",
    "loss",
    "q_value",
    "epoch_exponent",
    "restart_flag",
    "p_max",
    "cumulative_regret",
]


def _to_row(record: RoundRecord) -> list:
    return [
        record.seed,
        record.t,
        record.expert,
        record.action,
        float(record.loss),
        float(record.q_value),
        "" if record.epoch_exponent is None else record.epoch_exponent,
        int(record.restarted),
        float(record.p_max),
        float(record.cumulative_regret),
    ]


def _from_row(row: dict) -> RoundRecord:
    return RoundRecord(
        seed=int(row["seed"]),
        t=int(row["t"]),
        expert=int(row["expert"]),
        action=int(row["action"]),
        loss=float(row["loss"]),
        q_value=float(row["q_value"]),
        epoch_exponent=int(row["epoch_exponent"]) if row["epoch_exponent"] else None,
        restarted=row["restart_flag"] == "1",
        p_max=float(row["p_max"]),
        cumulative_regret=float(row["cumulative_regret"]),
    )


class ResultsWriter:
    @staticmethod
    def write_rounds(path: Union[str, Path], records: Iterable[RoundRecord]) -> Path:
        start = time.time()
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        count = 0
        with path.open("w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)
            for record in records:
                writer.writerow(_to_row(record))
                count += 1
        logger.info(f"Wrote {count} rows to {path} in {time.time() - start:.3f}s")
        return path

    @staticmethod
    def read_rounds(path: Union[str, Path]) -> List[RoundRecord]:
        path = Path(path)
        if not path.is_file():
            raise FileNotFoundError(f"Rounds file not found: {path}")
        with path.open("r", encoding="utf-8", newline="") as handle:
            reader = csv.DictReader(handle)
            if reader.fieldnames != CSV_COLUMNS:
                raise InputError(f"{path}: unexpected columns {reader.fieldnames}")
            return [_from_row(row) for row in reader]

    @staticmethod
    def write_summary(path: Union[str, Path], summary: BaseModel) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(summary.model_dump_json(indent=2) + "\n", encoding="utf-8")
        logger.info(f"Wrote summary to {path}")
        return path
