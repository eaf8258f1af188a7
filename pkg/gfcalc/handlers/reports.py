"""
报告写入模块
CSV 与 JSON 报告的原子写入（临时文件 + os.replace），键排序，列固定
"""

import csv
import io
import json
import math
import os
import tempfile
from typing import Any, Iterable, List, Optional, Sequence

from pydantic import BaseModel

from ..services.asymptotics import LogSample
from ..utils.exceptions import ReportWriteError
from ..utils.logger import app_logger

SAMPLE_COLUMNS = ("eps", "value_sign", "log_abs")
SUP_COLUMNS = ("eps", "log_eps", "alpha", "sup", "log_sup")


def format_float(value: float) -> str:
    """往返精确的浮点格式"""
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return repr(float(value))


def write_text(path: str, text: str) -> None:
    """原子写入：同目录临时文件 + os.replace"""
    directory = os.path.dirname(os.path.abspath(path))
    try:
        os.makedirs(directory, exist_ok=True)
        with tempfile.NamedTemporaryFile(
            "w", encoding="utf-8", dir=directory, delete=False, newline=""
        ) as tmp_file:
            tmp_file.write(text)
            tmp_path = tmp_file.name
        os.replace(tmp_path, path)
    except OSError as e:
        app_logger.error(f"写入 {path} 失败: {e}")
        raise ReportWriteError(path, str(e))
    app_logger.info(f"报告已写入: {path}")


def to_json_text(payload: Any) -> str:
    """键排序的 JSON 文本；pydantic 模型先转为 JSON 兼容的字典"""
    if isinstance(payload, BaseModel):
        payload = payload.model_dump(mode="json")
    return json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def write_json(path: str, payload: Any) -> None:
    write_text(path, to_json_text(payload))


def _csv_text(columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow(format_float(v) if isinstance(v, float) else v for v in row)
    return buffer.getvalue()


def samples_csv(samples: Sequence[LogSample]) -> str:
    """列：eps, value_sign, log_abs"""
    return _csv_text(SAMPLE_COLUMNS, ((s.eps, s.sign, s.log_abs) for s in samples))


def sup_rows(samples: Sequence[LogSample], alpha: int) -> List[List[Any]]:
    return [[s.eps, s.log_eps, alpha, s.value if not s.is_zero else 0.0, s.log_abs] for s in samples]


def sup_csv(rows: Iterable[Sequence[Any]]) -> str:
    """列：eps, log_eps, alpha, sup, log_sup"""
    return _csv_text(SUP_COLUMNS, rows)


def companion_path(out: str, suffix: str, extension: Optional[str] = None) -> str:
    """由 --out 路径派生同目录的附属文件名，例如 report.json → report.sup.csv"""
    stem, ext = os.path.splitext(out)
    return f"{stem}.{suffix}{extension if extension is not None else ext}"
