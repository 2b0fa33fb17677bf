# Run artifacts: JSON documents, CSV tables, binary PGM images and the run summary.
# Every writer goes through a temp file in the target directory followed by an
# atomic rename, so readers never see a partial file.
import csv
import datetime as dt
import io
import json
import logging
import os
import tempfile
from pathlib import Path
from typing import Any, Iterable, Optional

import numpy as np

from nabasin.core.errors import ArtifactError
from nabasin.core.types import RunSummary

log = logging.getLogger("artifacts")


def _utc_now_iso() -> str:
    """UTC timestamp, second precision, with trailing 'Z'."""
    return dt.datetime.now(dt.timezone.utc).replace(microsecond=0, tzinfo=None).isoformat() + "Z"


def _atomic_write(path: Path, data: bytes) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(data)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    except OSError as exc:
        raise ArtifactError(f"cannot write {path}: {exc}") from exc
    log.debug("artifact_written path=%s bytes=%d", path, len(data))
    return path


def _default(obj: Any):
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def write_json(path: Path, payload: Any) -> Path:
    text = json.dumps(payload, indent=2, sort_keys=True, default=_default, allow_nan=True)
    return _atomic_write(path, (text + "\n").encode("utf-8"))


def write_csv(path: Path, rows: Iterable[dict], columns: Optional[list[str]] = None) -> Path:
    rows = list(rows)
    if columns is None:
        columns = list(rows[0].keys()) if rows else []
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n", extrasaction="ignore")
    writer.writeheader()
    for row in rows:
        writer.writerow({key: _cell(row.get(key, "")) for key in columns})
    return _atomic_write(path, buf.getvalue().encode("utf-8"))


def _cell(value: Any) -> str:
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, complex):
        return f"{value.real!r}{value.imag:+.17g}j"
    return str(value)


def write_pgm(path: Path, image: np.ndarray) -> Path:
    """8-bit binary PGM (P5); row 0 is the top of the image."""
    img = np.ascontiguousarray(image, dtype=np.uint8)
    if img.ndim != 2:
        raise ArtifactError(f"PGM needs a 2-d array, got shape {img.shape}")
    rows, cols = img.shape
    header = f"P5\n{cols} {rows}\n255\n".encode("ascii")
    return _atomic_write(path, header + img.tobytes())


def read_pgm(path: Path) -> np.ndarray:
    data = Path(path).read_bytes()
    parts = data.split(b"\n", 3)
    if len(parts) < 4 or parts[0] != b"P5":
        raise ArtifactError(f"{path} is not a binary PGM")
    cols, rows = (int(x) for x in parts[1].split())
    return np.frombuffer(parts[3], dtype=np.uint8).reshape(rows, cols)


def write_summary(out_dir: Path, summary: RunSummary) -> Path:
    """summary.json is the only artifact carrying a timestamp."""
    summary = summary.model_copy(update={"generated_at_iso": _utc_now_iso()})
    return write_json(Path(out_dir) / "summary.json", summary.model_dump())
