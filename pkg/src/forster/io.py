"""CSV emission/ingestion and the run manifest."""
import csv
import hashlib
import os

import numpy as np

from .errors import DataError, ForsterError


class OutputError(ForsterError, OSError):
    pass


def fmt(value):
    """9 significant digits, fixed representation for identical inputs."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".9g")


def _write_rows(path, header, rows):
    try:
        parent = os.path.dirname(os.path.abspath(path))
        os.makedirs(parent, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\r\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([v if isinstance(v, str) else fmt(v) for v in row])
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def emit_csv(columns, path):
    """Write equal-length columns; ``columns`` maps header (with units) to values."""
    header = list(columns)
    data = [np.atleast_1d(np.asarray(columns[h])) for h in header]
    n = {len(c) for c in data}
    if len(n) > 1:
        raise DataError(f"columns have different lengths {sorted(n)}")
    return _write_rows(path, header, zip(*data))


def emit_grid(outer_name, outer, inner_name, inner, value_name, values, path):
    """Long-form grid: one row per cell, outer index major."""
    values = np.asarray(values)
    if values.shape != (len(outer), len(inner)):
        raise DataError(f"grid values have shape {values.shape}, "
                        f"expected {(len(outer), len(inner))}")
    rows = ((o, i, values[a, b]) for a, o in enumerate(outer)
            for b, i in enumerate(inner))
    return _write_rows(path, [outer_name, inner_name, value_name], rows)


def emit_record(record, path):
    """Flat ``key = value`` text record (used for fit results)."""
    lines = [f"{k} = {fmt(v) if not isinstance(v, str) else v}" for k, v in record.items()]
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def read_csv(path):
    """Return (header, float array of shape (rows, columns))."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise OutputError(f"cannot read {path}: {exc.strerror or exc}") from exc
    if not rows:
        raise DataError(f"{path} is empty")
    header, body = rows[0], [r for r in rows[1:] if r]
    try:
        data = np.array([[float(v) for v in r] for r in body], dtype=float)
    except ValueError as exc:
        raise DataError(f"{path}: non-numeric entry ({exc})") from None
    if data.size and data.shape[1] != len(header):
        raise DataError(f"{path}: row width does not match header")
    return header, data.reshape(len(body), len(header))


def sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(path, items, files, base_dir=None):
    """Flat ``key = value`` manifest followed by a ``files:`` section of ``path sha256``.

    ``items`` is an ordered iterable of (key, value) pairs.
    """
    base_dir = base_dir or os.path.dirname(os.path.abspath(path))
    lines = [f"{k} = {v}" for k, v in items]
    lines.append("files:")
    for f in files:
        lines.append(f"{os.path.relpath(f, base_dir)} {sha256(f)}")
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def read_manifest_files(path):
    """The ``files:`` section as a dict {relative path: sha256}."""
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    out = {}
    if "files:" not in lines:
        return out
    for line in lines[lines.index("files:") + 1:]:
        if line.strip():
            name, digest = line.rsplit(" ", 1)
            out[name] = digest
    return out
