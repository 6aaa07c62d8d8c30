"""Joining externally computed metric scores against a stimulus manifest."""

import csv
import io
import warnings

from ..errors import UnknownStimulus


def import_external_metric(csv_source, known_ids, id_column=None, value_column=None):
    """Read (stimulus id, value) rows and join them against known ids.

    csv_source: path or file-like or CSV text. The first column is the id and
    the second the value unless named columns are given. Duplicate ids keep
    the last value (with a warning); ids absent from known_ids raise
    UnknownStimulus listing them all.
    """
    if hasattr(csv_source, "read"):
        fh = csv_source
        close = False
    elif isinstance(csv_source, str) and "\n" in csv_source:
        fh = io.StringIO(csv_source)
        close = False
    else:
        fh = open(csv_source, "r", encoding="utf-8", newline="")
        close = True
    try:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            return {}
        id_idx, val_idx = 0, 1
        if id_column is not None:
            id_idx = header.index(id_column)
        if value_column is not None:
            val_idx = header.index(value_column)
        try:
            float(header[val_idx])
        except (ValueError, IndexError):
            rows = list(reader)  # first line really was a header
        else:
            rows = [header] + list(reader)

        known = set(known_ids)
        values = {}
        duplicates = []
        unknown = []
        for row in rows:
            if not row:
                continue
            sid = row[id_idx].strip()
            value = float(row[val_idx])
            if sid not in known:
                unknown.append(sid)
                continue
            if sid in values:
                duplicates.append(sid)
            values[sid] = value
        if unknown:
            raise UnknownStimulus(f"ids not in the manifest: {sorted(set(unknown))}")
        if duplicates:
            warnings.warn(f"duplicate metric rows (last wins): {sorted(set(duplicates))}")
        return values
    finally:
        if close:
            fh.close()
