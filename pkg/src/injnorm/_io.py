"""JSON/CSV emission with fixed 17-significant-digit floats.

The stdlib encoder prints the shortest round-trip repr, whose length varies.
Reports are compared byte for byte, so every float goes through ``%.17g``.
"""

import io
import json
import math

import numpy as np


def _float_text(x):
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return "%.17g" % x


def _plain(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, tuple):
        return list(obj)
    return obj


def _encode(obj, indent, level, out):
    obj = _plain(obj)
    pad = " " * (indent * (level + 1))
    close = " " * (indent * level)
    if obj is None:
        out.write("null")
    elif obj is True:
        out.write("true")
    elif obj is False:
        out.write("false")
    elif isinstance(obj, int):
        out.write(str(obj))
    elif isinstance(obj, float):
        out.write(_float_text(obj))
    elif isinstance(obj, str):
        out.write(json.dumps(obj))
    elif isinstance(obj, dict):
        if not obj:
            out.write("{}")
            return
        out.write("{\n")
        for i, (key, value) in enumerate(obj.items()):
            out.write(pad + json.dumps(str(key)) + ": ")
            _encode(value, indent, level + 1, out)
            out.write(",\n" if i < len(obj) - 1 else "\n")
        out.write(close + "}")
    elif isinstance(obj, list):
        if not obj:
            out.write("[]")
            return
        if all(not isinstance(_plain(v), (dict, list)) for v in obj):
            out.write("[")
            for i, value in enumerate(obj):
                _encode(value, indent, level + 1, out)
                if i < len(obj) - 1:
                    out.write(", ")
            out.write("]")
            return
        out.write("[\n")
        for i, value in enumerate(obj):
            out.write(pad)
            _encode(value, indent, level + 1, out)
            out.write(",\n" if i < len(obj) - 1 else "\n")
        out.write(close + "]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent=2):
    buf = io.StringIO()
    _encode(obj, indent, 0, buf)
    buf.write("\n")
    return buf.getvalue()


def write_json(obj, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(obj))


def read_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def csv_text(header, rows):
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for value in row:
            value = _plain(value)
            cells.append(_float_text(value) if isinstance(value, float) else str(value))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"
