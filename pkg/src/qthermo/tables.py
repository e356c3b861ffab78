"""Deterministic CSV output (17 significant digits, '.' decimal separator)."""
import csv
import io
from pathlib import Path


def format_number(x):
    return f"{float(x):.17g}"


def render_table(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_number(x) for x in row])
    return buf.getvalue()


def write_table(path, header, rows):
    text = render_table(header, rows)
    if path is None:
        return text
    Path(path).write_text(text, encoding="utf-8")
    return text
