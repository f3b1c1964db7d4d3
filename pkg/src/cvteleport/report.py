"""CSV output with a '#'-prefixed configuration header."""

from __future__ import annotations

import os
from pathlib import Path


def header_lines(config: dict) -> str:
    return "".join(f"# {k}={config[k]}\n" for k in config)


def write_csv(path: str | os.PathLike, config: dict, body: str) -> Path:
    """Write ``body`` (CSV text) preceded by one ``# key=value`` line per config entry.

    Output is byte-stable for identical inputs: keys keep insertion order and
    numbers are expected already formatted with ``repr``.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="ascii") as fh:
        fh.write(header_lines(config))
        fh.write(body)
    return path


def read_csv_rows(path: str | os.PathLike) -> tuple[dict, list[dict]]:
    """Inverse of :func:`write_csv`: ``(config, rows)`` with values as strings."""
    import csv
    config, lines = {}, []
    with open(path, encoding="ascii") as fh:
        for line in fh:
            if line.startswith("#"):
                k, _, v = line[1:].strip().partition("=")
                config[k] = v
            else:
                lines.append(line)
    return config, list(csv.DictReader(lines))
