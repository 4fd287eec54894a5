"""Utilities for writing experiment results."""

import csv
import json
import logging
import threading
from pathlib import Path
from typing import Any, Dict, List, Sequence

import matplotlib

matplotlib.use("Agg")
from matplotlib.figure import Figure  # noqa: E402

from .exceptions import OutputError
from .spin_rep import RealArray, SpinSize

logger = logging.getLogger(__name__)

# fixed ids and no timestamp keep the SVG text reproducible
matplotlib.rcParams["svg.hashsalt"] = "spin-processor"
# pyplot-free figures still share font and text caches
_SVG_LOCK = threading.Lock()


def format_value(value: Any) -> str:
    """17 significant digits for floats, plain text otherwise"""
    if isinstance(value, float) or hasattr(value, "dtype") and value.dtype.kind == "f":
        return f"{float(value):.17g}"
    return str(value)


def spin_label(spin: SpinSize) -> str:
    return f"J{spin.j:g}"


def write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> Path:
    """Write a header row plus data rows.

    Args:
        path: Output file; parent directories are created.
        header: Column names.
        rows: One sequence per row, same length as ``header``.

    Returns:
        The written path.
    """
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                if len(row) != len(header):
                    raise ValueError(f"Row has {len(row)} columns, header has {len(header)}")
                writer.writerow([format_value(v) for v in row])
    except OSError as e:
        raise OutputError(f"Cannot write {path}: {e}") from e

    logger.info(f"Wrote {len(rows)} rows to {path}")
    return path


def write_columns(path: Path, columns: Dict[str, RealArray]) -> Path:
    """Write equally long arrays as named CSV columns"""
    header = list(columns)
    lengths = {len(values) for values in columns.values()}
    if len(lengths) != 1:
        raise ValueError(f"Columns have different lengths: {sorted(lengths)}")
    rows: List[List[Any]] = [list(row) for row in zip(*columns.values())]
    return write_csv(path, header, rows)


def write_json(path: Path, payload: Dict[str, Any]) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(payload, f, ensure_ascii=False, indent=2)
    except OSError as e:
        raise OutputError(f"Cannot write {path}: {e}") from e
    logger.info(f"Wrote report to {path}")
    return path


def write_series_svg(
    path: Path, times: RealArray, series: Dict[str, RealArray], title: str
) -> Path:
    """Line plot of J_z/J against t, one line per named series.

    Series named ``reduced`` are dotted and ``classical`` thick, as in the usual
    constrained-versus-classical comparison figure.
    """
    styles = {
        "reduced": {"linestyle": ":", "linewidth": 1.5},
        "classical": {"linestyle": "-", "linewidth": 2.5},
        "exact": {"linestyle": "--", "linewidth": 1.0},
    }
    with _SVG_LOCK:
        figure = Figure(figsize=(6.0, 3.5))
        ax = figure.add_subplot(1, 1, 1)
        for name, values in series.items():
            ax.plot(times, values, label=name, **styles.get(name, {}))
        ax.set_xlabel("t")
        ax.set_ylabel("J_z/J")
        ax.set_title(title)
        ax.legend()
        ax.grid(True)

        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            figure.savefig(path, format="svg", metadata={"Date": None})
        except OSError as e:
            raise OutputError(f"Cannot write {path}: {e}") from e
    logger.info(f"Wrote figure to {path}")
    return path
