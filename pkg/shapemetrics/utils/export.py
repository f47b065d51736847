"""
Utilities for turning files into schema objects and schema objects into
files: point CSVs, metric rows, PGM/PNG images, tree and suite reports.
"""
import csv
import io
import json
import logging
from pathlib import Path
from typing import Iterable, List, Optional, TextIO, Tuple, Union

import numpy as np

from shapemetrics.schemas.experiment import SuiteReport
from shapemetrics.schemas.metrics import METRIC_NAMES, MetricVector
from shapemetrics.schemas.points import BinaryImage, PointSet
from shapemetrics.schemas.tree import TreeModel

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

METRICS_HEADER: Tuple[str, ...] = METRIC_NAMES + ("label",)
RESULTS_HEADER: Tuple[str, ...] = ("experiment", "accuracy", "ci_low", "ci_high", "n")
USAGE_HEADER: Tuple[str, ...] = ("metric", "count")


class ExportError(Exception):
    """A file cannot be read or has the wrong layout."""


def _fmt(value: float) -> str:
    # repr round-trips and is identical across runs
    return repr(float(value))


# --------------------------------------------------------------------------- #
#  Point data                                                                 #
# --------------------------------------------------------------------------- #
def read_points_csv(path: PathLike) -> PointSet:
    """Read a two-column `x,y` CSV (header required)."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames[:2]] != ["x", "y"]:
            raise ExportError(f"{path}: expected a header starting with 'x,y'")
        try:
            rows = [(float(r["x"]), float(r["y"])) for r in reader]
        except (TypeError, ValueError) as exc:
            raise ExportError(f"{path}: line {reader.line_num}: {exc}") from exc
    logger.debug("Read %d points from %s", len(rows), path)
    return PointSet(points=rows)


def write_points_csv(points: PointSet, out: Union[PathLike, TextIO]) -> None:
    """Write `x,y` rows to a path or an open text stream."""
    def _write(fh: TextIO) -> None:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["x", "y"])
        writer.writerows((_fmt(x), _fmt(y)) for x, y in points.points)

    if hasattr(out, "write"):
        _write(out)
        return
    _ensure_parent(out)
    with open(out, "w", newline="", encoding="utf-8") as fh:
        _write(fh)


# --------------------------------------------------------------------------- #
#  Metric rows                                                                #
# --------------------------------------------------------------------------- #
def metrics_csv(vectors: Iterable[MetricVector], labels: Optional[Iterable[Optional[str]]] = None) -> str:
    vectors = list(vectors)
    labels = list(labels) if labels is not None else [None] * len(vectors)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(METRICS_HEADER)
    for vec, label in zip(vectors, labels):
        writer.writerow([_fmt(v) for v in vec.as_tuple()] + ["" if label is None else label])
    return buf.getvalue()


def metrics_json(vectors: Iterable[MetricVector], labels: Optional[Iterable[Optional[str]]] = None) -> str:
    vectors = list(vectors)
    labels = list(labels) if labels is not None else [None] * len(vectors)
    return json.dumps([vec.to_record(label) for vec, label in zip(vectors, labels)], indent=2)


# --------------------------------------------------------------------------- #
#  Images                                                                     #
# --------------------------------------------------------------------------- #
def _display_array(img: BinaryImage) -> np.ndarray:
    """uint8 grid, white = 255, top row = largest y."""
    return np.flipud(img.pixels).astype(np.uint8) * 255


def to_pgm_bytes(img: BinaryImage) -> bytes:
    """Binary PGM (P5, maxval 255)."""
    header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
    return header + _display_array(img).tobytes()


def write_pgm(img: BinaryImage, path: PathLike) -> None:
    _ensure_parent(path)
    Path(path).write_bytes(to_pgm_bytes(img))


def write_png(img: BinaryImage, path: PathLike) -> None:
    from PIL import Image  # optional dependency, only needed for PNG output

    _ensure_parent(path)
    Image.fromarray(_display_array(img)).save(path, format="PNG")


# --------------------------------------------------------------------------- #
#  Trees and reports                                                          #
# --------------------------------------------------------------------------- #
def tree_json(model: TreeModel) -> str:
    return model.model_dump_json(indent=2, exclude_none=True)


def results_csv(report: SuiteReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(RESULTS_HEADER)
    for r in report.results:
        writer.writerow([r.name, _fmt(r.accuracy), _fmt(r.ci_low), _fmt(r.ci_high), r.n_validation])
    return buf.getvalue()


def usage_csv(report: SuiteReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(USAGE_HEADER)
    for metric, count in report.usage.items():
        writer.writerow([metric, count])
    return buf.getvalue()


def write_suite_outputs(report: SuiteReport, out_dir: PathLike, dump_trees: bool = False) -> List[Path]:
    """results.csv, usage.csv, report.json and optionally trees/<experiment>.json under out_dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, text in (
        ("results.csv", results_csv(report)),
        ("usage.csv", usage_csv(report)),
        ("report.json", report.model_dump_json(indent=2)),
    ):
        (out / name).write_text(text, encoding="utf-8")
        written.append(out / name)
    if dump_trees:
        (out / "trees").mkdir(exist_ok=True)
        for r in report.results:
            path = out / "trees" / f"{r.name}.json"
            path.write_text(tree_json(r.tree), encoding="utf-8")
            written.append(path)
    logger.info("Wrote %d report files to %s", len(written), out)
    return written


def _ensure_parent(path: PathLike) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
