"""On-disk formats: raw cube + JSON manifest, text label rasters, PGM maps,
trace CSVs, and flat key=value run configs.

All writers go through a temp-file-then-rename step so partially written
files are never observed.
"""

import json
import math
import os
import tempfile

import numpy as np

from .classify import LabelField
from .cube import HsiCube
from .errors import FormatError, NonFiniteData
from .superpixel import SuperpixelPartition

MANIFEST_KEYS = {"height", "width", "bands", "dtype", "layout", "data_path"}

CONFIG_KEYS = {
    "cube": str,
    "labels": str,
    "partition": str,
    "out_dir": str,
    "seed": int,
    "t_max": int,
    "superpixels": int,
    "delta": float,
    "m_split": int,
    "lambda": float,
    "beta": float,
    "mu0": float,
    "rho": float,
    "mu_max": float,
    "eps": float,
    "max_iter": int,
    "classifier": str,
    "knn_k": int,
    "percent": float,
}


def _atomic_write_bytes(path, payload):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _atomic_write_text(path, text):
    _atomic_write_bytes(path, text.encode("utf-8"))


def load_cube(manifest_path):
    """Read a cube described by a JSON manifest next to its raw payload.

    The payload is little-endian float32, band-sequential: band-major, then
    row-major within each band."""
    try:
        with open(manifest_path, "r", encoding="utf-8") as fh:
            manifest = json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{manifest_path}: invalid JSON: {exc}") from exc
    if not isinstance(manifest, dict) or set(manifest) != MANIFEST_KEYS:
        raise FormatError(f"{manifest_path}: manifest must have keys {sorted(MANIFEST_KEYS)}")
    if manifest["dtype"] != "f32le":
        raise FormatError(f"{manifest_path}: unsupported dtype {manifest['dtype']!r}")
    if manifest["layout"] != "bsq":
        raise FormatError(f"{manifest_path}: unsupported layout {manifest['layout']!r}")
    try:
        h, w, b = int(manifest["height"]), int(manifest["width"]), int(manifest["bands"])
    except (TypeError, ValueError) as exc:
        raise FormatError(f"{manifest_path}: non-integer dimensions") from exc
    if h < 1 or w < 1 or b < 1:
        raise FormatError(f"{manifest_path}: dimensions must be positive")
    data_path = os.path.join(os.path.dirname(os.path.abspath(manifest_path)), manifest["data_path"])
    expected = h * w * b * 4
    actual = os.path.getsize(data_path)
    if actual != expected:
        raise FormatError(
            f"{data_path}: raw size {actual} does not match {b}x{h}x{w} f32 ({expected})"
        )
    raw = np.fromfile(data_path, dtype="<f4")
    if not np.isfinite(raw).all():
        raise NonFiniteData(f"{data_path}: NaN or Inf entries")
    return HsiCube(h, w, raw.reshape(b, h * w).astype(np.float64))


def write_cube(cube, manifest_path, data_filename=None):
    """Write a cube as raw f32le BSQ plus its manifest."""
    if data_filename is None:
        stem = os.path.splitext(os.path.basename(manifest_path))[0]
        data_filename = stem + ".raw"
    data_path = os.path.join(os.path.dirname(os.path.abspath(manifest_path)), data_filename)
    payload = np.ascontiguousarray(cube.x, dtype="<f4").tobytes()
    _atomic_write_bytes(data_path, payload)
    manifest = {
        "height": cube.height,
        "width": cube.width,
        "bands": cube.bands,
        "dtype": "f32le",
        "layout": "bsq",
        "data_path": data_filename,
    }
    _atomic_write_text(manifest_path, json.dumps(manifest, indent=2) + "\n")


def load_raster(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            tokens = fh.readline().split()
            if len(tokens) != 2:
                raise FormatError(f"{path}: first line must be 'height width'")
            h, w = int(tokens[0]), int(tokens[1])
            rows = []
            for i in range(h):
                row = fh.readline().split()
                if len(row) != w:
                    raise FormatError(f"{path}: row {i} has {len(row)} of {w} values")
                rows.append([int(v) for v in row])
    except ValueError as exc:
        raise FormatError(f"{path}: non-integer raster value") from exc
    grid = np.array(rows, dtype=np.int64)
    if (grid < 0).any():
        raise FormatError(f"{path}: raster values must be non-negative")
    return grid


def _densify(values, keep_zero):
    """Remap values to consecutive ids by first appearance in scan order.
    With keep_zero, 0 stays 0 and classes become 1..C."""
    mapping = {}
    flat = values.ravel()
    out = np.empty_like(flat)
    offset = 1 if keep_zero else 0
    for i, v in enumerate(flat):
        v = int(v)
        if keep_zero and v == 0:
            out[i] = 0
            continue
        if v not in mapping:
            mapping[v] = len(mapping) + offset
        out[i] = mapping[v]
    return out.reshape(values.shape), mapping


def load_labels(path):
    """Read a class raster; class ids are re-densified to 1..C in order of
    first appearance (0 stays unlabeled).  Returns (field, mapping) where
    mapping sends original ids to dense ids."""
    grid = load_raster(path)
    dense, mapping = _densify(grid, keep_zero=True)
    return LabelField(dense), mapping


def load_partition(path):
    """Read a superpixel raster; ids are re-densified to 0..S-1 in order of
    first appearance."""
    grid = load_raster(path)
    dense, mapping = _densify(grid, keep_zero=False)
    return SuperpixelPartition(dense, len(mapping))


def write_raster(values, path):
    """Write an integer raster in the text format read back by load_labels
    and load_partition."""
    values = np.asarray(values)
    h, w = values.shape
    lines = [f"{h} {w}"]
    lines.extend(" ".join(str(int(v)) for v in row) for row in values)
    _atomic_write_text(path, "\n".join(lines) + "\n")


def class_gray_levels(n_classes):
    """Gray level for each class id 0..C: 0 for unlabeled, then
    round(255 * c / C) with half-up rounding."""
    levels = [0]
    levels.extend(int(math.floor(255.0 * c / n_classes + 0.5)) for c in range(1, n_classes + 1))
    return levels


def render_map(predictions, path, n_classes=None, class_ids=None):
    """Write a binary PGM classification map plus a '<path>.palette.txt'
    file listing 'class gray' pairs.  Injective for up to 255 classes.

    class_ids optionally renames class c in the palette (e.g. back to the
    ids used in the source label raster)."""
    labels = predictions.labels
    if n_classes is None:
        n_classes = max(1, int(labels.max()))
    levels = np.array(class_gray_levels(n_classes), dtype=np.uint8)
    image = levels[labels]
    h, w = labels.shape
    header = f"P5\n{w} {h}\n255\n".encode("ascii")
    _atomic_write_bytes(path, header + image.tobytes())
    if class_ids is None:
        class_ids = range(n_classes + 1)
    palette = "\n".join(f"{c} {g}" for c, g in zip(class_ids, levels)) + "\n"
    _atomic_write_text(path + ".palette.txt", palette)


def write_trace_csv(trace, path):
    """Write one solver trace as CSV with columns iter, r1, r2, objective, mu."""
    lines = ["iter,r1,r2,objective,mu"]
    for i in range(trace.iterations):
        lines.append(
            f"{i + 1},{trace.r1[i]!r},{trace.r2[i]!r},{trace.objective[i]!r},{trace.mu[i]!r}"
        )
    _atomic_write_text(path, "\n".join(lines) + "\n")


def load_config(path):
    """Parse a flat 'key = value' config file.  Blank lines and '#' comments
    are allowed; unknown keys are rejected."""
    values = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            if "=" not in stripped:
                raise FormatError(f"{path}:{lineno}: expected 'key = value'")
            key, raw = (part.strip() for part in stripped.split("=", 1))
            if key not in CONFIG_KEYS:
                raise FormatError(f"{path}:{lineno}: unknown key {key!r}")
            try:
                values[key] = CONFIG_KEYS[key](raw)
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: bad value for {key!r}: {raw!r}") from exc
    return values


def write_metrics_json(report, path):
    _atomic_write_text(path, json.dumps(report.to_json_dict(), indent=2) + "\n")
