"""Superpixel segmentation and classification-guided refinement.

Segmentation is a SLIC-style k-means over (value, row, col) on a scalar
base image, followed by 4-connectivity enforcement.  Refinement splits
"noisy" superpixels — those whose dominant predicted class covers less than
a threshold fraction of their pixels — by re-segmenting the smallest
enclosing square around them, restricted to the superpixel's own pixels.

Everything here is deterministic; the seed arguments exist for interface
stability but no random numbers are drawn.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import DegenerateInput

COMPACTNESS = 0.1
KMEANS_SWEEPS = 10

_FOUR_CONNECTED = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]])


@dataclass
class SuperpixelPartition:
    """Per-pixel superpixel ids, contiguous 0..count-1."""

    labels: np.ndarray
    count: int

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.int64)

    @property
    def shape(self):
        return self.labels.shape

    def validate(self):
        """Check coverage, id contiguity, non-emptiness, and 4-connectivity."""
        sizes = np.bincount(self.labels.ravel(), minlength=self.count)
        if self.labels.min() < 0 or self.labels.max() >= self.count:
            raise ValueError("superpixel ids out of range")
        if sizes.size != self.count or (sizes == 0).any():
            raise ValueError("superpixel ids must be contiguous and non-empty")
        for sid in range(self.count):
            _, parts = ndimage.label(self.labels == sid, structure=_FOUR_CONNECTED)
            if parts != 1:
                raise ValueError(f"superpixel {sid} is not 4-connected")


def project_base_image(cube):
    """Leading principal component of the pixel spectra, min-max scaled to
    [0, 1] on the image grid.

    The component's sign is fixed so that its largest-magnitude band loading
    is positive.  Degenerate (constant) cubes map to an all-0.5 image.
    """
    x = cube.x
    centered = x - x.mean(axis=1, keepdims=True)
    cov = (centered @ centered.T) / x.shape[1]
    _, vecs = np.linalg.eigh(cov)
    u = vecs[:, -1]
    if u[np.argmax(np.abs(u))] < 0:
        u = -u
    scores = u @ centered
    span = scores.max() - scores.min()
    if span == 0.0:
        return np.full((cube.height, cube.width), 0.5)
    return ((scores - scores.min()) / span).reshape(cube.height, cube.width)


def _grid_shape(h, w, target):
    """Rows x cols of seed centers whose product is as close to target as
    possible, preferring cells that match the window's aspect ratio."""
    best = None
    ideal_rows = math.sqrt(target * h / w)
    for rows in range(1, min(h, target) + 1):
        cols = min(w, max(1, round(target / rows)))
        key = (abs(rows * cols - target), abs(rows - ideal_rows), rows)
        if best is None or key < best[0]:
            best = (key, rows, cols)
    return best[1], best[2]


def _init_centers(values, rows, cols):
    h, w = values.shape
    r = (np.arange(rows) + 0.5) * (h / rows) - 0.5
    c = (np.arange(cols) + 0.5) * (w / cols) - 0.5
    rr, cc = np.meshgrid(r, c, indexing="ij")
    rr = rr.ravel()
    cc = cc.ravel()
    ri = np.clip(np.round(rr).astype(int), 0, h - 1)
    ci = np.clip(np.round(cc).astype(int), 0, w - 1)
    return np.stack([values[ri, ci], rr, cc], axis=1)


def _kmeans_sweeps(values, mask, centers, step):
    """Windowed k-means assignments in (value, row, col) space.

    Distances are d_value^2 + COMPACTNESS^2 * d_spatial^2 / step^2; each
    center only competes for pixels within twice its grid step, as in SLIC.
    Returns labels (-1 outside mask).
    """
    h, w = values.shape
    half = max(1, int(math.ceil(2.0 * step)))
    comp2 = (COMPACTNESS / step) ** 2
    labels = np.full((h, w), -1, dtype=np.int64)
    for _ in range(KMEANS_SWEEPS):
        dist = np.full((h, w), np.inf)
        labels.fill(-1)
        for k in range(centers.shape[0]):
            vk, rk, ck = centers[k]
            r0 = max(0, int(rk) - half)
            r1 = min(h, int(rk) + half + 1)
            c0 = max(0, int(ck) - half)
            c1 = min(w, int(ck) + half + 1)
            rr = np.arange(r0, r1, dtype=np.float64)[:, None]
            cc = np.arange(c0, c1, dtype=np.float64)[None, :]
            d2 = (values[r0:r1, c0:c1] - vk) ** 2 + comp2 * (
                (rr - rk) ** 2 + (cc - ck) ** 2
            )
            better = mask[r0:r1, c0:c1] & (d2 < dist[r0:r1, c0:c1])
            dist[r0:r1, c0:c1][better] = d2[better]
            labels[r0:r1, c0:c1][better] = k
        _assign_orphan_windows(values, mask, labels, centers, comp2)
        centers = _recenter(values, mask, labels, centers)
    return labels


def _assign_orphan_windows(values, mask, labels, centers, comp2):
    """Pixels outside every search window (possible once centers drift) get
    the globally nearest center."""
    missing = mask & (labels < 0)
    if not missing.any():
        return
    rs, cs = np.nonzero(missing)
    v = values[rs, cs]
    d2 = (
        (v[:, None] - centers[None, :, 0]) ** 2
        + comp2 * (rs[:, None] - centers[None, :, 1]) ** 2
        + comp2 * (cs[:, None] - centers[None, :, 2]) ** 2
    )
    labels[rs, cs] = np.argmin(d2, axis=1)


def _recenter(values, mask, labels, centers):
    flat = labels[mask]
    rs, cs = np.nonzero(mask)
    k = centers.shape[0]
    counts = np.bincount(flat, minlength=k).astype(np.float64)
    out = centers.copy()
    occupied = counts > 0
    sums_v = np.bincount(flat, weights=values[mask], minlength=k)
    sums_r = np.bincount(flat, weights=rs.astype(np.float64), minlength=k)
    sums_c = np.bincount(flat, weights=cs.astype(np.float64), minlength=k)
    out[occupied, 0] = sums_v[occupied] / counts[occupied]
    out[occupied, 1] = sums_r[occupied] / counts[occupied]
    out[occupied, 2] = sums_c[occupied] / counts[occupied]
    return out


def _compact_labels(labels, mask):
    """Relabel masked entries to 0..S-1 by first appearance in scan order."""
    flat = labels[mask]
    seen = {}
    remap = np.empty(flat.size, dtype=np.int64)
    for i, v in enumerate(flat):
        if v not in seen:
            seen[v] = len(seen)
        remap[i] = seen[v]
    out = np.full(labels.shape, -1, dtype=np.int64)
    out[mask] = remap
    return out, len(seen)


def _enforce_connectivity(labels, mask):
    """Keep each label's largest 4-connected component and merge every other
    component into the largest 4-adjacent region inside mask."""
    out = labels.copy()
    orphans = []
    for sid in np.unique(labels[mask]):
        comp, n_comp = ndimage.label(labels == sid, structure=_FOUR_CONNECTED)
        if n_comp <= 1:
            continue
        sizes = np.bincount(comp.ravel())[1:]
        main = int(np.argmax(sizes)) + 1
        for part in range(1, n_comp + 1):
            if part != main:
                pix = np.nonzero(comp == part)
                orphans.append(pix)
                out[pix] = -1
    if not orphans:
        return out
    # Deterministic order: by smallest flat pixel index.
    h, w = labels.shape
    orphans.sort(key=lambda pix: int(pix[0][0] * w + pix[1][0]))
    counts = {int(s): int(c) for s, c in zip(*np.unique(out[out >= 0], return_counts=True))}
    next_label = max(counts) + 1 if counts else 0
    pending = orphans
    while pending:
        deferred = []
        progressed = False
        for pix in pending:
            neigh = set()
            for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
                nr = pix[0] + dr
                nc = pix[1] + dc
                ok = (nr >= 0) & (nr < h) & (nc >= 0) & (nc < w)
                if not ok.any():
                    continue
                vals = out[nr[ok], nc[ok]]
                ms = mask[nr[ok], nc[ok]]
                neigh.update(int(v) for v in vals[ms & (vals >= 0)])
            if not neigh:
                deferred.append(pix)
                continue
            target = max(neigh, key=lambda s: (counts[s], -s))
            out[pix] = target
            counts[target] += len(pix[0])
            progressed = True
        if deferred and not progressed:
            # Isolated cluster of orphans: promote the first to a new region.
            pix = deferred.pop(0)
            out[pix] = next_label
            counts[next_label] = len(pix[0])
            next_label += 1
        pending = deferred
    return out


def _slic(values, mask, target):
    """SLIC-style superpixels over the masked pixels of a scalar image.

    Returns (labels, count) with labels -1 outside mask and contiguous ids
    0..count-1 inside.  Seed centers are laid on a grid over the full window
    and centers that attract no masked pixel are dropped.
    """
    h, w = values.shape
    n_masked = int(mask.sum())
    if target > n_masked:
        target = n_masked
    rows, cols = _grid_shape(h, w, target)
    centers = _init_centers(values, rows, cols)
    step = math.sqrt(h * w / centers.shape[0])
    labels = _kmeans_sweeps(values, mask, centers, step)
    labels, _ = _compact_labels(labels, mask)
    labels = _enforce_connectivity(labels, mask)
    return _compact_labels(labels, mask)


def segment(base, target_count, seed=0):
    """Segment a scalar [0, 1] image into roughly target_count superpixels.

    Deterministic for fixed inputs; the result satisfies the partition
    invariants and its size stays within [target_count / 2, 2 * target_count].
    """
    base = np.asarray(base, dtype=np.float64)
    h, w = base.shape
    if target_count < 1:
        raise DegenerateInput("target_count must be at least 1")
    if target_count > h * w:
        raise DegenerateInput("target_count exceeds the pixel count")
    labels, count = _slic(base, np.ones((h, w), dtype=bool), target_count)
    return SuperpixelPartition(labels, count)


def class_ratios(hist):
    """Per-class pixel fractions of one superpixel.

    Returns (ratios, max_ratio, dominant_class) where classes are numbered
    from 1 and ties go to the lowest class id.
    """
    hist = np.asarray(hist, dtype=np.float64)
    total = hist.sum()
    if total < 1:
        raise DegenerateInput("histogram has no pixels")
    ratios = hist / total
    top = int(np.argmax(ratios))
    return ratios, float(ratios[top]), top + 1


def _enclosing_square(rs, cs, h, w):
    """Bounding box grown to a square, clipped at the image borders (so
    possibly rectangular at the edges)."""
    r0, r1 = int(rs.min()), int(rs.max())
    c0, c1 = int(cs.min()), int(cs.max())
    side = max(r1 - r0 + 1, c1 - c0 + 1)
    grow_r = side - (r1 - r0 + 1)
    grow_c = side - (c1 - c0 + 1)
    r0 -= grow_r // 2
    r1 += grow_r - grow_r // 2
    c0 -= grow_c // 2
    c1 += grow_c - grow_c // 2
    return max(0, r0), min(h - 1, r1), max(0, c0), min(w - 1, c1)


def refine(partition, predictions, delta, m_split, base, seed=0):
    """Split noisy superpixels using per-pixel class predictions.

    A superpixel is noisy when the fraction of its dominant predicted class
    is below delta; it is then re-segmented into (up to) m_split parts
    within its smallest enclosing square, using only its own pixels.  Noisy
    superpixels smaller than m_split fall apart into singletons.  Output ids
    are re-compacted; every output superpixel is a subset of one input
    superpixel.
    """
    if not 0.0 < delta <= 1.0:
        raise DegenerateInput("delta must lie in (0, 1]")
    if m_split < 1:
        raise DegenerateInput("m_split must be at least 1")
    base = np.asarray(base, dtype=np.float64)
    preds = np.asarray(predictions.labels)
    if preds.shape != partition.labels.shape:
        raise ValueError("prediction and partition shapes differ")
    if (preds < 1).any():
        raise DegenerateInput("refine needs a predicted class for every pixel")
    h, w = partition.labels.shape
    n_classes = int(preds.max())
    out = np.full((h, w), -1, dtype=np.int64)
    next_id = 0
    for sid in range(partition.count):
        member = partition.labels == sid
        hist = np.bincount(preds[member], minlength=n_classes + 1)[1:]
        _, max_ratio, _ = class_ratios(hist)
        if max_ratio >= delta:
            out[member] = next_id
            next_id += 1
            continue
        rs, cs = np.nonzero(member)
        if rs.size < m_split:
            out[rs, cs] = next_id + np.arange(rs.size)
            next_id += rs.size
            continue
        r0, r1, c0, c1 = _enclosing_square(rs, cs, h, w)
        window = np.s_[r0 : r1 + 1, c0 : c1 + 1]
        sub_labels, n_sub = _slic(base[window], member[window], m_split)
        inside = member[window]
        out[window][inside] = sub_labels[inside] + next_id
        next_id += n_sub
    return SuperpixelPartition(out, next_id)
