"""Mask-constrained SLIC-style clustering.

Each semantic label is clustered independently in the 5-D [l a b x y] space:
seeds are spread uniformly inside the (possibly non-convex) region, then
assignment and center-update steps alternate for a fixed number of rounds.
Distances are Euclidean with the spatial channels scaled by
``compactness / S`` where ``S = sqrt(region_pixels / clusters)`` is the
expected superpixel spacing, so color and position stay balanced across
image sizes.

Everything here is deterministic: identical inputs give bit-identical maps.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np
from PIL import Image

from .errors import DimensionMismatch, EmptyLabel, SchemaError

DEFAULT_CLUSTERS = 128
DEFAULT_ITERATIONS = 10
DEFAULT_COMPACTNESS = 10.0

SENTINEL = -1


@dataclass
class SemanticMask:
    """Per-pixel label map. ``labels`` is (H, W) int, values in [0, label_count)."""

    labels: np.ndarray
    label_count: int

    def __post_init__(self):
        self.labels = np.asarray(self.labels)
        if self.labels.ndim != 2:
            raise DimensionMismatch(f"mask must be 2-D, got shape {self.labels.shape}")
        if not np.issubdtype(self.labels.dtype, np.integer):
            raise DimensionMismatch(f"mask labels must be integers, got {self.labels.dtype}")
        self.labels = self.labels.astype(np.int32, copy=False)
        if self.label_count < 1:
            raise DimensionMismatch(f"label_count must be >= 1, got {self.label_count}")
        lo, hi = int(self.labels.min()), int(self.labels.max())
        if lo < 0 or hi >= self.label_count:
            raise DimensionMismatch(
                f"mask values span [{lo}, {hi}] but label_count is {self.label_count}"
            )

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    def present_labels(self) -> list[int]:
        return [int(v) for v in np.unique(self.labels)]


@dataclass
class SuperpixelMap:
    """Per-label clustering result.

    ``cluster_index`` holds, for every pixel, its cluster index *within its
    own label* (SENTINEL where no label was clustered). ``counts``,
    ``centers`` and ``objective`` are keyed by label id; centers are 5-tuples
    in the same units as the source [l a b x y] image.
    """

    height: int
    width: int
    label_count: int
    cluster_index: np.ndarray
    counts: dict[int, int] = field(default_factory=dict)
    centers: dict[int, np.ndarray] = field(default_factory=dict)
    objective: dict[int, list[float]] = field(default_factory=dict)

    def present_labels(self) -> list[int]:
        return sorted(self.counts)

    def total_clusters(self) -> int:
        return sum(self.counts.values())

    def offsets(self) -> dict[int, int]:
        """Label-major global id offsets: label l's clusters start at offsets[l]."""
        out, acc = {}, 0
        for label in self.present_labels():
            out[label] = acc
            acc += self.counts[label]
        return out

    def validate_against(self, mask: SemanticMask) -> None:
        """Raise DimensionMismatch unless this map partitions exactly `mask`."""
        if (self.height, self.width) != (mask.height, mask.width):
            raise DimensionMismatch(
                f"superpixel map is {self.height}x{self.width}, "
                f"mask is {mask.height}x{mask.width}"
            )
        if self.label_count != mask.label_count:
            raise DimensionMismatch(
                f"superpixel map has label_count {self.label_count}, "
                f"mask has {mask.label_count}"
            )
        for label in mask.present_labels():
            if label not in self.counts:
                raise DimensionMismatch(f"label {label} present in mask but not clustered")
            idx = self.cluster_index[mask.labels == label]
            k = self.counts[label]
            if idx.min() < 0 or idx.max() >= k:
                raise DimensionMismatch(
                    f"label {label}: cluster indices outside [0, {k})"
                )
            if (np.bincount(idx, minlength=k) == 0).any():
                raise DimensionMismatch(f"label {label}: some cluster owns no pixels")
        for label in self.counts:
            if not (mask.labels == label).any():
                raise DimensionMismatch(f"label {label} clustered but absent from mask")

    def global_ids(self, mask: SemanticMask) -> np.ndarray:
        """(H, W) array of label-major global superpixel ids."""
        self.validate_against(mask)
        offsets = self.offsets()
        ids = np.full((self.height, self.width), SENTINEL, dtype=np.int64)
        for label, offset in offsets.items():
            px = mask.labels == label
            ids[px] = offset + self.cluster_index[px]
        return ids


# ---------- distance helpers ----------


def _pair_d2(feats, center, s2):
    """Squared distance of each row of `feats` to one 5-tuple center.

    Accumulates the five terms left to right so scalar re-implementations
    produce bit-identical values on exact ties.
    """
    return (
        (feats[:, 0] - center[0]) ** 2
        + (feats[:, 1] - center[1]) ** 2
        + (feats[:, 2] - center[2]) ** 2
        + s2 * (feats[:, 3] - center[3]) ** 2
        + s2 * (feats[:, 4] - center[4]) ** 2
    )


def _rowwise_d2(feats, centers_per_row, s2):
    d = feats - centers_per_row
    return (
        d[:, 0] ** 2 + d[:, 1] ** 2 + d[:, 2] ** 2 + s2 * d[:, 3] ** 2 + s2 * d[:, 4] ** 2
    )


def _assign_flat(feats, centers, spatial_scale):
    """Nearest center per row, ties to the lowest center index."""
    s2 = spatial_scale * spatial_scale
    best_d = np.full(feats.shape[0], np.inf)
    best_i = np.zeros(feats.shape[0], dtype=np.int32)
    for i in range(centers.shape[0]):
        d = _pair_d2(feats, centers[i], s2)
        better = d < best_d
        best_d[better] = d[better]
        best_i[better] = i
    return best_i, best_d


def _assign_windowed(feats, centers, spatial_scale, radius):
    """Windowed variant: each center only competes for pixels within a
    `radius` box around it; pixels left uncovered fall back to a full scan."""
    s2 = spatial_scale * spatial_scale
    m = feats.shape[0]
    best_d = np.full(m, np.inf)
    best_i = np.full(m, -1, dtype=np.int32)
    for i in range(centers.shape[0]):
        c = centers[i]
        win = (np.abs(feats[:, 3] - c[3]) <= radius) & (np.abs(feats[:, 4] - c[4]) <= radius)
        if not win.any():
            continue
        d = _pair_d2(feats[win], c, s2)
        rows = np.flatnonzero(win)
        better = d < best_d[rows]
        rows = rows[better]
        best_d[rows] = d[better]
        best_i[rows] = i
    missed = best_i < 0
    if missed.any():
        idx, d = _assign_flat(feats[missed], centers, spatial_scale)
        best_i[missed] = idx
        best_d[missed] = d
    return best_i, best_d


def _update_flat(feats, idx, k, spatial_scale):
    """Centers as member means; empty clusters re-seed on the worst-served pixel."""
    s2 = spatial_scale * spatial_scale
    counts = np.bincount(idx, minlength=k)
    centers = np.zeros((k, 5))
    nz = counts > 0
    for d in range(5):
        sums = np.bincount(idx, weights=feats[:, d], minlength=k)
        centers[nz, d] = sums[nz] / counts[nz]
    empties = np.flatnonzero(~nz)
    if empties.size:
        # every value in idx names a non-empty cluster, so these rows are valid means
        d2 = _rowwise_d2(feats, centers[idx], s2)
        taken = np.zeros(feats.shape[0], dtype=bool)
        for j in empties:
            p = int(np.argmax(np.where(taken, -np.inf, d2)))
            centers[j] = feats[p]
            taken[p] = True
    return centers


# ---------- seeding ----------


def _fps(pool, count, centroid, seeds=None):
    """Greedy farthest-point picks from `pool` (n, 2) coordinates.

    The first pick (when `seeds` is empty) is the pool point closest to
    `centroid`; each later pick maximizes the minimum distance to everything
    chosen so far. Ties break to the lowest pool index.
    """
    pool = pool.astype(np.float64)
    mind2 = None
    if seeds is not None and len(seeds):
        seeds = np.asarray(seeds, dtype=np.float64)
        diff = pool[:, None, :] - seeds[None, :, :]
        mind2 = (diff**2).sum(axis=2).min(axis=1)
    picks = []
    for _ in range(count):
        if mind2 is None:
            i = int(np.argmin(((pool - centroid) ** 2).sum(axis=1)))
        else:
            i = int(np.argmax(mind2))
        picks.append(i)
        d = ((pool - pool[i]) ** 2).sum(axis=1)
        mind2 = d if mind2 is None else np.minimum(mind2, d)
    return picks


def init_centers(
    labxy: np.ndarray, mask: SemanticMask, label: int, k: int
) -> np.ndarray:
    """Seed min(k, pixel_count) centers spread evenly inside one label's region.

    A square grid of interval S = sqrt(pixels / k) is laid over the region's
    bounding box; grid points within S/2 of a label pixel snap to that pixel.
    Surplus points are thinned and shortfalls filled by farthest-point
    sampling over the label's pixels. Deterministic.
    """
    _check_labxy_mask(labxy, mask)
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    coords = np.argwhere(mask.labels == label)
    m = coords.shape[0]
    if m == 0:
        raise EmptyLabel(f"label {label} occupies no pixels")
    k_eff = min(k, m)
    spacing = math.sqrt(m / k_eff)

    r0, c0 = coords.min(axis=0)
    r1, c1 = coords.max(axis=0)
    n_rows = max(1, math.ceil((r1 - r0 + 1) / spacing))
    n_cols = max(1, math.ceil((c1 - c0 + 1) / spacing))
    grid_r = r0 + (np.arange(n_rows) + 0.5) * spacing
    grid_c = c0 + (np.arange(n_cols) + 0.5) * spacing
    gr, gc = np.meshgrid(grid_r, grid_c, indexing="ij")
    grid = np.stack([gr.ravel(), gc.ravel()], axis=1)

    fc = coords.astype(np.float64)
    kept = []
    seen = set()
    limit = (spacing / 2.0) ** 2
    for g in grid:
        d2 = ((fc - g) ** 2).sum(axis=1)
        p = int(np.argmin(d2))
        if d2[p] <= limit and p not in seen:
            kept.append(p)
            seen.add(p)

    centroid = fc.mean(axis=0)
    if len(kept) > k_eff:
        picks = _fps(fc[kept], k_eff, centroid)
        kept = [kept[i] for i in picks]
    elif len(kept) < k_eff:
        remaining = [i for i in range(m) if i not in seen]
        pool = fc[remaining]
        picks = _fps(pool, k_eff - len(kept), centroid, seeds=fc[kept] if kept else None)
        kept = kept + [remaining[i] for i in picks]

    sel = coords[kept]
    return labxy[sel[:, 0], sel[:, 1]].astype(np.float64)


# ---------- public assignment / update ----------


def _check_labxy_mask(labxy, mask):
    labxy = np.asarray(labxy)
    if labxy.ndim != 3 or labxy.shape[2] != 5:
        raise DimensionMismatch(f"expected an (H, W, 5) array, got shape {labxy.shape}")
    if labxy.shape[:2] != (mask.height, mask.width):
        raise DimensionMismatch(
            f"labxy is {labxy.shape[0]}x{labxy.shape[1]}, "
            f"mask is {mask.height}x{mask.width}"
        )


def assign_pixels(
    labxy: np.ndarray,
    mask: SemanticMask,
    label: int,
    centers: np.ndarray,
    spatial_scale: float = 1.0,
) -> np.ndarray:
    """Map each pixel of `label` to its nearest center (index into `centers`).

    Distance is Euclidean over [l, a, b, x, y] with the spatial channels
    multiplied by `spatial_scale`; ties break to the lowest center index.
    Returns an (H, W) int32 array, SENTINEL outside the label.
    """
    _check_labxy_mask(labxy, mask)
    centers = np.asarray(centers, dtype=np.float64)
    if centers.ndim != 2 or centers.shape[1] != 5 or centers.shape[0] < 1:
        raise ValueError(f"centers must be (k, 5) with k >= 1, got {centers.shape}")
    out = np.full((mask.height, mask.width), SENTINEL, dtype=np.int32)
    px = mask.labels == label
    if not px.any():
        raise EmptyLabel(f"label {label} occupies no pixels")
    idx, _ = _assign_flat(labxy[px], centers, spatial_scale)
    out[px] = idx
    return out


def update_centers(
    labxy: np.ndarray,
    assignments: np.ndarray,
    k: int,
    spatial_scale: float = 1.0,
) -> np.ndarray:
    """New centers as the component-wise mean of each cluster's member pixels.

    `assignments` is an (H, W) array with cluster indices for member pixels
    and SENTINEL elsewhere. A cluster with no members is re-seeded on the
    pixel currently farthest from its assigned center so the cluster count
    never shrinks.
    """
    labxy = np.asarray(labxy)
    assignments = np.asarray(assignments)
    if labxy.shape[:2] != assignments.shape:
        raise DimensionMismatch(
            f"labxy {labxy.shape[:2]} and assignments {assignments.shape} disagree"
        )
    member = assignments >= 0
    if not member.any():
        raise EmptyLabel("assignments contain no member pixels")
    idx = assignments[member].astype(np.int64)
    if idx.max() >= k:
        raise ValueError(f"assignment index {idx.max()} out of range for k={k}")
    return _update_flat(labxy[member].astype(np.float64), idx, k, spatial_scale)


# ---------- full clustering ----------


def cluster(
    labxy: np.ndarray,
    mask: SemanticMask,
    k: int = DEFAULT_CLUSTERS,
    iterations: int = DEFAULT_ITERATIONS,
    compactness: float = DEFAULT_COMPACTNESS,
    windowed: bool = False,
) -> SuperpixelMap:
    """Cluster every label present in `mask` into at most `k` superpixels.

    Runs `iterations` rounds of assign + update per label, then one final
    assignment. The per-label objective (sum of squared distances to the
    assigned centers, logged after every assignment) is non-increasing for
    the default full scan. If the final assignment leaves a cluster empty it
    is re-seeded on the most distant pixel and that pixel moved to it, so
    every cluster owns at least one pixel in the returned map.

    `windowed=True` restricts each center's search to a 2S box around it
    (faster on large images; the resulting map may differ from the full scan
    and the objective log is not guaranteed monotone).
    """
    _check_labxy_mask(labxy, mask)
    if iterations < 1:
        raise ValueError(f"iterations must be >= 1, got {iterations}")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    cluster_index = np.full((mask.height, mask.width), SENTINEL, dtype=np.int32)
    spmap = SuperpixelMap(
        height=mask.height,
        width=mask.width,
        label_count=mask.label_count,
        cluster_index=cluster_index,
    )
    for label in mask.present_labels():
        px = mask.labels == label
        feats = labxy[px].astype(np.float64)
        m = feats.shape[0]
        k_eff = min(k, m)
        spacing = math.sqrt(m / k_eff)
        scale = compactness / spacing
        radius = 2.0 * spacing
        centers = init_centers(labxy, mask, label, k_eff)

        assign = (
            (lambda f, c: _assign_windowed(f, c, scale, radius))
            if windowed
            else (lambda f, c: _assign_flat(f, c, scale))
        )

        log = []
        idx, d2 = assign(feats, centers)
        log.append(math.fsum(d2))
        for _ in range(iterations - 1):
            centers = _update_flat(feats, idx, k_eff, scale)
            idx, d2 = assign(feats, centers)
            log.append(math.fsum(d2))
        centers = _update_flat(feats, idx, k_eff, scale)
        idx, d2 = assign(feats, centers)
        idx, d2, centers = _fix_empty_clusters(feats, idx, d2, centers, k_eff)
        log.append(math.fsum(d2))

        cluster_index[px] = idx
        spmap.counts[label] = k_eff
        spmap.centers[label] = centers
        spmap.objective[label] = log
    return spmap


def _fix_empty_clusters(feats, idx, d2, centers, k):
    """Force every cluster to own >= 1 pixel after the final assignment.

    Each empty cluster is re-seeded on the unclaimed pixel farthest from its
    assigned center and that single pixel is moved to it (distance becomes
    zero, so the objective cannot increase).
    """
    counts = np.bincount(idx, minlength=k)
    if not (counts == 0).any():
        return idx, d2, centers
    idx = idx.copy()
    d2 = d2.copy()
    centers = centers.copy()
    pinned = np.zeros(feats.shape[0], dtype=bool)
    while True:
        counts = np.bincount(idx, minlength=k)
        empties = np.flatnonzero(counts == 0)
        if empties.size == 0:
            return idx, d2, centers
        j = int(empties[0])
        cand = np.where(pinned, -np.inf, d2)
        p = int(np.argmax(cand))
        centers[j] = feats[p]
        idx[p] = j
        d2[p] = 0.0
        pinned[p] = True


# ---------- file formats ----------


def read_mask_png(path, label_count: int | None = None) -> SemanticMask:
    """Read a grayscale (or palette) PNG whose pixel values are label indices."""
    with Image.open(path) as im:
        arr = np.asarray(im)
    if arr.ndim != 2:
        raise DimensionMismatch(f"mask PNG must be single-channel, got shape {arr.shape}: {path}")
    arr = arr.astype(np.int32)
    if label_count is None:
        label_count = int(arr.max()) + 1
    return SemanticMask(labels=arr, label_count=label_count)


def write_mask_png(path, mask: SemanticMask) -> None:
    if mask.label_count > 256:
        raise ValueError(f"cannot store {mask.label_count} labels in an 8-bit mask PNG")
    Image.fromarray(mask.labels.astype(np.uint8), mode="L").save(path, format="PNG")


def write_spmap(map_path, sidecar_path, spmap: SuperpixelMap, mask: SemanticMask) -> None:
    """Write the 16-bit global-id PNG and its JSON sidecar of centers."""
    ids = spmap.global_ids(mask)
    if spmap.total_clusters() > 65536:
        raise ValueError(
            f"{spmap.total_clusters()} superpixels exceed the 16-bit id map limit"
        )
    Image.fromarray(ids.astype(np.uint16)).save(map_path, format="PNG")
    offsets = spmap.offsets()
    doc = {
        "version": 1,
        "height": spmap.height,
        "width": spmap.width,
        "label_count": spmap.label_count,
        "labels": [
            {
                "id": label,
                "count": spmap.counts[label],
                "offset": offsets[label],
                "centers": [[float(v) for v in row] for row in spmap.centers[label]],
            }
            for label in spmap.present_labels()
        ],
    }
    with open(sidecar_path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, allow_nan=False)
        fh.write("\n")


def read_spmap(map_path, sidecar_path) -> tuple[SuperpixelMap, SemanticMask]:
    """Rebuild a SuperpixelMap (and the mask it implies) from PNG + sidecar."""
    with Image.open(map_path) as im:
        ids = np.asarray(im).astype(np.int64)
    if ids.ndim != 2:
        raise DimensionMismatch(f"id map PNG must be single-channel: {map_path}")
    try:
        with open(sidecar_path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON in {sidecar_path}: {exc}") from exc
    _require(isinstance(doc, dict), sidecar_path, "top level must be an object")
    for key in ("version", "height", "width", "label_count", "labels"):
        _require(key in doc, sidecar_path, f"missing key {key!r}")
    h, w = int(doc["height"]), int(doc["width"])
    if ids.shape != (h, w):
        raise DimensionMismatch(
            f"id map {ids.shape} does not match sidecar {h}x{w}: {map_path}"
        )
    labels_arr = np.full((h, w), SENTINEL, dtype=np.int32)
    cluster_index = np.full((h, w), SENTINEL, dtype=np.int32)
    spmap = SuperpixelMap(
        height=h, width=w, label_count=int(doc["label_count"]), cluster_index=cluster_index
    )
    _require(isinstance(doc["labels"], list), sidecar_path, "'labels' must be a list")
    for entry in doc["labels"]:
        _require(isinstance(entry, dict), sidecar_path, "label entries must be objects")
        for key in ("id", "count", "offset", "centers"):
            _require(key in entry, sidecar_path, f"label entry missing {key!r}")
        label, count, offset = int(entry["id"]), int(entry["count"]), int(entry["offset"])
        centers = np.asarray(entry["centers"], dtype=np.float64)
        _require(
            centers.ndim == 2 and centers.shape == (count, 5),
            sidecar_path,
            f"label {label}: centers must be a {count}x5 list",
        )
        px = (ids >= offset) & (ids < offset + count)
        labels_arr[px] = label
        cluster_index[px] = ids[px] - offset
        spmap.counts[label] = count
        spmap.centers[label] = centers
    if (labels_arr == SENTINEL).any():
        raise SchemaError(f"id map contains ids outside every sidecar range: {map_path}")
    mask = SemanticMask(labels=labels_arr, label_count=spmap.label_count)
    spmap.validate_against(mask)
    return spmap, mask


def _require(cond, path, message):
    if not cond:
        raise SchemaError(f"{message}: {path}")


def draw_boundaries(img: np.ndarray, ids: np.ndarray, color=(255, 0, 0)) -> np.ndarray:
    """Copy of `img` with pixels on superpixel boundaries painted `color`."""
    img = np.asarray(img)
    if img.shape[:2] != ids.shape:
        raise DimensionMismatch(f"image {img.shape[:2]} and id map {ids.shape} disagree")
    edge = np.zeros(ids.shape, dtype=bool)
    edge[:, :-1] |= ids[:, :-1] != ids[:, 1:]
    edge[:-1, :] |= ids[:-1, :] != ids[1:, :]
    out = img.copy()
    out[edge] = color
    return out
