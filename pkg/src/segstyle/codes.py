"""Per-region style codes built from superpixel mean colors.

For each semantic label, every superpixel contributes its mean RGB (scaled
to [0, 1]); the means are flattened superpixel-major into a raw vector of
length 3*k and linearly resampled to a fixed length so regions of any size
produce codes of one shared dimension. No parameters are learned or stored —
the code is a pure function of the image and its segmentation.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, SchemaError
from .maskslic import SemanticMask, SuperpixelMap

DEFAULT_CODE_LENGTH = 512


@dataclass
class LabelCode:
    """One label's style data: raw mean-color vector plus fixed-length code."""

    id: int
    present: bool
    raw: np.ndarray
    code: np.ndarray


@dataclass
class StyleCodes:
    """Codes for every label of one image; `labels` is keyed by label id."""

    n: int
    k: int
    labels: dict[int, LabelCode] = field(default_factory=dict)

    def present_ids(self) -> list[int]:
        return sorted(l for l, c in self.labels.items() if c.present)


def resample_code(raw: np.ndarray, n: int) -> np.ndarray:
    """Linearly resample a 1-D vector to length `n`.

    Both vectors are laid on the unit interval with endpoints pinned, so the
    first and last samples are always preserved and a length-1 input yields a
    constant vector.
    """
    raw = np.asarray(raw, dtype=np.float64)
    if raw.ndim != 1 or raw.size == 0:
        raise DimensionMismatch(f"raw code must be a non-empty 1-D vector, got shape {raw.shape}")
    if n < 1:
        raise ValueError(f"target length must be >= 1, got {n}")
    if raw.size == 1:
        return np.full(n, raw[0])
    src = np.linspace(0.0, 1.0, raw.size)
    dst = np.linspace(0.0, 1.0, n)
    return np.interp(dst, src, raw)


def extract_style_codes(
    img: np.ndarray,
    mask: SemanticMask,
    spmap: SuperpixelMap,
    n: int = DEFAULT_CODE_LENGTH,
) -> StyleCodes:
    """Mean-RGB style codes for every label id in [0, mask.label_count).

    `img` is the uint8 (H, W, 3) source image. Labels with no pixels get
    `present=False`, an empty raw vector and an all-zero code. Raw vectors
    are superpixel-major: [r0, g0, b0, r1, g1, b1, ...] in cluster order.
    """
    img = np.asarray(img)
    if img.ndim != 3 or img.shape[2] != 3 or img.dtype != np.uint8:
        raise DimensionMismatch(f"expected a uint8 (H, W, 3) image, got {img.dtype} {img.shape}")
    if img.shape[:2] != (mask.height, mask.width):
        raise DimensionMismatch(
            f"image is {img.shape[0]}x{img.shape[1]}, mask is {mask.height}x{mask.width}"
        )
    if n < 3:
        raise ValueError(f"code length must be >= 3, got {n}")
    spmap.validate_against(mask)
    out = StyleCodes(n=n, k=max(spmap.counts.values(), default=0))
    for label in range(mask.label_count):
        if label not in spmap.counts:
            out.labels[label] = LabelCode(
                id=label, present=False, raw=np.zeros(0), code=np.zeros(n)
            )
            continue
        px = mask.labels == label
        idx = spmap.cluster_index[px]
        k_l = spmap.counts[label]
        counts = np.bincount(idx, minlength=k_l)
        means = np.empty((k_l, 3))
        for ch in range(3):
            sums = np.bincount(idx, weights=img[px][:, ch].astype(np.float64), minlength=k_l)
            means[:, ch] = sums / counts
        raw = (means / 255.0).ravel()
        out.labels[label] = LabelCode(
            id=label, present=True, raw=raw, code=resample_code(raw, n)
        )
    return out


# ---------- file format ----------


def write_codes(path, codes: StyleCodes) -> None:
    """Serialize codes as JSON with a fixed field order and full float precision."""
    doc = {
        "version": 1,
        "n": codes.n,
        "k": codes.k,
        "scale": "unit",
        "labels": [
            {
                "id": lc.id,
                "present": lc.present,
                "raw": [float(v) for v in lc.raw],
                "code": [float(v) for v in lc.code],
            }
            for _, lc in sorted(codes.labels.items())
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, allow_nan=False)
        fh.write("\n")


def read_codes(path) -> StyleCodes:
    """Parse a codes JSON file, validating structure and dimensions."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON in {path}: {exc}") from exc
    _require(isinstance(doc, dict), path, "top level must be an object")
    for key in ("version", "n", "k", "scale", "labels"):
        _require(key in doc, path, f"missing key {key!r}")
    _require(doc["version"] == 1, path, f"unsupported version {doc['version']!r}")
    _require(doc["scale"] == "unit", path, f"unsupported scale {doc['scale']!r}")
    _require(
        isinstance(doc["n"], int) and doc["n"] >= 1,
        path,
        f"'n' must be a positive integer, got {doc['n']!r}",
    )
    _require(
        isinstance(doc["k"], int) and doc["k"] >= 0,
        path,
        f"'k' must be a non-negative integer, got {doc['k']!r}",
    )
    _require(isinstance(doc["labels"], list), path, "'labels' must be a list")
    codes = StyleCodes(n=doc["n"], k=doc["k"])
    for entry in doc["labels"]:
        _require(isinstance(entry, dict), path, "label entries must be objects")
        for key in ("id", "present", "raw", "code"):
            _require(key in entry, path, f"label entry missing {key!r}")
        _require(
            isinstance(entry["id"], int) and entry["id"] >= 0,
            path,
            f"label id must be a non-negative integer, got {entry['id']!r}",
        )
        _require(isinstance(entry["present"], bool), path, "'present' must be a boolean")
        label = entry["id"]
        _require(label not in codes.labels, path, f"duplicate label id {label}")
        raw = _float_list(entry["raw"], path, f"label {label} raw")
        code = _float_list(entry["code"], path, f"label {label} code")
        _require(
            code.size == doc["n"],
            path,
            f"label {label}: code length {code.size} does not match n={doc['n']}",
        )
        if entry["present"]:
            _require(
                raw.size % 3 == 0 and raw.size > 0,
                path,
                f"label {label}: raw length {raw.size} is not a positive multiple of 3",
            )
        else:
            _require(raw.size == 0, path, f"label {label}: absent labels must have empty raw")
        codes.labels[label] = LabelCode(
            id=label, present=entry["present"], raw=raw, code=code
        )
    return codes


def _float_list(value, path, what):
    if not isinstance(value, list) or not all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
    ):
        raise SchemaError(f"{what} must be a list of numbers: {path}")
    arr = np.asarray(value, dtype=np.float64)
    if arr.size and not np.isfinite(arr).all():
        raise SchemaError(f"{what} contains non-finite values: {path}")
    return arr


def _require(cond, path, message):
    if not cond:
        raise SchemaError(f"{message}: {path}")
