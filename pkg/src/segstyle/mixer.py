"""Region-level style editing and coarse reconstruction.

Style codes are swapped or combined per label across code sets from
different images; because codes live in files rather than pixels, an edit
is just a different selection of vectors. `coarse_reconstruct` paints each
superpixel with its stored mean color, giving a fast non-learned preview of
what a code set encodes.
"""

import json
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .codes import LabelCode, StyleCodes
from .errors import CodeLengthMismatch, DimensionMismatch, LabelAbsentInDonor, SchemaError
from .maskslic import SemanticMask, SuperpixelMap


@dataclass
class MixRecipe:
    """Label-to-donor assignments; `assignments` maps label id -> donor tag.

    Donor tags are opaque strings (conventionally a file path, or a symbolic
    tag like "source"/"style" that the caller resolves); each label may be
    assigned at most once.
    """

    assignments: dict[int, str] = field(default_factory=dict)


def read_recipe(path) -> MixRecipe:
    """Parse a recipe JSON file: {"assignments": [{"label": int, "donor": str}]}."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON in {path}: {exc}") from exc
    if not isinstance(doc, dict) or "assignments" not in doc:
        raise SchemaError(f"recipe must be an object with an 'assignments' list: {path}")
    if not isinstance(doc["assignments"], list):
        raise SchemaError(f"'assignments' must be a list: {path}")
    recipe = MixRecipe()
    for entry in doc["assignments"]:
        if not isinstance(entry, dict) or "label" not in entry or "donor" not in entry:
            raise SchemaError(f"assignments need 'label' and 'donor' keys: {path}")
        label, donor = entry["label"], entry["donor"]
        if not isinstance(label, int) or isinstance(label, bool) or label < 0:
            raise SchemaError(f"label must be a non-negative integer, got {label!r}: {path}")
        if not isinstance(donor, str) or not donor:
            raise SchemaError(f"donor must be a non-empty string, got {donor!r}: {path}")
        if label in recipe.assignments:
            raise SchemaError(f"label {label} assigned more than once: {path}")
        recipe.assignments[label] = donor
    return recipe


def write_recipe(path, recipe: MixRecipe) -> None:
    doc = {
        "assignments": [
            {"label": label, "donor": donor}
            for label, donor in sorted(recipe.assignments.items())
        ]
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, allow_nan=False)
        fh.write("\n")


def _copy_label(lc: LabelCode) -> LabelCode:
    return LabelCode(id=lc.id, present=lc.present, raw=lc.raw.copy(), code=lc.code.copy())


def _check_compatible(a: StyleCodes, b: StyleCodes, what: str) -> None:
    if a.n != b.n:
        raise DimensionMismatch(f"{what}: code lengths differ, {a.n} vs {b.n}")
    if set(a.labels) != set(b.labels):
        raise DimensionMismatch(f"{what}: label id sets differ")


def swap_codes(source: StyleCodes, style: StyleCodes, labels) -> StyleCodes:
    """Copy of `source` with the listed labels' raw+code taken from `style`.

    Both code sets must share the code length and label universe. Requesting
    a label the style donor does not actually cover raises
    LabelAbsentInDonor.
    """
    _check_compatible(source, style, "swap")
    out = StyleCodes(n=source.n, k=source.k)
    wanted = set(labels)
    for label in wanted:
        donor = style.labels.get(label)
        if donor is None or not donor.present:
            raise LabelAbsentInDonor(f"label {label} is absent in the style donor")
    for label, lc in source.labels.items():
        pick = style.labels[label] if label in wanted else lc
        out.labels[label] = _copy_label(pick)
    return out


def mix_codes(recipe: MixRecipe, donors: Mapping[str, StyleCodes]) -> StyleCodes:
    """Build a code set from scratch by picking each assigned label from its donor.

    `donors` maps recipe tags to loaded code sets; all donors must share the
    code length and label universe. Labels without an assignment come out
    absent (zero code), so the result covers exactly the labels the recipe
    names.
    """
    if not donors:
        raise SchemaError("mixing requires at least one donor code set")
    tags = sorted(donors)
    first = donors[tags[0]]
    for tag in tags[1:]:
        _check_compatible(first, donors[tag], f"mix donor {tag!r}")
    for label, tag in sorted(recipe.assignments.items()):
        if tag not in donors:
            raise SchemaError(f"recipe references unknown donor {tag!r}")
        donor_lc = donors[tag].labels.get(label)
        if donor_lc is None or not donor_lc.present:
            raise LabelAbsentInDonor(f"label {label} is absent in donor {tag!r}")
    out = StyleCodes(n=first.n, k=max(d.k for d in donors.values()))
    for label in sorted(first.labels):
        tag = recipe.assignments.get(label)
        if tag is None:
            out.labels[label] = LabelCode(
                id=label, present=False, raw=np.zeros(0), code=np.zeros(first.n)
            )
        else:
            out.labels[label] = _copy_label(donors[tag].labels[label])
    return out


def apply_recipe(
    base: StyleCodes, recipe: MixRecipe, donors: Mapping[str, StyleCodes]
) -> StyleCodes:
    """Apply recipe assignments on top of `base`.

    Each assigned label takes its donor's raw+code; every other label keeps
    the base entry. An empty recipe therefore returns a copy of `base`.
    """
    by_tag: dict[str, list[int]] = {}
    for label, tag in sorted(recipe.assignments.items()):
        by_tag.setdefault(tag, []).append(label)
    out = swap_codes(base, base, [])
    for tag in sorted(by_tag):
        if tag not in donors:
            raise SchemaError(f"recipe references unknown donor {tag!r}")
        out = swap_codes(out, donors[tag], by_tag[tag])
    return out


def coarse_reconstruct(
    codes: StyleCodes, spmap: SuperpixelMap, mask: SemanticMask
) -> np.ndarray:
    """Paint every superpixel with its stored mean color.

    Uses the raw (pre-resampling) vectors, which align one RGB triple per
    cluster. Pixels of labels absent from `codes` come out black. Returns a
    uint8 (H, W, 3) image.
    """
    spmap.validate_against(mask)
    out = np.zeros((mask.height, mask.width, 3), dtype=np.uint8)
    for label in spmap.present_labels():
        lc = codes.labels.get(label)
        if lc is None or not lc.present:
            continue
        k_l = spmap.counts[label]
        if lc.raw.size != 3 * k_l:
            raise CodeLengthMismatch(
                f"label {label}: raw length {lc.raw.size} does not match "
                f"{k_l} clusters (expected {3 * k_l})"
            )
        palette = np.clip(np.rint(lc.raw.reshape(k_l, 3) * 255.0), 0, 255).astype(np.uint8)
        px = mask.labels == label
        out[px] = palette[spmap.cluster_index[px]]
    return out
