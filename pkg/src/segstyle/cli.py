"""Command-line front end.

Subcommands wire the library into a pipeline: `encode` turns an image +
label mask into a style-code file, `superpixels` visualizes the clustering,
`refine` runs the self-attention layer over a code file, `mix` edits codes
per label across files, and `reconstruct` paints codes back into an image.

Exit codes: 0 success, 2 I/O failure (and argparse usage errors), 3
dimension/consistency error, 4 schema-invalid JSON input.
"""

import argparse
import sys

from . import attention, codes as codes_mod, color, maskslic, mixer
from .errors import DimensionMismatch, SchemaError, SegstyleError

EXIT_OK = 0
EXIT_IO = 2
EXIT_CONSISTENCY = 3
EXIT_SCHEMA = 4


def _int_at_least(minimum):
    def parse(text):
        try:
            value = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{text!r} is not an integer")
        if value < minimum:
            raise argparse.ArgumentTypeError(f"must be >= {minimum}, got {value}")
        return value

    return parse


def _positive_float(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a number")
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="segstyle",
        description="Superpixel style codes for semantic regions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def clustering_flags(p):
        p.add_argument("--k", type=_int_at_least(1), default=maskslic.DEFAULT_CLUSTERS,
                       help="max superpixels per label (default %(default)s)")
        p.add_argument("--iters", type=_int_at_least(1), default=maskslic.DEFAULT_ITERATIONS,
                       help="clustering iterations (default %(default)s)")
        p.add_argument("--compactness", type=_positive_float,
                       default=maskslic.DEFAULT_COMPACTNESS,
                       help="spatial-vs-color balance (default %(default)s)")
        p.add_argument("--windowed-search", action="store_true",
                       help="restrict assignment to a window around each center")

    p = sub.add_parser("encode", help="image + mask -> style-code JSON")
    p.add_argument("--image", required=True, help="8-bit RGB PNG")
    p.add_argument("--mask", required=True, help="8-bit grayscale PNG of label indices")
    p.add_argument("--out", required=True, help="output codes JSON")
    p.add_argument("--map-out", help="also write the 16-bit superpixel id map PNG (+ .json sidecar)")
    p.add_argument("--n", type=_int_at_least(3), default=codes_mod.DEFAULT_CODE_LENGTH,
                   help="style code length (default %(default)s)")
    clustering_flags(p)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("superpixels", help="image + mask -> boundary overlay + id map")
    p.add_argument("--image", required=True, help="8-bit RGB PNG")
    p.add_argument("--mask", required=True, help="8-bit grayscale PNG of label indices")
    p.add_argument("--out", required=True, help="output overlay PNG")
    p.add_argument("--map-out", required=True,
                   help="output 16-bit superpixel id map PNG (+ .json sidecar)")
    clustering_flags(p)
    p.set_defaults(func=cmd_superpixels)

    p = sub.add_parser("refine", help="run self-attention over a codes file")
    p.add_argument("--codes", required=True, help="input codes JSON")
    p.add_argument("--out", required=True, help="output codes JSON")
    p.add_argument("--params", help="attention params JSON (default: seeded random init)")
    p.add_argument("--seed", type=_int_at_least(0), default=0,
                   help="seed for random param init (default %(default)s)")
    p.add_argument("--drop-averaging", action="store_true",
                   help="skip the 1/N scaling of the attention aggregate")
    p.set_defaults(func=cmd_refine)

    p = sub.add_parser("mix", help="swap style codes per label across files")
    p.add_argument("--source", required=True, help="base codes JSON")
    p.add_argument("--recipe", required=True, help="recipe JSON of label->donor assignments")
    p.add_argument("--out", required=True, help="output codes JSON")
    p.add_argument("--style", help="codes JSON the recipe may reference as donor 'style'")
    p.set_defaults(func=cmd_mix)

    p = sub.add_parser("reconstruct", help="paint a codes file back into an image")
    p.add_argument("--codes", required=True, help="input codes JSON")
    p.add_argument("--map", required=True,
                   help="16-bit superpixel id map PNG written by encode/superpixels "
                        "(sidecar JSON expected at <map>.json)")
    p.add_argument("--mask", help="optional label mask PNG to cross-check against the map")
    p.add_argument("--out", required=True, help="output RGB PNG")
    p.set_defaults(func=cmd_reconstruct)

    return parser


def _load_image_and_mask(args):
    img = color.read_rgb_png(args.image)
    mask = maskslic.read_mask_png(args.mask)
    if img.shape[:2] != (mask.height, mask.width):
        raise DimensionMismatch(
            f"image {args.image} is {img.shape[0]}x{img.shape[1]} but "
            f"mask {args.mask} is {mask.height}x{mask.width}"
        )
    return img, mask


def _cluster(img, mask, args):
    labxy = color.rgb_to_labxy(img)
    return maskslic.cluster(
        labxy,
        mask,
        k=args.k,
        iterations=args.iters,
        compactness=args.compactness,
        windowed=args.windowed_search,
    )


def cmd_encode(args) -> int:
    img, mask = _load_image_and_mask(args)
    spmap = _cluster(img, mask, args)
    style = codes_mod.extract_style_codes(img, mask, spmap, n=args.n)
    codes_mod.write_codes(args.out, style)
    if args.map_out:
        maskslic.write_spmap(args.map_out, args.map_out + ".json", spmap, mask)
    return EXIT_OK


def cmd_superpixels(args) -> int:
    img, mask = _load_image_and_mask(args)
    spmap = _cluster(img, mask, args)
    ids = spmap.global_ids(mask)
    overlay = maskslic.draw_boundaries(img, ids)
    color.write_rgb_png(args.out, overlay)
    maskslic.write_spmap(args.map_out, args.map_out + ".json", spmap, mask)
    return EXIT_OK


def cmd_refine(args) -> int:
    style = codes_mod.read_codes(args.codes)
    if args.params:
        params = attention.read_params(args.params)
    else:
        params = attention.init_params(args.seed)
    refined = attention.refine_codes(style, params, averaged=not args.drop_averaging)
    codes_mod.write_codes(args.out, refined)
    return EXIT_OK


def cmd_mix(args) -> int:
    source = codes_mod.read_codes(args.source)
    recipe = mixer.read_recipe(args.recipe)
    donors = {"source": source}
    if args.style:
        donors["style"] = codes_mod.read_codes(args.style)
    for tag in sorted(set(recipe.assignments.values())):
        if tag in donors:
            continue
        if tag == "style":
            raise SchemaError(
                f"recipe {args.recipe} references donor 'style' but --style was not given"
            )
        donors[tag] = codes_mod.read_codes(tag)
    mixed = mixer.apply_recipe(source, recipe, donors)
    codes_mod.write_codes(args.out, mixed)
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    style = codes_mod.read_codes(args.codes)
    spmap, implied_mask = maskslic.read_spmap(args.map, args.map + ".json")
    if args.mask:
        mask = maskslic.read_mask_png(args.mask, label_count=spmap.label_count)
        if mask.labels.shape != implied_mask.labels.shape or not (
            mask.labels == implied_mask.labels
        ).all():
            raise DimensionMismatch(
                f"mask {args.mask} does not match the labels implied by map {args.map}"
            )
    else:
        mask = implied_mask
    img = mixer.coarse_reconstruct(style, spmap, mask)
    color.write_rgb_png(args.out, img)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SchemaError as exc:
        print(f"segstyle: schema error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except OSError as exc:
        print(f"segstyle: i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (SegstyleError, ValueError) as exc:
        print(f"segstyle: {exc}", file=sys.stderr)
        return EXIT_CONSISTENCY


if __name__ == "__main__":
    sys.exit(main())
