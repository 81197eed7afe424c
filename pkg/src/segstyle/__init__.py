"""Superpixel style codes for semantic regions.

Pipeline: convert an RGB image to [l a b x y], cluster each semantic
label's pixels into superpixels, average colors per superpixel into
fixed-length style codes, optionally refine the codes with a tiny
self-attention layer, edit them per label across images, and paint them
back into a coarse preview image.
"""

from .attention import (
    AttentionGrads,
    AttentionParams,
    AttentionTrace,
    attention_backward,
    attention_forward,
    init_params,
    numeric_gradient,
    read_params,
    refine_codes,
    write_params,
)
from .codes import (
    DEFAULT_CODE_LENGTH,
    LabelCode,
    StyleCodes,
    extract_style_codes,
    read_codes,
    resample_code,
    write_codes,
)
from .color import (
    lab_to_rgb,
    lab_to_srgb,
    read_rgb_png,
    rgb_to_labxy,
    srgb_to_lab,
    write_rgb_png,
)
from .errors import (
    CodeLengthMismatch,
    DimensionMismatch,
    EmptyInput,
    EmptyLabel,
    LabelAbsentInDonor,
    LengthMismatch,
    NonFinite,
    SchemaError,
    SegstyleError,
    ShapeMismatch,
)
from .losses import (
    feature_matching_loss,
    hinge_d_loss,
    hinge_g_loss,
    perceptual_loss,
    total_loss,
)
from .maskslic import (
    DEFAULT_CLUSTERS,
    DEFAULT_COMPACTNESS,
    DEFAULT_ITERATIONS,
    SemanticMask,
    SuperpixelMap,
    assign_pixels,
    cluster,
    draw_boundaries,
    init_centers,
    read_mask_png,
    read_spmap,
    update_centers,
    write_mask_png,
    write_spmap,
)
from .mixer import (
    MixRecipe,
    apply_recipe,
    coarse_reconstruct,
    mix_codes,
    read_recipe,
    swap_codes,
    write_recipe,
)

__version__ = "0.1.0"

__all__ = [
    "AttentionGrads",
    "AttentionParams",
    "AttentionTrace",
    "CodeLengthMismatch",
    "DEFAULT_CLUSTERS",
    "DEFAULT_CODE_LENGTH",
    "DEFAULT_COMPACTNESS",
    "DEFAULT_ITERATIONS",
    "DimensionMismatch",
    "EmptyInput",
    "EmptyLabel",
    "LabelAbsentInDonor",
    "LabelCode",
    "LengthMismatch",
    "MixRecipe",
    "NonFinite",
    "SchemaError",
    "SegstyleError",
    "SemanticMask",
    "ShapeMismatch",
    "StyleCodes",
    "SuperpixelMap",
    "apply_recipe",
    "assign_pixels",
    "attention_backward",
    "attention_forward",
    "cluster",
    "coarse_reconstruct",
    "draw_boundaries",
    "extract_style_codes",
    "feature_matching_loss",
    "hinge_d_loss",
    "hinge_g_loss",
    "init_centers",
    "init_params",
    "lab_to_rgb",
    "lab_to_srgb",
    "mix_codes",
    "numeric_gradient",
    "perceptual_loss",
    "read_codes",
    "read_mask_png",
    "read_params",
    "read_recipe",
    "read_rgb_png",
    "read_spmap",
    "refine_codes",
    "resample_code",
    "rgb_to_labxy",
    "srgb_to_lab",
    "swap_codes",
    "total_loss",
    "update_centers",
    "write_codes",
    "write_mask_png",
    "write_params",
    "write_recipe",
    "write_rgb_png",
    "write_spmap",
]
