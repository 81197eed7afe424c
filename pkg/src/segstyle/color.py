"""sRGB <-> CIELAB conversion and the 5-channel [l a b x y] pixel representation.

Conventions: D65 white, 2-degree observer, the IEC 61966-2-1 sRGB transfer
function with its linear toe segment. The white point is taken as the row
sums of the RGB->XYZ matrix (the XYZ of sRGB white), so neutral inputs
(r == g == b) land exactly on the a* = b* = 0 axis instead of picking up
rounding residue from a 5-digit published white point.
"""

import numpy as np
from PIL import Image

# sRGB (linear) -> XYZ, D65, derived from the IEC 61966-2-1 primaries.
_RGB_TO_XYZ = np.array(
    [
        [0.41239080, 0.35758434, 0.18048079],
        [0.21263901, 0.71516868, 0.07219232],
        [0.01933082, 0.11919478, 0.95053215],
    ]
)
_XYZ_TO_RGB = np.linalg.inv(_RGB_TO_XYZ)
_WHITE = _RGB_TO_XYZ.sum(axis=1)  # XYZ of sRGB white

_DELTA = 6.0 / 29.0  # CIELAB knee


def _srgb_to_linear(u):
    u = np.asarray(u, dtype=np.float64)
    return np.where(u <= 0.04045, u / 12.92, ((u + 0.055) / 1.055) ** 2.4)


def _linear_to_srgb(u):
    u = np.asarray(u, dtype=np.float64)
    # Negative linear values can come out of Lab->XYZ for out-of-gamut
    # colors; clip before the fractional power.
    u = np.clip(u, 0.0, None)
    return np.where(u <= 0.0031308, u * 12.92, 1.055 * u ** (1.0 / 2.4) - 0.055)


def _lab_f(t):
    return np.where(t > _DELTA**3, np.cbrt(t), t / (3.0 * _DELTA**2) + 4.0 / 29.0)


def _lab_f_inv(t):
    return np.where(t > _DELTA, t**3, 3.0 * _DELTA**2 * (t - 4.0 / 29.0))


def srgb_to_lab(rgb):
    """Convert sRGB values in [0, 1], shape (..., 3), to CIELAB [L*, a*, b*].

    L* is in [0, 100] for in-gamut input; a*/b* are the chromatic axes.
    """
    rgb = np.asarray(rgb, dtype=np.float64)
    lin = _srgb_to_linear(rgb)
    xyz = lin @ _RGB_TO_XYZ.T
    f = _lab_f(xyz / _WHITE)
    lab = np.empty_like(f)
    lab[..., 0] = 116.0 * f[..., 1] - 16.0
    lab[..., 1] = 500.0 * (f[..., 0] - f[..., 1])
    lab[..., 2] = 200.0 * (f[..., 1] - f[..., 2])
    return lab


def lab_to_srgb(lab):
    """Convert CIELAB values, shape (..., 3), to sRGB floats clipped to [0, 1]."""
    lab = np.asarray(lab, dtype=np.float64)
    fy = (lab[..., 0] + 16.0) / 116.0
    fx = fy + lab[..., 1] / 500.0
    fz = fy - lab[..., 2] / 200.0
    xyz = np.stack([_lab_f_inv(fx), _lab_f_inv(fy), _lab_f_inv(fz)], axis=-1) * _WHITE
    lin = xyz @ _XYZ_TO_RGB.T
    return np.clip(_linear_to_srgb(lin), 0.0, 1.0)


def rgb_to_labxy(img: np.ndarray, spatial_weight: float = 1.0) -> np.ndarray:
    """Convert an 8-bit RGB image (H, W, 3) to the (H, W, 5) [l a b x y] grid.

    The last two channels are (column * spatial_weight, row * spatial_weight);
    clustering applies its own spatial scaling on top, so pass 1.0 unless you
    want the weight baked into the coordinates themselves.
    """
    img = np.asarray(img)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"expected an (H, W, 3) RGB image, got shape {img.shape}")
    if img.shape[0] < 1 or img.shape[1] < 1:
        raise ValueError(f"image dimensions must be positive, got {img.shape[:2]}")
    if spatial_weight < 0:
        raise ValueError(f"spatial_weight must be non-negative, got {spatial_weight}")
    h, w = img.shape[:2]
    out = np.empty((h, w, 5), dtype=np.float64)
    out[..., :3] = srgb_to_lab(img.astype(np.float64) / 255.0)
    cols, rows = np.meshgrid(np.arange(w), np.arange(h))
    out[..., 3] = cols * spatial_weight
    out[..., 4] = rows * spatial_weight
    return out


def lab_to_rgb(lab) -> np.ndarray:
    """Convert CIELAB values, shape (..., 3), to 8-bit sRGB triples.

    Out-of-gamut values clamp to the 8-bit range; this is a total function.
    """
    srgb = lab_to_srgb(lab)
    return np.clip(np.rint(srgb * 255.0), 0, 255).astype(np.uint8)


def read_rgb_png(path) -> np.ndarray:
    """Read a PNG as an (H, W, 3) uint8 array (alpha dropped, palette expanded)."""
    with Image.open(path) as im:
        return np.asarray(im.convert("RGB"))


def write_rgb_png(path, img: np.ndarray) -> None:
    """Write an (H, W, 3) uint8 array as an 8-bit RGB PNG."""
    img = np.asarray(img)
    if img.ndim != 3 or img.shape[2] != 3 or img.dtype != np.uint8:
        raise ValueError(f"expected uint8 (H, W, 3), got {img.dtype} {img.shape}")
    Image.fromarray(img, mode="RGB").save(path, format="PNG")
