"""Training objectives as pure array functions.

These take pre-computed feature activations or discriminator scores and
reduce them to scalars (or per-scale lists); no network evaluation happens
here. A "feature stack" is a list of arrays, one per layer; multi-scale
inputs are lists of such stacks, one per discriminator scale. All
reductions are plain means so values are comparable across batch and
feature sizes.
"""

import numpy as np

from .errors import EmptyInput, LengthMismatch, ShapeMismatch

DEFAULT_PERCEPTUAL_WEIGHT = 10.0
DEFAULT_FEATURE_MATCH_WEIGHT = 10.0


def _as_pairs(real_feats, fake_feats, what):
    if len(real_feats) != len(fake_feats):
        raise LengthMismatch(
            f"{what}: got {len(real_feats)} real and {len(fake_feats)} fake layers"
        )
    if len(real_feats) == 0:
        raise EmptyInput(f"{what}: need at least one layer")
    pairs = []
    for i, (r, f) in enumerate(zip(real_feats, fake_feats)):
        r = np.asarray(r, dtype=np.float64)
        f = np.asarray(f, dtype=np.float64)
        if r.shape != f.shape:
            raise ShapeMismatch(f"{what}: layer {i} shapes differ, {r.shape} vs {f.shape}")
        if r.size == 0:
            raise EmptyInput(f"{what}: layer {i} is empty")
        pairs.append((r, f))
    return pairs


def _stack_mad(real_feats, fake_feats, what) -> float:
    """Mean over layers of the per-layer mean absolute difference."""
    pairs = _as_pairs(real_feats, fake_feats, what)
    return float(np.mean([np.abs(r - f).mean() for r, f in pairs]))


def perceptual_loss(real_feats, fake_feats) -> float:
    """Mean over layers of the mean absolute activation difference."""
    return _stack_mad(real_feats, fake_feats, "perceptual loss")


def feature_matching_loss(real_per_scale, fake_per_scale) -> list[float]:
    """Per-scale feature distance between real and fake activations.

    Each argument is a list with one feature stack per discriminator scale;
    the result holds one value per scale (mean over that scale's layers of
    mean absolute difference) so callers can weight and sum scales as the
    total objective requires.
    """
    if len(real_per_scale) != len(fake_per_scale):
        raise LengthMismatch(
            f"feature matching loss: got {len(real_per_scale)} real and "
            f"{len(fake_per_scale)} fake scales"
        )
    if len(real_per_scale) == 0:
        raise EmptyInput("feature matching loss: need at least one scale")
    return [
        _stack_mad(r, f, f"feature matching loss (scale {i})")
        for i, (r, f) in enumerate(zip(real_per_scale, fake_per_scale))
    ]


def _check_scores(scores, what):
    scores = np.asarray(scores, dtype=np.float64)
    if scores.size == 0:
        raise EmptyInput(f"{what}: need at least one score")
    return scores


def hinge_d_loss(real_scores, fake_scores) -> float:
    """Discriminator hinge: mean(relu(1 - real)) + mean(relu(1 + fake))."""
    real = _check_scores(real_scores, "hinge discriminator loss (real)")
    fake = _check_scores(fake_scores, "hinge discriminator loss (fake)")
    return float(
        np.maximum(0.0, 1.0 - real).mean() + np.maximum(0.0, 1.0 + fake).mean()
    )


def hinge_g_loss(fake_scores) -> float:
    """Generator hinge: -mean(fake); lower when the discriminator is fooled."""
    fake = _check_scores(fake_scores, "hinge generator loss")
    return float(-fake.mean())


def total_loss(
    perceptual: float,
    feature_matching: list[float],
    adversarial: list[float],
    alpha: float = DEFAULT_PERCEPTUAL_WEIGHT,
    beta: float = DEFAULT_FEATURE_MATCH_WEIGHT,
) -> float:
    """Combined generator objective.

    alpha * perceptual + sum over scales of (beta * feature_matching + adversarial).
    The two per-scale lists must be the same length (one entry per
    discriminator scale).
    """
    if len(feature_matching) != len(adversarial):
        raise LengthMismatch(
            f"feature matching has {len(feature_matching)} scales, "
            f"adversarial has {len(adversarial)}"
        )
    if len(adversarial) == 0:
        raise EmptyInput("need at least one discriminator scale")
    per_scale = [beta * fm + adv for fm, adv in zip(feature_matching, adversarial)]
    return float(alpha * perceptual + np.sum(per_scale))
