"""Self-attention refinement over 1-D style vectors.

Every pair of positions (i, j) in a vector `a` gets a scalar affinity
``leaky_relu(w1*a[i] + w2*a[j] + bias)``; row-wise softmax turns affinities
into weights, each position aggregates the whole vector under its weights,
and the aggregate is added back onto the input. Only three scalar parameters
are involved, so the layer adapts to any vector length.

The backward pass is analytic (closed form), kept in lockstep with the
forward trace so finite-difference checks can verify it.
"""

import json
from dataclasses import dataclass, replace

import numpy as np

from .codes import LabelCode, StyleCodes
from .errors import NonFinite, SchemaError

DEFAULT_LEAKY_SLOPE = 0.2
PARAM_INIT_SPAN = 0.1


@dataclass
class AttentionParams:
    """The layer's three scalars plus the LeakyReLU negative slope."""

    w1: float
    w2: float
    bias: float
    leaky_slope: float = DEFAULT_LEAKY_SLOPE


@dataclass
class AttentionTrace:
    """Forward intermediates: affinities `e`, weights `s` (rows sum to 1),
    the aggregated update `a_prime`, and `output = a + a_prime`."""

    e: np.ndarray
    s: np.ndarray
    a_prime: np.ndarray
    output: np.ndarray


@dataclass
class AttentionGrads:
    """Gradients of a scalar loss with respect to the layer's inputs."""

    a: np.ndarray
    w1: float
    w2: float
    bias: float


def init_params(seed: int = 0) -> AttentionParams:
    """Small random parameters, uniform in [-0.1, 0.1], reproducible by seed."""
    rng = np.random.default_rng(seed)
    w1, w2, bias = rng.uniform(-PARAM_INIT_SPAN, PARAM_INIT_SPAN, size=3)
    return AttentionParams(w1=float(w1), w2=float(w2), bias=float(bias))


def _check_vector(a, name="a"):
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 1 or a.size == 0:
        raise NonFinite(f"{name} must be a non-empty 1-D vector, got shape {a.shape}")
    if not np.isfinite(a).all():
        raise NonFinite(f"{name} contains non-finite values")
    return a


def _affinities(a, params):
    with np.errstate(over="ignore", invalid="ignore"):
        z = params.w1 * a[:, None] + params.w2 * a[None, :] + params.bias
        e = np.where(z >= 0.0, z, params.leaky_slope * z)
    if not np.isfinite(e).all():
        raise NonFinite("affinities overflowed to non-finite values")
    return z, e


def _row_softmax(e):
    shifted = e - e.max(axis=1, keepdims=True)
    ex = np.exp(shifted)
    return ex / ex.sum(axis=1, keepdims=True)


def attention_forward(
    a: np.ndarray, params: AttentionParams, averaged: bool = True
) -> AttentionTrace:
    """Run the layer on a length-N vector.

    With `averaged` (the default) the aggregate at each position is the
    weighted mean divided by N; without it, the plain weighted mean. The
    residual `output = a + a_prime` is returned alongside all intermediates.
    """
    a = _check_vector(a)
    _, e = _affinities(a, params)
    s = _row_softmax(e)
    r = s @ a
    a_prime = r / a.size if averaged else r
    output = a + a_prime
    if not np.isfinite(output).all():
        raise NonFinite("attention output contains non-finite values")
    return AttentionTrace(e=e, s=s, a_prime=a_prime, output=output)


def attention_backward(
    a: np.ndarray,
    params: AttentionParams,
    upstream: np.ndarray,
    averaged: bool = True,
) -> AttentionGrads:
    """Gradients of sum(upstream * output) with respect to `a`, w1, w2, bias.

    Recomputes the forward intermediates, then backpropagates through the
    residual add, the aggregation, the row softmax and the LeakyReLU. At an
    affinity of exactly zero the LeakyReLU derivative is taken as 1.
    """
    a = _check_vector(a)
    g = _check_vector(upstream, name="upstream")
    if g.size != a.size:
        raise NonFinite(f"upstream length {g.size} does not match input length {a.size}")
    z, e = _affinities(a, params)
    s = _row_softmax(e)
    r = s @ a
    c = 1.0 / a.size if averaged else 1.0
    phi = np.where(z >= 0.0, 1.0, params.leaky_slope)
    # G[i, j] = dL/dz[i, j]
    G = (c * g)[:, None] * s * (a[None, :] - r[:, None]) * phi
    grad_w1 = float((G.sum(axis=1) * a).sum())
    grad_w2 = float((G.sum(axis=0) * a).sum())
    grad_bias = float(G.sum())
    grad_a = g + c * (s.T @ g) + params.w1 * G.sum(axis=1) + params.w2 * G.sum(axis=0)
    return AttentionGrads(a=grad_a, w1=grad_w1, w2=grad_w2, bias=grad_bias)


def refine_codes(
    codes: StyleCodes, params: AttentionParams, averaged: bool = True
) -> StyleCodes:
    """Apply the layer to every present label's code; raw vectors pass through."""
    out = StyleCodes(n=codes.n, k=codes.k)
    for label, lc in sorted(codes.labels.items()):
        if not lc.present:
            out.labels[label] = LabelCode(
                id=label, present=False, raw=lc.raw.copy(), code=lc.code.copy()
            )
            continue
        try:
            trace = attention_forward(lc.code, params, averaged=averaged)
        except NonFinite as exc:
            raise NonFinite(f"label {label}: {exc}") from exc
        out.labels[label] = LabelCode(
            id=label, present=True, raw=lc.raw.copy(), code=trace.output
        )
    return out


# ---------- file format ----------


def write_params(path, params: AttentionParams) -> None:
    doc = {
        "w1": float(params.w1),
        "w2": float(params.w2),
        "bias": float(params.bias),
        "leaky_slope": float(params.leaky_slope),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, allow_nan=False)
        fh.write("\n")


def read_params(path) -> AttentionParams:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON in {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError(f"top level must be an object: {path}")
    for key in ("w1", "w2", "bias", "leaky_slope"):
        if key not in doc:
            raise SchemaError(f"missing key {key!r}: {path}")
        value = doc[key]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise SchemaError(f"{key!r} must be a number: {path}")
        if not np.isfinite(value):
            raise SchemaError(f"{key!r} is not finite: {path}")
    return AttentionParams(
        w1=float(doc["w1"]),
        w2=float(doc["w2"]),
        bias=float(doc["bias"]),
        leaky_slope=float(doc["leaky_slope"]),
    )


def numeric_gradient(
    a: np.ndarray,
    params: AttentionParams,
    upstream: np.ndarray,
    averaged: bool = True,
    step: float = 1e-5,
) -> AttentionGrads:
    """Central finite-difference gradients of sum(upstream * output).

    Reference implementation for checking `attention_backward`; O(N) forward
    passes, so only suitable for small vectors and tests.
    """
    a = _check_vector(a)
    g = _check_vector(upstream, name="upstream")

    def value(vec, p):
        return float(np.dot(g, attention_forward(vec, p, averaged=averaged).output))

    grad_a = np.zeros_like(a)
    for i in range(a.size):
        hi, lo = a.copy(), a.copy()
        hi[i] += step
        lo[i] -= step
        grad_a[i] = (value(hi, params) - value(lo, params)) / (2.0 * step)

    scalars = {}
    for name in ("w1", "w2", "bias"):
        hi = replace(params, **{name: getattr(params, name) + step})
        lo = replace(params, **{name: getattr(params, name) - step})
        scalars[name] = (value(a, hi) - value(a, lo)) / (2.0 * step)
    return AttentionGrads(a=grad_a, w1=scalars["w1"], w2=scalars["w2"], bias=scalars["bias"])
