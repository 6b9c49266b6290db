"""Per-example losses (NLL, squared, cropped) and Monte-Carlo Gibbs risk.

The NLL loss is an affine transform of the squared loss:
nll = 0.5*log(2*pi*sigma2) + squared / (2*sigma2). Cropping clamps the
inner loss into [a, b] per example, before any averaging.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .blr import GaussianPosterior
from .tasks import DesignMatrix

# Keep weight-by-example loss blocks near ~200 MB.
_BLOCK_ELEMENTS = 25_000_000


@dataclass(frozen=True)
class LossSpec:
    """Tagged loss description: nll(sigma2), squared, or cropped(inner, a, b)."""

    kind: str
    sigma2: Optional[float] = None
    a: Optional[float] = None
    b: Optional[float] = None
    inner: Optional["LossSpec"] = None

    def __post_init__(self):
        if self.kind == "nll":
            if not (self.sigma2 is not None and self.sigma2 > 0):
                raise ValueError("nll loss requires sigma2 > 0")
        elif self.kind == "squared":
            pass
        elif self.kind == "cropped":
            if self.inner is None or self.inner.kind == "cropped":
                raise ValueError("cropped loss wraps a plain nll or squared loss")
            if self.a is None or self.b is None or not (self.a < self.b):
                raise ValueError("cropped loss requires finite a < b")
            if not (math.isfinite(self.a) and math.isfinite(self.b)):
                raise ValueError("cropped loss requires finite a < b")
        else:
            raise ValueError(f"unknown loss kind {self.kind!r}")

    @classmethod
    def nll(cls, sigma2: float) -> "LossSpec":
        return cls(kind="nll", sigma2=sigma2)

    @classmethod
    def squared(cls) -> "LossSpec":
        return cls(kind="squared")

    @classmethod
    def cropped(cls, inner: "LossSpec", a: float, b: float) -> "LossSpec":
        return cls(kind="cropped", inner=inner, a=a, b=b)


def squared_loss(w: np.ndarray, features: np.ndarray, y: float) -> float:
    """(w . features - y)^2."""
    return float(np.dot(w, features) - y) ** 2


def nll_loss(w: np.ndarray, sigma2: float, features: np.ndarray, y: float) -> float:
    """Gaussian negative log-likelihood of one example under weights w."""
    return 0.5 * math.log(2.0 * math.pi * sigma2) \
        + squared_loss(w, features, y) / (2.0 * sigma2)


def crop(value, a: float, b: float):
    """Clamp value (scalar or array) into [a, b]."""
    if not a < b:
        raise ValueError("need a < b")
    return np.minimum(b, np.maximum(a, value))


def _apply_from_squared(spec: LossSpec, sq):
    """Turn a block of squared residuals into the requested loss, in place."""
    if spec.kind == "squared":
        return sq
    if spec.kind == "nll":
        sq /= 2.0 * spec.sigma2
        sq += 0.5 * math.log(2.0 * math.pi * spec.sigma2)
        return sq
    inner = _apply_from_squared(spec.inner, sq)
    np.clip(inner, spec.a, spec.b, out=inner)
    return inner


def loss_matrix(spec: LossSpec, weights: np.ndarray, phi: np.ndarray,
                labels: np.ndarray) -> np.ndarray:
    """Loss of every weight vector on every example: shape (m, n)."""
    resid = weights @ phi.T - labels[None, :]
    np.square(resid, out=resid)
    return _apply_from_squared(spec, resid)


def mean_loss_per_weight(spec: LossSpec, weights: np.ndarray,
                         design: DesignMatrix) -> np.ndarray:
    """Dataset-average loss for each weight vector, blocked over examples."""
    m = weights.shape[0]
    n = design.n
    if n == 0:
        return np.zeros(m)
    sums = np.zeros(m)
    step = max(1, _BLOCK_ELEMENTS // m)
    for start in range(0, n, step):
        stop = min(n, start + step)
        block = loss_matrix(spec, weights, design.phi[start:stop],
                            design.labels[start:stop])
        sums += block.sum(axis=1)
    return sums / n


def empirical_gibbs_risk_mc(post: GaussianPosterior, design: DesignMatrix,
                            loss: LossSpec, m: int, seed: int) -> tuple[float, float]:
    """Monte-Carlo estimate of E_{w~posterior} of the dataset-average loss.

    Returns (estimate, standard error); deterministic given the seed.
    """
    if m < 2:
        raise ValueError("need at least 2 Monte-Carlo samples")
    from .mc import sample_posterior  # local import, mc builds on losses

    weights = sample_posterior(post, m, seed)
    per_weight = mean_loss_per_weight(loss, weights, design)
    return float(per_weight.mean()), float(per_weight.std(ddof=1) / math.sqrt(m))
