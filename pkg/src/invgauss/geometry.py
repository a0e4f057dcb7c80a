"""Measures, admissible balls, local/global regions and scalar helpers.

Points are plain numpy arrays of shape (n,).  All helpers accept lists
and coerce.  The inverse-Gaussian weight grows like exp(|x|^2); values
that overflow the double range saturate to inf rather than raising.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .quadrature import (Estimate, QuadratureConfig, DEFAULT_CONFIG,
                         integrate_region)


def as_point(x) -> np.ndarray:
    p = np.atleast_1d(np.asarray(x, dtype=float))
    if p.ndim != 1 or p.size < 1:
        raise ValueError("a point is a 1-d vector with n >= 1 entries")
    if not np.all(np.isfinite(p)):
        raise ValueError("point entries must be finite")
    return p


def gamma_minus1_density(x) -> float:
    """Density pi^{n/2} exp(|x|^2) of the inverse-Gaussian measure."""
    p = np.asarray(x, dtype=float)
    n = p.shape[-1] if p.ndim > 0 else 1
    with np.errstate(over="ignore"):
        return math.pi ** (n / 2) * np.exp(np.sum(p * p, axis=-1))


def gauss_density(x) -> float:
    p = np.asarray(x, dtype=float)
    n = p.shape[-1] if p.ndim > 0 else 1
    return math.pi ** (-n / 2) * np.exp(-np.sum(p * p, axis=-1))


# ---------------------------------------------------------------------------
# regions

@dataclass(frozen=True)
class Ball:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_point(self.center))
        if self.radius <= 0:
            raise ValueError("radius must be positive")

    def admissible(self, scale: float = 1.0) -> bool:
        c = float(np.linalg.norm(self.center))
        return self.radius <= scale * min(1.0, 1.0 / c if c > 0 else math.inf)

    def dilate(self, k: float) -> "Ball":
        return Ball(self.center, k * self.radius)


@dataclass(frozen=True)
class Cube:
    center: np.ndarray
    side: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_point(self.center))
        if self.side <= 0:
            raise ValueError("side must be positive")

    def admissible(self, scale: float = 1.0) -> bool:
        c = float(np.linalg.norm(self.center))
        return self.side <= 2.0 * scale * min(1.0, 1.0 / c if c > 0 else math.inf)


@dataclass(frozen=True)
class Annulus:
    center: np.ndarray
    r_in: float
    r_out: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_point(self.center))
        if not (0 <= self.r_in < self.r_out):
            raise ValueError("need 0 <= r_in < r_out")


@dataclass(frozen=True)
class Sphere:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_point(self.center))


@dataclass(frozen=True)
class HalfBall:
    """Ball intersected with a coordinate half space (default: last axis >= 0)."""
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_point(self.center))


@dataclass(frozen=True)
class LocalN:
    """(x, y) with |x-y| <= delta / (1 + |x| + |y|)."""
    delta: float

    def __post_init__(self):
        if self.delta <= 0:
            raise ValueError("delta must be positive")


@dataclass(frozen=True)
class Global:
    """Complement of LocalN(1)."""


RegionTag = LocalN | Global


def in_region(x, y, tag: RegionTag) -> bool:
    x = as_point(x)
    y = as_point(y)
    if x.size != y.size:
        raise ValueError("dimension mismatch")
    d = float(np.linalg.norm(x - y))
    bound = 1.0 / (1.0 + np.linalg.norm(x) + np.linalg.norm(y))
    if isinstance(tag, LocalN):
        return d <= tag.delta * bound
    return d > bound


def global_mask(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Vectorized global-region membership for stacked samples (m, n)."""
    d = np.linalg.norm(x - y, axis=-1)
    return d > 1.0 / (1.0 + np.linalg.norm(x, axis=-1) + np.linalg.norm(y, axis=-1))


# ---------------------------------------------------------------------------
# pair scalars

@dataclass(frozen=True)
class PairGeometry:
    alpha: float        # |x-y| |x+y|
    beta: float         # |x-y| / |x+y|
    eta: float          # exp((|x|^2 - |y|^2 - alpha)/2), always <= 1
    theta: float        # angle between x and y
    theta_prime: float  # angle between y-x and y+x


def _angle(u: np.ndarray, v: np.ndarray) -> float:
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        return 0.0
    c = float(np.dot(u, v) / (nu * nv))
    return math.acos(min(1.0, max(-1.0, c)))


def pair_geometry(x, y) -> PairGeometry:
    """Scalars attached to a pair of points.

    beta is 0 at the degenerate pair x = -y = 0 and +inf when x = -y != 0
    (the |x+y| = 0 division); eta <= 1 always.
    """
    x = as_point(x)
    y = as_point(y)
    if x.size != y.size:
        raise ValueError("dimension mismatch")
    dm = float(np.linalg.norm(x - y))
    dp = float(np.linalg.norm(x + y))
    alpha = dm * dp
    if dp > 0.0:
        beta = dm / dp
    else:
        beta = 0.0 if dm == 0.0 else math.inf
    eta = math.exp(0.5 * (float(np.dot(x, x)) - float(np.dot(y, y)) - alpha))
    return PairGeometry(alpha=alpha, beta=beta, eta=min(eta, 1.0) if eta <= 1.0 + 1e-12 else eta,
                        theta=_angle(x, y), theta_prime=_angle(y - x, y + x))


def tau(s: float) -> float:
    """log((1+s)/(1-s)) on (0, 1); strictly increasing rescaling of time."""
    if not (0.0 < s < 1.0):
        raise ValueError("tau requires s in (0, 1)")
    return math.log((1.0 + s) / (1.0 - s))


def tau_inverse(t: float) -> float:
    if t < 0:
        raise ValueError("tau_inverse requires t >= 0")
    return math.tanh(0.5 * t)


def varphi(sigma: float) -> float:
    """sigma + 1/sigma - 2 = (sigma-1)^2 / sigma, zero only at sigma = 1."""
    if sigma <= 0.0:
        raise ValueError("varphi requires sigma > 0")
    return (sigma - 1.0) ** 2 / sigma


def sigma_branches(t: float, alpha: float) -> tuple[float, float]:
    """Inverse pair of alpha * varphi(sigma) = t.

    Returns (sigma_minus, sigma_plus) with sigma_minus in (0, 1] and
    sigma_plus >= 1.
    """
    if t < 0.0 or alpha <= 0.0:
        raise ValueError("need t >= 0 and alpha > 0")
    disc = math.sqrt(t * t + 4.0 * alpha * t)
    return 1.0 - (disc - t) / (2.0 * alpha), 1.0 + (disc + t) / (2.0 * alpha)


# ---------------------------------------------------------------------------
# measures

def ball_gamma_measure(ball: Ball, cfg: QuadratureConfig | None = None) -> float:
    """gamma_{-1}(B) by quadrature of the density over the ball.

    Tensor Gauss-Legendre up to n = 3, stratified seeded Monte Carlo above.
    """
    cfg = cfg or DEFAULT_CONFIG
    est: Estimate = integrate_region(gamma_minus1_density, ball, cfg)
    return float(np.real(est.value))


def cube_gamma_measure(cube: Cube, cfg: QuadratureConfig | None = None) -> float:
    cfg = cfg or DEFAULT_CONFIG
    est = integrate_region(gamma_minus1_density, cube, cfg)
    return float(np.real(est.value))


def lebesgue_ball_volume(n: int, r: float) -> float:
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1) * r ** n
