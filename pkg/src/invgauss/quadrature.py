"""Adaptive 1D quadrature and small-dimension region integration.

The 1D driver is a nested Gauss(7)/Kronrod(15) pair with adaptive
bisection.  Complex integrands are integrated componentwise (the rule is
applied to the complex values directly; the error estimate uses the
complex modulus).  Endpoint substitutions handle integrable singularities
at an endpoint and improper tails.

Region integration covers balls, half balls, cubes, annuli and spheres
with tensor rules up to dimension 3 and seeded stratified Monte Carlo
above that.  Everything here is pure and re-entrant; Monte Carlo paths
take an explicit seed through :class:`QuadratureConfig`.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, replace
from enum import Enum
from functools import lru_cache
from typing import Callable

import numpy as np


class EndpointPolicy(Enum):
    NONE = "none"
    LOG_SINGULAR_LEFT = "log-singular-left"
    GAUSSIAN_CONCENTRATION_RIGHT = "gaussian-concentration-right"
    EXP_TAIL = "exp-tail"


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerances and subdivision limits shared by all integrals."""

    rel_tol: float = 1e-8
    abs_tol: float = 1e-12
    max_depth: int = 40
    endpoint_policy: EndpointPolicy = EndpointPolicy.NONE
    seed: int = 42
    mc_samples: int = 200_000

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")

    def with_policy(self, policy: EndpointPolicy) -> "QuadratureConfig":
        return replace(self, endpoint_policy=policy)


DEFAULT_CONFIG = QuadratureConfig()


@dataclass
class Estimate:
    value: complex
    err: float
    subdivisions: int

    @property
    def real(self) -> float:
        return float(np.real(self.value))


class NonConvergence(RuntimeError):
    """Adaptive refinement hit its depth limit; carries the best estimate."""

    def __init__(self, estimate: Estimate, message: str = "quadrature did not converge"):
        super().__init__(f"{message} (value={estimate.value}, err={estimate.err:.3e})")
        self.estimate = estimate


class MonteCarloVariance(RuntimeError):
    """Monte Carlo statistical error stayed above the requested tolerance."""

    def __init__(self, estimate: Estimate):
        super().__init__(f"MC error {estimate.err:.3e} above tolerance")
        self.estimate = estimate


# Gauss-Kronrod 7/15 nodes and weights on [-1, 1] (positive half, symmetric).
_XGK = np.array([
    0.9914553711208126, 0.9491079123427585, 0.8648644233597691,
    0.7415311855993944, 0.5860872354676911, 0.4058451513773972,
    0.2077849550078985, 0.0,
])
_WGK = np.array([
    0.0229353220105292, 0.0630920926299785, 0.1047900103222502,
    0.1406532597155259, 0.1690047266392679, 0.1903505780647854,
    0.2044329400752989, 0.2094821410847278,
])
_WG = np.array([
    0.1294849661688697, 0.2797053914892767,
    0.3818300505051189, 0.4179591836734694,
])

_NODES = np.concatenate([-_XGK[:-1], [0.0], _XGK[-2::-1]])        # 15 ascending nodes
_WK = np.concatenate([_WGK[:-1], [_WGK[-1]], _WGK[-2::-1]])       # Kronrod weights
_WG15 = np.zeros(15)
_WG15[1:-1:2] = np.concatenate([_WG[:-1], [_WG[-1]], _WG[-2::-1]])  # Gauss weights on odd slots


def _gk15(f, a: float, b: float):
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    x = mid + half * _NODES
    y = np.asarray(f(x))
    if y.shape != x.shape:
        raise ValueError("integrand must be vectorized over the node array")
    ik = half * np.sum(_WK * y)
    ig = half * np.sum(_WG15 * y)
    return ik, abs(ik - ig)


def integrate(f, a: float, b: float, cfg: QuadratureConfig | None = None) -> Estimate:
    """Integrate ``f`` on (a, b) to the configured tolerance.

    ``f`` must accept a numpy array of abscissae and return an array of
    values (real or complex).  Endpoint singularities are allowed when the
    matching policy is set; they are removed by a quadratic substitution
    that clusters nodes at the offending endpoint.

    Raises :class:`NonConvergence` (carrying the best estimate) if the
    bisection depth limit is reached before the error bound is met.
    """
    cfg = cfg or DEFAULT_CONFIG
    if not (a < b):
        raise ValueError("need a < b")

    policy = cfg.endpoint_policy
    if policy is EndpointPolicy.LOG_SINGULAR_LEFT:
        span = b - a
        g = lambda u: f(a + span * u * u) * (2.0 * span * u)
        return _adaptive(g, 0.0, 1.0, cfg)
    if policy is EndpointPolicy.GAUSSIAN_CONCENTRATION_RIGHT:
        span = b - a
        g = lambda u: f(b - span * u * u) * (2.0 * span * u)
        return _adaptive(g, 0.0, 1.0, cfg)
    return _adaptive(f, a, b, cfg)


def _adaptive(f, a: float, b: float, cfg: QuadratureConfig) -> Estimate:
    ik, err = _gk15(f, a, b)
    heap = [(-err, a, b, ik, err, 0)]
    total = ik
    total_err = err
    nseg = 1
    while True:
        tol = max(cfg.abs_tol, cfg.rel_tol * abs(total))
        if total_err <= tol:
            return Estimate(total, total_err, nseg)
        neg_err, a0, b0, i0, e0, depth = heapq.heappop(heap)
        if depth >= cfg.max_depth or nseg > 20000:
            est = Estimate(total, total_err, nseg)
            raise NonConvergence(est)
        m = 0.5 * (a0 + b0)
        il, el = _gk15(f, a0, m)
        ir, er = _gk15(f, m, b0)
        total += (il + ir) - i0
        total_err += (el + er) - e0
        heapq.heappush(heap, (-el, a0, m, il, el, depth + 1))
        heapq.heappush(heap, (-er, m, b0, ir, er, depth + 1))
        nseg += 1


def integrate_improper(f, cfg: QuadratureConfig | None = None,
                       decay_rate: float | None = None) -> Estimate:
    """Integrate ``f`` on (0, inf).

    Default route maps the half line to (0, 1) via t = u/(1-u).  When the
    caller supplies an exponential ``decay_rate`` c (meaning
    |f(t)| <= |f(T)| * exp(-c (t - T)) beyond the truncation point), the
    integral is truncated where the integrand falls below abs_tol * 1e-3
    and the certified tail bound is added to the error.
    """
    cfg = cfg or DEFAULT_CONFIG
    if decay_rate is not None:
        if decay_rate <= 0:
            raise ValueError("decay_rate must be positive")
        cut = abs(cfg.abs_tol) * 1e-3
        T = 1.0
        while T < 1e6:
            if np.max(np.abs(f(np.array([T])))) < cut:
                break
            T *= 2.0
        inner_cfg = cfg if cfg.endpoint_policy is not EndpointPolicy.EXP_TAIL else \
            cfg.with_policy(EndpointPolicy.NONE)
        est = integrate(f, 0.0, T, inner_cfg)
        tail = float(np.max(np.abs(f(np.array([T]))))) / decay_rate
        return Estimate(est.value, est.err + tail, est.subdivisions)

    policy = cfg.endpoint_policy
    if policy in (EndpointPolicy.EXP_TAIL, EndpointPolicy.LOG_SINGULAR_LEFT):
        # split at 1: left part keeps any left-endpoint transform, the tail
        # uses t = 1 - log(w) which flattens exponential decay.
        left = integrate(f, 0.0, 1.0,
                         cfg if policy is EndpointPolicy.LOG_SINGULAR_LEFT
                         else cfg.with_policy(EndpointPolicy.NONE))

        def gright(w):
            t = 1.0 - np.log(w)
            return f(t) / w
        right = _adaptive(gright, 1e-280, 1.0, cfg)
        return Estimate(left.value + right.value, left.err + right.err,
                        left.subdivisions + right.subdivisions)

    def g(u):
        t = u / (1.0 - u)
        return f(t) / (1.0 - u) ** 2
    return _adaptive(g, 1e-300, 1.0 - 1e-16, cfg.with_policy(EndpointPolicy.NONE))


# ---------------------------------------------------------------------------
# fixed rules (building blocks for the vectorized evaluators elsewhere)

@lru_cache(maxsize=64)
def gauss_legendre(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def panel_rule(edges, order: int):
    """Composite Gauss-Legendre nodes/weights on consecutive panels."""
    edges = np.asarray(edges, dtype=float)
    x0, w0 = gauss_legendre(order)
    a = edges[:-1][:, None]
    b = edges[1:][:, None]
    x = 0.5 * (a + b) + 0.5 * (b - a) * x0[None, :]
    w = 0.5 * (b - a) * np.broadcast_to(w0, x.shape)
    return x.ravel(), w.ravel()


def geometric_edges(lo: float, hi: float, ratio: float = 2.0):
    """Panel edges from hi down to lo, geometrically refined toward lo."""
    if not (0 < lo < hi):
        raise ValueError("need 0 < lo < hi")
    edges = [hi]
    e = hi
    while e > lo * (1 + 1e-12):
        e = max(lo, e / ratio)
        edges.append(e)
    return np.array(edges[::-1])


# ---------------------------------------------------------------------------
# region integration

def _region_rule(region, order: int):
    """Return Lebesgue (or surface) nodes/weights for a region, n <= 3."""
    from . import geometry as g

    if isinstance(region, g.Ball) or isinstance(region, g.HalfBall):
        c = region.center
        n = c.size
        r = region.radius
        if n == 1:
            x, w = panel_rule(np.linspace(c[0] - r, c[0] + r, 3), order)
            return x[:, None], w
        half = isinstance(region, g.HalfBall)
        if n == 2:
            s, ws = panel_rule(np.linspace(0.0, r, 3), order)
            th_hi = math.pi if half else 2.0 * math.pi
            th, wt = panel_rule(np.linspace(0.0, th_hi, 4), order)
            S, TH = np.meshgrid(s, th, indexing="ij")
            pts = np.stack([c[0] + S * np.cos(TH), c[1] + S * np.sin(TH)], axis=-1)
            W = (ws[:, None] * wt[None, :]) * S
            return pts.reshape(-1, 2), W.ravel()
        if n == 3:
            s, ws = panel_rule(np.linspace(0.0, r, 3), order)
            mu, wmu = panel_rule(np.linspace(0.0 if half else -1.0, 1.0, 3), order)
            ph, wph = panel_rule(np.linspace(0.0, 2.0 * math.pi, 4), order)
            S, MU, PH = np.meshgrid(s, mu, ph, indexing="ij")
            sin_t = np.sqrt(1.0 - MU ** 2)
            pts = np.stack([
                c[0] + S * sin_t * np.cos(PH),
                c[1] + S * sin_t * np.sin(PH),
                c[2] + S * MU,
            ], axis=-1)
            W = (ws[:, None, None] * wmu[None, :, None] * wph[None, None, :]) * S ** 2
            return pts.reshape(-1, 3), W.ravel()
    elif isinstance(region, g.Cube):
        c = region.center
        n = c.size
        h = 0.5 * region.side
        axes = [panel_rule(np.array([ci - h, ci, ci + h]), order) for ci in c]
        grids = np.meshgrid(*[a[0] for a in axes], indexing="ij")
        pts = np.stack(grids, axis=-1).reshape(-1, n)
        W = axes[0][1]
        for a in axes[1:]:
            W = np.multiply.outer(W, a[1])
        return pts, W.ravel()
    elif isinstance(region, g.Annulus):
        c = region.center
        n = c.size
        s, ws = panel_rule(np.linspace(region.r_in, region.r_out, 4), order)
        spts, sw = _sphere_rule(n, order)
        pts = c[None, None, :] + s[:, None, None] * spts[None, :, :]
        W = ws[:, None] * sw[None, :] * (s[:, None] ** (n - 1))
        return pts.reshape(-1, n), W.ravel()
    elif isinstance(region, g.Sphere):
        spts, sw = _sphere_rule(region.center.size, order)
        return region.center[None, :] + region.radius * spts, \
            sw * region.radius ** (region.center.size - 1)
    raise TypeError(f"unsupported region {type(region).__name__}")


def _sphere_rule(n: int, order: int):
    """Unit-sphere surface nodes/weights in R^n (n <= 3)."""
    if n == 1:
        return np.array([[-1.0], [1.0]]), np.array([1.0, 1.0])
    if n == 2:
        m = max(16, 4 * order)
        th = np.arange(m) * (2.0 * math.pi / m)
        pts = np.stack([np.cos(th), np.sin(th)], axis=-1)
        return pts, np.full(m, 2.0 * math.pi / m)
    if n == 3:
        mu, wmu = panel_rule(np.array([-1.0, 0.0, 1.0]), order)
        m = max(16, 4 * order)
        ph = np.arange(m) * (2.0 * math.pi / m)
        MU, PH = np.meshgrid(mu, ph, indexing="ij")
        sin_t = np.sqrt(1.0 - MU ** 2)
        pts = np.stack([sin_t * np.cos(PH), sin_t * np.sin(PH), MU], axis=-1)
        W = np.broadcast_to(wmu[:, None] * (2.0 * math.pi / m), MU.shape)
        return pts.reshape(-1, 3), W.ravel()
    raise ValueError("tensor sphere rules only up to n=3")


def sphere_rule(n: int, order: int = 16):
    """Public unit-sphere rule (counting measure on S^0)."""
    return _sphere_rule(n, order)


def integrate_region(f, region, cfg: QuadratureConfig | None = None,
                     order: int = 12) -> Estimate:
    """Integrate ``f`` over a ball/half-ball/cube/annulus/sphere.

    Tensor product rules for n <= 3 with one refinement step to estimate
    the error; stratified Monte Carlo (seeded) above dimension 3.  Sphere
    regions yield the surface integral with measure dSigma.
    """
    cfg = cfg or DEFAULT_CONFIG
    from . import geometry as g

    n = region.center.size
    if n > 3 and not isinstance(region, g.Sphere):
        return _mc_region(f, region, cfg)

    prev = None
    best_subdiv = 0
    for k in range(cfg.max_depth):
        pts, w = _region_rule(region, order)
        val = np.sum(np.asarray(f(pts)) * w)
        best_subdiv = pts.shape[0]
        if prev is not None:
            err = abs(val - prev)
            if err <= max(cfg.abs_tol, cfg.rel_tol * abs(val)):
                return Estimate(val, err, best_subdiv)
        prev = val
        order = int(order * 1.6) + 1
        if order > 400:
            raise NonConvergence(Estimate(val, abs(val - prev) if prev is not None else np.inf,
                                          best_subdiv))
    raise NonConvergence(Estimate(prev, np.inf, best_subdiv))


def _mc_region(f, region, cfg: QuadratureConfig) -> Estimate:
    from . import geometry as g

    rng = np.random.default_rng(cfg.seed)
    n = region.center.size
    if isinstance(region, g.Ball):
        lo = region.center - region.radius
        span = np.full(n, 2.0 * region.radius)
        inside = lambda p: np.sum((p - region.center) ** 2, axis=1) <= region.radius ** 2
    elif isinstance(region, g.Cube):
        lo = region.center - 0.5 * region.side
        span = np.full(n, region.side)
        inside = lambda p: np.ones(p.shape[0], dtype=bool)
    elif isinstance(region, g.Annulus):
        lo = region.center - region.r_out
        span = np.full(n, 2.0 * region.r_out)
        def inside(p):
            d2 = np.sum((p - region.center) ** 2, axis=1)
            return (d2 >= region.r_in ** 2) & (d2 <= region.r_out ** 2)
    else:
        raise TypeError("MC path supports balls, cubes and annuli")

    # stratify each axis into two halves: 2^min(n,10) strata
    strata_bits = min(n, 10)
    n_strata = 1 << strata_bits
    per = max(64, cfg.mc_samples // n_strata)
    vol_box = float(np.prod(span))
    vals = []
    for s in range(n_strata):
        u = rng.random((per, n))
        for b in range(strata_bits):
            u[:, b] = 0.5 * u[:, b] + (0.5 if (s >> b) & 1 else 0.0)
        p = lo[None, :] + span[None, :] * u
        y = np.where(inside(p), np.asarray(f(p)), 0.0)
        vals.append(y)
    y = np.concatenate(vals)
    val = vol_box * float(np.mean(y))
    err = vol_box * 3.0 * float(np.std(y)) / math.sqrt(y.size)
    est = Estimate(val, err, y.size)
    if err > max(cfg.abs_tol, cfg.rel_tol * abs(val)):
        raise MonteCarloVariance(est)
    return est
