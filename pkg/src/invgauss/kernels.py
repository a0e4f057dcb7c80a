"""Closed-form and quadrature-defined kernels of the translated operators.

Conventions.  For an L^2-bounded operator T we write K_T for its kernel
against the Lebesgue measure and k_T for the kernel against the
inverse-Gaussian measure, so that T f(x) = int K_T(x,y) f(y) dy
= int k_T(x,y) f(y) dgamma_{-1}(y).  The two are related by
K_T(x,y) = k_T(x,y) * gamma_{-1}(y).

The off-diagonal kernels of the heat semigroup, the complex powers
(A + lam I)^z, the imaginary powers (u != 0) and the first-order Riesz
transforms grad (A + lam I)^{-1/2} are all represented by absolutely
convergent one-dimensional integrals away from the diagonal; evaluation
closer than 1e-6 to the diagonal is refused rather than regularized.

The majorants: Kbar is the explicit global kernel that dominates the
maximal heat kernel, the Riesz kernels with translation >= 1 and the
imaginary-power kernels; K_lam and Kprime_lam are the intermediate
t-integral majorants those comparisons factor through.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import special as sp

from . import geometry as geo
from .quadrature import (QuadratureConfig, DEFAULT_CONFIG, EndpointPolicy,
                         Estimate, integrate, panel_rule, geometric_edges)


class DiagonalProximity(ValueError):
    """Kernel evaluation requested within 1e-6 of the diagonal."""


DIAGONAL_GUARD = 1e-6


class Measure(Enum):
    LEBESGUE = "lebesgue"
    GAMMA = "gamma"


# ---------------------------------------------------------------------------
# kernel specs

@dataclass(frozen=True)
class Heat:
    t: float

    def __post_init__(self):
        if self.t <= 0:
            raise ValueError("heat time must be positive")


@dataclass(frozen=True)
class ComplexPower:
    z: complex
    lam: float = 0.0


@dataclass(frozen=True)
class ImaginaryPower:
    u: float
    lam: float = 0.0

    def __post_init__(self):
        if self.u == 0:
            raise ValueError("imaginary power requires u != 0")
        if self.lam < 0:
            raise ValueError("lam must be >= 0")


@dataclass(frozen=True)
class RieszComponent:
    j: int                     # 1-based component index
    lam: float = 0.0

    def __post_init__(self):
        if self.j < 1:
            raise ValueError("component index is 1-based")
        if self.lam < 0:
            raise ValueError("lam must be >= 0")


@dataclass(frozen=True)
class MajorantKbar:
    pass


@dataclass(frozen=True)
class MajorantKlambda:
    lam: float


@dataclass(frozen=True)
class MajorantKprime:
    lam: float


@dataclass(frozen=True)
class LocalKmunu:
    mu: float
    nu: float


KernelSpec = (Heat | ComplexPower | ImaginaryPower | RieszComponent |
              MajorantKbar | MajorantKlambda | MajorantKprime | LocalKmunu)


def c_u(u: float) -> complex:
    """Normalizing constant 1/Gamma(-iu) of the imaginary-power kernels."""
    return complex(sp.rgamma(-1j * u))


# ---------------------------------------------------------------------------
# elementary vector helpers

def phi_vec(r, x, y):
    """(r y - x) / sqrt(1 - r^2); |phi|^2 - |psi|^2 = |x|^2 - |y|^2."""
    r = np.asarray(r, dtype=float)
    return (np.multiply.outer(r, y) - x) / np.sqrt(1.0 - r * r)[..., None]


def psi_vec(r, x, y):
    r = np.asarray(r, dtype=float)
    return (np.multiply.outer(r, x) - y) / np.sqrt(1.0 - r * r)[..., None]


# ---------------------------------------------------------------------------
# Mehler kernels

def mehler_h(t: float, x, y) -> float:
    """Heat kernel at time t against gamma_{-1}; symmetric and positive."""
    x = geo.as_point(x)
    y = geo.as_point(y)
    n = x.size
    q = math.exp(-t)
    dp2 = float(np.sum((x + y) ** 2))
    dm2 = float(np.sum((x - y) ** 2))
    return (q ** n / (math.pi ** n * (1.0 - q * q) ** (n / 2)) *
            math.exp(-dp2 / (2.0 * (1.0 + q)) - dm2 / (2.0 * (1.0 - q))))


def mehler_H(t, x, y):
    """Heat kernel against the Lebesgue measure, h_t * gamma_{-1}(y).

    Vectorized over an array of times t.
    """
    x = geo.as_point(x)
    y = geo.as_point(y)
    n = x.size
    t = np.asarray(t, dtype=float)
    q = np.exp(-t)
    m = 1.0 - q * q
    d2 = np.sum((x[None, :] - np.multiply.outer(q, y)) ** 2, axis=-1)
    return q ** n / (math.pi ** (n / 2) * m ** (n / 2)) * np.exp(-d2 / m)


def mehler_H_rescaled(s, x, y):
    """H at time tau(s), as a function of s in (0, 1); vectorized in s."""
    x = geo.as_point(x)
    y = geo.as_point(y)
    n = x.size
    s = np.asarray(s, dtype=float)
    dp2 = float(np.sum((x + y) ** 2))
    dm2 = float(np.sum((x - y) ** 2))
    x2 = float(np.dot(x, x))
    y2 = float(np.dot(y, y))
    with np.errstate(over="ignore", divide="ignore"):
        return (math.pi ** (-n / 2) * np.exp(-0.5 * (x2 - y2)) *
                (1.0 - s) ** n / (4.0 * s) ** (n / 2) *
                np.exp(-0.25 * (s * dp2 + dm2 / s)))


_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def maximal_H(x, y, grid_points: int = 200, refine_iter: int = 60) -> float:
    """sup over t > 0 of H_t(x, y), via the s = tau^{-1}(t) rescaling.

    A log-spaced grid (two-sided, clustering at both ends of (0,1)) locates
    the maximum, then golden-section refinement polishes it.
    """
    x = geo.as_point(x)
    y = geo.as_point(y)
    if np.array_equal(x, y):
        raise DiagonalProximity("maximal kernel diverges on the diagonal")
    m = grid_points // 2
    left = np.exp(np.linspace(math.log(1e-12), math.log(0.5), m))
    s = np.concatenate([left, 1.0 - left[::-1][1:]])
    vals = mehler_H_rescaled(s, x, y)
    i = int(np.argmax(vals))
    lo = s[max(i - 1, 0)]
    hi = s[min(i + 1, s.size - 1)]
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc = mehler_H_rescaled(c, x, y)
    fd = mehler_H_rescaled(d, x, y)
    for _ in range(refine_iter):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = mehler_H_rescaled(c, x, y)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = mehler_H_rescaled(d, x, y)
    return float(max(np.max(vals), fc, fd))


def maximal_H_batch(X: np.ndarray, Y: np.ndarray, grid_points: int = 200,
                    refine_iter: int = 50) -> np.ndarray:
    """Vectorized maximal kernel over stacked sample pairs (m, n)."""
    m = grid_points // 2
    left = np.exp(np.linspace(math.log(1e-12), math.log(0.5), m))
    s = np.concatenate([left, 1.0 - left[::-1][1:]])
    vals = _H_rescaled_batch(s, X, Y)          # (m_samples, n_s)
    idx = np.argmax(vals, axis=1)
    lo = s[np.maximum(idx - 1, 0)]
    hi = s[np.minimum(idx + 1, s.size - 1)]
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc = _H_rescaled_batch_pointwise(c, X, Y)
    fd = _H_rescaled_batch_pointwise(d, X, Y)
    for _ in range(refine_iter):
        take = fc >= fd
        b = np.where(take, d, b)
        a = np.where(take, a, c)
        c_new = b - _GOLDEN * (b - a)
        d_new = a + _GOLDEN * (b - a)
        fc_new = _H_rescaled_batch_pointwise(c_new, X, Y)
        fd_new = _H_rescaled_batch_pointwise(d_new, X, Y)
        c, d, fc, fd = c_new, d_new, fc_new, fd_new
    best_grid = np.max(vals, axis=1)
    return np.maximum(best_grid, np.maximum(fc, fd))


def _pair_quantities(X, Y):
    dp2 = np.sum((X + Y) ** 2, axis=-1)
    dm2 = np.sum((X - Y) ** 2, axis=-1)
    x2 = np.sum(X * X, axis=-1)
    y2 = np.sum(Y * Y, axis=-1)
    return dp2, dm2, x2, y2


def _H_rescaled_batch(s, X, Y):
    n = X.shape[-1]
    dp2, dm2, x2, y2 = _pair_quantities(X, Y)
    s = s[None, :]
    with np.errstate(over="ignore"):
        return (math.pi ** (-n / 2) * np.exp(-0.5 * (x2 - y2))[:, None] *
                (1.0 - s) ** n / (4.0 * s) ** (n / 2) *
                np.exp(-0.25 * (s * dp2[:, None] + dm2[:, None] / s)))


def _H_rescaled_batch_pointwise(s, X, Y):
    n = X.shape[-1]
    dp2, dm2, x2, y2 = _pair_quantities(X, Y)
    with np.errstate(over="ignore"):
        return (math.pi ** (-n / 2) * np.exp(-0.5 * (x2 - y2)) *
                (1.0 - s) ** n / (4.0 * s) ** (n / 2) *
                np.exp(-0.25 * (s * dp2 + dm2 / s)))


# ---------------------------------------------------------------------------
# global majorants

def phi_profile(x, y) -> float:
    """Two-branch profile: alpha^{-n/2}, plus (1-beta)^n when beta < 1."""
    x = geo.as_point(x)
    y = geo.as_point(y)
    pg = geo.pair_geometry(x, y)
    if pg.alpha == 0.0:
        raise ValueError("profile undefined at alpha = 0")
    n = x.size
    base = pg.alpha ** (-n / 2)
    if pg.beta >= 1.0:
        return base
    return base + (1.0 - pg.beta) ** n


def kbar(x, y) -> float:
    """Global majorant kernel; zero on the local region LocalN(1).

    Evaluated in the algebraically combined form so that the beta >= 1
    branch reads eta * e^{-|x|^2+|y|^2} / |x-y|^n, which stays finite as
    x approaches -y.
    """
    x = geo.as_point(x)
    y = geo.as_point(y)
    if not geo.in_region(x, y, geo.Global()):
        return 0.0
    dm = float(np.linalg.norm(x - y))
    dp = float(np.linalg.norm(x + y))
    x2 = float(np.dot(x, x))
    y2 = float(np.dot(y, y))
    n = x.size
    alpha = dm * dp
    eta = math.exp(0.5 * (x2 - y2 - alpha))
    with np.errstate(over="ignore"):
        front = math.exp(min(y2 - x2, 700.0)) if y2 - x2 < 700 else math.inf
    main = eta * front / dm ** n
    if dp == 0.0 or dm / dp >= 1.0:
        return main
    beta = dm / dp
    return main + front * eta * (dp / dm) ** (n / 2) * (1.0 - beta) ** n


def kbar_batch(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    dm = np.linalg.norm(X - Y, axis=-1)
    dp = np.linalg.norm(X + Y, axis=-1)
    x2 = np.sum(X * X, axis=-1)
    y2 = np.sum(Y * Y, axis=-1)
    n = X.shape[-1]
    alpha = dm * dp
    eta = np.exp(0.5 * (x2 - y2 - alpha))
    front = np.exp(y2 - x2)
    out = eta * front / dm ** n
    with np.errstate(divide="ignore", invalid="ignore"):
        beta = np.where(dp > 0, dm / dp, np.inf)
    low = beta < 1.0
    extra = np.zeros_like(out)
    extra[low] = (front * eta * (dp / np.where(dm > 0, dm, 1.0)) ** (n / 2) *
                  (1.0 - beta) ** n)[low]
    out = out + extra
    out[~geo.global_mask(X, Y)] = 0.0
    return out


def _tau_substituted_weights(n_panels_half: int = 26, order: int = 8):
    lo = geometric_edges(1e-9, 0.5, ratio=2.0)
    hi = 1.0 - geometric_edges(1e-9, 0.5, ratio=2.0)[::-1]
    s, w = panel_rule(np.concatenate([lo, hi[1:]]), order)
    return s, w


def majorant_k_lambda_batch(lam: float, X: np.ndarray, Y: np.ndarray,
                            order: int = 8) -> np.ndarray:
    """Riesz-type majorant K_lam over stacked pairs.

    t-integral under t = tau(s): q = (1-s)/(1+s), 1 - e^{-2t} = 4s/(1+s)^2.
    """
    n = X.shape[-1]
    s, w = _tau_substituted_weights(order=order)
    q = (1.0 - s) / (1.0 + s)
    m = 4.0 * s / (1.0 + s) ** 2
    jac = 2.0 / (1.0 - s * s)
    base = q ** (n + lam) * m ** (-(n + 2) / 2) * jac      # (n_s,)
    diff = X[:, None, :] - q[None, :, None] * Y[:, None, :]
    d2 = np.sum(diff * diff, axis=-1)                       # (m, n_s)
    with np.errstate(over="ignore", under="ignore"):
        vals = base[None, :] * np.sqrt(d2 / m[None, :]) * np.exp(-d2 / m[None, :])
    return vals @ w


def majorant_k_prime_batch(lam: float, X: np.ndarray, Y: np.ndarray,
                           order: int = 8) -> np.ndarray:
    """Imaginary-power majorant Kprime_lam over stacked pairs."""
    n = X.shape[-1]
    s, w = _tau_substituted_weights(order=order)
    q = (1.0 - s) / (1.0 + s)
    m = 4.0 * s / (1.0 + s) ** 2
    jac = 2.0 / (1.0 - s * s)
    base = q ** (n + lam) * m ** (-(n + 2) / 2) * jac
    diff = X[:, None, :] - q[None, :, None] * Y[:, None, :]
    d2 = np.sum(diff * diff, axis=-1)
    with np.errstate(over="ignore", under="ignore"):
        vals = base[None, :] * np.exp(-d2 / m[None, :])
    return vals @ w


def majorant_k_lambda(lam: float, x, y) -> float:
    x = geo.as_point(x)
    y = geo.as_point(y)
    _guard_offdiagonal(x, y)
    return float(majorant_k_lambda_batch(lam, x[None, :], y[None, :], order=12)[0])


def majorant_k_prime(lam: float, x, y) -> float:
    x = geo.as_point(x)
    y = geo.as_point(y)
    _guard_offdiagonal(x, y)
    return float(majorant_k_prime_batch(lam, x[None, :], y[None, :], order=12)[0])


def _guard_offdiagonal(x, y):
    if float(np.linalg.norm(x - y)) < DIAGONAL_GUARD:
        raise DiagonalProximity("kernel evaluation within 1e-6 of the diagonal")


# ---------------------------------------------------------------------------
# complex powers

def complex_power_kernel(z: complex, lam: float, x, y,
                         cfg: QuadratureConfig | None = None) -> complex:
    """Off-diagonal kernel of (A + lam I)^z against the Lebesgue measure.

    (1/Gamma(-z)) int_0^inf e^{-lam t} t^{-z-1} H_t(x,y) dt, absolutely
    convergent for x != y.  Vanishes identically for z a positive integer
    (reciprocal-Gamma zero).
    """
    cfg = cfg or DEFAULT_CONFIG
    x = geo.as_point(x)
    y = geo.as_point(y)
    _guard_offdiagonal(x, y)
    pref = complex(sp.rgamma(-complex(z)))
    if pref == 0:
        return 0.0 + 0.0j
    val = _power_time_integral(complex(z), lam, x, y, cfg)
    return pref * val


def complex_power_abs_integral(re_z: float, lam: float, x, y,
                               cfg: QuadratureConfig | None = None) -> float:
    """int_0^inf e^{-lam t} t^{-Re z - 1} H_t(x,y) dt (the absolute bound)."""
    cfg = cfg or DEFAULT_CONFIG
    x = geo.as_point(x)
    y = geo.as_point(y)
    _guard_offdiagonal(x, y)
    return float(np.real(_power_time_integral(complex(re_z), lam, x, y, cfg)))


def _power_time_integral(z: complex, lam: float, x, y, cfg) -> complex:
    n = x.size
    d2 = float(np.sum((x - y) ** 2))

    def f(t):
        t = np.asarray(t, dtype=float)
        return np.exp(-lam * t) * t ** (-z - 1.0) * mehler_H(t, x, y)

    # boundary layer near t ~ d2; split so the adaptive rule sees it
    t_lo = d2 / 200.0
    t_hi = max(4.0, 90.0 / (n + lam + max(0.0, -z.real)))
    total = 0.0 + 0.0j
    err = 0.0
    sub = 0
    if t_lo < 1e-4:
        est = integrate(f, t_lo, min(1e-4, t_hi), cfg)
        total += est.value
        err += est.err
        sub += est.subdivisions
        lo = min(1e-4, t_hi)
    else:
        lo = t_lo
    if lo < t_hi:
        est = integrate(f, lo, t_hi, cfg)
        total += est.value
        err += est.err
        sub += est.subdivisions
    return total


# ---------------------------------------------------------------------------
# imaginary powers and Riesz transforms (r-integral forms)

def _split_r_integral(f, cfg) -> complex:
    """Adaptive integral over (0,1) split at 3/4, right part concentrated."""
    left = integrate(f, 1e-300, 0.75, cfg)
    right = integrate(f, 0.75, 1.0,
                      cfg.with_policy(EndpointPolicy.GAUSSIAN_CONCENTRATION_RIGHT))
    return left.value + right.value


def impow_kernel(u: float, lam: float, x, y,
                 measure: Measure = Measure.LEBESGUE,
                 cfg: QuadratureConfig | None = None) -> complex:
    """Kernel of (A + lam I)^{iu}, u != 0, against either measure.

    r-substituted form: the integrand carries r^{n+lam-1}
    (-log r)^{-iu-1} (1-r^2)^{-n/2} and a Gaussian factor in phi (Lebesgue
    kernel) or psi (gamma kernel, with the extra e^{-|x|^2} prefactor).
    """
    if u == 0:
        raise ValueError("u must be nonzero")
    cfg = cfg or DEFAULT_CONFIG
    x = geo.as_point(x)
    y = geo.as_point(y)
    _guard_offdiagonal(x, y)
    n = x.size
    vec = phi_vec if measure is Measure.LEBESGUE else psi_vec

    def f(r):
        r = np.asarray(r, dtype=float)
        v = vec(r, x, y)
        expo = np.exp(-np.sum(v * v, axis=-1))
        neglog = -np.log(r)
        return (r ** (n + lam - 1.0) * neglog ** complex(-1, -u) /
                (1.0 - r * r) ** (n / 2) * expo)

    val = _split_r_integral(f, cfg)
    if measure is Measure.LEBESGUE:
        return c_u(u) * math.pi ** (-n / 2) * val
    return c_u(u) * math.pi ** (-n) * math.exp(-float(np.dot(x, x))) * val


def riesz_kernel(j: int, lam: float, x, y,
                 measure: Measure = Measure.LEBESGUE,
                 cfg: QuadratureConfig | None = None) -> float:
    """j-th component (1-based) of the Riesz transform kernel."""
    cfg = cfg or DEFAULT_CONFIG
    x = geo.as_point(x)
    y = geo.as_point(y)
    _guard_offdiagonal(x, y)
    n = x.size
    if not (1 <= j <= n):
        raise ValueError("component index out of range")
    vec = phi_vec if measure is Measure.LEBESGUE else psi_vec

    def f(r):
        r = np.asarray(r, dtype=float)
        v = vec(r, x, y)
        expo = np.exp(-np.sum(v * v, axis=-1))
        return (r ** (n + lam - 1.0) / ((1.0 - r * r) ** ((n + 2) / 2) *
                np.sqrt(-np.log(r))) * (x[j - 1] - r * y[j - 1]) * expo)

    val = float(np.real(_split_r_integral(f, cfg)))
    if measure is Measure.LEBESGUE:
        return -2.0 * math.pi ** (-(n + 1) / 2) * val
    return -2.0 * math.pi ** (-n - 0.5) * math.exp(-float(np.dot(x, x))) * val


def local_kmunu(mu: float, nu: float, x, y,
                cfg: QuadratureConfig | None = None) -> float:
    """Local comparison kernel K_{mu,nu}; defined for mu > nu + 1.

    Intended for pairs in the local region LocalN(2); bounded there by a
    constant multiple of |x-y|^{-(n+mu-nu-2)}.  Nondecreasing in mu at
    fixed (nu, x, y) since the (1-r^2) power sits in the denominator.
    """
    if mu <= nu + 1.0:
        raise ValueError("local kernel requires mu > nu + 1")
    cfg = cfg or DEFAULT_CONFIG
    x = geo.as_point(x)
    y = geo.as_point(y)
    _guard_offdiagonal(x, y)
    n = x.size

    def f(r):
        r = np.asarray(r, dtype=float)
        diff = x[None, :] - np.multiply.outer(r, y)
        d2 = np.sum(diff * diff, axis=-1)
        m = 1.0 - r * r
        with np.errstate(over="ignore", under="ignore"):
            return d2 ** (nu / 2) / m ** ((n + mu) / 2) * np.exp(-d2 / m)

    return float(np.real(_split_r_integral(f, cfg)))


def kernel_value(spec: KernelSpec, x, y, cfg: QuadratureConfig | None = None,
                 measure: Measure = Measure.LEBESGUE):
    """Uniform dispatch used by the analyzer."""
    cfg = cfg or DEFAULT_CONFIG
    if isinstance(spec, Heat):
        if measure is Measure.LEBESGUE:
            return float(mehler_H(np.array([spec.t]), x, y)[0])
        return mehler_h(spec.t, x, y)
    if isinstance(spec, ComplexPower):
        val = complex_power_kernel(spec.z, spec.lam, x, y, cfg)
        if measure is Measure.GAMMA:
            val = val / geo.gamma_minus1_density(geo.as_point(y))
        return val
    if isinstance(spec, ImaginaryPower):
        return impow_kernel(spec.u, spec.lam, x, y, measure, cfg)
    if isinstance(spec, RieszComponent):
        return riesz_kernel(spec.j, spec.lam, x, y, measure, cfg)
    if isinstance(spec, MajorantKbar):
        return kbar(x, y)
    if isinstance(spec, MajorantKlambda):
        return majorant_k_lambda(spec.lam, x, y)
    if isinstance(spec, MajorantKprime):
        return majorant_k_prime(spec.lam, x, y)
    if isinstance(spec, LocalKmunu):
        return local_kmunu(spec.mu, spec.nu, x, y, cfg)
    raise TypeError(f"unknown kernel spec {spec!r}")
