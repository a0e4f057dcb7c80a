"""Hardy-space atoms, the lambda-harmonic profiles Psi/Phi, and pairings.

An atom is a mean-zero (against gamma_{-1}) function supported in an
admissible ball or cube with the L^2(gamma_{-1}) size bound
gamma_{-1}(support)^{-1/2}.  The lambda-classes additionally require
orthogonality to every function mapped to a constant by A + lam I; that
infinite family is probed through its effective witnesses: constants and
the profiles Psi_{lam, sigma} below.

Atoms carry a quadrature rule (nodes, Lebesgue weights) adapted to their
structure: sign-split constructions use mirrored node pairs so that the
built-in cancellations hold to machine precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import geometry as geo
from .geometry import Ball, Cube
from .quadrature import (QuadratureConfig, DEFAULT_CONFIG, gauss_legendre,
                         panel_rule, geometric_edges, integrate_region)


class AdmissibilityError(ValueError):
    """Requested support is not admissible at scale 1."""


class DegenerateAtom(ValueError):
    """(A + lam) psi vanished; no atom can be normalized from it."""


# ---------------------------------------------------------------------------
# smooth bumps with closed-form derivatives

@dataclass
class BumpFunction:
    """C^infty bump on a ball: directional profile with exact derivatives.

    psi(x) = ((x-c) . direction / r) * g(x) - correction * g(x), where
    g(x) = exp(-1 / (1 - |x-c|^2/r^2)) inside the ball and 0 outside.
    The correction coefficient is chosen at construction so the
    gamma_{-1}-mean vanishes (it is 0 for balls centered at the origin,
    by symmetry).
    """

    ball: Ball
    direction: np.ndarray
    correction: float = 0.0

    def __post_init__(self):
        d = geo.as_point(self.direction)
        nd = np.linalg.norm(d)
        if nd == 0:
            raise ValueError("direction must be nonzero")
        self.direction = d / nd

    # -- radial factor -------------------------------------------------
    def _s(self, pts):
        u = pts - self.ball.center[None, :]
        return u, np.sum(u * u, axis=-1) / self.ball.radius ** 2

    def _g(self, s):
        out = np.zeros_like(s)
        inside = s < 1.0 - 1e-14
        out[inside] = np.exp(-1.0 / (1.0 - s[inside]))
        return out

    def value(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        u, s = self._s(pts)
        g = self._g(s)
        proj = u @ self.direction / self.ball.radius
        return (proj - self.correction) * g

    def grad(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        u, s = self._s(pts)
        g = self._g(s)
        r2 = self.ball.radius ** 2
        inside = s < 1.0 - 1e-14
        inv = np.zeros_like(s)
        inv[inside] = 1.0 / (1.0 - s[inside]) ** 2
        gg = (-2.0 * g * inv / r2)[:, None] * u             # grad g
        proj = (u @ self.direction / self.ball.radius - self.correction)
        return (g / self.ball.radius)[:, None] * self.direction[None, :] + \
            proj[:, None] * gg

    def laplacian(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        u, s = self._s(pts)
        n = pts.shape[1]
        g = self._g(s)
        r2 = self.ball.radius ** 2
        inside = s < 1.0 - 1e-14
        i2 = np.zeros_like(s)
        i3 = np.zeros_like(s)
        i4 = np.zeros_like(s)
        one_minus = 1.0 - s[inside]
        i2[inside] = one_minus ** -2
        i3[inside] = one_minus ** -3
        i4[inside] = one_minus ** -4
        lap_g = -(2.0 / r2) * (n * g * i2 + 2.0 * s * g * (2.0 * i3 - i4))
        grad_g = (-2.0 * g * i2 / r2)[:, None] * u
        proj = (u @ self.direction / self.ball.radius - self.correction)
        return (2.0 / self.ball.radius) * (grad_g @ self.direction) + proj * lap_g

    def apply_translated(self, lam: float, pts):
        """(A + lam) psi = -1/2 Lap psi - x . grad psi + lam psi."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return (-0.5 * self.laplacian(pts)
                - np.sum(pts * self.grad(pts), axis=-1)
                + lam * self.value(pts))


def standard_bump(ball: Ball, direction=None,
                  cfg: QuadratureConfig | None = None) -> BumpFunction:
    """Directional bump with exactly vanishing gamma_{-1}-mean.

    The default direction is the first coordinate axis.  Off-center balls
    need the radial correction term; it is computed by quadrature.
    """
    cfg = cfg or DEFAULT_CONFIG
    n = ball.center.size
    if direction is None:
        direction = np.eye(n)[0]
    bump = BumpFunction(ball, direction)
    if float(np.linalg.norm(ball.center)) > 0:
        nodes, w = ball_rule(ball)
        dens = geo.gamma_minus1_density(nodes)
        u = nodes - ball.center[None, :]
        s = np.sum(u * u, axis=-1) / ball.radius ** 2
        g = bump._g(s)
        proj = u @ bump.direction / ball.radius
        num = float(np.sum(proj * g * dens * w))
        den = float(np.sum(g * dens * w))
        bump.correction = num / den
    return bump


# ---------------------------------------------------------------------------
# node rules

def ball_rule(ball: Ball, radial: int = 32, angular: int = 32):
    """Lebesgue quadrature over a ball (n <= 3), polar/tensor layout."""
    c = ball.center
    r = ball.radius
    n = c.size
    if n == 1:
        x, w = panel_rule(np.linspace(c[0] - r, c[0] + r, 5), radial // 2)
        return x[:, None], w
    if n == 2:
        s, ws = panel_rule(np.linspace(0, r, 3), radial // 2)
        th, wt = panel_rule(np.linspace(0, 2 * math.pi, 5), angular // 2)
        S, TH = np.meshgrid(s, th, indexing="ij")
        pts = np.stack([c[0] + S * np.cos(TH), c[1] + S * np.sin(TH)], axis=-1)
        return pts.reshape(-1, 2), (ws[:, None] * wt[None, :] * S).ravel()
    if n == 3:
        s, ws = panel_rule(np.linspace(0, r, 3), radial // 2)
        mu, wmu = panel_rule(np.array([-1.0, 0.0, 1.0]), radial // 2)
        ph, wph = panel_rule(np.linspace(0, 2 * math.pi, 5), angular // 2)
        S, MU, PH = np.meshgrid(s, mu, ph, indexing="ij")
        st = np.sqrt(1 - MU ** 2)
        pts = np.stack([c[0] + S * st * np.cos(PH), c[1] + S * st * np.sin(PH),
                        c[2] + S * MU], axis=-1)
        w = (ws[:, None, None] * wmu[None, :, None] * wph[None, None, :] * S ** 2)
        return pts.reshape(-1, 3), w.ravel()
    raise ValueError("ball rules implemented for n <= 3")


def _upper_half_ball_rule(n: int, radial: int = 24, angular: int = 24):
    """Rule over the upper half (last coordinate > 0) of the unit ball."""
    if n == 1:
        x, w = panel_rule(np.linspace(0.0, 1.0, 4), radial)
        return x[:, None], w
    if n == 2:
        s, ws = panel_rule(np.linspace(0, 1, 3), radial)
        th, wt = panel_rule(np.linspace(0, math.pi, 4), angular)
        S, TH = np.meshgrid(s, th, indexing="ij")
        pts = np.stack([S * np.cos(TH), S * np.sin(TH)], axis=-1)
        return pts.reshape(-1, 2), (ws[:, None] * wt[None, :] * S).ravel()
    if n == 3:
        s, ws = panel_rule(np.linspace(0, 1, 3), radial)
        mu, wmu = panel_rule(np.array([0.0, 0.5, 1.0]), radial)
        ph, wph = panel_rule(np.linspace(0, 2 * math.pi, 4), angular)
        S, MU, PH = np.meshgrid(s, mu, ph, indexing="ij")
        st = np.sqrt(1 - MU ** 2)
        pts = np.stack([S * st * np.cos(PH), S * st * np.sin(PH), S * MU], axis=-1)
        w = ws[:, None, None] * wmu[None, :, None] * wph[None, None, :] * S ** 2
        return pts.reshape(-1, 3), w.ravel()
    raise ValueError("half-ball rules implemented for n <= 3")


# ---------------------------------------------------------------------------
# atoms

@dataclass
class Atom:
    support: Ball | Cube
    kind: str                          # hemisphere | cube-sign | generated
    evaluate: Callable                 # (N, n) -> (N,)
    support_gamma: float               # gamma_{-1}(support)
    nodes: np.ndarray                  # (Q, n) Lebesgue rule over the support
    weights: np.ndarray                # (Q,)
    lambda_class: float | None = None
    preimage: Callable | None = None   # scaled psi with (A+lam) preimage = atom
    preimage_bump: BumpFunction | None = None
    preimage_scale: float = 0.0

    @property
    def dimension(self) -> int:
        return self.support.center.size

    def node_values(self) -> np.ndarray:
        return self.evaluate(self.nodes)

    def gamma_mean(self) -> float:
        return float(np.sum(self.node_values() *
                            geo.gamma_minus1_density(self.nodes) * self.weights))

    def l2_gamma_norm(self) -> float:
        v = self.node_values()
        return math.sqrt(float(np.sum(v * v * geo.gamma_minus1_density(self.nodes)
                                      * self.weights)))

    def size_bound(self) -> float:
        return self.support_gamma ** -0.5


def hemisphere_atom(n: int, cfg: QuadratureConfig | None = None) -> Atom:
    """Sign atom on the unit ball split into upper/lower hemispheres.

    a = gamma_{-1}(B)^{-1} (chi_{E+} - chi_{E-}), E+- = {+-y_n > 0} in B.
    The L^2 size bound is attained exactly.  In n = 1 this is the signed
    interval atom on (-1, 1).
    """
    cfg = cfg or DEFAULT_CONFIG
    ball = Ball(np.zeros(n), 1.0)
    gmeas = geo.ball_gamma_measure(ball, cfg)
    amp = 1.0 / gmeas

    def evaluate(pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        inside = np.sum(pts * pts, axis=-1) <= 1.0
        return amp * np.sign(pts[:, -1]) * inside

    up_pts, up_w = _upper_half_ball_rule(n)
    mirror = up_pts.copy()
    mirror[:, -1] = -mirror[:, -1]
    nodes = np.concatenate([up_pts, mirror])
    weights = np.concatenate([up_w, up_w])
    return Atom(support=ball, kind="hemisphere", evaluate=evaluate,
                support_gamma=gmeas, nodes=nodes, weights=weights)


def cube_atom(xi: float, n: int = 2, cfg: QuadratureConfig | None = None,
              order: int = 10) -> Atom:
    """Sign atom on the admissible cube centered at (xi, 0, ..., 0).

    Sidelength 2/xi, split by the sign of the second coordinate, with the
    overall minus sign of the drifting family.  The atomic norm is bounded
    uniformly in xi.
    """
    if n < 2:
        raise ValueError("cube atoms need n >= 2")
    if xi < 2.0:
        raise AdmissibilityError("cube not admissible: need xi >= 2")
    cfg = cfg or DEFAULT_CONFIG
    center = np.zeros(n)
    center[0] = xi
    cube = Cube(center, 2.0 / xi)
    gmeas = geo.cube_gamma_measure(cube, cfg)
    amp = -1.0 / gmeas

    def evaluate(pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        h = 1.0 / xi
        inside = np.all(np.abs(pts - center[None, :]) <= h, axis=-1)
        return amp * np.sign(pts[:, 1]) * inside

    h = 1.0 / xi
    axes = []
    axes.append(panel_rule(np.array([xi - h, xi, xi + h]), order))
    axes.append(panel_rule(np.array([0.0, 0.5 * h, h]), order))   # upper y_2
    for _ in range(2, n):
        axes.append(panel_rule(np.array([-h, 0.0, h]), order))
    grids = np.meshgrid(*[a[0] for a in axes], indexing="ij")
    up_pts = np.stack(grids, axis=-1).reshape(-1, n)
    w = axes[0][1]
    for a in axes[1:]:
        w = np.multiply.outer(w, a[1])
    up_w = w.ravel()
    mirror = up_pts.copy()
    mirror[:, 1] = -mirror[:, 1]
    nodes = np.concatenate([up_pts, mirror])
    weights = np.concatenate([up_w, up_w])
    return Atom(support=cube, kind="cube-sign", evaluate=evaluate,
                support_gamma=gmeas, nodes=nodes, weights=weights)


def generated_atom(psi: BumpFunction, lam: float,
                   cfg: QuadratureConfig | None = None) -> Atom:
    """lambda-class atom (A + lam) psi, normalized to the exact size bound.

    The scaled preimage is retained: applying (A + lam) to it reproduces
    the atom, which is how support preservation of the resolvent is
    exercised without inverting an elliptic operator.
    """
    if lam < 0:
        raise ValueError("lam must be >= 0")
    cfg = cfg or DEFAULT_CONFIG
    ball = psi.ball
    if not ball.admissible():
        raise AdmissibilityError("bump support must be an admissible ball")
    nodes, weights = ball_rule(ball)
    gmeas = geo.ball_gamma_measure(ball, cfg)
    raw = psi.apply_translated(lam, nodes)
    dens = geo.gamma_minus1_density(nodes)
    norm = math.sqrt(float(np.sum(raw * raw * dens * weights)))
    if norm < 1e-12:
        raise DegenerateAtom("(A + lam) psi is numerically zero")
    scale = 1.0 / (norm * math.sqrt(gmeas))

    def evaluate(pts):
        return scale * psi.apply_translated(lam, pts)

    def preimage(pts):
        return scale * psi.value(pts)

    return Atom(support=ball, kind="generated", evaluate=evaluate,
                support_gamma=gmeas, nodes=nodes, weights=weights,
                lambda_class=lam, preimage=preimage, preimage_bump=psi,
                preimage_scale=scale)


# ---------------------------------------------------------------------------
# the profiles Psi and Phi

def _profile_u_rule(bmax: float, log_weight: bool):
    """Nodes for int_0^inf u^{p} e^{-u^2 + 2 b u} [log u] du integrands."""
    hi = bmax + 9.0
    if log_weight:
        edges = np.concatenate([geometric_edges(1e-12, 0.5, 2.0),
                                np.linspace(0.5, hi, 24)[1:]])
    else:
        edges = np.linspace(0.0, hi, 32)
    return panel_rule(edges, 12)


def psi_special(lam: float, sigma, y, cfg: QuadratureConfig | None = None) -> float:
    """Profile Psi_{lam, sigma}(y); lambda-harmonic, strictly positive.

    Computed as 2 e^{-|y|^2} int_0^inf u^{n+lam-1} e^{-u^2 + 2(sigma.y)u} du
    (substitution t = u^2 in the defining time integral).
    """
    sigma = geo.as_point(sigma)
    y = geo.as_point(y)
    _check_unit(sigma)
    n = y.size
    b = float(np.dot(sigma, y))
    u, w = _profile_u_rule(max(b, 0.0), log_weight=False)
    vals = u ** (n + lam - 1.0) * np.exp(-u * u + 2.0 * b * u)
    return 2.0 * math.exp(-float(np.dot(y, y))) * float(np.sum(vals * w))


def phi_special(lam: float, sigma, y, cfg: QuadratureConfig | None = None) -> float:
    """Companion profile with the log(1/t) weight; (A+lam) Phi = 2 Psi."""
    sigma = geo.as_point(sigma)
    y = geo.as_point(y)
    _check_unit(sigma)
    n = y.size
    b = float(np.dot(sigma, y))
    u, w = _profile_u_rule(max(b, 0.0), log_weight=True)
    vals = u ** (n + lam - 1.0) * np.log(u) * np.exp(-u * u + 2.0 * b * u)
    return -4.0 * math.exp(-float(np.dot(y, y))) * float(np.sum(vals * w))


def _check_unit(sigma):
    if abs(float(np.linalg.norm(sigma)) - 1.0) > 1e-10:
        raise ValueError("sigma must be a unit vector")


def psi_gradient(lam: float, sigma, y) -> np.ndarray:
    """Closed-form gradient -2 y Psi_{lam} + 2 sigma Psi_{lam+1}."""
    y = geo.as_point(y)
    sigma = geo.as_point(sigma)
    return (-2.0 * y * psi_special(lam, sigma, y)
            + 2.0 * sigma * psi_special(lam + 1.0, sigma, y))


# ---------------------------------------------------------------------------
# pairings

def pairing(f, g, region, cfg: QuadratureConfig | None = None) -> float:
    """int_region f g dgamma_{-1} for pointwise-evaluable f, g."""
    cfg = cfg or DEFAULT_CONFIG

    def integrand(pts):
        return (np.asarray(f(pts)) * np.asarray(g(pts)) *
                geo.gamma_minus1_density(pts))

    est = integrate_region(integrand, region, cfg)
    return float(np.real(est.value))


def atom_exp_moment(atom: Atom, sigma: np.ndarray, c):
    """M(c) = int a(y) exp(2 c (sigma . y)) dy on the atom's own rule."""
    proj = atom.nodes @ sigma
    fw = atom.node_values() * atom.weights
    c = np.asarray(c, dtype=float)
    return np.exp(2.0 * np.multiply.outer(c, proj)) @ fw


def pairing_psi_atom(lam: float, sigma, atom: Atom, kind: str = "psi") -> float:
    """(Psi_{lam,sigma}, a) or (Phi_{lam,sigma}, a) against gamma_{-1}.

    Uses the order-swapped form: the atom's exponential moments are
    integrated against the u-profile, which is both faster and free of the
    nested quadrature of the direct route (the direct route is kept in
    tests as the independent oracle).
    """
    sigma = geo.as_point(sigma)
    _check_unit(sigma)
    n = atom.dimension
    bmax = float(np.max(atom.nodes @ sigma))
    u, w = _profile_u_rule(max(bmax, 0.0), log_weight=(kind == "phi"))
    M = atom_exp_moment(atom, sigma, u)
    pref = math.pi ** (n / 2)
    if kind == "psi":
        vals = u ** (n + lam - 1.0) * np.exp(-u * u) * M
        return 2.0 * pref * float(np.sum(vals * w))
    if kind == "phi":
        vals = u ** (n + lam - 1.0) * np.log(u) * np.exp(-u * u) * M
        return -4.0 * pref * float(np.sum(vals * w))
    raise ValueError("kind must be 'psi' or 'phi'")


def sphere_pairing_integral(lam: float, atom: Atom, kind: str = "psi",
                            weight_component: int | None = None,
                            n_sigma: int = 512) -> float:
    """int over the unit sphere of |(Psi_{lam,sigma}, a)| dSigma.

    Optional |sigma_j| weight (1-based j) matches the leading term of the
    Riesz probes.  Independent of the probe machinery by construction.
    """
    n = atom.dimension
    if n == 1:
        sigmas = np.array([[1.0], [-1.0]])
        wts = np.ones(2)
    elif n == 2:
        th = (np.arange(n_sigma) + 0.5) * (2.0 * math.pi / n_sigma)
        sigmas = np.stack([np.cos(th), np.sin(th)], axis=-1)
        wts = np.full(n_sigma, 2.0 * math.pi / n_sigma)
    else:
        raise ValueError("sphere pairing integrals implemented for n <= 2")
    total = 0.0
    for sg, wt in zip(sigmas, wts):
        v = abs(pairing_psi_atom(lam, sg, atom, kind))
        if weight_component is not None:
            v *= abs(sg[weight_component - 1])
        total += wt * v
    return total
