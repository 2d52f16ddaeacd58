"""High-order quadrature on [-1,1], the sphere and the unit ball.

The sphere rule is the product of Gauss-Legendre in cos(theta) and a
uniform trapezoid in phi, so its polynomial exactness degree is provable
and arbitrary.  The ball rule adds a Gauss-Legendre radial factor with
the r^2 Jacobian folded into the weights.  ``fourier_oracle`` is the
brute-force Fourier transform used to validate every series formula; it
refines itself until two successive refinements agree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import roots_legendre

from .errors import AccuracyError

_FOUR_PI = 4.0 * math.pi


def gauss_panels(a, b, n, breaks=()):
    """Composite Gauss-Legendre nodes/weights on [a, b] split at ``breaks``."""
    edges = [a] + sorted(x for x in set(breaks) if a < x < b) + [b]
    x, w = roots_legendre(n)
    nodes, weights = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        half = 0.5 * (hi - lo)
        nodes.append(lo + half * (x + 1.0))
        weights.append(half * w)
    return np.concatenate(nodes), np.concatenate(weights)


@dataclass(frozen=True)
class SphereRule:
    """Nodes (unit vectors), positive weights, and a certified exactness degree."""

    nodes: np.ndarray
    weights: np.ndarray
    theta: np.ndarray
    phi: np.ndarray
    exactness_degree: int

    def integrate(self, values):
        return np.asarray(values) @ self.weights


_sphere_cache: dict[int, SphereRule] = {}


def make_sphere_rule(degree):
    """Product rule integrating every spherical polynomial of degree <= ``degree``."""
    if degree < 0:
        raise ValueError("degree must be non-negative")
    rule = _sphere_cache.get(degree)
    if rule is not None:
        return rule
    n_t = max(1, (degree + 2) // 2)
    n_p = degree + 1
    ct, w_t = roots_legendre(n_t)
    phi = 2.0 * math.pi * np.arange(n_p) / n_p
    theta = np.arccos(ct)
    tt, pp = np.meshgrid(theta, phi, indexing="ij")
    stt, ctt = np.sin(tt), np.cos(tt)
    nodes = np.stack([stt * np.cos(pp), stt * np.sin(pp), ctt], axis=-1).reshape(-1, 3)
    weights = np.repeat(w_t, n_p) * (2.0 * math.pi / n_p)
    rule = SphereRule(
        nodes=nodes,
        weights=weights,
        theta=tt.reshape(-1),
        phi=pp.reshape(-1),
        exactness_degree=degree,
    )
    _sphere_cache[degree] = rule
    return rule


@dataclass(frozen=True)
class BallRule:
    """Tensor rule on the closed unit ball; weights include the volume element."""

    nodes: np.ndarray
    weights: np.ndarray
    radial_nodes: np.ndarray
    radial_weights: np.ndarray
    sphere: SphereRule
    radial_order: int
    angular_degree: int
    breakpoints: tuple = field(default_factory=tuple)

    def integrate(self, values):
        return np.asarray(values) @ self.weights


def make_ball_rule(radial_order, angular_degree, breaks=()):
    """Gauss-Legendre in r (weight r^2, split at ``breaks``) times a SphereRule.

    Exact for |x|^{2k} whenever 2k <= 2*radial_order - 1.
    """
    sphere = make_sphere_rule(angular_degree)
    r, w_r = gauss_panels(0.0, 1.0, radial_order + 1, breaks)
    nodes = (r[:, None, None] * sphere.nodes[None, :, :]).reshape(-1, 3)
    weights = (w_r * r * r)[:, None] * sphere.weights[None, :]
    return BallRule(
        nodes=nodes,
        weights=weights.reshape(-1),
        radial_nodes=r,
        radial_weights=w_r,
        sphere=sphere,
        radial_order=radial_order,
        angular_degree=angular_degree,
        breakpoints=tuple(sorted(set(breaks))),
    )


def _ball_transform(q, rule, xi):
    values = np.asarray(q(rule.nodes), dtype=complex)
    phase = np.exp(-1j * rule.nodes @ np.asarray(xi, dtype=float))
    return complex(rule.integrate(values * phase))


def fourier_oracle(q, xi, breaks=(), tol=1e-9, max_refinements=6):
    """Brute-force q_hat(xi) = int_B q(x) exp(-i x.xi) dx by nested refinement.

    ``q`` maps an (n, 3) array of points to values.  The rule order starts
    at a size adapted to |xi| and doubles until two successive levels agree
    to ``tol``; raises AccuracyError otherwise.
    """
    xi = np.asarray(xi, dtype=float)
    s = float(np.linalg.norm(xi))
    radial = int(s) + 14
    angular = int(1.5 * s) + 14
    prev = _ball_transform(q, make_ball_rule(radial, angular, breaks), xi)
    delta = math.inf
    for _ in range(max_refinements):
        radial, angular = 2 * radial, 2 * angular
        cur = _ball_transform(q, make_ball_rule(radial, angular, breaks), xi)
        delta = abs(cur - prev)
        if delta < tol:
            return cur
        prev = cur
    raise AccuracyError(
        f"fourier_oracle did not converge at |xi| = {s:.3g}: last delta {delta:.2e}"
    )
