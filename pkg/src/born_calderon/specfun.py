"""Special functions underlying all series formulas.

Legendre and associated Legendre polynomials, spherical harmonics in the
quantum-mechanics convention (Condon-Shortley phase, unit L2 norm on the
sphere, north pole e3), rotation frames for an arbitrary north pole,
ladder coefficients, Bessel series, and the Gamma-ratio constants
``c_k`` and ``mu_kl``.

All Gamma/factorial combinations are evaluated in log space; native
factorials of order (2l)! overflow float64 near l = 86.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import AccuracyError

E3 = np.array([0.0, 0.0, 1.0])

_FOUR_PI = 4.0 * math.pi


def _check_t(t):
    t = np.asarray(t, dtype=float)
    if np.any(np.abs(t) > 1.0 + 1e-13):
        raise ValueError("Legendre argument must satisfy |t| <= 1")
    return np.clip(t, -1.0, 1.0)


def legendre(ell, t):
    """Legendre polynomial P_ell(t) by the stable three-term recurrence."""
    if ell < 0:
        raise ValueError("degree must be non-negative")
    t = _check_t(t)
    p_prev = np.ones_like(t)
    if ell == 0:
        return p_prev if p_prev.ndim else float(p_prev)
    p = t.copy()
    for j in range(1, ell):
        p, p_prev = ((2 * j + 1) * t * p - j * p_prev) / (j + 1), p
    return p if p.ndim else float(p)


def assoc_legendre(ell, m, t):
    """Associated Legendre P_ell^m(t), no Condon-Shortley phase.

    Negative orders follow the extension
    P_ell^{-m} = (-1)^m (ell-m)!/(ell+m)! P_ell^m for m >= 0.
    Intended for moderate degrees (ell up to ~60); the spherical-harmonic
    evaluation below uses a fully normalized recurrence instead.
    """
    if abs(m) > ell:
        raise ValueError("order must satisfy |m| <= ell")
    if m < 0:
        mu = -m
        scale = (-1.0) ** mu * math.exp(gammaln(ell - mu + 1) - gammaln(ell + mu + 1))
        return scale * assoc_legendre(ell, mu, t)
    t = _check_t(t)
    s = np.sqrt(np.maximum(1.0 - t * t, 0.0))
    # seed P_m^m = (2m-1)!! s^m, then raise the degree
    pmm = np.ones_like(t)
    for i in range(1, m + 1):
        pmm = pmm * (2 * i - 1) * s
    if ell == m:
        return pmm if pmm.ndim else float(pmm)
    p_prev = pmm
    p = (2 * m + 1) * t * pmm
    for j in range(m + 2, ell + 1):
        p, p_prev = ((2 * j - 1) * t * p - (j + m - 1) * p_prev) / (j - m), p
    return p if p.ndim else float(p)


def _pbar(ell, m, ct, st):
    """Orthonormalized associated Legendre sqrt((2l+1)/4pi (l-m)!/(l+m)!) P_l^m.

    m >= 0; stable for degrees well beyond the factorial overflow limit.
    """
    p = np.full_like(ct, 1.0 / math.sqrt(_FOUR_PI))
    for i in range(1, m + 1):
        p = p * math.sqrt((2 * i + 1) / (2.0 * i)) * st
    if ell == m:
        return p
    p_prev = p
    p = math.sqrt(2 * m + 3.0) * ct * p
    for j in range(m + 2, ell + 1):
        a = math.sqrt((4.0 * j * j - 1.0) / (j * j - m * m))
        b = math.sqrt(((2 * j + 1.0) * (j - 1 + m) * (j - 1 - m)) / ((2 * j - 3.0) * (j * j - m * m)))
        p, p_prev = a * ct * p - b * p_prev, p
    return p


def sph_harm(ell, m, theta, phi):
    """Spherical harmonic Y_{ell,m}(theta, phi), orthonormal on S^2.

    Quantum convention: Condon-Shortley phase, north pole e3,
    conj(Y_{ell,m}) = (-1)^m Y_{ell,-m}.
    """
    if abs(m) > ell:
        raise ValueError("order must satisfy |m| <= ell")
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    ct, st = np.cos(theta), np.sin(theta)
    pbar = _pbar(ell, abs(m), ct, st)
    out = pbar * np.exp(1j * m * phi)
    if m >= 0 and m % 2:
        out = -out
    return out if out.ndim else complex(out)


def angles_from_xyz(xyz):
    """(theta, phi) spherical coordinates of unit vectors, north pole e3."""
    xyz = np.asarray(xyz, dtype=float)
    theta = np.arccos(np.clip(xyz[..., 2], -1.0, 1.0))
    phi = np.arctan2(xyz[..., 1], xyz[..., 0])
    return theta, np.mod(phi, 2.0 * math.pi)


def sph_harm_xyz(ell, m, xyz):
    """Y_{ell,m} evaluated at unit vectors given in Cartesian form."""
    theta, phi = angles_from_xyz(xyz)
    return sph_harm(ell, m, theta, phi)


def _rotation_about(axis, angle):
    u = np.asarray(axis, dtype=float)
    u = u / np.linalg.norm(u)
    c, s = math.cos(angle), math.sin(angle)
    ux = np.array([[0.0, -u[2], u[1]], [u[2], 0.0, -u[0]], [-u[1], u[0], 0.0]])
    return c * np.eye(3) + s * ux + (1.0 - c) * np.outer(u, u)


@dataclass(frozen=True)
class Frame:
    """North-pole frame: a proper rotation carrying ``omega`` to e3.

    Any two admissible frames for the same omega differ by a rotation
    about e3, which only changes the rotated harmonics by unit-modulus
    phases exp(-i m t).
    """

    omega: np.ndarray
    rotation: np.ndarray

    def __post_init__(self):
        omega = np.asarray(self.omega, dtype=float)
        rot = np.asarray(self.rotation, dtype=float)
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "rotation", rot)
        if abs(np.linalg.norm(omega) - 1.0) > 1e-12:
            raise ValueError("omega must be a unit vector")
        if np.max(np.abs(rot @ rot.T - np.eye(3))) > 1e-12 or abs(np.linalg.det(rot) - 1.0) > 1e-12:
            raise ValueError("rotation must be proper orthogonal")
        if np.max(np.abs(rot @ omega - E3)) > 1e-12:
            raise ValueError("rotation must map omega to e3")

    @property
    def eta1(self):
        return self.rotation.T @ np.array([1.0, 0.0, 0.0])

    @property
    def eta2(self):
        return self.rotation.T @ np.array([0.0, 1.0, 0.0])


def frame_from_omega(omega, twist=0.0):
    """Deterministic frame for ``omega``: rotate about omega x e3 by arccos(omega.e3).

    ``twist`` applies an extra rotation about e3 afterwards, producing a
    different admissible frame for the same omega (used to check frame
    independence of the matrix elements).
    """
    omega = np.asarray(omega, dtype=float)
    omega = omega / np.linalg.norm(omega)
    axis = np.cross(omega, E3)
    s = np.linalg.norm(axis)
    if s < 1e-12:
        rot = np.eye(3) if omega[2] > 0 else _rotation_about([1.0, 0.0, 0.0], math.pi)
    else:
        rot = _rotation_about(axis / s, math.atan2(s, omega[2]))
    if twist:
        rot = _rotation_about(E3, twist) @ rot
    return Frame(omega=omega, rotation=rot)


def sph_harm_rotated(ell, m, frame, xyz):
    """Y^omega_{ell,m}(x) = Y_{ell,m}(P x) with P = frame.rotation."""
    xyz = np.asarray(xyz, dtype=float)
    return sph_harm_xyz(ell, m, xyz @ frame.rotation.T)


def ladder_coeff(direction, ell, m):
    """Coefficient of the ladder operators L+/L- on Y_{ell,m}.

    ``direction`` is "raise" (m -> m+1) or "lower" (m -> m-1); returns 0
    at the band edges.
    """
    if direction == "raise":
        if m + 1 > ell:
            return 0.0
        return math.sqrt((ell - m) * (ell + m + 1))
    if direction == "lower":
        if m - 1 < -ell:
            return 0.0
        return math.sqrt((ell + m) * (ell - m + 1))
    raise ValueError("direction must be 'raise' or 'lower'")


def log_c_k(k, d=3):
    """log of c_k = 2 pi^{d/2} k! / Gamma(k + d/2)."""
    if k < 0 or d < 2:
        raise ValueError("need k >= 0 and dimension d >= 2")
    return math.log(2.0) + 0.5 * d * math.log(math.pi) + gammaln(k + 1) - gammaln(k + d / 2.0)


def c_k(k, d=3):
    """Surface-pairing constant c_k; c_0(3) = |S^2| = 4 pi."""
    lg = log_c_k(k, d)
    if lg > math.log(np.finfo(float).max):
        raise OverflowError("c_k exceeds float64 range")
    return math.exp(lg)


def log_mu_kl(k, ell):
    """log of mu_{k,ell} = 4 pi / sqrt((2k+1)(2l+1)) / sqrt((2k)!(l-k)!(k+l)!)."""
    if not 0 <= k <= ell:
        raise ValueError("need 0 <= k <= ell")
    return (
        math.log(_FOUR_PI)
        - 0.5 * (math.log(2 * k + 1.0) + math.log(2 * ell + 1.0))
        - 0.5 * (gammaln(2 * k + 1) + gammaln(ell - k + 1) + gammaln(k + ell + 1))
    )


def mu_kl(k, ell):
    """Weight of the (k, ell) matrix element in the averaged Born series."""
    return math.exp(log_mu_kl(k, ell))


def bessel_series(nu, t, nterms=400):
    """J_nu(t) from its power series, with a ratio-test tail bound < 1e-15."""
    if nu < 0 or t < 0:
        raise ValueError("need nu >= 0 and t >= 0")
    if t == 0.0:
        return 1.0 if nu == 0.0 else 0.0
    log_half_t = math.log(0.5 * t)
    total = 0.0
    for k in range(nterms):
        term = (-1.0) ** k * math.exp((2 * k + nu) * log_half_t - gammaln(k + 1) - gammaln(k + nu + 1))
        total += term
        ratio = (0.5 * t) ** 2 / ((k + 1) * (k + nu + 1))
        if ratio < 1.0 and abs(term) * ratio / (1.0 - ratio) < 1e-15 * max(1.0, abs(total)):
            return total
    raise AccuracyError(f"Bessel series tail bound not met within {nterms} terms")


def spherical_bessel(n, t):
    """j_n(t) = sqrt(pi/2t) J_{n+1/2}(t); j_n(0) = delta_{n,0}."""
    if t == 0.0:
        return 1.0 if n == 0 else 0.0
    return math.sqrt(math.pi / (2.0 * t)) * bessel_series(n + 0.5, t)


@dataclass(frozen=True)
class ZetaVector:
    """Nonzero complex vector on the null variety: zeta . zeta = 0."""

    zeta: np.ndarray

    def __post_init__(self):
        z = np.asarray(self.zeta, dtype=complex)
        object.__setattr__(self, "zeta", z)
        norm = np.linalg.norm(z)
        if norm == 0.0:
            raise ValueError("zeta must be nonzero")
        if abs(np.sum(z * z)) > 1e-12 * norm**2:
            raise ValueError("zeta . zeta must vanish (unconjugated dot product)")

    @property
    def norm(self):
        return float(np.linalg.norm(self.zeta))


def random_zeta(rng, d=3, scale=None):
    """Random element of the null variety V(d): c (u + i v), u perp v unit."""
    q, _ = np.linalg.qr(rng.standard_normal((d, 2)))
    c = scale if scale is not None else (0.3 + rng.random()) * np.exp(2j * math.pi * rng.random())
    return ZetaVector(c * (q[:, 0] + 1j * q[:, 1]))


def zeta_pair_radial(s, h, frame=None):
    """Null pair with zeta1 + zeta2 = -i h s omega exactly (no o(h) remainder).

    Requires h*s < 2. When the residual term vanishes exactly, the
    scattering pairing is independent of h.
    """
    if h <= 0 or s < 0 or h * s >= 2.0:
        raise ValueError("need h > 0 and h*s < 2")
    if frame is None:
        eta1, eta2, omega = np.eye(3)
    else:
        eta1, eta2, omega = frame.eta1, frame.eta2, frame.omega
    half = 0.5 * h * s
    b = math.sqrt(1.0 - half * half)
    zeta1 = ZetaVector(eta1 + 1j * (b * eta2 - half * omega))
    zeta2 = ZetaVector(-eta1 - 1j * (b * eta2 + half * omega))
    return zeta1, zeta2


def zeta_pair_e3(s, h):
    """The fixed e3-frame pair used for the averaged Born limit.

    zeta1 = -e1 - i sqrt(1 - h^2 s^2) e2 - i h s e3, zeta2 = e1 + i e2;
    zeta1 + zeta2 = -i h s e3 + i r_h with |r_h| = O(h^2).
    """
    if h <= 0 or s < 0 or h * s >= 1.0:
        raise ValueError("need h > 0 and h*s < 1")
    zeta1 = ZetaVector(np.array([-1.0, -1j * math.sqrt(1.0 - (h * s) ** 2), -1j * h * s]))
    zeta2 = ZetaVector(np.array([1.0, 1j, 0.0]))
    return zeta1, zeta2


def zeta_pair_frame(xi, h, frame):
    """Pair of eq-(zeta) vectors for general xi in the positively oriented frame."""
    xi = np.asarray(xi, dtype=float)
    s = float(np.linalg.norm(xi))
    if s == 0.0:
        raise ValueError("xi must be nonzero")
    eta1, eta2, omega = frame.eta1, frame.eta2, frame.omega
    zeta1 = ZetaVector(-eta1 - 1j * math.sqrt(1.0 - (h * s) ** 2) * eta2 - 1j * h * s * omega)
    zeta2 = ZetaVector(eta1 + 1j * eta2)
    return zeta1, zeta2
