"""Clebsch-Gordan special cases and Gaunt integrals.

Only the two closed CG cases needed by the product linearization are
implemented (stretched orders m = (k, -k) and m = (0, 0)); the general
Racah machinery is deliberately not.  The quadrature Gaunt integral is
both the validation oracle for the closed forms and the coupling tensor
of the 3D channel solver.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import gammaln

from .quadrature import make_sphere_rule
from .specfun import sph_harm

_FOUR_PI = 4.0 * math.pi


def _triangle(ell, k, n):
    return abs(ell - k) <= n <= ell + k


def cg_km(ell, k, n):
    """Clebsch-Gordan C(ell k n; k -k); zero outside the triangle condition."""
    if k < 0 or ell < k or n < 0:
        raise ValueError("need 0 <= k <= ell and n >= 0")
    if not _triangle(ell, k, n):
        return 0.0
    log_sq = (
        gammaln(2 * k + 1)
        + gammaln(ell + n - k + 1)
        - gammaln(k + ell + n + 2)
        - gammaln(k + n - ell + 1)
        + gammaln(k + ell + 1)
        - gammaln(k + ell - n + 1)
        - gammaln(ell - k + 1)
    )
    return math.sqrt(2 * n + 1) * math.exp(0.5 * log_sq)


def cg_00(ell, k, n):
    """Clebsch-Gordan C(ell k n; 0 0); zero when ell + k + n is odd."""
    if k < 0 or ell < 0 or n < 0:
        raise ValueError("degrees must be non-negative")
    if not _triangle(ell, k, n) or (ell + k + n) % 2:
        return 0.0
    g = (ell + k + n) // 2
    sign = -1.0 if ((k + ell - n) // 2) % 2 else 1.0
    log_sq = (
        gammaln(ell + n - k + 1)
        + gammaln(k + n - ell + 1)
        + gammaln(k + ell - n + 1)
        - gammaln(k + ell + n + 2)
    )
    log_f = gammaln(g + 1) - gammaln(g - k + 1) - gammaln(g - ell + 1) - gammaln(g - n + 1)
    return sign * math.sqrt(2 * n + 1) * math.exp(0.5 * log_sq + log_f)


_sph_values_cache: dict[tuple, np.ndarray] = {}


def _sph_values(degree, ell, m):
    key = (degree, ell, m)
    values = _sph_values_cache.get(key)
    if values is None:
        rule = make_sphere_rule(degree)
        values = sph_harm(ell, m, rule.theta, rule.phi)
        _sph_values_cache[key] = values
    return values


_gaunt_cache: dict[tuple, float] = {}


def gaunt_numeric(l1, m1, l2, m2, l, m):
    """int_{S^2} conj(Y_{l,m}) Y_{l1,m1} Y_{l2,m2} dS by exact quadrature.

    The sphere rule has exactness >= l1 + l2 + l, so the value is exact up
    to rounding.  Results are cached by index tuple.
    """
    for (li, mi) in ((l1, m1), (l2, m2), (l, m)):
        if li < 0 or abs(mi) > li:
            raise ValueError("invalid spherical index")
    key = (l1, m1, l2, m2, l, m)
    value = _gaunt_cache.get(key)
    if value is not None:
        return value
    if m != m1 + m2 or not _triangle(l1, l2, l):
        value = 0.0
    else:
        degree = l1 + l2 + l + 2
        rule = make_sphere_rule(degree)
        integrand = (
            np.conj(_sph_values(degree, l, m))
            * _sph_values(degree, l1, m1)
            * _sph_values(degree, l2, m2)
        )
        value = float(np.real(rule.integrate(integrand)))
    _gaunt_cache[key] = value
    return value


def product_expansion(k, ell):
    """Legendre expansion of conj(Y_{ell,k}) Y_{k,k}.

    Returns the list of (n, coeff) with conj(Y_{ell,k}) Y_{k,k} (x) =
    sum_n coeff * P_n(x . e3); n runs over |ell-k| <= n <= ell+k with
    ell + k + n even.
    """
    if not 0 <= k <= ell:
        raise ValueError("need 0 <= k <= ell")
    terms = []
    for n in range(ell - k, ell + k + 1, 2):
        g = (ell + k + n) // 2
        sign = -1.0 if (g + k - n) % 2 else 1.0
        log_g = (
            gammaln(g + 1)
            - gammaln(g - k + 1)
            - gammaln(g - ell + 1)
            - gammaln(g - n + 1)
            + gammaln(ell + n - k + 1)
            - gammaln(k + ell + n + 2)
            + 0.5 * (math.log(2 * k + 1.0) + math.log(2 * ell + 1.0))
            + 0.5 * (gammaln(k + ell + 1) + gammaln(2 * k + 1) - gammaln(ell - k + 1))
        )
        coeff = sign * (2 * n + 1) / _FOUR_PI * math.exp(log_g)
        terms.append((n, coeff))
    return terms
