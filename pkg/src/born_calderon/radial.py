"""Forward Dirichlet-to-Neumann computation for radial potentials.

Two independent routes are provided for the eigenvalues lambda_k of the
D-N map of -Delta + q0(|x|) on the unit ball:

* ``solve_radial_channel`` integrates the radial boundary-value problem
  outward from the origin (after factoring out the r^k behaviour).
* ``eigenvalue_series`` sums the perturbation series lambda_k =
  k + sum_n sigma_{k,n}, generated by iterating the half-line resolvent
  kernel against the potential in Liouville coordinates t = -log r.

Both carry explicit error control, and the test suite requires them to
agree; the series route is only valid above its contraction threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp
from scipy.special import roots_legendre

from .errors import ConvergenceError, ResonanceError, SolverError
from .quadrature import gauss_panels


def _surface_area(d):
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


@dataclass(frozen=True)
class RadialPotential:
    """Bounded radial profile q0 on [0, 1] with declared support and bound.

    ``profile`` must be vectorized over r.  ``alpha`` is the support
    radius (q0 = 0 for r > alpha), ``sup_norm`` an upper bound on |q0|,
    ``support_inner`` the inner support radius (0 unless annular), and
    ``breakpoints`` the radii where the profile is non-smooth.
    """

    profile: Callable
    alpha: float
    sup_norm: float
    dimension: int = 3
    breakpoints: tuple = field(default_factory=tuple)
    support_inner: float = 0.0
    label: str = "custom"

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError("support radius must lie in (0, 1]")
        if self.dimension < 2:
            raise ValueError("dimension must be >= 2")

    def __call__(self, r):
        return self.profile(np.asarray(r, dtype=float))

    @property
    def kappa_offset(self):
        return (self.dimension - 2) / 2.0

    def kappa(self, k):
        return k + self.kappa_offset

    @classmethod
    def zero(cls, d=3):
        return cls(profile=lambda r: np.zeros_like(r), alpha=1.0, sup_norm=0.0,
                   dimension=d, label="zero")

    @classmethod
    def constant_ball(cls, c, alpha=1.0, d=3):
        def profile(r):
            return np.where(r <= alpha, float(c), 0.0)

        breaks = (alpha,) if alpha < 1.0 else ()
        return cls(profile=profile, alpha=alpha, sup_norm=abs(c), dimension=d,
                   breakpoints=breaks, label=f"ball(c={c},a={alpha})")

    @classmethod
    def annulus(cls, c, r_inner, r_outer, d=3):
        if not 0.0 < r_inner < r_outer <= 1.0:
            raise ValueError("need 0 < r_inner < r_outer <= 1")

        def profile(r):
            return np.where((r >= r_inner) & (r <= r_outer), float(c), 0.0)

        breaks = tuple(b for b in (r_inner, r_outer) if b < 1.0)
        return cls(profile=profile, alpha=r_outer, sup_norm=abs(c), dimension=d,
                   breakpoints=breaks, support_inner=r_inner,
                   label=f"annulus(c={c},{r_inner},{r_outer})")

    @classmethod
    def gaussian_trunc(cls, amplitude, width, alpha, d=3):
        def profile(r):
            return np.where(r <= alpha, amplitude * np.exp(-((r / width) ** 2)), 0.0)

        breaks = (alpha,) if alpha < 1.0 else ()
        return cls(profile=profile, alpha=alpha, sup_norm=abs(amplitude), dimension=d,
                   breakpoints=breaks, label=f"gauss(A={amplitude},w={width},a={alpha})")

    @classmethod
    def smooth_bump(cls, amplitude, alpha, d=3, power=2):
        """amplitude * (1 - (r/alpha)^2)^power inside r <= alpha (C^{power-1} at alpha)."""

        def profile(r):
            u = np.clip(1.0 - (r / alpha) ** 2, 0.0, None)
            return amplitude * u**power

        breaks = (alpha,) if alpha < 1.0 else ()
        return cls(profile=profile, alpha=alpha, sup_norm=abs(amplitude), dimension=d,
                   breakpoints=breaks, label=f"bump(A={amplitude},a={alpha},p={power})")

    @classmethod
    def piecewise_constant(cls, breaks, values, d=3):
        breaks = tuple(float(b) for b in breaks)
        values = tuple(float(v) for v in values)
        if len(values) != len(breaks) + 1:
            raise ValueError("need len(values) == len(breaks) + 1")
        edges = (0.0,) + breaks + (1.0,)
        if any(a >= b for a, b in zip(edges[:-1], edges[1:])):
            raise ValueError("breakpoints must be strictly increasing in (0, 1)")

        def profile(r):
            out = np.full_like(np.asarray(r, dtype=float), values[-1])
            for edge, val in zip(reversed(breaks), reversed(values[:-1])):
                out = np.where(r < edge, val, out)
            return out

        support = [i for i, v in enumerate(values) if v != 0.0]
        alpha = edges[support[-1] + 1] if support else 1.0
        inner = edges[support[0]] if support else 0.0
        return cls(profile=profile, alpha=alpha, sup_norm=max(abs(v) for v in values),
                   dimension=d, breakpoints=breaks, support_inner=inner,
                   label="piecewise")


def potential_from_radial_conductivity(gamma, dgamma, d2gamma, d=3, alpha=None,
                                       breakpoints=(), n_check=400):
    """Radial Schrodinger potential q0 = Delta sqrt(gamma) / sqrt(gamma).

    ``gamma``, ``dgamma``, ``d2gamma`` are vectorized callables for the
    conductivity and its first two radial derivatives; gamma must be
    bounded below by a positive constant and equal to 1 near r = 1 (so
    the potential vanishes near the boundary), with gamma'(0) = 0.
    """
    r_check = np.linspace(0.0, 1.0, n_check)
    g_check = np.asarray(gamma(r_check), dtype=float)
    if np.any(g_check <= 0.0):
        raise ValueError("conductivity must be strictly positive")

    def profile(r):
        r = np.asarray(r, dtype=float)
        g = np.asarray(gamma(r), dtype=float)
        g1 = np.asarray(dgamma(r), dtype=float)
        g2 = np.asarray(d2gamma(r), dtype=float)
        core = g2 / (2.0 * g) - g1 * g1 / (4.0 * g * g)
        with np.errstate(divide="ignore", invalid="ignore"):
            angular = np.where(r > 1e-8, (d - 1) * g1 / (2.0 * g * r), 0.0)
        at_zero = d * g2 / (2.0 * g) - core  # total d*g2/(2g) when gamma'(0)=0
        return np.where(r > 1e-8, core + angular, core + at_zero)

    if alpha is None:
        vals = profile(r_check)
        above = np.nonzero(np.abs(vals) > 1e-13)[0]
        alpha = float(r_check[above[-1]]) if above.size else 1.0
        alpha = min(1.0, alpha + 2.0 / n_check)
    sup = float(np.max(np.abs(profile(np.linspace(0.0, alpha, n_check)))))
    return RadialPotential(profile=profile, alpha=alpha, sup_norm=sup, dimension=d,
                           breakpoints=tuple(breakpoints), label="from_conductivity")


@dataclass(frozen=True)
class RadialChannel:
    """Output of the ODE route for one angular degree."""

    k: int
    lambda_k: float
    b: Callable
    f_boundary: float


def solve_radial_channel(q, k, rtol=1e-13, atol=1e-15, eps=1e-6):
    """Solve the radial channel ODE and return (lambda_k, b_k profile).

    The regular-at-origin solution is computed as b_k(r) = r^k f(r) with
    f'' + (2k + d - 1)/r f' = q0(r) f, integrated outward from a
    two-term Frobenius start at r = eps and split at the declared
    breakpoints; lambda_k = k + f'(1)/f(1).
    """
    d = q.dimension
    c = 2 * k + d - 1

    def rhs(r, y):
        return [y[1], float(q(r)) * y[0] - c * y[1] / r]

    q0_origin = float(q(np.array([eps]))[0])
    a2 = q0_origin / (2.0 * (2 * k + d))
    y = np.array([1.0 + a2 * eps * eps, 2.0 * a2 * eps])

    edges = [eps] + [b for b in sorted(set(q.breakpoints)) if eps < b < 1.0] + [1.0]
    pieces = []
    max_f = abs(y[0])
    for lo, hi in zip(edges[:-1], edges[1:]):
        sol = solve_ivp(rhs, (lo, hi), y, method="DOP853", rtol=rtol, atol=atol,
                        dense_output=True)
        if not sol.success:
            raise SolverError(f"radial integration failed on [{lo}, {hi}]: {sol.message}")
        pieces.append(sol)
        sample = sol.sol(np.linspace(lo, hi, 33))[0]
        max_f = max(max_f, float(np.max(np.abs(sample))))
        y = sol.y[:, -1]

    f1, df1 = y
    if abs(f1) < 1e-12 * max_f:
        raise ResonanceError(
            f"f(1) ~ 0 at k={k}: zero is a Dirichlet eigenvalue of -Delta + q")
    lam = k + df1 / f1

    def b(r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        f = np.empty_like(r)
        for i, ri in enumerate(r):
            if ri <= eps:
                f[i] = pieces[0].sol(eps)[0]
            else:
                for sol in pieces:
                    if ri <= sol.t[-1] + 1e-15:
                        f[i] = sol.sol(min(ri, sol.t[-1]))[0]
                        break
                else:
                    f[i] = pieces[-1].sol(1.0)[0]
        out = r**k * f / f1
        return out if out.shape else float(out)

    return RadialChannel(k=k, lambda_k=float(lam), b=b, f_boundary=float(f1))


def sigma_k1(q, k, n_nodes=48):
    """First moment sigma_{k,1} = int_0^1 q0(r) r^{2k+d-1} dr."""
    r, w = gauss_panels(q.support_inner, q.alpha, n_nodes, q.breakpoints)
    return float(np.sum(w * q(r) * r ** (2 * k + q.dimension - 1)))


# ---------------------------------------------------------------------------
# Liouville half-line machinery for the sigma_{k,n} series


def _legendre_cumint_matrix(n):
    """Matrix mapping values at n Gauss nodes to partial integrals int_{-1}^{x_i}."""
    x, w = roots_legendre(n)
    vander = np.polynomial.legendre.legvander(x, n)
    coeff_from_vals = ((2.0 * np.arange(n) + 1.0) / 2.0)[:, None] * (vander[:, :n].T * w)
    anti = np.zeros((n, n))
    anti[:, 0] = x + 1.0
    for j in range(1, n):
        anti[:, j] = (vander[:, j + 1] - vander[:, j - 1]) / (2 * j + 1)
    return anti @ coeff_from_vals


_cumint_cache: dict[int, np.ndarray] = {}


def _cumint(n):
    mat = _cumint_cache.get(n)
    if mat is None:
        mat = _legendre_cumint_matrix(n)
        _cumint_cache[n] = mat
    return mat


@dataclass(frozen=True)
class LiouvilleGrid:
    """Composite Gauss grid in tau = t - t0 on the Liouville half-line.

    Stores the potential V(t) = e^{-2t} q0(e^{-t}) at the nodes and
    enough structure to apply the free resolvent with spectral accuracy
    (the kernel kink at t = s is handled by cumulative panel integrals).
    """

    kappa: float
    t0: float
    tau: np.ndarray
    weights: np.ndarray
    panel_slices: tuple
    panel_halfwidths: np.ndarray
    nodes_per_panel: int
    V: np.ndarray

    def apply_resolvent(self, f):
        """(R(kappa) f)(tau_i) for f given by its values at the nodes."""
        kappa = self.kappa
        up = np.exp(kappa * self.tau) * f
        down = np.exp(-kappa * self.tau) * f
        cum = _cumint(self.nodes_per_panel)

        part_up = np.empty_like(f)
        part_down = np.empty_like(f)
        full_up = np.empty(len(self.panel_slices))
        full_down = np.empty(len(self.panel_slices))
        for p, sl in enumerate(self.panel_slices):
            h = self.panel_halfwidths[p]
            part_up[sl] = h * (cum @ up[sl])
            part_down[sl] = h * (cum @ down[sl])
            full_up[p] = np.sum(self.weights[sl] * up[sl])
            full_down[p] = np.sum(self.weights[sl] * down[sl])

        left_up = np.concatenate(([0.0], np.cumsum(full_up)[:-1]))
        right_down = np.concatenate((np.cumsum(full_down[::-1])[::-1][1:], [0.0]))
        total_down = float(np.sum(full_down))

        a_vals = np.empty_like(f)   # int_0^tau e^{kappa s} f
        b_vals = np.empty_like(f)   # int_tau^{T} e^{-kappa s} f
        for p, sl in enumerate(self.panel_slices):
            a_vals[sl] = left_up[p] + part_up[sl]
            b_vals[sl] = right_down[p] + (full_down[p] - part_down[sl])

        image = math.exp(-2.0 * kappa * self.t0)
        return (np.exp(-kappa * self.tau) * a_vals + np.exp(kappa * self.tau) * b_vals
                - image * np.exp(-kappa * self.tau) * total_down) / (2.0 * kappa)


def liouville_grid(q, k, nodes_per_panel=28):
    """Discretize [t0, T] with t0 = -log(alpha) and a certified tail cut."""
    kappa = q.kappa(k)
    if kappa <= 0.0:
        raise ConvergenceError("Liouville series requires kappa = k + (d-2)/2 > 0")
    t0 = -math.log(q.alpha)
    decay_len = max(4.0, 36.0 / (2.0 * kappa + 2.0))
    if q.support_inner > 0.0:
        length = min(-math.log(q.support_inner) - t0, decay_len)
    else:
        length = decay_len

    t_breaks = sorted({-math.log(b) - t0 for b in q.breakpoints
                       if 0.0 < -math.log(b) - t0 < length})
    edges = [0.0] + t_breaks + [length]
    max_len = min(0.8, 4.0 / max(kappa, 1.0))
    x_ref, w_ref = roots_legendre(nodes_per_panel)

    taus, weights, slices, halves = [], [], [], []
    start = 0
    for lo, hi in zip(edges[:-1], edges[1:]):
        n_sub = max(1, math.ceil((hi - lo) / max_len))
        sub = np.linspace(lo, hi, n_sub + 1)
        for a, b in zip(sub[:-1], sub[1:]):
            h = 0.5 * (b - a)
            taus.append(a + h * (x_ref + 1.0))
            weights.append(h * w_ref)
            slices.append(slice(start, start + nodes_per_panel))
            halves.append(h)
            start += nodes_per_panel

    tau = np.concatenate(taus)
    r = np.exp(-(tau + t0))
    v = np.exp(-2.0 * (tau + t0)) * q(r)
    return LiouvilleGrid(kappa=kappa, t0=t0, tau=tau, weights=np.concatenate(weights),
                         panel_slices=tuple(slices), panel_halfwidths=np.array(halves),
                         nodes_per_panel=nodes_per_panel, V=v)


def sigma_series(q, k, nmax, grid=None):
    """sigma_{k,n} for n = 1..nmax by iterating V R(kappa) against V e_kappa."""
    if grid is None:
        grid = liouville_grid(q, k)
    kappa, t0 = grid.kappa, grid.t0
    decay = np.exp(-kappa * grid.tau)
    prefactor = math.exp(-2.0 * kappa * t0)

    sigmas = []
    w_tilde = grid.V * decay
    sigmas.append(prefactor * float(np.sum(grid.weights * decay * w_tilde)))
    for n in range(2, nmax + 1):
        w_tilde = grid.V * grid.apply_resolvent(w_tilde)
        sign = -1.0 if (n - 1) % 2 else 1.0
        sigmas.append(sign * prefactor * float(np.sum(grid.weights * decay * w_tilde)))
    return sigmas


def sigma_kn(q, k, n, grid=None):
    """Single series coefficient sigma_{k,n} (n >= 1)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return sigma_series(q, k, n, grid=grid)[-1]


def contraction_ratio(q, k):
    """Sharp Lemma-5.1 bound on ||V R(kappa)||: alpha^2 ||q0||_inf / kappa^2."""
    kappa = q.kappa(k)
    if kappa <= 0.0:
        return math.inf
    return q.alpha**2 * q.sup_norm / kappa**2


def liouville_operator_norm(q, k, grid=None):
    """Numerical L2 operator norm of the discretized V R(kappa)."""
    if grid is None:
        grid = liouville_grid(q, k)
    kappa, t0 = grid.kappa, grid.t0
    tt = grid.tau[:, None] + t0
    ss = grid.tau[None, :] + t0
    kernel = (np.exp(-kappa * np.abs(tt - ss)) - np.exp(-kappa * (tt + ss))) / (2.0 * kappa)
    sq = np.sqrt(grid.weights)
    mat = (sq * grid.V)[:, None] * kernel * sq[None, :]
    return float(np.linalg.svd(mat, compute_uv=False)[0])


def sigma_bound(q, k, n):
    """Theorem-2 envelope |sigma_{k,n}| <= alpha^{2(n+k)+d-2} ||q||^n / (2 kappa^{2n-1})."""
    kappa = q.kappa(k)
    return (q.alpha ** (2 * (n + k) + q.dimension - 2) * q.sup_norm**n
            / (2.0 * kappa ** (2 * n - 1)))


def lambda_remainder_bound(q, k):
    """|lambda_k - k - sigma_{k,1}| <= alpha^{d+2} ||q||^2 alpha^{2k} / (2 kappa^3)."""
    kappa = q.kappa(k)
    return (q.alpha ** (q.dimension + 2) * q.sup_norm**2 * q.alpha ** (2 * k)
            / (2.0 * kappa**3))


@dataclass(frozen=True)
class SeriesEigenvalue:
    k: int
    lambda_k: float
    sigmas: tuple
    tail_bound: float


def eigenvalue_series(q, k, nmax=8):
    """Theorem-2 series lambda_k = k + sum_{n<=nmax} sigma_{k,n} + certified tail.

    Raises ConvergenceError when the contraction condition
    alpha^2 ||q0|| / kappa^2 < 1 fails (strictly); the ODE route covers
    those degrees instead.
    """
    rho = contraction_ratio(q, k)
    if not rho < 1.0:
        raise ConvergenceError(
            f"series invalid at k={k}: contraction ratio {rho:.3f} >= 1 "
            f"(need k > alpha ||q0||^(1/2) - (d-2)/2)")
    sigmas = sigma_series(q, k, nmax)
    tail = sigma_bound(q, k, nmax + 1) / (1.0 - rho)
    return SeriesEigenvalue(k=k, lambda_k=k + float(np.sum(sigmas)),
                            sigmas=tuple(sigmas), tail_bound=tail)


# ---------------------------------------------------------------------------
# Aggregate tables


@dataclass(frozen=True)
class DtnSpectrum:
    """Eigenvalues lambda_k of the D-N map for a radial potential."""

    eigenvalues: dict
    method: str
    alpha: float
    sup_norm: float
    dimension: int

    @property
    def kmax(self):
        return max(self.eigenvalues)

    def shifted(self, k):
        """lambda_k - k, the quantity entering every Born series."""
        return self.eigenvalues[k] - k


@dataclass(frozen=True)
class RadialMomentTable:
    """sigma_{k,n} values together with kappa_d = k + (d-2)/2."""

    sigma: dict
    kappa: dict
    dimension: int


def dtn_spectrum(q, kmax, method="ode", nmax=8):
    """DtnSpectrum for k = 0..kmax by the requested route."""
    eigs = {}
    for k in range(kmax + 1):
        if method == "ode":
            eigs[k] = solve_radial_channel(q, k).lambda_k
        elif method == "series":
            eigs[k] = eigenvalue_series(q, k, nmax).lambda_k
        else:
            raise ValueError("method must be 'ode' or 'series'")
    return DtnSpectrum(eigenvalues=eigs, method=method, alpha=q.alpha,
                       sup_norm=q.sup_norm, dimension=q.dimension)


def radial_moment_table(q, kmax, nmax):
    """Table of sigma_{k,n} for k <= kmax, n <= nmax."""
    sigma = {}
    kappa = {}
    for k in range(kmax + 1):
        kappa[k] = q.kappa(k)
        grid = liouville_grid(q, k)
        sig = sigma_series(q, k, nmax, grid=grid)
        sigma[(k, 1)] = sigma_k1(q, k)
        for n in range(2, nmax + 1):
            sigma[(k, n)] = sig[n - 1]
    return RadialMomentTable(sigma=sigma, kappa=kappa, dimension=q.dimension)
