"""Forward D-N solver for general potentials on the unit ball (d = 3).

Potentials are finite spherical-harmonic expansions with radial
coefficient profiles.  The boundary problem (-Delta + q) u = 0,
u|_{S^2} = Y_{k,m} is expanded over channels u = sum u^{(l,n)}(r) Y_{l,n};
after factoring u^{(l,n)} = r^l f^{(l,n)} the coupled system is solved by
multi-domain Chebyshev collocation in r with a dense direct solve.
Matrix elements of Lambda_q - Lambda_0 are then evaluated through the
Alessandrini volume identity (never by boundary differentiation), and
the moments m_{k,l} by Gaunt contraction plus radial quadrature.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import SolverError
from .gaunt import gaunt_numeric, product_expansion
from .quadrature import gauss_panels, make_sphere_rule
from .radial import RadialPotential
from .specfun import E3, Frame, angles_from_xyz, frame_from_omega, sph_harm

_TWO_SQRT_PI = 2.0 * math.sqrt(math.pi)
_FOUR_PI = 4.0 * math.pi


# ---------------------------------------------------------------------------
# Potentials as truncated spherical-harmonic expansions


class PotentialSH:
    """Potential q(x) = sum_{l <= L_q, |m| <= l} q_{lm}(|x|) Y_{lm}(x/|x|).

    ``coeffs`` maps (l, m) to a vectorized radial profile returning
    complex values.  Real potentials must satisfy
    q_{l,-m} = (-1)^m conj(q_{l,m}); this is validated on sample radii.
    """

    def __init__(self, coeffs, alpha, sup_norm, breakpoints=(), label="",
                 check_reality=True):
        self.coeffs = dict(coeffs)
        self.alpha = float(alpha)
        self.sup_norm = float(sup_norm)
        self.breakpoints = tuple(sorted(set(breakpoints)))
        self.label = label
        for (l, m) in self.coeffs:
            if l < 0 or abs(m) > l:
                raise ValueError(f"invalid spherical index ({l}, {m})")
        if check_reality and self.reality_violation() > 1e-10:
            raise ValueError("coefficients violate the reality constraint "
                             "q_{l,-m} = (-1)^m conj(q_{l,m})")

    @property
    def L_q(self):
        return max((l for (l, _) in self.coeffs), default=0)

    @property
    def m_orders(self):
        return sorted({m for (_, m) in self.coeffs})

    def coeff_values(self, l, m, r):
        fn = self.coeffs.get((l, m))
        r = np.asarray(r, dtype=float)
        if fn is None:
            return np.zeros(r.shape, dtype=complex)
        return np.asarray(fn(r), dtype=complex)

    def reality_violation(self, n_sample=17):
        r = np.linspace(1e-3, self.alpha, n_sample)
        worst = 0.0
        for (l, m) in self.coeffs:
            lhs = self.coeff_values(l, -m, r)
            rhs = (-1.0) ** m * np.conj(self.coeff_values(l, m, r))
            worst = max(worst, float(np.max(np.abs(lhs - rhs))))
        return worst

    def evaluate(self, points):
        """q at Cartesian points (n, 3); complex (real up to rounding)."""
        points = np.asarray(points, dtype=float)
        r = np.linalg.norm(points, axis=-1)
        safe = np.where(r > 0, r, 1.0)
        theta, phi = angles_from_xyz(points / safe[..., None])
        out = np.zeros(r.shape, dtype=complex)
        for (l, m), _ in self.coeffs.items():
            out += self.coeff_values(l, m, r) * sph_harm(l, m, theta, phi)
        return out

    @classmethod
    def from_radial(cls, q: RadialPotential):
        if q.dimension != 3:
            raise ValueError("3D solver needs a d=3 potential")

        def c00(r):
            return _TWO_SQRT_PI * q(r) + 0j

        return cls({(0, 0): c00}, alpha=q.alpha, sup_norm=q.sup_norm,
                   breakpoints=q.breakpoints, label=q.label)

    @classmethod
    def from_terms(cls, terms, alpha, sup_norm, breakpoints=(), label=""):
        """Build from (l, m, profile) triples.

        Any missing conjugate mirror q_{l,-m} = (-1)^m conj(q_{l,m}) is
        filled in automatically so the resulting potential is real.
        """
        coeffs = {}
        for (l, m, profile) in terms:
            coeffs[(l, m)] = profile
        for (l, m) in list(coeffs):
            if (l, -m) not in coeffs:
                fn, sign = coeffs[(l, m)], (-1.0) ** m
                coeffs[(l, -m)] = (lambda f, s: (lambda r: s * np.conj(np.asarray(f(r), dtype=complex))))(fn, sign)
        return cls(coeffs, alpha=alpha, sup_norm=sup_norm, breakpoints=breakpoints,
                   label=label)


def project_potential(q: Callable, L_q, alpha, sup_norm=None, breakpoints=(),
                      sphere_degree=None, label="projected"):
    """Angular projection of a pointwise potential onto degrees l <= L_q.

    ``q`` maps (n, 3) points to values.  Each coefficient profile is the
    sphere-rule integral q_{lm}(r) = int q(r theta) conj(Y_{lm}) dS,
    evaluated on demand (no radial interpolation); the rule exactness is
    at least 2 L_q.  The returned potential carries a
    ``truncation_residual`` diagnostic: max |q - Pi_L q| over sample
    points.
    """
    degree = sphere_degree if sphere_degree is not None else 2 * L_q + 6
    rule = make_sphere_rule(degree)
    ybar = {}
    for l in range(L_q + 1):
        for m in range(-l, l + 1):
            ybar[(l, m)] = np.conj(sph_harm(l, m, rule.theta, rule.phi)) * rule.weights

    value_cache = {}

    def values_at(r):
        key = r.tobytes()
        vals = value_cache.get(key)
        if vals is None:
            points = (r[:, None, None] * rule.nodes[None, :, :]).reshape(-1, 3)
            vals = np.asarray(q(points), dtype=complex).reshape(len(r), -1)
            value_cache[key] = vals
        return vals

    def make_fn(l, m):
        def fn(r):
            r = np.atleast_1d(np.asarray(r, dtype=float))
            return values_at(r) @ ybar[(l, m)]

        return fn

    coeffs = {idx: make_fn(*idx) for idx in ybar}

    # truncation-energy report on a sample grid
    r_sample = np.linspace(0.05, 1.0, 12)
    sampled = values_at(r_sample)
    recon = np.zeros_like(sampled)
    for (l, m) in coeffs:
        prof = (sampled @ ybar[(l, m)])[:, None]
        recon += prof * sph_harm(l, m, rule.theta, rule.phi)[None, :]
    residual = float(np.max(np.abs(sampled - recon)))
    if sup_norm is None:
        sup_norm = float(np.max(np.abs(sampled)))

    pot = PotentialSH(coeffs, alpha=alpha, sup_norm=sup_norm, breakpoints=breakpoints,
                      label=label, check_reality=False)
    pot.truncation_residual = residual
    return pot


def rotate_potential(q: PotentialSH, rotation):
    """The rotated potential R_P q (x) = q(P^T x), re-projected on the fly.

    Rotation preserves each degree, so the output has the same angular
    truncation.  Passing ``frame.rotation`` reduces matrix elements in
    the ``omega`` frame to the north-pole frame.
    """
    rotation = np.asarray(rotation, dtype=float)
    if np.max(np.abs(rotation - np.eye(3))) < 1e-15:
        return q
    rotated = project_potential(
        lambda pts: q.evaluate(pts @ rotation), q.L_q, alpha=q.alpha,
        sup_norm=q.sup_norm, breakpoints=q.breakpoints,
        label=f"rotated({q.label})")
    return rotated


# ---------------------------------------------------------------------------
# Multi-domain Chebyshev collocation in r


def _cheb_lobatto(n):
    """Ascending Chebyshev-Lobatto nodes on [-1, 1] and differentiation matrix."""
    if n < 2:
        raise ValueError("need at least 2 nodes")
    N = n - 1
    x = np.cos(math.pi * np.arange(N + 1) / N)  # descending
    c = np.ones(N + 1)
    c[0] = c[-1] = 2.0
    c *= (-1.0) ** np.arange(N + 1)
    dx = x[:, None] - x[None, :]
    D = np.outer(c, 1.0 / c) / (dx + np.eye(N + 1))
    D -= np.diag(D.sum(axis=1))
    perm = slice(None, None, -1)
    return x[perm], D[perm, perm]


def _cc_weights(x):
    """Clenshaw-Curtis weights on the given Chebyshev-Lobatto nodes."""
    n = len(x)
    vander = np.polynomial.chebyshev.chebvander(x, n - 1)
    moments = np.zeros(n)
    for j in range(0, n, 2):
        moments[j] = 2.0 / (1.0 - j * j)
    return np.linalg.solve(vander.T, moments)


@dataclass(frozen=True)
class RadialMesh:
    """Chebyshev-Lobatto domains covering [0, 1], split at the breakpoints."""

    r: np.ndarray
    slices: tuple
    d1: tuple
    d2: tuple
    weights: np.ndarray
    nodes_per_domain: int

    def integrate(self, values):
        return np.asarray(values) @ self.weights


_mesh_ref_cache: dict[int, tuple] = {}


def radial_mesh(breaks=(), n=40):
    ref = _mesh_ref_cache.get(n)
    if ref is None:
        x, d = _cheb_lobatto(n)
        ref = (x, d, _cc_weights(x))
        _mesh_ref_cache[n] = ref
    x, d_ref, w_ref = ref
    edges = [0.0] + sorted(b for b in set(breaks) if 0.0 < b < 1.0) + [1.0]
    r, slices, d1, d2, weights = [], [], [], [], []
    start = 0
    for a, b in zip(edges[:-1], edges[1:]):
        half = 0.5 * (b - a)
        r.append(a + half * (x + 1.0))
        sc = 1.0 / half
        d1_dom = sc * d_ref
        d1.append(d1_dom)
        d2.append(d1_dom @ d1_dom)
        weights.append(half * w_ref)
        slices.append(slice(start, start + n))
        start += n
    return RadialMesh(r=np.concatenate(r), slices=tuple(slices), d1=tuple(d1),
                      d2=tuple(d2), weights=np.concatenate(weights),
                      nodes_per_domain=n)


def reachable_orders(m0, m_steps, l_max):
    """Closure of {m0} under repeated shifts by the potential's azimuthal orders."""
    reach = {m0}
    frontier = {m0}
    while frontier:
        new = {n + dm for n in frontier for dm in m_steps} - reach
        new = {n for n in new if abs(n) <= l_max}
        reach |= new
        frontier = new
    return sorted(reach)


@dataclass(frozen=True)
class ChannelSolution:
    """Channel profiles of the solution of (-Delta + q) u = 0, u|_S = Y_{k,m}."""

    boundary: tuple
    basis: tuple
    mesh: RadialMesh
    factored: np.ndarray
    u: np.ndarray
    l_max: int
    shell_energy_fraction: float

    def channel(self, l, n):
        try:
            idx = self.basis.index((l, n))
        except ValueError:
            return np.zeros(len(self.mesh.r), dtype=complex)
        return self.u[idx]


def solve_channel_system(q: PotentialSH, k, m, l_max=None, n_nodes=40):
    """Solve the coupled-channel boundary problem for boundary data Y_{k,m}.

    Channels (l, n) run over l <= l_max and the azimuthal orders reachable
    from m through the potential's spectrum (Gaunt selection rule).  Each
    factored profile f = u / r^l obeys
        f'' + (2l+2)/r f' = sum_{l',n'} B(r) r^{l'-l} f^{(l',n')},
    collocated at the interior Chebyshev nodes of every domain with
    f'(0) = 0 (regularity), continuity of f and f' at the domain
    interfaces, and f(1) = delta at the boundary.
    """
    if abs(m) > k:
        raise ValueError("need |m| <= k for boundary data Y_{k,m}")
    if l_max is None:
        l_max = k + 2 * q.L_q + 2
    if l_max < k:
        raise ValueError("l_max must be at least the boundary degree k")
    mesh = radial_mesh(q.breakpoints, n=n_nodes)
    orders = reachable_orders(m, q.m_orders, l_max)
    basis = tuple((l, n) for l in range(l_max + 1) for n in orders if abs(n) <= l)
    index = {c: i for i, c in enumerate(basis)}
    if (k, m) not in index:
        raise ValueError("boundary channel missing from the basis")

    nt = len(mesh.r)
    n = mesh.nodes_per_domain
    n_dom = len(mesh.slices)
    size = len(basis) * nt
    a_mat = np.zeros((size, size), dtype=complex)
    rhs = np.zeros(size, dtype=complex)

    qv = {idx: q.coeff_values(idx[0], idx[1], mesh.r) for idx in q.coeffs}

    for ci, (l, nn) in enumerate(basis):
        base = ci * nt
        # structural rows
        for d, sl in enumerate(mesh.slices):
            g0 = sl.start
            if d == 0:
                a_mat[base + g0, base + g0:base + g0 + n] = mesh.d1[0][0]
            else:
                prev = mesh.slices[d - 1]
                row_c = base + prev.start + n - 1     # continuity of f
                a_mat[row_c, base + prev.start + n - 1] = 1.0
                a_mat[row_c, base + g0] = -1.0
                row_d = base + g0                      # continuity of f'
                a_mat[row_d, base + prev.start:base + prev.start + n] = mesh.d1[d - 1][n - 1]
                a_mat[row_d, base + g0:base + g0 + n] -= mesh.d1[d][0]
            if d == n_dom - 1:
                row_b = base + g0 + n - 1
                a_mat[row_b, row_b] = 1.0
                rhs[row_b] = 1.0 if (l, nn) == (k, m) else 0.0
        # ODE rows at interior nodes of every domain
        for d, sl in enumerate(mesh.slices):
            g0 = sl.start
            rr = mesh.r[sl]
            for j in range(1, n - 1):
                row = base + g0 + j
                a_mat[row, base + g0:base + g0 + n] += (
                    mesh.d2[d][j] + (2.0 * l + 2.0) / rr[j] * mesh.d1[d][j])
        # coupling: - B_{c,c'}(r) r^{l'-l} on the diagonal in the node index
        for (lq, mq), qvals in qv.items():
            nprime = nn - mq
            for lp in range(max(abs(l - lq), abs(nprime)), min(l + lq, l_max) + 1):
                cj = index.get((lp, nprime))
                if cj is None:
                    continue
                g = gaunt_numeric(lq, mq, lp, nprime, l, nn)
                if g == 0.0:
                    continue
                for d, sl in enumerate(mesh.slices):
                    g0 = sl.start
                    rr = mesh.r[sl]
                    for j in range(1, n - 1):
                        row = base + g0 + j
                        a_mat[row, cj * nt + g0 + j] -= (
                            g * qvals[g0 + j] * rr[j] ** (lp - l))

    try:
        sol = np.linalg.solve(a_mat, rhs)
    except np.linalg.LinAlgError as exc:
        raise SolverError(
            "channel system is singular: 0 may be a Dirichlet eigenvalue "
            f"of -Delta + q (boundary ({k},{m}))") from exc

    factored = sol.reshape(len(basis), nt)
    powers = np.array([mesh.r ** l for (l, _) in basis])
    u = factored * powers

    energies = np.array([float(mesh.integrate(np.abs(uc) ** 2 * mesh.r**2)) for uc in u])
    shell = [i for i, (l, nn) in enumerate(basis) if l == l_max and (l, nn) != (k, m)]
    total = float(np.sum(energies))
    fraction = float(np.sum(energies[shell]) / total) if total > 0 and shell else 0.0
    if fraction > 1e-8:
        warnings.warn(
            f"energy fraction {fraction:.2e} in the l = {l_max} shell; "
            "increase l_max", stacklevel=2)
    return ChannelSolution(boundary=(k, m), basis=basis, mesh=mesh, factored=factored,
                           u=u, l_max=l_max, shell_energy_fraction=fraction)


def _element_from_solution(q: PotentialSH, sol: ChannelSolution, ell):
    """int_B |x|^ell conj(Y_{ell,k}) q u_{k,k} dx through the Gaunt tensor."""
    k, m = sol.boundary
    mesh = sol.mesh
    integrand = np.zeros(len(mesh.r), dtype=complex)
    for (lq, mq) in q.coeffs:
        nprime = m - mq
        for ci, (lp, np_) in enumerate(sol.basis):
            if np_ != nprime or not abs(ell - lq) <= lp <= ell + lq:
                continue
            g = gaunt_numeric(lq, mq, lp, nprime, ell, m)
            if g == 0.0:
                continue
            integrand += g * q.coeff_values(lq, mq, mesh.r) * sol.u[ci]
    return complex(mesh.integrate(mesh.r ** (ell + 2) * integrand))


@dataclass(frozen=True)
class MatrixElementTable:
    """lambda_{k,l;omega}[q] - k delta_{k,l} for l >= k, in a fixed frame."""

    omega: np.ndarray
    frame: Frame
    entries: dict
    kmax: int

    def entry(self, k, ell):
        return self.entries[(k, ell)]


@dataclass(frozen=True)
class MomentTable3D:
    """Moments m_{k,l;omega}[q] of the potential against solid harmonics."""

    omega: np.ndarray
    frame: Frame
    entries: dict
    kmax: int

    def entry(self, k, ell):
        return self.entries[(k, ell)]


def _resolve_frame(frame):
    if frame is None:
        return Frame(omega=E3, rotation=np.eye(3))
    return frame


def matrix_element(q: PotentialSH, k, ell, frame=None, l_max=None, n_nodes=40):
    """Single matrix element lambda_{k,ell;omega}[q] - k delta_{k,ell}."""
    if ell < k:
        raise ValueError("need ell >= k")
    frame = _resolve_frame(frame)
    q_e3 = rotate_potential(q, frame.rotation)
    sol = solve_channel_system(q_e3, k, k, l_max=l_max, n_nodes=n_nodes)
    return _element_from_solution(q_e3, sol, ell)


def matrix_element_table(q: PotentialSH, kmax, frame=None, l_max=None, n_nodes=40):
    """Triangular table of matrix elements for k <= ell <= kmax."""
    frame = _resolve_frame(frame)
    q_e3 = rotate_potential(q, frame.rotation)
    entries = {}
    for k in range(kmax + 1):
        lm = l_max if l_max is not None else max(kmax, k + 2 * q.L_q + 2)
        sol = solve_channel_system(q_e3, k, k, l_max=lm, n_nodes=n_nodes)
        for ell in range(k, kmax + 1):
            entries[(k, ell)] = _element_from_solution(q_e3, sol, ell)
    return MatrixElementTable(omega=frame.omega, frame=frame, entries=entries, kmax=kmax)


def moment_3d(q: PotentialSH, k, ell, frame=None, n_nodes=48):
    """Moment m_{k,ell;omega}[q] = int |x|^{ell+k} q conj(Y^w_{ell,k}) Y^w_{k,k} dx."""
    if ell < k:
        raise ValueError("need ell >= k")
    frame = _resolve_frame(frame)
    q_e3 = rotate_potential(q, frame.rotation)
    r, w = gauss_panels(0.0, 1.0, n_nodes, q_e3.breakpoints)
    total = 0.0 + 0.0j
    for n, coeff in product_expansion(k, ell):
        prof = q_e3.coeff_values(n, 0, r)
        if not np.any(prof):
            continue
        radial = np.sum(w * r ** (ell + k + 2) * prof)
        total += coeff * math.sqrt(_FOUR_PI / (2 * n + 1)) * radial
    return complex(total)


def moment_table_3d(q: PotentialSH, kmax, frame=None, n_nodes=48):
    """Triangular table of moments for k <= ell <= kmax."""
    frame = _resolve_frame(frame)
    q_e3 = rotate_potential(q, frame.rotation)
    r, w = gauss_panels(0.0, 1.0, n_nodes, q_e3.breakpoints)
    profs = {n: q_e3.coeff_values(n, 0, r) for n in range(2 * kmax + 1)}
    entries = {}
    for k in range(kmax + 1):
        for ell in range(k, kmax + 1):
            total = 0.0 + 0.0j
            for n, coeff in product_expansion(k, ell):
                prof = profs.get(n)
                if prof is None or not np.any(prof):
                    continue
                radial = np.sum(w * r ** (ell + k + 2) * prof)
                total += coeff * math.sqrt(_FOUR_PI / (2 * n + 1)) * radial
            entries[(k, ell)] = complex(total)
    return MomentTable3D(omega=frame.omega, frame=frame, entries=entries, kmax=kmax)
