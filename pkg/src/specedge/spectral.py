"""Deterministic spectral law of X'TX: inverse transform, Stieltjes
transform, density, and the atom at zero.

The law is defined through the fixed-point equation

    z = -1/m + (1/N) * sum_a t_a / (1 + t_a * m),

whose unique upper-half-plane solution m0(z) is the Stieltjes transform.
The formal inverse z0(m) of m0 is a rational function with poles at 0 and
-1/t_a; its boundary behavior on the real axis gives the density.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NonConvergence, PoleProximity
from .errors import UndefinedAtZero  # noqa: F401  (re-exported)
from .population import PopulationSpec

POLE_PROXIMITY_REL = 1e-12
DEFAULT_TOL = 1e-12
MAX_ITER = 10_000

# Eta ladder for real-axis boundary values, highest to lowest.
ETA_LADDER = tuple(10.0 ** (-k) for k in range(4, 11))
BOUNDARY_AGREEMENT = 1e-6


# ---------------------------------------------------------------------------
# array-level evaluators (vals = distinct nonzero values, mults, n = N)

def _z0(vals, mults, n, m):
    m = np.asarray(m)
    if vals.size == 0:
        return -1.0 / m
    s = np.sum(mults * vals / (1.0 + np.multiply.outer(m, vals)), axis=-1)
    return -1.0 / m + s / n


def _z0_deriv(vals, mults, n, m, order):
    m = np.asarray(m)
    k = order
    sign = (-1.0) ** k
    lead = sign * _factorial(k) / m ** (k + 1)
    if vals.size == 0:
        return -lead
    denom = (1.0 + np.multiply.outer(m, vals)) ** (k + 1)
    s = np.sum(mults * vals ** (k + 1) / denom, axis=-1)
    # d^k/dm^k of t/(1+tm) = (-1)^k k! t^{k+1}/(1+tm)^{k+1}
    return -lead + sign * _factorial(k) * s / n


def _factorial(k):
    return (1, 1, 2, 6, 24)[k]


def _pole_guard(pop: PopulationSpec, m) -> None:
    """Raise PoleProximity when m is within tolerance of a pole.

    The tolerance is relative to the local pole spacing, so tightly
    clustered poles get proportionally tighter exclusion zones.
    """
    poles = pop.poles()
    m_arr = np.atleast_1d(np.asarray(m, dtype=complex))
    dist = np.abs(m_arr[:, None] - poles[None, :])
    idx = np.argmin(dist, axis=1)
    if poles.size > 1:
        gaps = np.abs(poles[:, None] - poles[None, :])
        np.fill_diagonal(gaps, np.inf)
        spacing = gaps.min(axis=1)
    else:
        spacing = np.maximum(np.abs(poles), 1.0)
    tol = POLE_PROXIMITY_REL * spacing[idx]
    bad = dist[np.arange(m_arr.size), idx] <= tol
    if np.any(bad):
        where = m_arr[bad][0]
        raise PoleProximity(f"m={where} is within {POLE_PROXIMITY_REL:g} of a pole of z0")


# ---------------------------------------------------------------------------
# public operations

def z0_eval(pop: PopulationSpec, m):
    """Evaluate z0 at m (real or complex, off the pole set).

    The point at infinity maps to 0 by convention.
    """
    if np.isscalar(m) and not np.iscomplexobj(np.asarray(m)) and np.isinf(m):
        return 0.0
    _pole_guard(pop, m)
    vals, mults = pop.nonzero()
    out = _z0(vals, mults, pop.n_dim, m)
    if np.isscalar(m):
        out = complex(out) if np.iscomplexobj(np.asarray(m)) else float(out)
    return out


def z0_derivative(pop: PopulationSpec, m, order: int = 1):
    """Exact rational-function derivative of z0 of the given order (1..3)."""
    if order not in (1, 2, 3):
        raise DomainError(f"derivative order must be 1, 2, or 3, got {order}")
    _pole_guard(pop, m)
    vals, mults = pop.nonzero()
    out = _z0_deriv(vals, mults, pop.n_dim, m, order)
    if np.isscalar(m):
        out = complex(out) if np.iscomplexobj(np.asarray(m)) else float(out)
    return out


def solve_m0(pop: PopulationSpec, z: complex, tol: float = DEFAULT_TOL) -> complex:
    """Solve the fixed-point equation for m0(z), z in the upper half plane.

    Damped fixed-point iteration seeded at -1/z, accelerated by a
    safeguarded Newton step on z0(m) - z = 0.  The iteration map and the
    damping both preserve the upper half plane, so the returned root is
    the unique one with positive imaginary part.
    """
    z = complex(z)
    if not z.imag > 0:
        raise DomainError(f"z must lie in the open upper half plane, got {z}")
    if tol <= 0:
        raise DomainError("tol must be positive")
    # Roundoff in z0 scales with |z|; below this floor the residual is noise.
    tol = max(tol, 4.0 * np.finfo(float).eps * abs(z))
    vals, mults = pop.nonzero()
    n = pop.n_dim

    def hybrid(z_cur, m, budget, goal):
        """Damped fixed-point iteration with gated Newton refinement.

        The damped fixed point is a self-map of C+ with the solution as
        its unique attracting point, so it transports any seed into the
        right basin; Newton is only allowed once the residual is small
        and with a bounded step, which keeps it off the z0 -> 0 plateau
        at large |m| where the residual falsely flattens at |z|.
        Returns (m, residual, iterations used).
        """
        def fp(m):
            s = np.sum(mults * vals / (1.0 + vals * m)) / n if vals.size else 0.0
            return 1.0 / (-z_cur + s)

        def resid(m):
            return complex(_z0(vals, mults, n, m)) - z_cur

        gate = 0.05 * (1.0 + abs(z_cur))
        r = resid(m)
        for it in range(budget):
            if abs(r) <= goal:
                return m, abs(r), it
            stepped = False
            if abs(r) < gate:
                dz = complex(_z0_deriv(vals, mults, n, m, 1))
                if dz != 0:
                    for lam in (1.0, 0.5, 0.25):
                        m_new = m - lam * r / dz
                        if m_new.imag > 0 and abs(m_new - m) <= 0.5 * (1.0 + abs(m)):
                            r_new = resid(m_new)
                            if abs(r_new) < abs(r):
                                m, r = m_new, r_new
                                stepped = True
                                break
            if not stepped:
                m_new = 0.5 * m + 0.5 * fp(m)
                m, r = m_new, resid(m_new)
        return m, abs(r), budget

    m, r, used = hybrid(z, -1.0 / z, 500, tol)
    if r <= tol:
        return m
    # Continuity ladder: solve at a comfortable height, then walk eta down
    # to the target with warm starts.  A rung is never left unconverged;
    # leftover budget keeps grinding the current rung.
    eta_target = z.imag
    eta = max(1.0, 2.0 * eta_target)
    m = -1.0 / complex(z.real, eta)
    remaining = MAX_ITER - used
    while remaining > 0:
        z_cur = complex(z.real, eta)
        goal = tol if eta <= eta_target else max(tol, 1e-12)
        m, r, used = hybrid(z_cur, m, min(remaining, 3000), goal)
        remaining -= used
        if r > goal:
            continue
        if eta <= eta_target:
            return m
        eta = max(eta_target, eta / 4.0)
    raise NonConvergence(
        f"fixed-point solve for m0({z}) did not reach |residual| <= {tol:g} "
        f"within the iteration budget"
    )


# ---------------------------------------------------------------------------
# boundary values on the real axis

def _m0_real_poly(pop: PopulationSpec, x: float):
    """Boundary value of m0 at real x via companion-matrix root finding.

    Clears denominators of z0(m) = x into a polynomial of degree
    (#distinct nonzero values) + 1, takes all roots, and selects the
    unique upper-half-plane root (inside the support) or the real root
    with z0' >= 0 (outside).
    """
    from numpy.polynomial import polynomial as P

    vals, mults = pop.nonzero()
    n = pop.n_dim
    u = 1.0 / vals  # pole offsets: z0 has poles at -u_k
    # z0(m) = -1/m + (1/N) sum_k M_k/(m + u_k);  multiply by m*prod(m+u_k):
    #   -prod(m+u_k) + (1/N) sum_k M_k m prod_{j!=k}(m+u_j) - x m prod(m+u_k) = 0
    full = P.polyfromroots(-u)
    poly = -full
    for k in range(len(u)):
        others = P.polyfromroots(np.delete(-u, k)) if len(u) > 1 else np.array([1.0])
        poly = P.polyadd(poly, (mults[k] / n) * P.polymul([0.0, 1.0], others))
    poly = P.polyadd(poly, -x * P.polymul([0.0, 1.0], full))
    roots = P.polyroots(poly)

    scale = max(1.0, float(np.max(np.abs(roots))))
    im_tol = 1e-9 * scale
    upper = roots[roots.imag > im_tol]
    if upper.size:
        m = upper[np.argmax(upper.imag)]
        return complex(m)
    real_roots = roots[np.abs(roots.imag) <= im_tol].real
    dz = _z0_deriv(vals, mults, n, real_roots, 1)
    ok = real_roots[dz >= -1e-12]
    if ok.size == 0:
        raise NonConvergence(f"no admissible real root of z0(m) = {x:g}")
    # Unique by the one-increasing-preimage property; keep the best match.
    best = ok[np.argmax(_z0_deriv(vals, mults, n, ok, 1))]
    return complex(best)


def _m0_real_ladder(pop: PopulationSpec, x: float):
    """Boundary value of m0 at real x via an eta ladder with extrapolation.

    Solves m0(x + i*eta) down a geometric ladder with warm starts, then
    Neville-extrapolates the deepest rungs to eta = 0.
    """
    ms = []
    m_prev = None
    vals, mults = pop.nonzero()
    n = pop.n_dim
    for eta in ETA_LADDER:
        z = complex(x, eta)
        m = None if m_prev is None else _polish(vals, mults, n, z, m_prev)
        if m is None:
            m = solve_m0(pop, z, tol=1e-13)
        ms.append(m)
        m_prev = m
    etas = np.array(ETA_LADDER[-4:])
    table = [np.array(ms[-4:])]
    for level in range(1, 4):
        prev = table[-1]
        nxt = []
        for i in range(len(prev) - 1):
            e0, e1 = etas[i], etas[i + level]
            nxt.append((e0 * prev[i + 1] - e1 * prev[i]) / (e0 - e1))
        table.append(np.array(nxt))
    return complex(table[-1][0])


def _polish(vals, mults, n, z, m0_guess, tol=1e-13, iters=60):
    """Newton refinement of z0(m) = z from a warm start, kept in C+."""
    m = complex(m0_guess)
    r = complex(_z0(vals, mults, n, m)) - z
    for _ in range(iters):
        if abs(r) <= tol:
            return m
        dz = complex(_z0_deriv(vals, mults, n, m, 1))
        if dz == 0:
            break
        m_new = m - r / dz
        if m_new.imag <= 0:
            break
        r_new = complex(_z0(vals, mults, n, m_new)) - z
        if abs(r_new) >= abs(r):
            break
        m, r = m_new, r_new
    if abs(r) <= 1e-10:
        return m
    return None


def stieltjes_boundary(pop: PopulationSpec, x: float, cross_check: bool = True):
    """m0 extended to the real axis at x, with dual-route validation.

    The companion-matrix route is primary; when `cross_check` is set the
    eta-ladder route must agree within BOUNDARY_AGREEMENT or the call
    fails, guarding against root-selection bugs.
    """
    x = float(x)
    if x == 0.0 and pop.rank <= pop.n_dim:
        raise UndefinedAtZero(
            f"m0 is unbounded at 0 when rank(T) = {pop.rank} <= N = {pop.n_dim}"
        )
    m_poly = _m0_real_poly(pop, x)
    if cross_check:
        m_lad = _m0_real_ladder(pop, x)
        if m_lad is None or abs(m_poly - m_lad) > BOUNDARY_AGREEMENT * max(1.0, abs(m_poly)):
            raise NonConvergence(
                f"boundary-value routes disagree at x={x:g}: "
                f"polynomial {m_poly}, ladder {m_lad}"
            )
    return m_poly


def density_f0(pop: PopulationSpec, x: float, cross_check: bool = True) -> float:
    """Density of the spectral law at x: (1/pi) Im of the boundary m0."""
    m = stieltjes_boundary(pop, x, cross_check=cross_check)
    return max(0.0, m.imag / np.pi)


def atom_mass_at_zero(pop: PopulationSpec) -> float:
    """Point mass at 0 by rank counting: max(0, 1 - rank(T)/N)."""
    return max(0.0, 1.0 - pop.rank / pop.n_dim)


def isolated_zero_in_support(pop: PopulationSpec) -> bool:
    """True when 0 is an isolated point of the support (the atom case).

    Equivalent to the inverse map decreasing through the origin in
    q-coordinates, which happens exactly when rank(T) < N.
    """
    return pop.rank < pop.n_dim


# ---------------------------------------------------------------------------
# density tabulation and quadrature

@dataclass(frozen=True)
class DensityGrid:
    """Tabulated density plus the point mass at zero.

    Abscissae strictly increase and values are nonnegative; for grids that
    span the support, the trapezoid mass plus the atom recovers 1 within
    the grid's quadrature resolution.
    """

    points: tuple[tuple[float, float], ...]
    atom_at_zero: float

    def __post_init__(self):
        xs = [x for x, _ in self.points]
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise DomainError("grid abscissae must strictly increase")
        if any(f < 0 for _, f in self.points):
            raise DomainError("density values must be nonnegative")

    def quadrature_residual(self) -> float:
        xs = np.array([x for x, _ in self.points])
        fs = np.array([f for _, f in self.points])
        return abs(float(np.trapezoid(fs, xs)) + self.atom_at_zero - 1.0)


def density_grid(pop: PopulationSpec, n_points: int = 2000, pad: float = 0.05) -> DensityGrid:
    """Tabulate f0 on a uniform grid spanning the support (plus padding)."""
    from .edges import find_edges

    report = find_edges(pop)
    lo = report.intervals[0][0]
    hi = report.intervals[-1][1]
    margin = pad * (hi - lo)
    xs = np.linspace(lo - margin, hi + margin, n_points)
    rows = []
    for x in xs:
        if x == 0.0 and pop.rank <= pop.n_dim:
            x = np.nextafter(0.0, hi)
        rows.append((float(x), density_f0(pop, float(x), cross_check=False)))
    return DensityGrid(points=tuple(rows), atom_at_zero=atom_mass_at_zero(pop))


def integrate_density(pop: PopulationSpec, intervals, points_per_interval: int = 800) -> float:
    """Integral of f0 over the given support intervals.

    Uses a cosine-clustered midpoint rule: node density ~ u^2 near the
    endpoints absorbs both the square-root edge decay and the inverse
    square-root blowup at a hard edge.  Cross-checking is disabled for
    bulk quadrature; the dual-route contract is exercised separately.
    """
    total = 0.0
    for lo, hi in intervals:
        u = (np.arange(points_per_interval) + 0.5) / points_per_interval
        x = lo + (hi - lo) * 0.5 * (1.0 - np.cos(np.pi * u))
        w = (hi - lo) * 0.5 * np.pi * np.sin(np.pi * u) / points_per_interval
        f = np.array([density_f0(pop, xi, cross_check=False) for xi in x])
        total += float(np.sum(f * w))
    return total
