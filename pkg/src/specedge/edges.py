"""Edge enumeration, classification, scaling, and regularity.

All edges of the spectral law are located as local extrema of the
inverse transform z0, searched in the coordinate q = 1/m where
g(q) = z0(1/q) has poles exactly at the negated population values and
g' is convex between consecutive poles.  Convexity certifies that every
interior pole interval carries 0 or 2 extrema and each unbounded
interval exactly one, so no edge can be missed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import BracketFailure, DegeneratePopulation, NoSuchEdge
from .population import PopulationSpec
from .spectral import _z0_deriv, atom_mass_at_zero, isolated_zero_in_support

Q_XTOL = 1e-13
DERIV_CERT = 1e-8          # |z0'(m*)| certificate after back-transform
DEGENERATE_CURVATURE = 1e-8
HARD_Q_TOL = 1e-11         # |q| below this (times scale) is the m=infinity chart


@dataclass(frozen=True)
class EdgeInfo:
    """One edge of the spectral law.

    `m_star` is math.inf for a hard edge.  `gamma` is present exactly
    for soft edges with non-degenerate curvature; a merging (degenerate)
    edge carries gamma=None and margin 0.
    """

    e_star: float
    m_star: float
    gamma: float | None
    side: str                    # "left" | "right"
    soft: bool
    regularity_margin: float
    hard_m_label: str | None = None  # min/max label of the m=inf extremum

    @property
    def hard(self) -> bool:
        return not self.soft

    def to_dict(self) -> dict:
        return {
            "e_star": self.e_star,
            "m_star": "inf" if math.isinf(self.m_star) else self.m_star,
            "gamma": self.gamma,
            "side": self.side,
            "soft": self.soft,
            "margin": self.regularity_margin,
        }


@dataclass(frozen=True)
class SupportReport:
    """All edges and support intervals of one population's law."""

    intervals: tuple[tuple[float, float], ...]   # increasing, disjoint
    edges: tuple[EdgeInfo, ...]                  # sorted by E descending
    atom_at_zero: float
    isolated_zero_flag: bool

    @property
    def diameter(self) -> float:
        return self.intervals[-1][1] - self.intervals[0][0]

    def to_dict(self) -> dict:
        return {
            "edges": [e.to_dict() for e in self.edges],
            "intervals": [list(iv) for iv in self.intervals],
            "atom_at_zero": self.atom_at_zero,
            "isolated_zero_flag": self.isolated_zero_flag,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


# ---------------------------------------------------------------------------
# g(q) = z0(1/q) and derivatives (poles at -t for each nonzero value t)

def _g(vals, mults, n, q):
    q = np.asarray(q, dtype=float)
    terms = mults * (vals - vals**2 / (np.add.outer(q, vals)))
    return -q + np.sum(terms, axis=-1) / n


def _gp(vals, mults, n, q):
    q = np.asarray(q, dtype=float)
    return -1.0 + np.sum(mults * vals**2 / np.add.outer(q, vals) ** 2, axis=-1) / n


def _gpp(vals, mults, n, q):
    q = np.asarray(q, dtype=float)
    return -2.0 * np.sum(mults * vals**2 / np.add.outer(q, vals) ** 3, axis=-1) / n


def _expand_bracket(f, anchor, direction, span, grow=2.0, max_steps=200):
    """March away from `anchor` until f changes sign; return the bracket."""
    f_anchor = f(anchor)
    step = span
    prev = anchor
    for _ in range(max_steps):
        cand = anchor + direction * step
        f_cand = f(cand)
        if np.sign(f_cand) != np.sign(f_anchor):
            return (min(prev, cand), max(prev, cand))
        prev = cand
        step *= grow
    raise BracketFailure("sign change not found on an unbounded interval")


def _soft_extrema_q(vals, mults, n):
    """All extremum locations of g in q, certified per pole interval.

    Returns a list of q values where g'(q) = 0.  Raises BracketFailure
    when an interior interval's minimum of g' is too close to zero to
    certify 0 or 2 roots.
    """
    poles = np.sort(-vals)
    gp = lambda q: float(_gp(vals, mults, n, q))
    gpp = lambda q: float(_gpp(vals, mults, n, q))
    scale = max(1.0, np.max(np.abs(poles)))
    inset = 1e-12
    roots = []

    # Leftmost interval (-inf, poles[0]):  g' rises from -1 to +inf.
    p0 = poles[0]
    width = max(1.0, abs(p0))
    a, b = _expand_bracket(gp, p0 - inset * width, -1.0, width)
    roots.append(brentq(gp, a, b, xtol=Q_XTOL, rtol=8.9e-16))

    # Rightmost interval (poles[-1], +inf):  g' falls from +inf to -1.
    p1 = poles[-1]
    width = max(1.0, abs(p1))
    a, b = _expand_bracket(gp, p1 + inset * width, +1.0, width)
    roots.append(brentq(gp, a, b, xtol=Q_XTOL, rtol=8.9e-16))

    # Interior intervals: g' is convex with +inf at both ends; locate its
    # minimum via the monotone-increasing g'' and certify the root count.
    for lo, hi in zip(poles[:-1], poles[1:]):
        width = hi - lo
        a = lo + inset * width
        b = hi - inset * width
        qmin = brentq(gpp, a, b, xtol=Q_XTOL, rtol=8.9e-16)
        gmin = gp(qmin)
        cert = 1e-13 * max(1.0, scale)
        if gmin > cert:
            continue
        if gmin > -cert:
            raise BracketFailure(
                f"cannot certify 0 or 2 extrema on ({lo:g}, {hi:g}): "
                f"min g' = {gmin:.3e}"
            )
        roots.append(brentq(gp, a, qmin, xtol=Q_XTOL, rtol=8.9e-16))
        roots.append(brentq(gp, qmin, b, xtol=Q_XTOL, rtol=8.9e-16))
    return sorted(roots), scale


def _polish_q(vals, mults, n, q):
    """A few Newton steps on g' to push the root to machine precision."""
    for _ in range(4):
        d = float(_gpp(vals, mults, n, q))
        if d == 0:
            break
        step = float(_gp(vals, mults, n, q)) / d
        q_new = q - step
        if not np.isfinite(q_new):
            break
        q = q_new
        if abs(step) < 1e-17 * max(1.0, abs(q)):
            break
    return q


def regularity_margin(pop: PopulationSpec, m_star: float, gamma: float | None) -> float:
    """min(1/|m*|, 1/gamma, min_a |m* + 1/t_a|); 0 for hard/degenerate."""
    if math.isinf(m_star) or gamma is None:
        return 0.0
    vals, _ = pop.nonzero()
    pole_dist = float(np.min(np.abs(m_star + 1.0 / vals)))
    return min(1.0 / abs(m_star), 1.0 / gamma, pole_dist)


def find_edges(pop: PopulationSpec) -> SupportReport:
    """Enumerate, classify, and scale every edge of the spectral law."""
    vals, mults = pop.nonzero()
    if vals.size == 0:
        raise DegeneratePopulation("all diagonal values are zero")
    n = pop.n_dim
    r = pop.rank

    q_roots, scale = _soft_extrema_q(vals, mults, n)
    q_roots = [_polish_q(vals, mults, n, q) for q in q_roots]

    records = []  # (E, q, is_hard)
    for q in q_roots:
        if r == n and abs(q) <= HARD_Q_TOL * scale:
            # The zero of g' at the origin is the m=infinity chart: a hard
            # edge at E=0 (exists exactly when rank(T) = N).
            records.append((0.0, 0.0, True))
        else:
            records.append((float(_g(vals, mults, n, q)), q, False))
    if r == n and not any(h for _, _, h in records):
        raise BracketFailure("rank(T) = N but the hard-edge extremum at q=0 was not found")

    if len(records) % 2 != 0:
        raise BracketFailure(f"odd edge count {len(records)}; extremum search inconsistent")

    # q ascending must give E descending (the edge-ordering law).
    records.sort(key=lambda rec: rec[1])
    e_vals = [rec[0] for rec in records]
    if any(e_vals[i] <= e_vals[i + 1] for i in range(len(e_vals) - 1)):
        raise BracketFailure(f"edge ordering violated or duplicate edges: {e_vals}")

    # Pair intervals from the sorted-ascending edge list; sides follow.
    asc = records[::-1]
    intervals = []
    infos = []
    for pos, (e, q, hard) in enumerate(asc):
        geo_side = "left" if pos % 2 == 0 else "right"
        if hard:
            # m-space label from the curvature of g at the origin.
            curv = float(_gpp(vals, mults, n, 0.0))
            m_label = "right" if curv > 0 else "left"
            infos.append(EdgeInfo(0.0, math.inf, None, geo_side, False, 0.0, m_label))
        else:
            m_star = 1.0 / q
            d1 = float(_z0_deriv(vals, mults, n, m_star, 1))
            if abs(d1) > DERIV_CERT:
                raise BracketFailure(f"z0'(m*) = {d1:.3e} fails the vanishing certificate")
            d2 = float(_z0_deriv(vals, mults, n, m_star, 2))
            expected = "right" if d2 > 0 else "left"
            if abs(d2) >= DEGENERATE_CURVATURE:
                gamma = math.sqrt(2.0 / abs(d2))
                if expected != geo_side:
                    raise BracketFailure(
                        f"classification mismatch at E={e:g}: curvature says "
                        f"{expected}, geometry says {geo_side}"
                    )
            else:
                gamma = None  # merging edges; report, never NaN
            margin = regularity_margin(pop, m_star, gamma)
            infos.append(EdgeInfo(float(e), m_star, gamma, geo_side, True, margin))
    for i in range(0, len(asc), 2):
        intervals.append((asc[i][0], asc[i + 1][0]))

    return SupportReport(
        intervals=tuple(intervals),
        edges=tuple(sorted(infos, key=lambda e: -e.e_star)),
        atom_at_zero=atom_mass_at_zero(pop),
        isolated_zero_flag=isolated_zero_in_support(pop),
    )


def edge_for_m_sign(report: SupportReport, want: str) -> EdgeInfo:
    """Select an edge: 'rightmost', 'leftmost', or the test-procedure
    selector 'm_closest_to_zero_negative' (soft edge, m* < 0, |m*| minimal).
    """
    if not report.edges:
        raise NoSuchEdge("report has no edges")
    if want == "rightmost":
        return report.edges[0]
    if want == "leftmost":
        return report.edges[-1]
    if want == "m_closest_to_zero_negative":
        cands = [e for e in report.edges if e.soft and e.m_star < 0]
        if not cands:
            raise NoSuchEdge("no soft edge with negative m-value exists")
        return min(cands, key=lambda e: abs(e.m_star))
    raise NoSuchEdge(f"unknown selector {want!r}")


def check_regularity(pop: PopulationSpec, edge: EdgeInfo, tau: float) -> bool:
    """Regularity gate: |m*| < 1/tau, gamma < 1/tau, poles tau-separated."""
    if not 0 < tau < 1:
        raise ValueError(f"tau must lie in (0,1), got {tau}")
    if edge.hard or edge.gamma is None:
        return False
    return tau < regularity_margin(pop, edge.m_star, edge.gamma)


def balanced_sufficiency(pop: PopulationSpec, c: float) -> bool:
    """Sufficient condition for a regular rightmost edge: the largest
    value is at least c with multiplicity at least c*M."""
    if c <= 0:
        raise ValueError("c must be positive")
    t_max, mult_max = max(pop.entries, key=lambda e: e[0])
    ok = t_max >= c and mult_max >= c * pop.total_mult
    if ok:
        # Cross-check: the guaranteed edge must have a positive margin.
        edge = find_edges(pop).edges[0]
        if not (edge.soft and edge.regularity_margin > 0):
            raise BracketFailure(
                "balanced sufficiency held but the rightmost edge has no margin"
            )
    return ok
