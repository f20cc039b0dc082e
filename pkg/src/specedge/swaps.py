"""Lindeberg interpolating sequences for a tracked regular right edge.

Starting from any population with a regular right edge (rescaled so the
edge scale is 1), single-entry swaps move the diagonal values to a
terminal two-valued population {0, t} while the tracked edge drifts by
O(1/N) per step.  Two branches, chosen by the sign of the edge's
m-value:

  m* < 0: reflect every pole lying right of m* about m*, then raise all
          positive entries to the maximum.
  m* > 0: seed a small constant fraction of entries at the pole-adjacent
          negative value t, zero the entries above t, then those below.

Every stored state is rescaled back to unit edge scale, so consecutive
states satisfy the swappability bounds and the sum-rule identities.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .edges import EdgeInfo
from .errors import NotSwappable, RegularityLost, SwapRejected
from .population import PopulationSpec, from_values
from .spectral import _z0, _z0_deriv

DEFAULT_PHI = 10.0
DEFAULT_TAU_FLOOR = 0.01
DEFAULT_C0 = 0.05
UNIT_GAMMA_TOL = 1e-8

PHASES = ("reflect", "raise_to_max", "seed_fraction", "zero_above", "zero_below", "done")


@dataclass(eq=False)
class SwapState:
    """One element of the interpolating sequence, at unit edge scale."""

    values: np.ndarray          # full length-M diagonal, aligned across states
    n_dim: int
    edge: EdgeInfo
    step: int
    swapped_index: int | None
    phase: str
    gamma_drift: float          # |gamma - 1| measured before the rescale

    @property
    def pop(self) -> PopulationSpec:
        return from_values(self.values, self.n_dim)

    def digest(self) -> str:
        return hashlib.sha256(self.values.tobytes()).hexdigest()[:16]

    def to_record(self) -> dict:
        return {
            "step": self.step,
            "phase": self.phase,
            "swapped_index": self.swapped_index,
            "entries_digest": self.digest(),
            "e_star": self.edge.e_star,
            "m_star": self.edge.m_star,
            "gamma": self.edge.gamma,
            "margin": self.edge.regularity_margin,
            "gamma_drift": self.gamma_drift,
        }


@dataclass(frozen=True)
class SwapDiagnostics:
    """Per-pair swappability measurements and sum-rule residuals."""

    s_alpha: np.ndarray
    s_check_alpha: np.ndarray
    p_alpha: np.ndarray
    q_alpha: np.ndarray
    r_alpha: np.ndarray
    a4: float
    l1_t_diff: float
    m_diff: float
    e_diff: float
    gamma_diff: float
    sum_rule_1_residual: float
    sum_rule_2_residual: float
    edge_identity_residual: float


# ---------------------------------------------------------------------------
# array-level edge helpers (mult-1 vectors)

def _vec_args(values):
    return values, np.ones_like(values)


def _z0p(values, n, m):
    vals, mults = _vec_args(values)
    return float(_z0_deriv(vals, mults, n, m, 1))


def _z0pp(values, n, m):
    vals, mults = _vec_args(values)
    return float(_z0_deriv(vals, mults, n, m, 2))


def _z0val(values, n, m):
    vals, mults = _vec_args(values)
    return float(_z0(vals, mults, n, m))


def _polish_extremum(values, n, m, iters=40):
    """Newton on z0' to pin a local extremum to machine precision."""
    for _ in range(iters):
        d2 = _z0pp(values, n, m)
        if d2 == 0:
            break
        step = _z0p(values, n, m) / d2
        m_new = m - step
        if not np.isfinite(m_new):
            break
        m = m_new
        if abs(step) <= 1e-16 * max(1.0, abs(m)):
            break
    return m


def _margin(values, n, m, gamma):
    pop_vals = values[values != 0.0]
    if pop_vals.size == 0:
        return 0.0
    pole_dist = float(np.min(np.abs(m + 1.0 / pop_vals)))
    return min(1.0 / abs(m), 1.0 / gamma, pole_dist)


def _edge_info(values, n, m) -> EdgeInfo:
    d2 = _z0pp(values, n, m)
    if d2 == 0:
        raise SwapRejected(f"degenerate extremum at m={m:g}: vanishing curvature")
    gamma = math.sqrt(2.0 / abs(d2))
    e = _z0val(values, n, m)
    return EdgeInfo(
        e_star=e, m_star=m, gamma=gamma,
        side="right" if d2 > 0 else "left", soft=True,
        regularity_margin=_margin(values, n, m, gamma),
    )


def _rescale_to_unit(values, n, m):
    """Scale the population so the tracked edge has unit scale.

    Returns (scaled values, polished m, EdgeInfo, |gamma-1| before scaling).
    """
    m = _polish_extremum(values, n, m)
    info = _edge_info(values, n, m)
    drift = abs(info.gamma - 1.0)
    c = info.gamma ** (2.0 / 3.0)
    scaled = values * c
    m_scaled = _polish_extremum(scaled, n, m / c)
    info_scaled = _edge_info(scaled, n, m_scaled)
    if abs(info_scaled.gamma - 1.0) > UNIT_GAMMA_TOL:
        raise SwapRejected(
            f"rescale failed to reach unit edge scale: gamma = {info_scaled.gamma!r}"
        )
    return scaled, m_scaled, info_scaled, drift


# ---------------------------------------------------------------------------
# public operations

def reflected_right_edge(pop: PopulationSpec, edge: EdgeInfo):
    """Map a soft left edge to the right edge of the reflected population.

    Swap sequences track right edges only; a left edge at E with m-value m
    corresponds, after T -> -T, to a right edge at -E with m-value -m.
    """
    if edge.side != "left" or not edge.soft:
        raise SwapRejected("reflection helper expects a soft left edge")
    refl = pop.reflected()
    info = _edge_info(refl.expand(), pop.n_dim, -edge.m_star)
    if info.side != "right":
        raise SwapRejected("reflected extremum is not a local minimum")
    return refl, info


def rescale_unit_gamma(pop: PopulationSpec, edge: EdgeInfo):
    """Rescale so the given soft edge has scale 1; returns (pop', edge')."""
    if not edge.soft or edge.gamma is None:
        raise SwapRejected("only soft non-degenerate edges can be rescaled")
    values = pop.expand()
    scaled, m_scaled, info, _ = _rescale_to_unit(values, pop.n_dim, edge.m_star)
    return from_values(scaled, pop.n_dim), info


def track_edge_after_swap(
    pop: PopulationSpec,
    edge: EdgeInfo,
    entry_index: int,
    new_t: float,
    phi: float = DEFAULT_PHI,
    tau: float = DEFAULT_TAU_FLOOR,
) -> EdgeInfo:
    """Edge of the population after one entry of group `entry_index`
    moves to `new_t`, located by the sign-rule bracket near m*."""
    values = pop.expand()
    if not 0 <= entry_index < len(pop.entries):
        raise SwapRejected(f"entry_index {entry_index} out of range")
    group_value = pop.entries[entry_index][0]
    idx = int(np.nonzero(values == group_value)[0][0])
    new_values = values.copy()
    new_values[idx] = new_t
    m_new = _track(values, new_values, pop.n_dim, edge.m_star, phi, tau)
    return _edge_info(new_values, pop.n_dim, m_new)


def _track(old_values, new_values, n, m_star, phi, tau):
    """Locate the swapped edge's m-value next to m_star.

    Follows the sign rule: the new extremum lies on the side of m_star
    opposite to the sign of the new derivative there, within phi/N, with
    no pole of either transform in between.
    """
    new_t = float(new_values[np.argmax(old_values != new_values)]) if np.any(
        old_values != new_values
    ) else None
    if new_t is not None:
        if abs(new_t) > np.max(np.abs(old_values)) * (1 + 1e-12):
            raise SwapRejected(f"replacement value {new_t:g} exceeds the operator norm")
        if new_t != 0.0 and abs(m_star + 1.0 / new_t) <= tau:
            raise SwapRejected(
                f"replacement pole {-1.0 / new_t:g} is within tau={tau:g} of m*"
            )

    d1 = _z0p(new_values, n, m_star)
    budget = phi / n
    if d1 == 0.0:
        m_new = m_star
    else:
        direction = -math.copysign(1.0, d1)
        width = budget / 8.0
        b = None
        while width <= 4.0 * budget:
            cand = m_star + direction * width
            if math.copysign(1.0, _z0p(new_values, n, cand)) != math.copysign(1.0, d1):
                b = cand
                break
            width *= 2.0
        if b is None:
            raise SwapRejected(
                f"sign-rule bracket failed within {4 * budget:g} of m* = {m_star:g}"
            )
        lo, hi = min(m_star, b), max(m_star, b)
        m_new = brentq(lambda m: _z0p(new_values, n, m), lo, hi, xtol=1e-15, rtol=8.9e-16)
    m_new = _polish_extremum(new_values, n, m_new)

    if abs(m_new - m_star) > budget:
        raise SwapRejected(
            f"tracked edge moved {abs(m_new - m_star):.3e} > phi/N = {budget:.3e}"
        )
    lo, hi = min(m_star, m_new), max(m_star, m_new)
    for vals in (old_values, new_values):
        nz = vals[vals != 0.0]
        poles = -1.0 / nz
        if np.any((poles >= lo) & (poles <= hi)):
            raise SwapRejected("a pole crossed the tracking interval")
    if _z0pp(new_values, n, m_new) <= 0:
        raise SwapRejected("tracked extremum is not a local minimum after the swap")
    return m_new


def build_swap_sequence(
    pop: PopulationSpec,
    edge: EdgeInfo,
    c0: float = DEFAULT_C0,
    phi: float = DEFAULT_PHI,
    tau_floor: float = DEFAULT_TAU_FLOOR,
) -> list[SwapState]:
    """Construct the full interpolating sequence for a regular right edge.

    The seeding fraction c0 (positive-m branch only) is halved and the
    construction retried whenever a tracked edge loses regularity, down
    to a single entry.
    """
    if not edge.soft or edge.gamma is None:
        raise SwapRejected("swap sequences require a soft edge")
    if edge.side != "right":
        raise SwapRejected("swap sequences track right edges; reflect the population first")
    if edge.m_star < 0:
        return _build(pop, edge, c0, phi, tau_floor)
    m_total = pop.total_mult
    c0_try = c0
    while True:
        try:
            return _build(pop, edge, c0_try, phi, tau_floor)
        except RegularityLost:
            if c0_try <= 1.0 / m_total:
                raise
            c0_try = max(c0_try / 2.0, 1.0 / m_total)


def _build(pop, edge, c0, phi, tau_floor):
    n = pop.n_dim
    values, m, info, drift = _rescale_to_unit(pop.expand(), n, edge.m_star)
    if info.side != "right":
        raise SwapRejected("the tracked extremum is not a local minimum")
    if info.regularity_margin < tau_floor:
        raise RegularityLost(
            f"initial margin {info.regularity_margin:g} below the floor {tau_floor:g}"
        )
    states = [SwapState(values, n, info, 0, None, "done", drift)]

    def apply_swap(idx, new_t, phase):
        nonlocal values, m
        state = states[-1]
        new_values = values.copy()
        new_values[idx] = new_t
        m_tracked = _track(values, new_values, n, m, phi, tau_floor)
        scaled, m_scaled, info, drift = _rescale_to_unit(new_values, n, m_tracked)
        if info.regularity_margin < tau_floor:
            raise RegularityLost(
                f"margin {info.regularity_margin:g} fell below {tau_floor:g} "
                f"at step {state.step + 1} ({phase})"
            )
        values, m = scaled, m_scaled
        states.append(SwapState(values, n, info, state.step + 1, idx, phase, drift))

    if m < 0:
        # Reflect every pole right of m* about m*, rightmost pole first.
        while True:
            nz = values != 0.0
            poles = np.where(nz, -1.0 / np.where(nz, values, 1.0), -np.inf)
            cands = np.nonzero(nz & (poles > m))[0]
            if cands.size == 0:
                break
            idx = int(cands[np.argmax(poles[cands])])
            apply_swap(idx, -1.0 / (2.0 * m + 1.0 / values[idx]), "reflect")
        # Raise every positive entry to the running maximum, smallest first.
        while True:
            t_max = float(np.max(values))
            cands = np.nonzero((values > 0.0) & (values < t_max))[0]
            if cands.size == 0:
                break
            idx = int(cands[np.argmin(values[cands])])
            apply_swap(idx, t_max, "raise_to_max")
    else:
        # Identify the pole-adjacent negative value: -1/t in (0, m*), closest.
        nz = values != 0.0
        poles = np.where(nz, -1.0 / np.where(nz, values, 1.0), np.nan)
        in_gap = nz & (poles > 0.0) & (poles < m)
        if not np.any(in_gap):
            raise SwapRejected("no pole between 0 and m*; cannot run the positive-m branch")
        seed_rep = int(np.nonzero(in_gap)[0][np.argmax(poles[in_gap])])

        k1 = int(np.floor(c0 * values.size))
        seeded = 0
        for idx in range(values.size):
            if seeded >= k1:
                break
            if values[idx] == values[seed_rep] or idx == seed_rep:
                continue
            apply_swap(idx, values[seed_rep], "seed_fraction")
            seeded += 1
        while True:
            t_seed = values[seed_rep]
            cands = np.nonzero((values != 0.0) & (values > t_seed))[0]
            if cands.size == 0:
                break
            idx = int(cands[np.argmax(values[cands])])
            apply_swap(idx, 0.0, "zero_above")
        while True:
            t_seed = values[seed_rep]
            cands = np.nonzero(values < t_seed)[0]
            if cands.size == 0:
                break
            idx = int(cands[np.argmin(values[cands])])
            apply_swap(idx, 0.0, "zero_below")

    if len(states) > 1:
        states[0].phase = states[1].phase
    states[-1] = SwapState(
        states[-1].values, n, states[-1].edge, states[-1].step,
        states[-1].swapped_index, "done", states[-1].gamma_drift,
    )
    distinct = np.unique(states[-1].values)
    if distinct.size > 2 or (distinct.size == 2 and 0.0 not in distinct):
        raise SwapRejected(f"terminal population is not two-valued: {distinct}")
    if len(states) - 1 > 2 * values.size:
        raise SwapRejected(f"sequence length {len(states) - 1} exceeds 2M")
    return states


def verify_swappable(a: SwapState, b: SwapState, phi: float = DEFAULT_PHI) -> SwapDiagnostics:
    """Check the swappability bounds for a consecutive pair and collect
    the per-entry diagnostics that feed the sum rules."""
    if a.values.shape != b.values.shape or a.n_dim != b.n_dim:
        raise NotSwappable("states are not aligned")
    n = a.n_dim
    t, tc = a.values, b.values
    m, mc = a.edge.m_star, b.edge.m_star
    l1 = float(np.sum(np.abs(t - tc)))
    m_diff = abs(m - mc)
    if l1 >= phi:
        raise NotSwappable(f"l1 entry difference {l1:g} >= phi = {phi:g}")
    if m_diff >= phi / n:
        raise NotSwappable(f"m-value difference {m_diff:g} >= phi/N = {phi / n:g}")

    s = 1.0 / (1.0 + t * m)
    sc = 1.0 / (1.0 + tc * mc)
    p = s * sc * (t * s + tc * sc)
    q = s * sc * ((t * s) ** 2 + t * s * tc * sc + (tc * sc) ** 2)
    r = t * s * tc * sc * (mc - m) * (t * s + tc * sc)
    a4 = float(np.sum((t * s) ** 4)) / n

    dm = m - mc
    dt = t - tc
    r1 = abs(2.0 * n * dm - float(np.sum(dt * p)))
    r2 = abs(3.0 * n * dm * (a4 - m ** -4) - float(np.sum(dt * q)))
    e_diff = a.edge.e_star - b.edge.e_star
    r_edge = abs(e_diff - float(np.sum(dt * s * sc)) / n)
    return SwapDiagnostics(
        s_alpha=s, s_check_alpha=sc, p_alpha=p, q_alpha=q, r_alpha=r, a4=a4,
        l1_t_diff=l1, m_diff=m_diff, e_diff=abs(e_diff),
        gamma_diff=abs(a.edge.gamma - b.edge.gamma),
        sum_rule_1_residual=r1, sum_rule_2_residual=r2,
        edge_identity_residual=r_edge,
    )


def sum_rule_residuals(a: SwapState, b: SwapState):
    """(r1, r2, r_edge, r_gamma) for a consecutive unit-scale pair."""
    diag = verify_swappable(a, b, phi=np.inf)
    return (
        diag.sum_rule_1_residual,
        diag.sum_rule_2_residual,
        diag.edge_identity_residual,
        diag.gamma_diff,
    )


def export_sequence(states: list[SwapState]) -> str:
    """Line-delimited records, one per state."""
    return "\n".join(json.dumps(s.to_record()) for s in states) + "\n"
