"""Monte Carlo harness: spectra of X'TX, coverage experiments, support
adherence, edge concentration, and local-law probes.

Replicates are independent and individually seeded through a splittable
counter-based generator, so results are bit-identical for a given
(seed, config) regardless of how the replicate loop is scheduled.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .edges import EdgeInfo, check_regularity, find_edges
from .errors import DomainError, IrregularEdge
from .manova import OneWayDesign, oneway_population
from .population import PopulationSpec
from .tw import f1_quantile
from .twtest import DEFAULT_TAU, window_delta

ENTRY_LAWS = ("gaussian", "rademacher")
COVERAGE_LEVELS = (0.90, 0.95, 0.99)
DESK_SCALE_MAX_DIM = 2000


@dataclass(frozen=True)
class SimConfig:
    """Simulation settings; `seed` fully determines every replicate."""

    reps: int
    seed: int = 0
    entry_law: str = "gaussian"
    parallel_width: int = 1
    max_dim: int = DESK_SCALE_MAX_DIM

    def __post_init__(self):
        if self.entry_law not in ENTRY_LAWS:
            raise DomainError(f"entry_law must be one of {ENTRY_LAWS}")
        if self.reps < 1 or self.parallel_width < 1:
            raise DomainError("reps and parallel_width must be positive")


@dataclass(frozen=True)
class CoverageResult:
    """Empirical CDF of the standardized statistic at fixed TW levels."""

    levels: tuple[float, ...]
    coverage: tuple[float, ...]
    std_errors: tuple[float, ...]
    reps: int

    def to_rows(self):
        return list(zip(self.levels, self.coverage, self.std_errors))


@dataclass(frozen=True)
class LocalLawProbe:
    """Per-replicate resolvent errors against the deterministic limit."""

    z: complex
    psi: float
    m_n_err: tuple[float, ...]
    entrywise_err: tuple[float, ...]

    @property
    def median_m_err(self) -> float:
        return float(np.median(self.m_n_err))

    @property
    def median_entrywise_err(self) -> float:
        return float(np.median(self.entrywise_err))


def _rep_rng(cfg: SimConfig, rep_index: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=cfg.seed, spawn_key=(rep_index,))
    return np.random.Generator(np.random.Philox(ss))


def _draw_x(rng, m, n, law):
    if law == "gaussian":
        x = rng.standard_normal((m, n))
    else:
        x = rng.integers(0, 2, size=(m, n)).astype(float) * 2.0 - 1.0
    return x / np.sqrt(n)


def _map_reps(cfg: SimConfig, fn):
    """Run fn(rep_index) for every replicate; order-invariant collection."""
    if cfg.parallel_width == 1:
        return [fn(i) for i in range(cfg.reps)]
    out = [None] * cfg.reps
    with ThreadPoolExecutor(max_workers=cfg.parallel_width) as pool:
        for i, val in zip(range(cfg.reps), pool.map(fn, range(cfg.reps))):
            out[i] = val
    return out


def sample_spectrum(pop: PopulationSpec, cfg: SimConfig, rep_index: int) -> np.ndarray:
    """All N eigenvalues of one replicate of X'TX, sorted ascending."""
    m, n = pop.total_mult, pop.n_dim
    if max(m, n) > cfg.max_dim:
        raise DomainError(
            f"dimension {max(m, n)} exceeds max_dim={cfg.max_dim}; "
            "raise SimConfig.max_dim to override"
        )
    tvals = pop.expand()
    x = _draw_x(_rep_rng(cfg, rep_index), m, n, cfg.entry_law)
    a = x.T @ (tvals[:, None] * x)
    return np.linalg.eigvalsh(0.5 * (a + a.T))


def table1_experiment(design: OneWayDesign, cfg: SimConfig) -> CoverageResult:
    """Coverage of the TW approximation for the standardized largest
    eigenvalue of the group-level estimator, simulated through the
    law-equivalent population route."""
    pop = oneway_population(design)
    report = find_edges(pop)
    edge = report.edges[0]
    scale = (edge.gamma * pop.n_dim) ** (2.0 / 3.0)
    cutoffs = np.array([f1_quantile(q) for q in COVERAGE_LEVELS])

    def one(rep):
        lam_max = sample_spectrum(pop, cfg, rep)[-1]
        return scale * (lam_max - edge.e_star)

    stats = np.array(_map_reps(cfg, one))
    cov = tuple(float(np.mean(stats <= c)) for c in cutoffs)
    ses = tuple(float(np.sqrt(q * (1 - q) / cfg.reps)) for q in COVERAGE_LEVELS)
    return CoverageResult(COVERAGE_LEVELS, cov, ses, cfg.reps)


def support_adherence(pop: PopulationSpec, cfg: SimConfig, delta: float) -> float:
    """Fraction of replicates with any eigenvalue farther than delta from
    the deterministic support (the atom at zero, when present, counts as
    part of the support)."""
    report = find_edges(pop)
    lows = np.array([iv[0] for iv in report.intervals])
    highs = np.array([iv[1] for iv in report.intervals])
    has_atom = report.atom_at_zero > 0

    def one(rep):
        eigs = sample_spectrum(pop, cfg, rep)
        inside = np.any(
            (eigs[:, None] >= lows[None, :] - delta)
            & (eigs[:, None] <= highs[None, :] + delta),
            axis=1,
        )
        if has_atom:
            inside |= np.abs(eigs) <= delta
        return bool(np.any(~inside))

    return float(np.mean(_map_reps(cfg, one)))


def edge_concentration(
    pop: PopulationSpec,
    edge: EdgeInfo,
    cfg: SimConfig,
    epsilon: float,
    tau: float = DEFAULT_TAU,
) -> float:
    """Fraction of replicates with an eigenvalue in the exclusion zone
    between N^{-2/3+eps} and the edge window, outward of the edge."""
    if not (edge.soft and check_regularity(pop, edge, tau)):
        raise IrregularEdge("edge concentration is only meaningful at a regular edge")
    report = find_edges(pop)
    delta = window_delta(report, edge)
    n = pop.n_dim
    inner = n ** (-2.0 / 3.0 + epsilon)
    if edge.side == "right":
        lo, hi = edge.e_star + inner, edge.e_star + delta
    else:
        lo, hi = edge.e_star - delta, edge.e_star - inner

    def one(rep):
        eigs = sample_spectrum(pop, cfg, rep)
        return bool(np.any((eigs >= lo) & (eigs <= hi)))

    return float(np.mean(_map_reps(cfg, one)))


def local_law_probe(
    pop: PopulationSpec,
    edge: EdgeInfo,
    cfg: SimConfig,
    eta: float,
    tau: float = DEFAULT_TAU,
) -> LocalLawProbe:
    """Resolvent errors at z = E* + i*eta against the deterministic limit.

    Entrywise errors are measured in the pole-free normalization
    [[G_N - m0, G_N X'], [X G_N, X G_N X' - m0 (Id + m0 T)^{-1}]],
    which is the (G - Pi)_{AB} / (t_A t_B) array extended to zero values.
    """
    from .spectral import solve_m0

    if not (edge.soft and check_regularity(pop, edge, tau)):
        raise IrregularEdge("local-law probe requires a regular edge")
    n = pop.n_dim
    z = complex(edge.e_star, eta)
    m0 = solve_m0(pop, z)
    tvals = pop.expand()
    mdim = tvals.size
    psi = float(np.sqrt(m0.imag / (n * eta)) + 1.0 / (n * eta))
    corner = m0 / (1.0 + m0 * tvals)  # m0 (Id + m0 T)^{-1}, diagonal

    def one(rep):
        x = _draw_x(_rep_rng(cfg, rep), mdim, n, cfg.entry_law)
        a = x.T @ (tvals[:, None] * x)
        a = 0.5 * (a + a.T)
        evals, evecs = np.linalg.eigh(a)
        inv = 1.0 / (evals - z)
        g_n = (evecs * inv) @ evecs.T
        m_n = complex(np.trace(g_n)) / n
        if not m_n.imag > 0:
            raise ArithmeticError(f"Im m_N = {m_n.imag} must be positive at {z}")
        xg = x @ g_n
        upper_left = g_n - m0 * np.eye(n)
        lower_right = xg @ x.T - np.diag(corner)
        err = max(
            np.max(np.abs(upper_left)),
            np.max(np.abs(xg)),
            np.max(np.abs(lower_right)),
        )
        return abs(m_n - m0), float(err)

    pairs = _map_reps(cfg, one)
    return LocalLawProbe(
        z=z,
        psi=psi,
        m_n_err=tuple(p[0] for p in pairs),
        entrywise_err=tuple(p[1] for p in pairs),
    )
