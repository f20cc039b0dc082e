"""Population specifications for the model X'TX.

A population is the diagonal matrix T, stored as (value, multiplicity)
pairs, together with the sample dimension N.  Everything downstream
(spectral law, edges, tests, simulations) is a deterministic function of
this object.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import PopulationError

DEFAULT_RATIO_BAND = (1.0 / 20.0, 20.0)
DEFAULT_VALUE_BOUND = 1e3


@dataclass(frozen=True)
class PopulationSpec:
    """Diagonal population T as merged (t, multiplicity) pairs, plus N.

    Entries are canonicalized on construction: equal values merged,
    sorted ascending, multiplicities positive.  M/N must stay inside
    `ratio_band` and every |t| below `value_bound`.
    """

    entries: tuple[tuple[float, int], ...]
    n_dim: int
    ratio_band: tuple[float, float] = DEFAULT_RATIO_BAND
    value_bound: float = DEFAULT_VALUE_BOUND

    def __post_init__(self):
        if not isinstance(self.n_dim, (int, np.integer)) or self.n_dim < 1:
            raise PopulationError(f"n_dim must be a positive integer, got {self.n_dim!r}")
        merged: dict[float, int] = {}
        for item in self.entries:
            try:
                t, mult = item
            except (TypeError, ValueError):
                raise PopulationError(f"entry {item!r} is not a (value, multiplicity) pair")
            t = float(t)
            if not np.isfinite(t):
                raise PopulationError(f"non-finite diagonal value {t!r}")
            if abs(t) > self.value_bound:
                raise PopulationError(
                    f"|t|={abs(t):g} exceeds the configured bound {self.value_bound:g}"
                )
            if not isinstance(mult, (int, np.integer)) or mult < 1:
                raise PopulationError(f"multiplicity {mult!r} is not a positive integer")
            merged[t] = merged.get(t, 0) + int(mult)
        if not merged:
            raise PopulationError("population has no entries")
        canon = tuple(sorted(merged.items()))
        object.__setattr__(self, "entries", canon)
        m = sum(k for _, k in canon)
        lo, hi = self.ratio_band
        if not lo <= m / self.n_dim <= hi:
            raise PopulationError(
                f"M/N = {m}/{self.n_dim} outside the configured band [{lo:g}, {hi:g}]"
            )

    # -- basic descriptors -------------------------------------------------

    @property
    def total_mult(self) -> int:
        """M, the dimension of T."""
        return sum(k for _, k in self.entries)

    @property
    def rank(self) -> int:
        """rank(T) = M minus the multiplicity of the zero value."""
        return sum(k for t, k in self.entries if t != 0.0)

    @property
    def norm(self) -> float:
        """Operator norm of T."""
        return max(abs(t) for t, _ in self.entries)

    def values(self) -> np.ndarray:
        return np.array([t for t, _ in self.entries])

    def mults(self) -> np.ndarray:
        return np.array([k for _, k in self.entries], dtype=float)

    def nonzero(self) -> tuple[np.ndarray, np.ndarray]:
        """Distinct nonzero values and their multiplicities."""
        pairs = [(t, k) for t, k in self.entries if t != 0.0]
        if not pairs:
            return np.array([]), np.array([])
        vals, mults = zip(*pairs)
        return np.array(vals), np.array(mults, dtype=float)

    def expand(self) -> np.ndarray:
        """Length-M vector of diagonal values in canonical order."""
        return np.repeat(self.values(), self.mults().astype(int))

    def poles(self) -> np.ndarray:
        """Poles of the inverse-transform map: {0} plus -1/t for t != 0."""
        nz, _ = self.nonzero()
        return np.sort(np.concatenate([[0.0], -1.0 / nz])) if nz.size else np.array([0.0])

    # -- derived populations -----------------------------------------------

    def reflected(self) -> "PopulationSpec":
        """The population of -T."""
        return PopulationSpec(
            tuple((-t, k) for t, k in self.entries),
            self.n_dim,
            self.ratio_band,
            self.value_bound,
        )

    def scaled(self, c: float) -> "PopulationSpec":
        """The population of c*T for c > 0."""
        if c <= 0:
            raise PopulationError(f"scale factor must be positive, got {c!r}")
        return PopulationSpec(
            tuple((c * t, k) for t, k in self.entries),
            self.n_dim,
            self.ratio_band,
            self.value_bound,
        )

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "n_dim": self.n_dim,
            "entries": [{"t": t, "mult": k} for t, k in self.entries],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, obj: dict, **kwargs) -> "PopulationSpec":
        try:
            n_dim = int(obj["n_dim"])
            entries = tuple((float(e["t"]), int(e["mult"])) for e in obj["entries"])
        except (KeyError, TypeError, ValueError) as exc:
            raise PopulationError(f"malformed population document: {exc}") from exc
        return cls(entries, n_dim, **kwargs)

    @classmethod
    def from_json(cls, text: str, **kwargs) -> "PopulationSpec":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise PopulationError(f"population file is not valid JSON: {exc}") from exc
        return cls.from_dict(obj, **kwargs)


def from_values(values, n_dim: int, **kwargs) -> PopulationSpec:
    """Build a spec from a raw vector of diagonal values (mult 1 each)."""
    vals, counts = np.unique(np.asarray(values, dtype=float), return_counts=True)
    return PopulationSpec(tuple(zip(vals.tolist(), counts.tolist())), n_dim, **kwargs)
