"""Domain types shared by the solver, metrics and I/O layers.

Every type validates itself on construction and stores read-only numpy
arrays, so instances can be handed to worker threads without copying.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import (
    AllZero,
    BadComposition,
    GridMismatch,
    NegativeIntensity,
    PhaseMismatch,
)

# Labels read from files are lossy (hand-typed refinement output), internal
# arithmetic is not.
INGEST_SUM_TOL = 1e-6
SIMPLEX_SUM_TOL = 1e-9


def _frozen(values, ndim: int, name: str) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim != ndim:
        raise ValueError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class AngleGrid:
    """Ordered 2-theta positions (degrees) shared by a set of spectra."""

    angles: np.ndarray

    def __post_init__(self):
        angles = _frozen(self.angles, 1, "angles")
        if angles.size < 1:
            raise ValueError("angle grid needs at least one point")
        if not np.all(np.isfinite(angles)):
            raise ValueError("angle grid contains non-finite values")
        if np.any(np.diff(angles) <= 0):
            raise ValueError("angles must be strictly increasing")
        object.__setattr__(self, "angles", angles)

    @classmethod
    def linspace(cls, start: float, stop: float, points: int) -> "AngleGrid":
        return cls(np.linspace(start, stop, points))

    @property
    def K(self) -> int:
        return self.angles.size

    def __len__(self):
        return self.angles.size

    def matches(self, other: "AngleGrid") -> bool:
        """Exact equality of every angle; no interpolation tolerance."""
        return self is other or np.array_equal(self.angles, other.angles)


@dataclass(frozen=True, eq=False)
class Spectrum:
    intensities: np.ndarray
    grid: AngleGrid

    def __post_init__(self):
        y = _frozen(self.intensities, 1, "intensities")
        if y.size != self.grid.K:
            raise GridMismatch(f"spectrum has {y.size} points, grid has {self.grid.K}")
        if not np.all(np.isfinite(y)):
            raise NegativeIntensity("spectrum contains non-finite intensities")
        if np.any(y < 0):
            raise NegativeIntensity(f"negative intensity {y.min()!r} at index {int(np.argmin(y))}")
        if not np.any(y > 0):
            raise AllZero("spectrum is identically zero")
        object.__setattr__(self, "intensities", y)

    def scaled(self, factor: float) -> "Spectrum":
        return Spectrum(self.intensities * factor, self.grid)


@dataclass(frozen=True, eq=False)
class Composition:
    """Phase fractions on the probability simplex."""

    fractions: np.ndarray
    phase_names: tuple[str, ...]

    def __post_init__(self):
        a = _frozen(self.fractions, 1, "fractions")
        names = tuple(self.phase_names)
        if len(names) != a.size:
            raise PhaseMismatch(f"{a.size} fractions for {len(names)} phase names")
        if not np.all(np.isfinite(a)) or np.any(a < 0):
            raise BadComposition(f"fractions must be finite and non-negative: {a.tolist()}")
        if abs(a.sum() - 1.0) > SIMPLEX_SUM_TOL:
            raise BadComposition(f"fractions sum to {a.sum()!r}, not 1")
        object.__setattr__(self, "fractions", a)
        object.__setattr__(self, "phase_names", names)

    @property
    def M(self) -> int:
        return self.fractions.size

    def __getitem__(self, name: str) -> float:
        return float(self.fractions[self.phase_names.index(name)])

    def dominant(self) -> int:
        # np.argmax returns the first maximum, i.e. the lowest index on ties
        return int(np.argmax(self.fractions))


def _default_names(m: int) -> tuple[str, ...]:
    return tuple(f"phase_{j + 1}" for j in range(m))


def normalize_composition(raw: Sequence[float], phase_names: Sequence[str] | None = None) -> Composition:
    """Scale non-negative weights to sum to one.

    Raises AllZero when every weight is zero, since no direction survives.
    """
    w = np.asarray(raw, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise BadComposition("weights must be a non-empty vector")
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        raise BadComposition(f"weights must be finite and non-negative: {w.tolist()}")
    total = w.sum()
    if total <= 0:
        raise AllZero("cannot normalize an all-zero weight vector")
    names = _default_names(w.size) if phase_names is None else tuple(phase_names)
    return Composition(w / total, names)


@dataclass(frozen=True, eq=False)
class PhaseLibrary:
    """Estimated single-phase patterns, one row per phase."""

    patterns: np.ndarray
    phase_names: tuple[str, ...]
    grid: AngleGrid

    def __post_init__(self):
        x = _frozen(self.patterns, 2, "patterns")
        names = tuple(self.phase_names)
        if x.shape[0] != len(names):
            raise PhaseMismatch(f"{x.shape[0]} patterns for {len(names)} phase names")
        if len(set(names)) != len(names):
            raise PhaseMismatch(f"duplicate phase names: {names}")
        if x.shape[1] != self.grid.K:
            raise GridMismatch(f"patterns have {x.shape[1]} points, grid has {self.grid.K}")
        if not np.all(np.isfinite(x)) or np.any(x < 0):
            raise NegativeIntensity("library patterns must be finite and non-negative")
        object.__setattr__(self, "patterns", x)
        object.__setattr__(self, "phase_names", names)

    @property
    def M(self) -> int:
        return self.patterns.shape[0]

    @property
    def K(self) -> int:
        return self.patterns.shape[1]

    def pattern(self, name: str) -> np.ndarray:
        return self.patterns[self.phase_names.index(name)]


@dataclass(frozen=True, eq=False)
class Dataset:
    """Labeled spectra on one grid, over one ordered set of phases."""

    samples: tuple[tuple[Spectrum, Composition], ...]
    grid: AngleGrid
    phase_names: tuple[str, ...]
    sample_ids: tuple[str, ...] = field(default=())

    def __post_init__(self):
        samples = tuple((s, c) for s, c in self.samples)
        names = tuple(self.phase_names)
        if not samples:
            raise ValueError("a dataset needs at least one sample")
        if len(set(names)) != len(names):
            raise PhaseMismatch(f"duplicate phase names: {names}")
        ids = tuple(self.sample_ids) or tuple(f"s{k:04d}" for k in range(len(samples)))
        if len(ids) != len(samples):
            raise ValueError(f"{len(ids)} sample ids for {len(samples)} samples")
        if len(set(ids)) != len(ids):
            raise ValueError("sample ids must be unique")
        for sid, (spec, comp) in zip(ids, samples):
            if not spec.grid.matches(self.grid):
                raise GridMismatch(f"sample {sid} is not on the dataset grid")
            if comp.phase_names != names:
                raise PhaseMismatch(f"sample {sid} has phases {comp.phase_names}, expected {names}")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "phase_names", names)
        object.__setattr__(self, "sample_ids", ids)

    @property
    def N(self) -> int:
        return len(self.samples)

    @property
    def M(self) -> int:
        return len(self.phase_names)

    @property
    def K(self) -> int:
        return self.grid.K

    @cached_property
    def intensities(self) -> np.ndarray:
        """N x K matrix of observed spectra."""
        y = np.stack([s.intensities for s, _ in self.samples])
        y.flags.writeable = False
        return y

    @cached_property
    def fractions(self) -> np.ndarray:
        """N x M matrix of labeled compositions."""
        a = np.stack([c.fractions for _, c in self.samples])
        a.flags.writeable = False
        return a

    @property
    def compositions(self) -> list[Composition]:
        return [c for _, c in self.samples]

    @property
    def spectra(self) -> list[Spectrum]:
        return [s for s, _ in self.samples]

    def subset(self, indices: Sequence[int]) -> "Dataset":
        idx = list(indices)
        return Dataset(
            tuple(self.samples[k] for k in idx),
            self.grid,
            self.phase_names,
            tuple(self.sample_ids[k] for k in idx),
        )

    def without(self, k: int) -> "Dataset":
        return self.subset([i for i in range(self.N) if i != k])


def validate_dataset(samples, grid: AngleGrid, phase_names: Sequence[str], sample_ids=None) -> Dataset:
    """Build a Dataset from raw ``(intensities, fractions)`` pairs.

    Label rows summing to within 1e-6 of one are renormalized; anything
    further off is rejected with BadComposition. Already-constructed
    Spectrum/Composition objects are accepted and re-checked.
    """
    names = tuple(phase_names)
    ids = list(sample_ids) if sample_ids is not None else [f"s{k:04d}" for k in range(len(samples))]
    built = []
    for sid, (raw_y, raw_a) in zip(ids, samples):
        y = raw_y.intensities if isinstance(raw_y, Spectrum) else raw_y
        if isinstance(raw_y, Spectrum) and not raw_y.grid.matches(grid):
            raise GridMismatch(f"sample {sid} is on a different angle grid")
        y = np.asarray(y, dtype=float)
        if y.ndim != 1 or y.size != grid.K:
            raise GridMismatch(f"sample {sid} has {y.size} intensities, grid has {grid.K} angles")
        if np.any(y < 0):
            raise NegativeIntensity(f"sample {sid} has negative intensity {y.min()!r}")
        spectrum = Spectrum(y, grid)

        a = raw_a.fractions if isinstance(raw_a, Composition) else raw_a
        a = np.asarray(a, dtype=float)
        if a.ndim != 1 or a.size != len(names):
            raise BadComposition(f"sample {sid} has {a.size} fractions for {len(names)} phases")
        if not np.all(np.isfinite(a)) or np.any(a < 0):
            raise BadComposition(f"sample {sid} has a negative or non-finite fraction: {a.tolist()}")
        if abs(a.sum() - 1.0) > INGEST_SUM_TOL:
            raise BadComposition(f"sample {sid} fractions sum to {a.sum()!r}")
        built.append((spectrum, normalize_composition(a, names)))
    if len(built) != len(ids):
        raise ValueError(f"{len(ids)} sample ids for {len(samples)} samples")
    return Dataset(tuple(built), grid, names, tuple(ids))
