"""Synthetic powder patterns, seeded mixtures, and a brute-force simplex oracle.

Patterns are sums of pseudo-Voigt peaks on a flat background. They are not
physical simulations; they only need realistic shapes (narrow, overlapping
peaks) to exercise the solver.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace
from typing import Iterator, Sequence

import numpy as np

from .core import AngleGrid, Composition, Dataset, PhaseLibrary, Spectrum, normalize_composition
from .errors import PhaseMismatch, TooManyPhases

_LN2 = np.log(2.0)

# stream tags for np.random.default_rng([seed, tag, ...]); distinct per purpose
_PHASE_STREAM = 1
_NOISE_STREAM = 2
_COMPOSITION_STREAM = 3


@dataclass(frozen=True)
class PeakSpec:
    center: float
    amplitude: float
    fwhm: float
    eta: float

    def __post_init__(self):
        if not self.fwhm > 0:
            raise ValueError("fwhm must be positive")
        if self.amplitude < 0:
            raise ValueError("amplitude must be non-negative")
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError("eta must lie in [0, 1]")


def pseudo_voigt(theta, peak: PeakSpec):
    """Unit-height Lorentzian/Gaussian blend, scaled by the peak amplitude."""
    u = (np.asarray(theta, dtype=float) - peak.center) / peak.fwhm
    lorentz = 1.0 / (1.0 + 4.0 * u * u)
    gauss = np.exp(-4.0 * _LN2 * u * u)
    return peak.amplitude * (peak.eta * lorentz + (1.0 - peak.eta) * gauss)


@dataclass(frozen=True)
class GridSpec:
    start: float
    stop: float
    points: int

    def build(self) -> AngleGrid:
        return AngleGrid.linspace(self.start, self.stop, self.points)


@dataclass(frozen=True)
class SynthConfig:
    grid: GridSpec = field(default_factory=lambda: GridSpec(10.0, 50.0, 200))
    n_phases: int = 3
    n_samples: int = 12
    peaks_per_phase: tuple[int, int] = (4, 10)
    fwhm_range: tuple[float, float] = (0.4, 1.2)
    amplitude_range: tuple[float, float] = (50.0, 1000.0)
    # noise standard deviation as a fraction of the library's maximum intensity
    noise_sigma: float = 0.0
    background_level: float = 0.0
    # minimum gap between the largest and second-largest labeled fraction
    dominant_margin: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if self.noise_sigma < 0 or self.background_level < 0:
            raise ValueError("noise_sigma and background_level must be non-negative")
        lo, hi = self.peaks_per_phase
        if lo < 0 or hi < lo:
            raise ValueError("peaks_per_phase must be a range lo <= hi with lo >= 0")
        if self.n_phases < 1 or self.n_samples < 1:
            raise ValueError("n_phases and n_samples must be positive")
        if not 0 <= self.dominant_margin < 1:
            raise ValueError("dominant_margin must lie in [0, 1)")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "SynthConfig":
        d = dict(d)
        if "grid" in d:
            d["grid"] = GridSpec(**d["grid"])
        for key in ("peaks_per_phase", "fwhm_range", "amplitude_range"):
            if key in d:
                d[key] = tuple(d[key])
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown synth config keys: {sorted(unknown)}")
        return cls(**d)


PRESETS = {
    "ci-small": SynthConfig(),
    "paper-shaped": SynthConfig(
        grid=GridSpec(5.0, 85.0, 4000),
        n_phases=7,
        n_samples=46,
        peaks_per_phase=(8, 20),
        fwhm_range=(0.08, 0.4),
        amplitude_range=(50.0, 1000.0),
        noise_sigma=0.01,
        background_level=10.0,
        seed=2023,
    ),
}


def preset(name: str, **overrides) -> SynthConfig:
    try:
        base = PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    return replace(base, **overrides)


def phase_peaks(config: SynthConfig, phase_seed: int, grid: AngleGrid | None = None) -> list[PeakSpec]:
    grid = grid or config.grid.build()
    rng = np.random.default_rng([config.seed, _PHASE_STREAM, phase_seed])
    lo, hi = config.peaks_per_phase
    n = int(rng.integers(lo, hi + 1))
    lo_t, hi_t = grid.angles[0], grid.angles[-1]
    return [
        PeakSpec(
            center=float(rng.uniform(lo_t, hi_t)),
            amplitude=float(rng.uniform(*config.amplitude_range)),
            fwhm=float(rng.uniform(*config.fwhm_range)),
            eta=float(rng.uniform(0.0, 1.0)),
        )
        for _ in range(n)
    ]


def gen_phase_pattern(config: SynthConfig, phase_seed: int, grid: AngleGrid | None = None) -> Spectrum:
    grid = grid or config.grid.build()
    y = np.full(grid.K, float(config.background_level))
    for peak in phase_peaks(config, phase_seed, grid):
        y += pseudo_voigt(grid.angles, peak)
    return Spectrum(y, grid)


def make_library(config: SynthConfig) -> PhaseLibrary:
    grid = config.grid.build()
    names = tuple(f"phase_{j + 1}" for j in range(config.n_phases))
    patterns = np.stack([gen_phase_pattern(config, j, grid).intensities for j in range(config.n_phases)])
    return PhaseLibrary(patterns, names, grid)


def _clear_winner(w: np.ndarray, margin: float) -> bool:
    top = np.sort(w)[::-1]
    return top.size < 2 or top[0] - top[1] >= margin


def sample_compositions(config: SynthConfig, phase_names: Sequence[str] | None = None) -> list[Composition]:
    """Labels mixing pure, two-phase and three-phase samples.

    The first ``min(N, M)`` samples are the pure phases. The rest alternate
    between two-phase edges and Dirichlet draws over three phases (or all
    of them when M < 3). Draws without a clear winner (gap below
    ``dominant_margin``) are redrawn.
    """
    M, N = config.n_phases, config.n_samples
    names = tuple(phase_names) if phase_names is not None else tuple(f"phase_{j + 1}" for j in range(M))
    rng = np.random.default_rng([config.seed, _COMPOSITION_STREAM])
    out = []
    for s in range(N):
        w = np.zeros(M)
        if s < M:
            w[s] = 1.0
        elif M == 1:
            w[0] = 1.0
        else:
            k = 2 if (s - M) % 2 == 0 or M == 2 else min(3, M)
            while True:
                idx = rng.choice(M, size=k, replace=False)
                w[:] = 0.0
                w[idx] = rng.dirichlet(np.ones(k))
                if _clear_winner(w, config.dominant_margin):
                    break
        out.append(normalize_composition(w, names))
    return out


def mix_samples(library: PhaseLibrary, compositions: Sequence[Composition], config: SynthConfig) -> Dataset:
    """Forward mixing model plus seeded Gaussian noise clipped at zero.

    Labels are the exact compositions that generated each spectrum.
    """
    for c in compositions:
        if c.phase_names != library.phase_names:
            raise PhaseMismatch(f"composition phases {c.phase_names} differ from library {library.phase_names}")
    sigma = config.noise_sigma * float(library.patterns.max())
    samples = []
    for s, comp in enumerate(compositions):
        y = comp.fractions @ library.patterns
        if sigma > 0:
            rng = np.random.default_rng([config.seed, _NOISE_STREAM, s])
            y = np.maximum(y + rng.normal(0.0, sigma, size=y.shape), 0.0)
        samples.append((Spectrum(y, library.grid), comp))
    ids = tuple(f"s{k:04d}" for k in range(len(samples)))
    return Dataset(tuple(samples), library.grid, library.phase_names, ids)


def generate(config: SynthConfig) -> tuple[Dataset, PhaseLibrary]:
    """Ground-truth library and a labeled dataset mixed from it."""
    library = make_library(config)
    comps = sample_compositions(config, library.phase_names)
    return mix_samples(library, comps, config), library


def _compositions_of(total: int, parts: int) -> Iterator[np.ndarray]:
    """Integer vectors of length ``parts`` summing to ``total``, in lexicographic order.

    Yields blocks (one per leading value) to bound memory.
    """
    if parts == 1:
        yield np.array([[total]])
        return
    if parts == 2:
        first = np.arange(total + 1)
        yield np.stack([first, total - first], axis=1)
        return
    for first in range(total + 1):
        rest = np.concatenate(list(_compositions_of(total - first, parts - 1)))
        block = np.empty((rest.shape[0], parts), dtype=np.int64)
        block[:, 0] = first
        block[:, 1:] = rest
        yield block


def simplex_lattice(m: int, step: float) -> np.ndarray:
    n = _lattice_size(step)
    return np.concatenate(list(_compositions_of(n, m))) / n


def _lattice_size(step: float) -> int:
    n = int(round(1.0 / step))
    if n < 1 or abs(n * step - 1.0) > 1e-9:
        raise ValueError(f"step {step} does not divide 1 evenly")
    return n


MAX_ORACLE_PHASES = 4


def oracle_simplex_search(spectrum: Spectrum, library: PhaseLibrary, step: float) -> Composition:
    """Exhaustive search of the simplex lattice with spacing ``step``.

    Returns the lattice point with the smallest squared residual; the
    lexicographically first one wins ties.
    """
    M = library.M
    if M > MAX_ORACLE_PHASES:
        raise TooManyPhases(f"oracle search is limited to {MAX_ORACLE_PHASES} phases, got {M}")
    n = _lattice_size(step)
    X = library.patterns
    y = spectrum.intensities
    G = X @ X.T
    b = X @ y
    yy = y @ y
    best_val, best_pt = np.inf, None
    for block in _compositions_of(n, M):
        a = block / n
        # ||y - a X||^2 expanded; exact up to rounding
        vals = yy - 2.0 * (a @ b) + np.einsum("pi,ij,pj->p", a, G, a)
        k = int(np.argmin(vals))
        if vals[k] < best_val:
            best_val, best_pt = vals[k], block[k]
    return Composition(best_pt / n, library.phase_names)


def lattice_bound(spectrum: Spectrum, library: PhaseLibrary, alpha, step: float) -> float:
    """Upper bound on the residual increase from moving ``alpha`` to a lattice point.

    Rounding onto the lattice moves each fraction by at most ``step``, so
    with d the displacement, ||d||_1 <= M*step and ||d||_2^2 <= M*step^2;
    the increase is g.d + d'Gd <= ||g||_inf*M*step + lambda_max(G)*M*step^2.
    """
    X = library.patterns
    alpha = np.asarray(alpha, dtype=float)
    G = X @ X.T
    grad = 2.0 * (G @ alpha - X @ spectrum.intensities)
    lam = float(np.linalg.eigvalsh(G)[-1])
    M = library.M
    return float(np.max(np.abs(grad)) * M * step + lam * M * step * step)
