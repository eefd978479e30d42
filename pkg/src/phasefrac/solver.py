"""Fixed-point coordinate descent for pattern learning and phase unmixing.

Training solves, for the labeled fractions A (N x M) and spectra Y (N x K),

    min_{X >= 0} ||Y - A X||_F^2

one coordinate x_i(j) at a time. Coordinates at different angles never
interact (the objective separates over columns of X), so a whole row X[j]
is updated at once; this is the same arithmetic as looping over angles in
ascending order.

Inference solves the same least-squares problem for a single spectrum with
X fixed, one weight at a time, clipping at zero, and rescales the weights
to sum to one after every full sweep. By default the rescaled vector is
only reported; the next sweep continues from the unscaled weights. Feeding
the rescaled vector back into the sweep (``renormalize="feedback"``) makes
the true composition of an exact mixture an unstable fixed point whenever
the patterns overlap strongly, e.g. on a shared background.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import Composition, Dataset, PhaseLibrary, Spectrum, normalize_composition
from .errors import DegenerateFit, DimensionMismatch, GridMismatch, UnobservedPhase, ZeroPattern

# floor for the relative-change denominator
_EPS = 1e-30


RENORMALIZE_MODES = ("carry", "feedback")


@dataclass(frozen=True)
class SolverConfig:
    max_iterations: int = 200
    convergence_tol: float = 1e-8
    # None: deterministic warm start. An integer switches to a seeded random start.
    init_seed: int | None = None
    # inference only: "carry" keeps the unscaled weights between sweeps,
    # "feedback" restarts each sweep from the rescaled fractions
    renormalize: str = "carry"

    def __post_init__(self):
        if int(self.max_iterations) != self.max_iterations or self.max_iterations < 1:
            raise ValueError("max_iterations must be a positive integer")
        if not self.convergence_tol > 0:
            raise ValueError("convergence_tol must be positive")
        if self.renormalize not in RENORMALIZE_MODES:
            raise ValueError(f"renormalize must be one of {RENORMALIZE_MODES}")


@dataclass
class FitTrace:
    objective_per_sweep: list[float] = field(default_factory=list)
    sweeps_used: int = 0
    converged: bool = False
    initial_objective: float = float("nan")

    @property
    def final_objective(self) -> float:
        return self.objective_per_sweep[-1] if self.objective_per_sweep else self.initial_objective


def _fraction_matrix(compositions: Sequence[Composition], phase_names) -> np.ndarray:
    for c in compositions:
        if c.phase_names != tuple(phase_names):
            raise DimensionMismatch(f"composition phases {c.phase_names} do not match {tuple(phase_names)}")
    return np.stack([c.fractions for c in compositions])


def _check_dims(dataset: Dataset, library: PhaseLibrary, compositions) -> np.ndarray:
    if len(compositions) != dataset.N:
        raise DimensionMismatch(f"{len(compositions)} compositions for {dataset.N} samples")
    if library.K != dataset.K or not library.grid.matches(dataset.grid):
        raise DimensionMismatch(f"library has {library.K} angles, dataset has {dataset.K}")
    return _fraction_matrix(compositions, library.phase_names)


def _residual_sse(Y: np.ndarray, A: np.ndarray, X: np.ndarray) -> float:
    r = Y - A @ X
    return float(np.sum(r * r))


def sse(dataset: Dataset, library: PhaseLibrary, compositions: Sequence[Composition]) -> float:
    """Sum of squared residuals of the mixing model over all samples and angles."""
    A = _check_dims(dataset, library, compositions)
    return _residual_sse(dataset.intensities, A, library.patterns)


def spectrum_sse(spectrum: Spectrum, library: PhaseLibrary, alpha) -> float:
    r = spectrum.intensities - np.asarray(alpha, dtype=float) @ library.patterns
    return float(r @ r)


def update_phase_intensity(i: int, j: int, dataset: Dataset, library: PhaseLibrary, compositions) -> float:
    """Exact non-negative minimizer of the training objective along x_i(j)."""
    A = _check_dims(dataset, library, compositions)
    a_j = A[:, j]
    den = a_j @ a_j
    if den <= 0:
        raise UnobservedPhase(library.phase_names[j])
    x_i = library.patterns[:, i]
    keep = np.arange(library.M) != j
    others = A[:, keep] @ x_i[keep]
    num = a_j @ (dataset.intensities[:, i] - others)
    return max(num / den, 0.0)


def _row_others(G: np.ndarray, X: np.ndarray, j: int) -> np.ndarray:
    # sum over j' != j of G[j, j'] * X[j']
    return G[j, :j] @ X[:j] + G[j, j + 1:] @ X[j + 1:]


def training_sweep(X: np.ndarray, G: np.ndarray, B: np.ndarray) -> None:
    """One in-place cyclic sweep over phases (angles vectorized).

    ``G = A^T A`` and ``B = A^T Y`` are the sufficient statistics of the
    training set.
    """
    for j in range(X.shape[0]):
        X[j] = np.maximum((B[j] - _row_others(G, X, j)) / G[j, j], 0.0)


def _initial_library(dataset: Dataset, config: SolverConfig) -> np.ndarray:
    A, Y = dataset.fractions, dataset.intensities
    if config.init_seed is None:
        # fraction-weighted average of the training spectra
        return (A.T @ Y) / A.sum(axis=0)[:, None]
    rng = np.random.default_rng(config.init_seed)
    return rng.uniform(0.0, 1.0, size=(dataset.M, dataset.K)) * Y.max()


def fit_phase_library(
    dataset: Dataset,
    config: SolverConfig | None = None,
    initial: PhaseLibrary | None = None,
) -> tuple[PhaseLibrary, FitTrace]:
    """Learn one non-negative pattern per phase from labeled mixtures.

    Stops when the relative change of the objective between sweeps drops
    below ``config.convergence_tol`` or after ``config.max_iterations``
    sweeps. ``initial`` overrides the warm start.
    """
    config = config or SolverConfig()
    A, Y = dataset.fractions, dataset.intensities
    G = A.T @ A
    B = A.T @ Y
    for j, name in enumerate(dataset.phase_names):
        if G[j, j] <= 0:
            raise UnobservedPhase(name)

    if initial is not None:
        if initial.phase_names != dataset.phase_names or not initial.grid.matches(dataset.grid):
            raise DimensionMismatch("initial library does not match the dataset phases/grid")
        X = np.array(initial.patterns, dtype=float)
    else:
        X = _initial_library(dataset, config)

    trace = FitTrace(initial_objective=_residual_sse(Y, A, X))
    prev = trace.initial_objective
    if prev == 0.0:
        trace.converged = True
    else:
        for sweep in range(1, config.max_iterations + 1):
            training_sweep(X, G, B)
            cur = _residual_sse(Y, A, X)
            trace.objective_per_sweep.append(cur)
            trace.sweeps_used = sweep
            if cur == 0.0 or abs(prev - cur) / max(prev, _EPS) < config.convergence_tol:
                trace.converged = True
                break
            prev = cur

    return PhaseLibrary(X, dataset.phase_names, dataset.grid), trace


def update_fraction(j: int, spectrum: Spectrum, library: PhaseLibrary, alpha) -> float:
    """Exact non-negative minimizer of one spectrum's residual along alpha_j.

    ``alpha`` holds the current weights; its j-th entry is ignored.
    """
    x = library.patterns
    if spectrum.intensities.size != library.K:
        raise GridMismatch(f"spectrum has {spectrum.intensities.size} points, library has {library.K}")
    den = x[j] @ x[j]
    if den <= 0:
        raise ZeroPattern(library.phase_names[j])
    alpha = np.asarray(alpha, dtype=float)
    keep = np.arange(library.M) != j
    others = alpha[keep] @ x[keep]
    return max(x[j] @ (spectrum.intensities - others) / den, 0.0)


def inference_sweep(alpha: np.ndarray, G: np.ndarray, b: np.ndarray) -> None:
    """One in-place cyclic sweep over fractions, before renormalization.

    ``G = X X^T`` and ``b = X y``.
    """
    for j in range(alpha.size):
        alpha[j] = max((b[j] - _row_others(G, alpha, j)) / G[j, j], 0.0)


def _initial_weights(G: np.ndarray, b: np.ndarray, config: SolverConfig) -> np.ndarray:
    M = b.size
    if config.init_seed is None:
        start = np.full(M, 1.0 / M)
    else:
        start = np.random.default_rng(config.init_seed).dirichlet(np.ones(M))
    if config.renormalize == "feedback":
        return start
    # least-squares scale along the starting direction, so the carried
    # weights scale with the spectrum from the first sweep on
    curv = start @ G @ start
    scale = (start @ b) / curv
    return start * scale if scale > 0 else start


def estimate_composition(
    spectrum: Spectrum,
    library: PhaseLibrary,
    config: SolverConfig | None = None,
) -> tuple[Composition, FitTrace]:
    """Phase fractions of an unknown spectrum given learned patterns.

    Each iteration updates every weight once, then rescales the weights to
    sum to one. Stops when no rescaled fraction moves by
    ``config.convergence_tol`` or more. Raises DegenerateFit if every
    weight clips to zero.
    """
    config = config or SolverConfig()
    if not spectrum.grid.matches(library.grid):
        raise GridMismatch("spectrum and library are on different angle grids")
    X = library.patterns
    G = X @ X.T
    for j, name in enumerate(library.phase_names):
        if G[j, j] <= 0:
            raise ZeroPattern(name)
    b = X @ spectrum.intensities

    weights = _initial_weights(G, b, config)
    alpha = weights / weights.sum()
    trace = FitTrace(initial_objective=spectrum_sse(spectrum, library, alpha))
    for sweep in range(1, config.max_iterations + 1):
        previous = alpha
        inference_sweep(weights, G, b)
        total = weights.sum()
        if total <= 0:
            raise DegenerateFit(f"all fractions clipped to zero in sweep {sweep}")
        alpha = weights / total
        if config.renormalize == "feedback":
            weights = alpha.copy()
        trace.objective_per_sweep.append(spectrum_sse(spectrum, library, alpha))
        trace.sweeps_used = sweep
        if np.max(np.abs(alpha - previous)) < config.convergence_tol:
            trace.converged = True
            break

    return normalize_composition(alpha, library.phase_names), trace


def predict_many(spectra: Sequence[Spectrum], library: PhaseLibrary, config: SolverConfig | None = None):
    """Estimate compositions for several spectra; returns (compositions, traces)."""
    results = [estimate_composition(s, library, config) for s in spectra]
    return [c for c, _ in results], [t for _, t in results]
