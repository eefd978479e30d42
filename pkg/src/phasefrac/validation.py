"""Leave-one-out and resubstitution evaluation of the two-stage solver."""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import Composition, Dataset
from .errors import EmptyInput, PhaseDropout
from .metrics import EvalReport, evaluate
from .solver import FitTrace, SolverConfig, estimate_composition, fit_phase_library


@dataclass(frozen=True)
class FoldResult:
    sample_id: str
    prediction: Composition
    train_trace: FitTrace
    predict_trace: FitTrace


@dataclass(frozen=True)
class CvResult:
    fold_predictions: tuple[tuple[str, Composition], ...]
    report: EvalReport
    per_fold_traces: tuple[FitTrace, ...]
    predict_traces: tuple[FitTrace, ...]
    wall_time: float

    @property
    def predictions(self) -> list[Composition]:
        return [c for _, c in self.fold_predictions]


def find_dropouts(dataset: Dataset) -> list[tuple[int, str, str]]:
    """(fold, sample_id, phase) for every phase absent from a leave-one-out split."""
    sq = dataset.fractions ** 2
    out = []
    for k in range(dataset.N):
        # recomputed from the remaining rows, not total - sq[k], to avoid rounding residue
        remaining = np.delete(sq, k, axis=0).sum(axis=0)
        for j in np.flatnonzero(remaining <= 0):
            out.append((k, dataset.sample_ids[k], dataset.phase_names[j]))
    return out


def run_fold(dataset: Dataset, k: int, config: SolverConfig) -> FoldResult:
    train = dataset.without(k)
    library, train_trace = fit_phase_library(train, config)
    spectrum, _ = dataset.samples[k]
    pred, pred_trace = estimate_composition(spectrum, library, config)
    return FoldResult(dataset.sample_ids[k], pred, train_trace, pred_trace)


def loocv(dataset: Dataset, config: SolverConfig | None = None, jobs: int = 1) -> CvResult:
    """Hold out each sample once, train on the rest, predict the held-out one.

    Folds run on ``jobs`` threads; results are always collected in sample
    order.
    """
    config = config or SolverConfig()
    if dataset.N < 2:
        raise EmptyInput("leave-one-out needs at least two samples")
    dropouts = find_dropouts(dataset)
    if dropouts:
        raise PhaseDropout(dropouts)

    start = time.perf_counter()
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            folds = list(pool.map(lambda k: run_fold(dataset, k, config), range(dataset.N)))
    else:
        folds = [run_fold(dataset, k, config) for k in range(dataset.N)]
    elapsed = time.perf_counter() - start

    preds = [f.prediction for f in folds]
    return CvResult(
        fold_predictions=tuple((f.sample_id, f.prediction) for f in folds),
        report=evaluate(dataset.compositions, preds),
        per_fold_traces=tuple(f.train_trace for f in folds),
        predict_traces=tuple(f.predict_trace for f in folds),
        wall_time=elapsed,
    )


def resubstitution_predictions(dataset: Dataset, config: SolverConfig | None = None):
    """Fit once on all samples and predict each of them.

    Returns ``(predictions, inference_traces, library, training_trace)``.
    """
    config = config or SolverConfig()
    library, trace = fit_phase_library(dataset, config)
    results = [estimate_composition(s, library, config) for s in dataset.spectra]
    return [c for c, _ in results], [t for _, t in results], library, trace


def resubstitution_eval(dataset: Dataset, config: SolverConfig | None = None) -> EvalReport:
    """Train on every sample, then score predictions on those same samples."""
    preds, _, _, _ = resubstitution_predictions(dataset, config)
    return evaluate(dataset.compositions, preds)
