"""Scores comparing predicted phase fractions against labels."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import Composition
from .errors import EmptyInput, PhaseMismatch

SQRT2 = np.sqrt(2.0)


def _pair(actual, predicted) -> tuple[np.ndarray, np.ndarray]:
    a_names = getattr(actual, "phase_names", None)
    p_names = getattr(predicted, "phase_names", None)
    if a_names is not None and p_names is not None and a_names != p_names:
        raise PhaseMismatch(f"phase sets differ: {a_names} vs {p_names}")
    a = np.asarray(getattr(actual, "fractions", actual), dtype=float)
    p = np.asarray(getattr(predicted, "fractions", predicted), dtype=float)
    if a.shape != p.shape:
        raise PhaseMismatch(f"{a.size} vs {p.size} phases")
    return a, p


def rho(actual, predicted) -> float:
    """1 - ||a - p||_2 / sqrt(2); 1 is exact, 0 is maximally wrong on the simplex."""
    a, p = _pair(actual, predicted)
    return float(1.0 - np.linalg.norm(a - p) / SQRT2)


def cosine_similarity(actual, predicted) -> float:
    a, p = _pair(actual, predicted)
    na, np_ = np.linalg.norm(a), np.linalg.norm(p)
    if na == 0 or np_ == 0:
        raise ValueError("cosine similarity is undefined for a zero vector")
    return float(a @ p / (na * np_))


def _pairs(actuals, predictions):
    if len(actuals) != len(predictions):
        raise PhaseMismatch(f"{len(actuals)} labels for {len(predictions)} predictions")
    if not actuals:
        raise EmptyInput("no samples to score")
    return [_pair(a, p) for a, p in zip(actuals, predictions)]


def mae(actuals: Sequence[Composition], predictions: Sequence[Composition]) -> float:
    """Mean absolute fraction error over all samples and phases, i.e. sum / (N*M)."""
    pairs = _pairs(actuals, predictions)
    err = np.stack([np.abs(a - p) for a, p in pairs])
    return float(err.mean())


def _argmax(v: np.ndarray) -> int:
    return int(np.argmax(v))


def dominant_phase_accuracy(actuals, predictions) -> float:
    """Share of samples whose largest predicted fraction is the largest labeled one.

    Exact ties resolve to the lowest phase index on both sides.
    """
    pairs = _pairs(actuals, predictions)
    hits = [_argmax(a) == _argmax(p) for a, p in pairs]
    return sum(hits) / len(hits)


@dataclass(frozen=True)
class SampleScore:
    rho: float
    cosine: float
    abs_errors: tuple[float, ...]
    dominant_hit: bool


@dataclass(frozen=True)
class EvalReport:
    per_sample: tuple[SampleScore, ...]
    mean_rho: float
    mae: float
    mean_cosine: float
    dominant_accuracy: float

    def as_dict(self) -> dict:
        return {
            "n_samples": len(self.per_sample),
            "mean_rho": self.mean_rho,
            "mae": self.mae,
            "mean_cosine": self.mean_cosine,
            "dominant_accuracy": self.dominant_accuracy,
        }


def score_sample(actual, predicted) -> SampleScore:
    a, p = _pair(actual, predicted)
    return SampleScore(
        rho=rho(a, p),
        cosine=cosine_similarity(a, p),
        abs_errors=tuple(float(e) for e in np.abs(a - p)),
        dominant_hit=_argmax(a) == _argmax(p),
    )


def evaluate(actuals: Sequence[Composition], predictions: Sequence[Composition]) -> EvalReport:
    _pairs(actuals, predictions)
    scores = tuple(score_sample(a, p) for a, p in zip(actuals, predictions))
    return EvalReport(
        per_sample=scores,
        mean_rho=float(np.mean([s.rho for s in scores])),
        mae=mae(actuals, predictions),
        mean_cosine=float(np.mean([s.cosine for s in scores])),
        dominant_accuracy=sum(s.dominant_hit for s in scores) / len(scores),
    )
