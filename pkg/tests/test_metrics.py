import numpy as np
import pytest
from hypothesis import given, strategies as st

from phasefrac.core import Composition, normalize_composition
from phasefrac.errors import EmptyInput, PhaseMismatch
from phasefrac.metrics import cosine_similarity, dominant_phase_accuracy, evaluate, mae, rho


def comp(*v):
    return Composition(list(v), tuple(f"p{j}" for j in range(len(v))))


@st.composite
def simplex_pairs(draw, max_m=6):
    m = draw(st.integers(1, max_m))
    vec = st.lists(st.floats(0, 1), min_size=m, max_size=m).filter(lambda v: sum(v) > 1e-6)
    return normalize_composition(draw(vec)), normalize_composition(draw(vec))


def test_rho_examples():
    assert rho(comp(0.3, 0.7), comp(0.3, 0.7)) == pytest.approx(1.0, abs=1e-12)
    assert rho(comp(1.0, 0.0), comp(0.0, 1.0)) == pytest.approx(0.0, abs=1e-12)
    assert rho(comp(0.5, 0.5), comp(0.6, 0.4)) == pytest.approx(0.9, abs=1e-12)


def test_rho_phase_mismatch():
    with pytest.raises(PhaseMismatch):
        rho(comp(0.5, 0.5), Composition([0.5, 0.5], ("a", "b")))
    with pytest.raises(PhaseMismatch):
        rho(comp(0.5, 0.5), comp(0.2, 0.3, 0.5))


def test_mae_examples():
    a = [comp(0.5, 0.5), comp(0.2, 0.8)]
    assert mae(a, a) == 0.0
    assert mae([comp(1.0, 0.0)], [comp(0.0, 1.0)]) == pytest.approx(1.0)
    assert mae([comp(0.5, 0.5), comp(0.2, 0.8)], [comp(0.6, 0.4), comp(0.2, 0.8)]) == pytest.approx(0.05, abs=1e-15)
    with pytest.raises(EmptyInput):
        mae([], [])


def test_cosine_examples():
    assert cosine_similarity(comp(0.3, 0.7), comp(0.3, 0.7)) == pytest.approx(1.0)
    assert cosine_similarity(comp(1.0, 0.0), comp(0.0, 1.0)) == 0.0
    assert cosine_similarity(comp(0.5, 0.5), comp(1.0, 0.0)) == pytest.approx(0.7071, abs=1e-4)


def test_dominant_examples():
    a = [comp(0.7, 0.3)] * 10
    assert dominant_phase_accuracy(a, a) == 1.0
    assert dominant_phase_accuracy([comp(0.5, 0.5)], [comp(0.4, 0.6)]) == 0.0
    preds = [comp(0.7, 0.3)] * 9 + [comp(0.2, 0.8)]
    assert dominant_phase_accuracy(a, preds) == pytest.approx(0.9)
    with pytest.raises(EmptyInput):
        dominant_phase_accuracy([], [])


@given(simplex_pairs())
def test_rho_bounds_and_symmetry(pair):
    a, b = pair
    r = rho(a, b)
    assert -1e-12 <= r <= 1.0 + 1e-12
    assert r == rho(b, a)
    assert rho(a, a) == 1.0


@given(simplex_pairs())
def test_rho_one_only_for_equal(pair):
    a, b = pair
    if rho(a, b) == 1.0:
        np.testing.assert_allclose(a.fractions, b.fractions, atol=1e-12)


@given(simplex_pairs())
def test_cosine_bounds(pair):
    c = cosine_similarity(*pair)
    assert -1e-12 <= c <= 1.0 + 1e-12




@given(st.integers(2, 5), st.integers(1, 6), st.randoms(use_true_random=False))
def test_mae_permutation_invariant(m, n, rnd):
    rng = np.random.default_rng(rnd.randint(0, 2**32 - 1))
    acts = [normalize_composition(rng.dirichlet(np.ones(m))) for _ in range(n)]
    preds = [normalize_composition(rng.dirichlet(np.ones(m))) for _ in range(n)]
    perm = rng.permutation(m)
    pa = [normalize_composition(c.fractions[perm]) for c in acts]
    pp = [normalize_composition(c.fractions[perm]) for c in preds]
    assert mae(pa, pp) == pytest.approx(mae(acts, preds), abs=1e-15)


def test_evaluate_aggregates():
    acts = [comp(0.5, 0.5), comp(1.0, 0.0), comp(0.2, 0.8)]
    preds = [comp(0.6, 0.4), comp(0.0, 1.0), comp(0.2, 0.8)]
    rep = evaluate(acts, preds)
    assert rep.mean_rho == pytest.approx(np.mean([s.rho for s in rep.per_sample]), abs=1e-12)
    assert rep.mean_rho == pytest.approx((0.9 + 0.0 + 1.0) / 3)
    assert rep.mae == pytest.approx(mae(acts, preds))
    assert rep.dominant_accuracy == pytest.approx(2 / 3)
    assert rep.per_sample[1].abs_errors == (1.0, 1.0)
