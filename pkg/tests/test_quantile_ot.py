import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from otident.errors import InvalidArgument
from otident.measures import bernoulli, dirac, make_discrete
from otident.oracle import brute_force_ot
from otident.quantile_ot import (
    antitone_integral,
    comonotone_batch,
    comonotone_integral,
    coupled_expectation,
    coupled_segments,
    frechet_bounds,
    to_step_quantile,
)
from otident.verify import random_law

laws = st.lists(
    st.tuples(st.floats(-10, 10, allow_nan=False), st.floats(0.01, 1, allow_nan=False)), min_size=1, max_size=8
).map(make_discrete)
probs = st.floats(0, 1, allow_nan=False)


class TestStepQuantile:
    def test_two_atoms(self):
        q = to_step_quantile(make_discrete([(0, 0.4), (1, 0.6)]))
        assert q.breakpoints == [(0.4, 0.0), (1.0, 1.0)]

    def test_dirac(self):
        assert to_step_quantile(dirac(7)).breakpoints == [(1.0, 7.0)]

    def test_three_atoms(self):
        q = to_step_quantile(make_discrete([(-1, 0.2), (0, 0.3), (2, 0.5)]))
        assert q.breakpoints == [(0.2, -1.0), (0.5, 0.0), (1.0, 2.0)]

    def test_evaluation_at_breakpoint_takes_left_value(self):
        q = to_step_quantile(make_discrete([(-1, 0.2), (0, 0.3), (2, 0.5)]))
        assert q([0.2, 0.2000001, 0.5, 1.0]).tolist() == [-1, 0, 0, 2]


class TestIntegrals:
    def test_constants(self):
        assert comonotone_integral(dirac(2), dirac(3)) == 6

    def test_fair_coins(self):
        assert comonotone_integral(bernoulli(0.5), bernoulli(0.5)) == pytest.approx(0.5)

    def test_antitone_bernoulli(self):
        assert antitone_integral(bernoulli(0.7), bernoulli(0.6)) == pytest.approx(0.3)

    def test_antitone_constant_factor(self):
        w = make_discrete([(1, 0.2), (4, 0.8)])
        assert antitone_integral(dirac(2.5), w) == pytest.approx(2.5 * w.mean())

    def test_against_oracle(self, rng):
        for _ in range(20):
            v, w = random_law(rng, 6), random_law(rng, 6)
            prod = np.outer(v.values, w.values)
            assert comonotone_integral(v, w) == pytest.approx(-brute_force_ot(-prod, v.probs, w.probs), abs=1e-9)
            assert antitone_integral(v, w) == pytest.approx(brute_force_ot(prod, v.probs, w.probs), abs=1e-9)

    @given(probs, probs)
    def test_bernoulli_matches_frechet(self, p, q):
        lo, hi = frechet_bounds(p, q)
        assert comonotone_integral(bernoulli(p), bernoulli(q)) == pytest.approx(hi, abs=1e-12)
        assert antitone_integral(bernoulli(p), bernoulli(q)) == pytest.approx(lo, abs=1e-12)

    @given(laws, laws)
    def test_rearrangement_order(self, v, w):
        assert comonotone_integral(v, w) >= antitone_integral(v, w) - 1e-9

    @given(laws, laws)
    def test_symmetry(self, v, w):
        assert comonotone_integral(v, w) == pytest.approx(comonotone_integral(w, v), abs=1e-9)
        assert antitone_integral(v, w) == pytest.approx(antitone_integral(w, v), abs=1e-9)

    @given(laws, laws, st.floats(0, 5))
    def test_positive_homogeneity(self, v, w, lam):
        scaled = make_discrete(zip(v.values * lam, v.probs))
        assert comonotone_integral(scaled, w) == pytest.approx(lam * comonotone_integral(v, w), abs=1e-8)
        assert antitone_integral(scaled, w) == pytest.approx(lam * antitone_integral(v, w), abs=1e-8)


class TestSegments:
    def test_lengths_sum_to_one(self, rng):
        va, vb = rng.normal(size=(5, 4)), rng.normal(size=(5, 3))
        pa, pb = rng.dirichlet(np.ones(4), 5), rng.dirichlet(np.ones(3), 5)
        lengths, _, _ = coupled_segments(va, pa, vb, pb)
        assert np.allclose(lengths.sum(axis=1), 1.0)

    def test_batch_matches_scalar(self, rng):
        for _ in range(5):
            v, w = random_law(rng, 5), random_law(rng, 5)
            batch = comonotone_batch(v.values, v.probs, w.values, w.probs)[0]
            assert batch == pytest.approx(comonotone_integral(v, w), abs=1e-12)

    def test_equal_weight_fast_path(self, rng):
        a, b = rng.normal(size=(3, 10)), rng.normal(size=(3, 10))
        p = np.full((3, 10), 0.1)
        fast = comonotone_batch(a, p, b, p)
        lengths, va, vb = coupled_segments(a, p, b, p)
        assert np.allclose(fast, (lengths * va * vb).sum(axis=1))

    def test_coupled_expectation_min(self):
        v, w = make_discrete([(0, 0.5), (2, 0.5)]), make_discrete([(1, 0.5), (3, 0.5)])
        assert coupled_expectation(np.minimum, v, w) == pytest.approx(1.0)
        assert coupled_expectation(np.minimum, v, w, antitone=True) == pytest.approx(0.5)


class TestFrechet:
    @pytest.mark.parametrize("p,q,expected", [(0.3, 0.4, (0.0, 0.3)), (0.7, 0.6, (0.3, 0.6))])
    def test_examples(self, p, q, expected):
        assert frechet_bounds(p, q) == pytest.approx(expected)

    def test_out_of_range(self):
        with pytest.raises(InvalidArgument):
            frechet_bounds(1.2, 0.5)
        with pytest.raises(InvalidArgument):
            frechet_bounds(0.2, -0.1)

    @given(probs, probs)
    def test_ordering(self, p, q):
        lo, hi = frechet_bounds(p, q)
        assert 0 <= lo <= hi <= min(p, q)
