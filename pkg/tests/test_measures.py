import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from otident.errors import InvalidArgument, InvalidDistribution, ParseError
from otident.measures import (
    ConditionalLawTable,
    DiscreteDist,
    GaussianSpec,
    bernoulli,
    dirac,
    discretize_gaussian,
    make_discrete,
    standard_normal_nodes,
    table_from_json,
    table_to_json,
)
from otident.quantile_ot import comonotone_integral

atom_lists = st.lists(
    st.tuples(st.floats(-50, 50, allow_nan=False), st.floats(0.001, 10, allow_nan=False)), min_size=1, max_size=12
)


class TestMakeDiscrete:
    def test_merges_equal_values(self):
        d = make_discrete([(1, 0.5), (1, 0.3), (2, 0.2)])
        assert d.atoms == [(1.0, pytest.approx(0.8)), (2.0, pytest.approx(0.2))]

    def test_renormalizes_dirac(self):
        assert make_discrete([(3, 2.0)]).atoms == [(3.0, 1.0)]

    def test_canonical_input_unchanged(self):
        assert make_discrete([(0, 0.25), (1, 0.75)]).atoms == [(0.0, 0.25), (1.0, 0.75)]

    def test_sorts_values(self):
        d = make_discrete([(5, 1), (-1, 1), (2, 2)])
        assert d.values.tolist() == [-1.0, 2.0, 5.0]

    def test_merges_within_tolerance(self):
        d = make_discrete([(1.0, 0.5), (1.0 + 5e-13, 0.5)])
        assert len(d) == 1

    @pytest.mark.parametrize(
        "pairs", [[], [(1, -0.1), (2, 1.1)], [(1, 0.0)], [(float("nan"), 1.0)], [(1.0, float("inf"))]]
    )
    def test_rejects_bad_input(self, pairs):
        with pytest.raises(InvalidDistribution):
            make_discrete(pairs)

    @given(atom_lists)
    def test_idempotent(self, pairs):
        d = make_discrete(pairs)
        assert make_discrete(d.atoms) == d

    @given(atom_lists)
    def test_invariants(self, pairs):
        d = make_discrete(pairs)
        assert abs(d.probs.sum() - 1) <= 1e-12
        assert np.all(np.diff(d.values) > 0)
        assert np.all(d.probs >= 0)


class TestDiscreteDist:
    def test_constructor_validates(self):
        with pytest.raises(InvalidDistribution):
            DiscreteDist([1.0, 0.5], [0.5, 0.5])
        with pytest.raises(InvalidDistribution):
            DiscreteDist([1.0], [0.9])

    def test_arrays_are_read_only(self):
        d = bernoulli(0.3)
        with pytest.raises(ValueError):
            d.probs[0] = 1.0

    def test_moments_and_cdf(self):
        d = make_discrete([(0, 0.2), (1, 0.3), (3, 0.5)])
        assert d.mean() == pytest.approx(1.8)
        assert d.second_moment() == pytest.approx(4.8)
        assert d.cdf([-1, 0, 0.5, 1, 3, 9]).tolist() == pytest.approx([0, 0.2, 0.2, 0.5, 1, 1])

    def test_quantile_is_left_continuous(self):
        d = make_discrete([(0, 0.4), (1, 0.6)])
        assert d.quantile([0.1, 0.4, 0.4000001, 1.0]).tolist() == [0, 0, 1, 1]

    def test_hash_and_equality(self):
        assert dirac(2.0) == make_discrete([(2.0, 7.0)])
        assert hash(dirac(2.0)) == hash(make_discrete([(2.0, 7.0)]))
        assert dirac(2.0) != dirac(3.0)

    def test_bernoulli_range(self):
        with pytest.raises(InvalidDistribution):
            bernoulli(1.5)


class TestDiscretizeGaussian:
    def test_two_atoms_symmetric(self):
        d = discretize_gaussian(GaussianSpec(0, 1), 2)
        assert d.values[0] == pytest.approx(-d.values[1])
        assert d.probs.tolist() == [0.5, 0.5]

    def test_zero_sd_is_dirac(self):
        assert discretize_gaussian(GaussianSpec(5, 0), 7).atoms == [(5.0, 1.0)]

    def test_self_coupling_variance(self):
        d = discretize_gaussian(GaussianSpec(0, 1), 400)
        assert abs(comonotone_integral(d, d) - 1.0) <= 1e-3

    def test_variance_deficit_shrinks(self):
        gaps = [1.0 - discretize_gaussian(GaussianSpec(0, 1), n).second_moment() for n in (25, 100, 400)]
        assert gaps[0] > gaps[1] > gaps[2] > 0

    @pytest.mark.parametrize("n", [1, 2, 7, 100])
    def test_mean_preserved(self, n):
        d = discretize_gaussian(GaussianSpec(3.5, 2.0), n)
        assert d.mean() == pytest.approx(3.5, abs=1e-12)

    def test_rejects_zero_atoms(self):
        with pytest.raises(InvalidArgument):
            discretize_gaussian(GaussianSpec(0, 1), 0)

    def test_rejects_negative_sd(self):
        with pytest.raises(InvalidArgument):
            GaussianSpec(0.0, -1.0)

    def test_deterministic(self):
        a = discretize_gaussian(GaussianSpec(1, 2), 50)
        b = discretize_gaussian(GaussianSpec(1, 2), 50)
        assert a == b

    def test_nodes_increasing(self):
        z = standard_normal_nodes(31)
        assert np.all(np.diff(z) > 0)
        assert z[15] == 0.0


class TestConditionalLawTable:
    def test_weights_must_sum_to_one(self):
        with pytest.raises(InvalidArgument):
            ConditionalLawTable.from_rows([(0.5, dirac(0), dirac(1))])

    def test_json_round_trip(self):
        t = ConditionalLawTable.from_rows(
            [(0.25, bernoulli(0.3), dirac(1.0), "a"), (0.75, dirac(2.0), make_discrete([(0, 1), (4, 3)]))]
        )
        back = table_from_json(json.loads(json.dumps(table_to_json(t))))
        assert len(back) == 2
        assert back.rows[0].label == "a"
        assert back.rows[1].law0 == t.rows[1].law0
        assert back.weights.tolist() == [0.25, 0.75]

    def test_json_errors_carry_context(self):
        with pytest.raises(ParseError, match=r"rows\[1\]"):
            table_from_json({"rows": [{"weight": 0.5, "law1": [[0, 1]], "law0": [[0, 1]]}, {"weight": 0.5, "law1": [[0, 1]]}]})
        with pytest.raises(ParseError):
            table_from_json([1, 2])
