import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cspc.benchmark import GeneratorConfig, reference_structures
from cspc.data import Context, Schema
from cspc.features import Feature, FeatureSet, atomic_features
from cspc.loglinear import LogLinearModel
from cspc.metrics import (avg_feature_length, avg_feature_length_in_context, flag_feature_length,
                          kl_exact)

from test_loglinear import random_model


class TestKL:
    def test_identity(self):
        m = random_model(4, np.random.default_rng(0))
        assert kl_exact(m, m) == pytest.approx(0.0, abs=1e-12)

    def test_hand_value(self):
        s = Schema.binary(1)
        p = LogLinearModel(s, FeatureSet([Feature.of({0: 1})]), [math.log(2)])
        q = LogLinearModel.zeros(s, atomic_features(s))
        expected = (5 / 3) * math.log(2) - math.log(3)
        assert kl_exact(p, q) == pytest.approx(expected, abs=1e-12)
        assert expected == pytest.approx(0.05663, abs=1e-5)

    def test_asymmetric(self):
        s = Schema.binary(1)
        p = LogLinearModel(s, FeatureSet([Feature.of({0: 1})]), [math.log(2)])
        q = LogLinearModel(s, FeatureSet([Feature.of({0: 1})]), [math.log(9)])
        assert kl_exact(p, q) != pytest.approx(kl_exact(q, p), abs=1e-6)

    def test_schema_mismatch(self):
        with pytest.raises(ValueError):
            kl_exact(random_model(3, np.random.default_rng(1)), random_model(4, np.random.default_rng(1)))


@given(st.integers(0, 10_000))
def test_kl_non_negative(seed):
    rng = np.random.default_rng(seed)
    p, q = random_model(3, rng, scale=2.0), random_model(3, rng, scale=2.0)
    assert kl_exact(p, q) >= -1e-12


class TestLengths:
    def test_references(self):
        empty, full, truth = reference_structures(GeneratorConfig(6))
        assert avg_feature_length(empty) == 1.0
        assert avg_feature_length(full) == 6.0
        assert avg_feature_length(truth) == pytest.approx(2.8)

    def test_empty_set(self):
        with pytest.raises(ValueError):
            avg_feature_length(FeatureSet())

    def test_truth_flag_zero(self):
        truth = reference_structures(GeneratorConfig(6))[2]
        assert avg_feature_length_in_context(truth, Context.of({5: 0})) == pytest.approx(2.8)

    def test_atomic_any_context(self):
        fs = atomic_features(Schema.binary(3))
        assert avg_feature_length_in_context(fs, Context.of({2: 1}), "compatible") == 1.0
        assert avg_feature_length_in_context(fs, Context.of({2: 1}), "binding") == 1.0

    def test_binding_versus_compatible(self):
        fs = FeatureSet([Feature.of({0: 1, 1: 1}), Feature.of({0: 0, 1: 1, 2: 1}), Feature.of({2: 0})])
        c = Context.of({2: 1})
        assert avg_feature_length_in_context(fs, c, "binding") == 3.0
        assert avg_feature_length_in_context(fs, c, "compatible") == 2.5

    def test_full_structure_both_flag_values(self):
        full = reference_structures(GeneratorConfig(6))[1]
        assert flag_feature_length(full, 5, 0) == flag_feature_length(full, 5, 1) == 6.0

    def test_nothing_goes_with_context(self):
        with pytest.raises(ValueError):
            avg_feature_length_in_context(FeatureSet([Feature.of({0: 1})]), Context.of({0: 0}))

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            avg_feature_length_in_context(FeatureSet([Feature.of({0: 1})]), Context(), "both")


feature_lists = st.lists(
    st.dictionaries(st.integers(0, 3), st.integers(0, 1), min_size=1, max_size=4).map(Feature.of),
    min_size=1, max_size=15)


@given(feature_lists, st.sampled_from(["binding", "compatible"]))
def test_empty_context_is_plain_average(fs, mode):
    fs = FeatureSet(fs)
    assert avg_feature_length_in_context(fs, Context(), mode) == pytest.approx(avg_feature_length(fs))


@given(feature_lists, st.randoms(use_true_random=False))
def test_order_free(fs, rnd):
    shuffled = list(fs)
    rnd.shuffle(shuffled)
    assert avg_feature_length(FeatureSet(fs)) == avg_feature_length(FeatureSet(shuffled))
