import math
from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cspc.benchmark import (GeneratorConfig, benchmark_schema, csi_structure, generate_model,
                            log_odds_ratio, reference_structures, solve_pairwise,
                            symmetric_potential)
from cspc.data import Context
from cspc.loglinear import joint_distribution
from cspc.metrics import avg_feature_length, avg_feature_length_in_context
from cspc.oracle import conditional_mutual_information


class TestSolvePairwise:
    def test_unit_epsilon(self):
        w0 = solve_pairwise(1.0, 0.5)
        assert w0 == pytest.approx(0.82436, abs=1e-5)
        assert math.log(w0 ** 2 / 0.5 ** 2) == pytest.approx(1.0, abs=1e-12)

    def test_no_dependence(self):
        assert solve_pairwise(0.0, 0.5) == 0.5

    def test_positive_w2(self):
        with pytest.raises(ValueError):
            solve_pairwise(1.0, 0.0)


@given(st.floats(-5, 5), st.floats(0.01, 3))
def test_log_odds_ratio_is_epsilon(eps, w2):
    assert log_odds_ratio(symmetric_potential(eps, w2)) == pytest.approx(eps, abs=1e-12)


def test_config_validation():
    with pytest.raises(ValueError):
        GeneratorConfig(2)
    with pytest.raises(ValueError):
        GeneratorConfig(4, epsilon=math.inf)


@pytest.mark.parametrize("n", [3, 4, 6, 8])
def test_feature_counts(n):
    m = generate_model(GeneratorConfig(n))
    lengths = [len(f) for f in m.features]
    core_pairs = math.comb(n - 1, 2)
    assert lengths.count(2) == 4 * (n - 1)
    assert lengths.count(3) == 8 * core_pairs
    assert len(csi_structure(GeneratorConfig(n))) == 4 * (n - 1) + 4 * core_pairs


def test_schema_names():
    assert benchmark_schema(4).names == ("X0", "X1", "X2", "Xf")


@pytest.mark.parametrize("n,expected", [(6, Fraction(280, 100)), (7, Fraction(408, 144)),
                                        (8, Fraction(560, 196))])
def test_truth_average_length(n, expected):
    truth = reference_structures(GeneratorConfig(n))[2]
    total = sum(len(f) for f in truth)
    assert Fraction(total, len(truth)) == expected


def test_reference_structures_n6():
    empty, full, truth = reference_structures(GeneratorConfig(6))
    assert len(empty) == 12 and avg_feature_length(empty) == 1.0
    assert len(full) == 64 and avg_feature_length(full) == 6.0
    assert avg_feature_length(truth) == pytest.approx(2.8)


def test_csi_structure_flag_tallies():
    fs = csi_structure(GeneratorConfig(6))
    assert avg_feature_length_in_context(fs, Context.of({5: 0})) == pytest.approx(2.8)
    assert avg_feature_length_in_context(fs, Context.of({5: 1})) == pytest.approx(2.0)


@pytest.mark.parametrize("n", [3, 4, 5, 6, 7])
def test_generated_csi_is_exact(n):
    cfg = GeneratorConfig(n, seed=n)
    joint = joint_distribution(generate_model(cfg))
    assert joint.min() > 0
    f = cfg.flag
    for a, b in combinations(range(f), 2):
        rest = [v for v in range(f) if v not in (a, b)]
        at1 = conditional_mutual_information(joint, a, b, rest, Context.of({f: 1}))
        at0 = conditional_mutual_information(joint, a, b, rest, Context.of({f: 0}))
        assert abs(at1) <= 1e-12 and at0 >= 1e-3


def test_flag_marginal_is_not_degenerate():
    joint = joint_distribution(generate_model(GeneratorConfig(6, seed=0)))
    p1 = joint[..., 1].sum()
    assert 0.05 < p1 < 0.95


def test_deterministic_and_seed_sensitive():
    a = generate_model(GeneratorConfig(5, seed=3))
    b = generate_model(GeneratorConfig(5, seed=3))
    c = generate_model(GeneratorConfig(5, seed=4))
    assert np.array_equal(a.weights, b.weights) and a.features == b.features
    assert not np.array_equal(a.weights, c.weights)


def test_w2_clamped():
    m = generate_model(GeneratorConfig(4, w2_mean=-1.0, w2_std=0.1))
    assert np.all(np.isfinite(m.weights))
    drawn = [w for f, w in zip(m.features, m.weights) if len(f) == 2 or f.value(3) == 0]
    assert np.exp(drawn).min() >= 0.01 - 1e-12
