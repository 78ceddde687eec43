import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cspc.data import Dataset, Schema
from cspc.features import Feature, FeatureSet, atomic_features, satisfies
from cspc.loglinear import (FitConfig, GibbsConfig, LogLinearModel, NumericError, all_states,
                            conditional, fit, fit_report, gibbs_sample, joint_distribution,
                            load_model, log_partition_exact, log_score, pll_gradient, probability,
                            pseudo_log_likelihood, save_model)

from conftest import enumeration


def random_model(n, rng, n_features=8, scale=1.0, arities=None):
    arities = arities or (2,) * n
    schema = Schema(tuple(f"V{i}" for i in range(n)), arities)
    possible = int(np.prod([a + 1 for a in arities])) - 1
    feats = set()
    while len(feats) < min(n_features, possible):
        k = int(rng.integers(1, n + 1))
        vs = sorted(rng.choice(n, size=k, replace=False).tolist())
        feats.add(Feature(tuple((v, int(rng.integers(0, arities[v]))) for v in vs)))
    fs = FeatureSet(feats)
    return LogLinearModel(schema, fs, rng.normal(0, scale, len(fs)))


def brute_score(m, x):
    return sum(w for f, w in zip(m.features, m.weights) if satisfies(f, x))


def brute_states(schema):
    return list(itertools.product(*[range(a) for a in schema.arities]))


def brute_conditional(m, a, x):
    scores = []
    for v in range(m.schema.arities[a]):
        y = list(x)
        y[a] = v
        scores.append(math.exp(brute_score(m, y)))
    z = sum(scores)
    return [s / z for s in scores]


def brute_pll(m, d):
    return sum(math.log(brute_conditional(m, a, row)[row[a]])
               for row in d.rows.tolist() for a in range(m.schema.n))


def random_data(schema, rows, rng):
    return Dataset(schema, np.stack([rng.integers(0, a, rows) for a in schema.arities], axis=1))


class TestScore:
    def test_zero_weights(self):
        m = LogLinearModel.zeros(Schema.binary(3), atomic_features(Schema.binary(3)))
        assert all(log_score(m, x) == 0 for x in brute_states(m.schema))

    def test_indicator(self):
        m = LogLinearModel(Schema.binary(1), FeatureSet([Feature.of({0: 1})]), [math.log(2)])
        assert log_score(m, (1,)) == pytest.approx(math.log(2)) and log_score(m, (0,)) == 0

    def test_example_unit_weights(self, example_features):
        m = LogLinearModel(Schema.binary(3), example_features, [1.0] * len(example_features))
        assert log_score(m, (0, 0, 1)) == 2.0


class TestPartition:
    def test_zero_weights(self):
        m = LogLinearModel.zeros(Schema.binary(5), atomic_features(Schema.binary(5)))
        assert log_partition_exact(m) == pytest.approx(5 * math.log(2), abs=1e-12)

    def test_two_terms(self):
        m = LogLinearModel(Schema.binary(1), FeatureSet([Feature.of({0: 1})]), [math.log(2)])
        assert log_partition_exact(m) == pytest.approx(math.log(3), abs=1e-12)

    def test_shift(self):
        rng = np.random.default_rng(0)
        base = random_model(3, rng)
        fs = base.features | atomic_features(base.schema)
        m = LogLinearModel(base.schema, fs, rng.normal(size=len(fs)))
        shifted = m.weights.copy()
        for i, f in enumerate(fs):
            if len(f) == 1 and f.bindings[0][0] == 1:
                shifted[i] += 0.7
        assert log_partition_exact(m.with_weights(shifted)) == pytest.approx(log_partition_exact(m) + 0.7,
                                                                             abs=1e-12)

    def test_cap(self):
        with pytest.raises(ValueError):
            all_states(Schema.binary(10), cap=2 ** 8)


class TestProbability:
    def test_uniform(self):
        m = LogLinearModel.zeros(Schema.binary(3), atomic_features(Schema.binary(3)))
        assert probability(m, (0, 1, 0)) == pytest.approx(1 / 8)

    def test_single_feature(self):
        m = LogLinearModel(Schema.binary(1), FeatureSet([Feature.of({0: 1})]), [math.log(2)])
        assert probability(m, (1,)) == pytest.approx(2 / 3) and probability(m, (0,)) == pytest.approx(1 / 3)

    def test_joint_matches_brute_force(self):
        m = random_model(3, np.random.default_rng(2), arities=(2, 3, 2))
        joint = joint_distribution(m)
        scores = {x: math.exp(brute_score(m, x)) for x in brute_states(m.schema)}
        z = sum(scores.values())
        for x, s in scores.items():
            assert joint[x] == pytest.approx(s / z, abs=1e-12)


class TestConditional:
    def test_zero_weights_uniform(self):
        m = LogLinearModel.zeros(Schema(("A", "B"), (3, 2)), atomic_features(Schema(("A", "B"), (3, 2))))
        assert conditional(m, 0, (1, 0)) == pytest.approx([1 / 3] * 3)

    def test_unsatisfiable_feature_cancels(self):
        m = LogLinearModel(Schema.binary(2), FeatureSet([Feature.of({0: 1, 1: 1})]), [1.0])
        assert conditional(m, 0, (0, 0)) == pytest.approx([0.5, 0.5])

    def test_matches_probability_ratios(self):
        rng = np.random.default_rng(3)
        m = random_model(3, rng)
        joint = joint_distribution(m)
        for _ in range(10):
            x = tuple(int(v) for v in rng.integers(0, 2, 3))
            a = int(rng.integers(0, 3))
            idx = list(x)
            idx[a] = slice(None)
            ratio = joint[tuple(idx)] / joint[tuple(idx)].sum()
            assert conditional(m, a, x) == pytest.approx(ratio, abs=1e-12)


class TestPLL:
    def test_zero_weights(self):
        d = enumeration(4, repeat=3)
        m = LogLinearModel.zeros(d.schema, atomic_features(d.schema))
        assert pseudo_log_likelihood(m, d) == pytest.approx(-len(d) * 4 * math.log(2))

    def test_increases_toward_zero(self):
        d = Dataset(Schema.binary(3), np.array([[1, 0, 1]]))
        fs = FeatureSet([Feature.of({0: 1, 1: 0, 2: 1})])
        values = [pseudo_log_likelihood(LogLinearModel(d.schema, fs, [w]), d) for w in (0, 1, 5, 20)]
        assert all(a < b for a, b in zip(values, values[1:])) and values[-1] < 0
        assert values[-1] > -1e-7

    def test_brute_force(self):
        rng = np.random.default_rng(4)
        m = random_model(3, rng, arities=(2, 3, 2))
        d = random_data(m.schema, 50, rng)
        assert pseudo_log_likelihood(m, d) == pytest.approx(brute_pll(m, d), abs=1e-10)


def finite_difference(m, d, h=1e-5):
    out = np.empty(len(m.weights))
    for j in range(len(out)):
        up, down = m.weights.copy(), m.weights.copy()
        up[j] += h
        down[j] -= h
        out[j] = (pseudo_log_likelihood(m.with_weights(up), d)
                  - pseudo_log_likelihood(m.with_weights(down), d)) / (2 * h)
    return out


class TestGradient:
    def test_balanced_data_zero_model(self):
        d = enumeration(3)
        fs = atomic_features(d.schema) | FeatureSet([Feature.of({0: 1, 1: 1}), Feature.of({0: 0, 2: 1})])
        assert np.allclose(pll_gradient(LogLinearModel.zeros(d.schema, fs), d), 0, atol=1e-12)

    def test_finite_difference_three_variables(self):
        rng = np.random.default_rng(5)
        m = random_model(3, rng)
        d = random_data(m.schema, 40, rng)
        g, fd = pll_gradient(m, d), finite_difference(m, d)
        assert np.all(np.abs(g - fd) <= 1e-5 * np.maximum(1.0, np.abs(fd)))

    def test_unseen_feature_pushed_down(self):
        # X1 always equals X0 in the data, so (X0=1, X1=0) is never satisfied
        d = Dataset(Schema.binary(2), np.array([[0, 0], [1, 1]] * 10))
        fs = FeatureSet([Feature.of({0: 1, 1: 0})])
        assert pll_gradient(LogLinearModel.zeros(d.schema, fs), d)[0] < 0


@given(st.integers(0, 10_000), st.integers(2, 4))
def test_gradient_matches_finite_differences(seed, n):
    rng = np.random.default_rng(seed)
    m = random_model(n, rng, n_features=int(rng.integers(1, 9)))
    d = random_data(m.schema, 30, rng)
    g, fd = pll_gradient(m, d), finite_difference(m, d)
    assert np.all(np.abs(g - fd) <= 1e-5 * np.maximum(1.0, np.abs(fd)))


@given(st.integers(0, 10_000))
def test_normalisation(seed):
    m = random_model(3, np.random.default_rng(seed), scale=3.0)
    assert joint_distribution(m).sum() == pytest.approx(1.0, abs=1e-12)


@given(st.integers(0, 10_000), st.floats(-5, 5))
def test_conditionals_invariant_to_partition_shift(seed, c):
    rng = np.random.default_rng(seed)
    base = random_model(3, rng)
    fs = base.features | atomic_features(base.schema)
    m = LogLinearModel(base.schema, fs, rng.normal(size=len(fs)))
    w = m.weights.copy()
    for i, f in enumerate(fs):
        if len(f) == 1 and f.bindings[0][0] == 2:
            w[i] += c
    shifted = m.with_weights(w)
    for x in brute_states(m.schema):
        for a in range(3):
            assert conditional(shifted, a, x) == pytest.approx(conditional(m, a, x), abs=1e-12)


class TestFit:
    def test_biased_coin(self):
        d = Dataset(Schema.binary(1), np.array([[1]] * 700 + [[0]] * 300))
        m = fit(LogLinearModel.zeros(d.schema, atomic_features(d.schema)), d)
        assert probability(m, (1,)) == pytest.approx(0.70, abs=0.02)

    @pytest.mark.parametrize("method", ["lbfgs", "gradient"])
    def test_recovers_conditionals(self, method):
        rng = np.random.default_rng(6)
        truth = random_model(3, rng)
        joint = joint_distribution(truth)
        counts = np.rint(joint * 8000).astype(int)
        rows = [x for x in brute_states(truth.schema) for _ in range(counts[x])]
        d = Dataset(truth.schema, np.array(rows))
        res = fit_report(LogLinearModel.zeros(truth.schema, truth.features), d,
                         FitConfig(method=method, max_iterations=2000))
        assert res.pll >= res.initial_pll
        for x in brute_states(truth.schema):
            for a in range(3):
                tv = 0.5 * np.abs(conditional(res.model, a, x) - conditional(truth, a, x)).sum()
                assert tv < 0.02

    def test_zero_iterations(self):
        d = enumeration(2)
        start = LogLinearModel(d.schema, atomic_features(d.schema), [0.3, -0.1, 0.2, 0.5])
        res = fit_report(start, d, FitConfig(max_iterations=0))
        assert np.array_equal(res.model.weights, start.weights) and res.iterations == 0

    def test_optimal_start_returns_immediately(self):
        d = enumeration(3)
        start = LogLinearModel.zeros(d.schema, atomic_features(d.schema))
        res = fit_report(start, d)
        assert res.converged and res.iterations == 0
        assert np.array_equal(res.model.weights, start.weights)

    def test_never_decreases(self):
        rng = np.random.default_rng(8)
        m = random_model(4, rng, scale=2.0)
        d = random_data(m.schema, 200, rng)
        for method in ("lbfgs", "gradient"):
            res = fit_report(m, d, FitConfig(method=method, max_iterations=5))
            assert res.pll >= res.initial_pll - 1e-9

    def test_non_finite_weights(self):
        d = enumeration(2)
        with pytest.raises(NumericError):
            LogLinearModel(d.schema, atomic_features(d.schema), [np.nan, 0, 0, 0])

    def test_config_validation(self):
        with pytest.raises(ValueError):
            FitConfig(gradient_tolerance=0)
        with pytest.raises(ValueError):
            FitConfig(method="newton")


class TestGibbs:
    def test_zero_weights(self):
        m = LogLinearModel.zeros(Schema.binary(4), atomic_features(Schema.binary(4)))
        d = gibbs_sample(m, GibbsConfig())
        assert len(d) == 10_000
        assert np.all((d.rows.mean(axis=0) >= 0.47) & (d.rows.mean(axis=0) <= 0.53))

    def test_strong_atomic(self):
        schema = Schema.binary(2)
        m = LogLinearModel(schema, FeatureSet([Feature.of({0: 1})]), [5.0])
        d = gibbs_sample(m, GibbsConfig(seed=2))
        assert d.rows[:, 0].mean() == pytest.approx(math.exp(5) / (1 + math.exp(5)), abs=0.02)

    def test_deterministic(self):
        m = random_model(3, np.random.default_rng(9))
        cfg = GibbsConfig(chains=3, burn_in=10, samples_per_chain=50, seed=11)
        assert gibbs_sample(m, cfg) == gibbs_sample(m, cfg)
        assert gibbs_sample(m, cfg) != gibbs_sample(m, GibbsConfig(3, 10, 50, seed=12))

    def test_ternary_values_in_range(self):
        m = random_model(3, np.random.default_rng(10), arities=(3, 2, 4))
        d = gibbs_sample(m, GibbsConfig(chains=2, burn_in=5, samples_per_chain=200))
        assert (d.rows.max(axis=0) < np.array([3, 2, 4])).all()


def test_model_json_round_trip(tmp_path):
    m = random_model(3, np.random.default_rng(12), arities=(2, 3, 2))
    save_model(m, tmp_path / "m.json")
    back = load_model(tmp_path / "m.json")
    assert back.schema == m.schema and back.features == m.features
    assert np.array_equal(back.weights, m.weights)
