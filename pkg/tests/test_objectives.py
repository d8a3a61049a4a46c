import numpy as np
import pytest

from conftest import finite_difference_error, partial_sentence
from ptner.crf import core
from ptner.crf.core import Model
from ptner.features import FeatureVocab, FeaturizedSentence
from ptner.objectives import (GradAccumulator, gold_lattice, lattice_nll, marginal_nll, partial_lattice,
                              regime, standard_nll)
from ptner.theorem import random_model, random_sentence


def sentence(gold, typeset, ids=None, pos=None):
    T = len(gold)
    ids = np.arange(T) % 3 if ids is None else np.asarray(ids)
    pos = np.arange(T) if pos is None else np.asarray(pos)
    return FeaturizedSentence(ids, pos, T, np.asarray(gold, dtype=np.int64), frozenset(typeset))


@pytest.fixture
def zero_model(ab):
    return Model.zeros(ab, FeatureVocab(["f1", "f2"]))


class TestKnownValues:
    def test_zero_model_single_token(self, zero_model):
        loss, _ = standard_nll(sentence([4], {0, 1}), zero_model)
        assert loss == pytest.approx(np.log(9), abs=1e-12)

    def test_marginal_five_of_81(self, zero_model):
        loss, _ = marginal_nll(sentence([4, 0], {0}), zero_model)
        assert loss == pytest.approx(np.log(81 / 5), abs=1e-12)
        assert round(loss, 4) == 2.7850

    def test_gold_weight_limit(self, zero_model):
        fs = sentence([4, 0], {0, 1})
        model = zero_model.copy()
        losses = []
        for w in (0.0, 5.0, 20.0, 40.0):
            model.emission[0, 4] = model.emission[1, 0] = w
            losses.append(standard_nll(fs, model)[0])
        assert all(a > b for a, b in zip(losses, losses[1:]))
        assert losses[-1] < 1e-12


class TestGradients:
    @pytest.mark.parametrize("objective", [standard_nll, marginal_nll], ids=["standard", "marginal"])
    def test_finite_differences(self, objective, ab):
        rng = np.random.default_rng(11)
        for _ in range(25):
            model = random_model(rng, ab, 4)
            fs = partial_sentence(rng, ab, int(rng.integers(1, 6)), 4)
            if objective is standard_nll:
                fs = random_sentence(rng, fs.length, ab, 4)
            assert finite_difference_error(objective, fs, model) < 1e-4

    def test_accumulator_matches_dense_sum(self, ab):
        rng = np.random.default_rng(2)
        model = random_model(rng, ab)
        acc = GradAccumulator(model)
        expect = [np.zeros_like(p) for p in model.params()]
        for _ in range(5):
            _, g = marginal_nll(partial_sentence(rng, ab, 4), model)
            acc.add(g, 0.5)
            for e, d in zip(expect, g.dense(model)):
                e += 0.5 * d
        for a, e in zip(acc.grads, expect):
            np.testing.assert_allclose(a, e, atol=1e-12)
        assert acc.norm() == pytest.approx(np.sqrt(sum((e ** 2).sum() for e in expect)))
        acc.clear()
        assert acc.count == 0 and acc.norm() == 0


class TestReductions:
    def test_marginal_equals_standard_on_full_typeset(self, ab):
        rng = np.random.default_rng(4)
        for _ in range(100):
            model = random_model(rng, ab)
            fs = random_sentence(rng, int(rng.integers(1, 7)), ab, 6)
            l1, g1 = standard_nll(fs, model)
            l2, g2 = marginal_nll(fs, model)
            assert abs(l1 - l2) < 1e-12
            for a, b in zip(g1.dense(model), g2.dense(model)):
                assert np.abs(a - b).max() < 1e-12

    def test_losses_nonnegative(self, ab):
        rng = np.random.default_rng(5)
        for _ in range(100):
            model = random_model(rng, ab)
            fs = partial_sentence(rng, ab, int(rng.integers(1, 7)))
            assert marginal_nll(fs, model)[0] >= -1e-12
            assert standard_nll(FeaturizedSentence(fs.feat_ids, fs.positions, fs.length, fs.gold, ab.all_types),
                                model)[0] >= -1e-12

    def test_full_lattice_target_gives_zero_loss(self, ab):
        rng = np.random.default_rng(6)
        model = random_model(rng, ab)
        fs = sentence([0, 0, 0], set())
        loss, g = lattice_nll(fs, model, core.Lattice.full(3, 9))
        assert abs(loss) < 1e-12
        assert max(np.abs(d).max() for d in g.dense(model)) < 1e-12


class TestRegimes:
    def test_concat_uses_singleton(self, ab):
        fs = sentence([4, 0], {0})
        lat = regime("concat")(fs, ab)
        assert lat.size() == 1 and lat.contains([4, 0])

    def test_partial_uses_constraint_lattice(self, ab):
        assert regime("partial")(sentence([4, 0], {0}), ab).size() == 5

    @pytest.mark.parametrize("name", ["standard", "one_type"])
    def test_standard_like(self, name, ab):
        assert regime(name) is gold_lattice

    def test_propagate_base_is_partial(self):
        assert regime("propagate") is partial_lattice

    def test_unknown(self):
        with pytest.raises(ValueError):
            regime("bogus")
