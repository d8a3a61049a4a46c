import numpy as np
import pytest

from ptner.crf import core
from ptner.crf.core import Model
from ptner.evaluate import Counts, evaluate, f1_report, partial_error, sentence_error
from ptner.features import FeatureVocab, FeaturizedSentence
from ptner.labels import EntitySpan, LabelSpace, encode_spans, project
from ptner.theorem import oracle_errors, plant_gold, random_model, random_sentence

AB = LabelSpace(("A", "B"))


def enc(spans, T):
    return encode_spans([EntitySpan(*s) for s in spans], T, AB)


class TestF1:
    def test_partial_recall(self):
        r = f1_report([enc([(0, 2, 0)], 5)], [enc([(0, 2, 0), (4, 4, 1)], 5)], AB)
        assert r.micro.precision == 1 and r.micro.recall == 0.5
        assert r.micro.f1 == pytest.approx(2 / 3)

    def test_perfect(self):
        y = enc([(0, 1, 0), (3, 3, 1)], 4)
        r = f1_report([y], [y], AB)
        assert r.micro.f1 == 1 and all(c.f1 == 1 for c in r.per_type.values())

    def test_boundary_mismatch(self):
        r = f1_report([enc([(0, 1, 0)], 3)], [enc([(0, 2, 0)], 3)], AB)
        c = r.per_type["A"]
        assert (c.tp, c.fp, c.fn) == (0, 1, 1)

    def test_micro_pools_counts(self):
        rng = np.random.default_rng(0)
        gold = [rng.integers(0, 9, 6).tolist() for _ in range(30)]
        pred = [rng.integers(0, 9, 6).tolist() for _ in range(30)]
        r = f1_report(pred, gold, AB)
        tp = sum(c.tp for c in r.per_type.values())
        assert r.micro.tp == tp and r.micro.f1 == pytest.approx(Counts(tp, r.micro.fp, r.micro.fn).f1)
        assert r.repairs > 0

    def test_misaligned(self):
        with pytest.raises(ValueError):
            f1_report([[0]], [[0], [0]], AB)
        with pytest.raises(ValueError):
            f1_report([[0, 0]], [[0]], AB)

    def test_empty_counts(self):
        assert Counts().f1 == 0 and Counts().precision == 0


def zero_setup(T=2):
    model = Model.zeros(AB, FeatureVocab(["f"]))
    fs = FeaturizedSentence(np.zeros(T, dtype=np.int64), np.arange(T), T, np.zeros(T, dtype=np.int64),
                            AB.all_types)
    return model, fs


class TestErrors:
    def test_zero_model_tie_is_error(self):
        model, fs = zero_setup()
        assert sentence_error(fs, [4, 0], model) == 1
        assert partial_error(fs, [4, 0], {0}, model) == 1

    def test_separating_model(self):
        model, fs = zero_setup(3)
        gold = [1, 3, 8]
        model.emission[0] = -5.0
        model.emission[0, gold] = 0.0
        model.transitions[:] = -5.0
        model.transitions[1, 3] = model.transitions[3, 8] = 10.0
        assert sentence_error(fs, gold, model) == 0
        assert partial_error(fs, gold, {1}, model) == 0

    def test_full_typeset_equals_sentence_error(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            model = random_model(rng, AB, kind="integer" if rng.random() < 0.5 else "uniform")
            fs = random_sentence(rng, int(rng.integers(1, 6)), AB, 6, generic=True)
            assert partial_error(fs, fs.gold, {0, 1}, model) == sentence_error(fs, fs.gold, model)

    def test_projection_invariance(self):
        rng = np.random.default_rng(1)
        for _ in range(200):
            model = random_model(rng, AB)
            fs = random_sentence(rng, int(rng.integers(1, 6)), AB, 6)
            ts = {int(rng.integers(0, 2))}
            assert partial_error(fs, fs.gold, ts, model) == partial_error(fs, project(fs.gold, ts, AB), ts, model)

    def test_partial_below_sentence_error(self):
        rng = np.random.default_rng(2)
        for _ in range(200):
            model = random_model(rng, AB)
            fs = random_sentence(rng, int(rng.integers(1, 6)), AB, 6)
            plant_gold(rng, model, fs, 2.0)
            d = sentence_error(fs, fs.gold, model)
            assert all(partial_error(fs, fs.gold, ts, model) <= d for ts in ({0}, {1}, {0, 1}, set()))

    def test_match_enumeration_oracle(self):
        rng = np.random.default_rng(3)
        mismatches = 0
        for i in range(1000):
            kind = ("uniform", "integer", "zero")[i % 3]
            model = random_model(rng, AB, kind=kind)
            fs = random_sentence(rng, int(rng.integers(1, 6)), AB, 6, generic=bool(i % 2))
            if i % 4 == 0:
                plant_gold(rng, model, fs)
            typesets = [frozenset([0]), frozenset([1])]
            scores = core.score_table(fs, model)
            o_all, o_parts = oracle_errors(scores, fs.gold, typesets, AB)
            dp = [partial_error(fs, fs.gold, ts, model) for ts in typesets]
            mismatches += o_all != sentence_error(fs, fs.gold, model) or o_parts != dp
        assert mismatches == 0


class TestEvaluate:
    def test_report(self):
        rng = np.random.default_rng(4)
        model = random_model(rng, AB)
        fsents = [random_sentence(rng, 4, AB, 6) for _ in range(20)]
        report, preds = evaluate(fsents, model)
        assert len(preds) == 20 and report.sentences == 20
        assert set(report.partial_errors) == {"A", "B"}
        assert 0 <= report.e_all <= 1
        out = report.to_json()
        assert out["micro"]["f1"] == report.micro.f1 and out["error_counts"]["all"] == round(20 * report.e_all)

    def test_without_errors(self):
        rng = np.random.default_rng(5)
        report, _ = evaluate([random_sentence(rng, 3, AB, 6)], random_model(rng, AB), with_errors=False)
        assert report.e_all is None and "e_all" not in report.to_json()
