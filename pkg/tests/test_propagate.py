import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ptner.corpus import Corpus, Sentence, mask_split
from ptner.crf import core
from ptner.crf.core import Model
from ptner.features import FeatureVocab, extract_sentence
from ptner.labels import EntitySpan, LabelSpace, decode_labels, encode_spans
from ptner.propagate import PropagatedSpan, cross_annotate, merge_constraints, run_propagate, \
    train_fold_models
from ptner.trainer import TrainConfig, train_regime

AB = LabelSpace(("A", "B"))


def toy_corpus(n=24, seed=0):
    """Separable: A entities are 'alphaN', B entities are 'betaN'."""
    rng = np.random.default_rng(seed)
    sents = []
    for _ in range(n):
        tokens, spans = [], []
        for _ in range(int(rng.integers(2, 6))):
            u = rng.random()
            if u < 0.3:
                spans.append(EntitySpan(len(tokens), len(tokens), 0))
                tokens.append(f"alpha{int(rng.integers(3))}")
            elif u < 0.6:
                spans.append(EntitySpan(len(tokens), len(tokens), 1))
                tokens.append(f"beta{int(rng.integers(3))}")
            else:
                tokens.append(str(rng.choice(["the", "of", "and", "in"])))
        sents.append(Sentence(tokens, encode_spans(spans, len(tokens), AB), AB.all_types))
    return Corpus(sents, AB)


def zero_models(folds, vocab):
    out = []
    for f in folds:
        m = Model.zeros(f.space, vocab)
        m.metadata["typeset"] = [f.space.types[t] for t in sorted(next(iter(f.typesets())))]
        out.append(m)
    return out


class TestMerge:
    S = AB.from_string

    def test_example(self):
        lat, conflicts = merge_constraints([4, 0], {0}, [PropagatedSpan(EntitySpan(1, 1, 1), 1)], AB)
        assert lat.allowed_sets() == [{4}, {0, 8}] and lat.size() == 2 and conflicts == 0

    def test_no_spans_is_partial(self):
        lat, _ = merge_constraints([4, 0, 0], {0}, [], AB)
        assert (lat.allowed == core.constraint_lattice([4, 0, 0], {0}, AB).allowed).all()

    def test_gold_wins_conflicts(self):
        lat, conflicts = merge_constraints([4, 0], {0}, [PropagatedSpan(EntitySpan(0, 1, 1), 1)], AB)
        assert lat.allowed_sets() == [{4}, {0, self.S("E-B")}]
        assert conflicts == 1

    def test_overlapping_sources_union(self):
        props = [PropagatedSpan(EntitySpan(0, 1, 1), 1), PropagatedSpan(EntitySpan(1, 1, 1), 2)]
        lat, _ = merge_constraints([0, 0], {0}, props, AB)
        assert lat.allowed_sets() == [{0, self.S("B-B")}, {0, self.S("E-B"), self.S("S-B")}]

    def test_hard_merge_excludes_o(self):
        lat, _ = merge_constraints([0, 0], {0}, [PropagatedSpan(EntitySpan(1, 1, 1), 1)], AB, hard=True)
        assert lat.allowed_sets()[1] == {8}

    @given(st.lists(st.integers(0, 8), min_size=1, max_size=6), st.data())
    @settings(max_examples=150)
    def test_subset_of_partial(self, y, data):
        from ptner.labels import project
        gold = project(y, {0}, AB)
        T = len(gold)
        props = []
        for _ in range(data.draw(st.integers(0, 3))):
            s = data.draw(st.integers(0, T - 1))
            e = data.draw(st.integers(s, T - 1))
            props.append(PropagatedSpan(EntitySpan(s, e, 1), 1))
        for hard in (False, True):
            lat, _ = merge_constraints(gold, {0}, props, AB, hard)
            base = core.constraint_lattice(gold, {0}, AB).allowed
            assert (lat.allowed <= base).all()
            assert lat.contains(gold) or any(p.span.start <= t <= p.span.end
                                             for t in range(T) for p in props)


class TestCrossAnnotate:
    def test_single_fold_unchanged(self):
        folds = mask_split(toy_corpus(6), 1, 0)
        vocab = FeatureVocab.build(s.tokens for s in folds[0])
        out = cross_annotate(folds, zero_models(folds, vocab), vocab)
        assert out[0].n_propagated() == 0 and out[0].corpus is folds[0]

    def test_silent_model_adds_nothing(self):
        folds = mask_split(toy_corpus(), 2, 0)
        vocab = FeatureVocab.build(s.tokens for f in folds for s in f)
        out = cross_annotate(folds, zero_models(folds, vocab), vocab)
        assert sum(a.n_propagated() for a in out) == 0

    def test_typeset_mismatch_rejected(self):
        folds = mask_split(toy_corpus(), 2, 0)
        vocab = FeatureVocab.build(s.tokens for f in folds for s in f)
        models = zero_models(folds, vocab)[::-1]
        with pytest.raises(ValueError, match="trained on"):
            cross_annotate(folds, models, vocab)
        with pytest.raises(ValueError):
            cross_annotate(folds, models[:1], vocab)

    def test_two_fold_toy_recovers_masked_spans(self):
        full = toy_corpus(120)
        folds = mask_split(full, 2, 0)
        vocab = FeatureVocab.build(s.tokens for s in full)
        cfg = TrainConfig(batch_size=8, eta0=0.3, epochs=40)
        models = train_fold_models(folds, vocab, cfg)
        # premise: each fold model recovers its own type exactly on the whole corpus
        for j, m in enumerate(models):
            for s in full:
                pred = decode_labels(core.decode(extract_sentence(s, vocab), m), AB)
                assert [p for p in pred if p.type == j] == \
                    [g for g in decode_labels(s.gold, AB) if g.type == j]
        annotated = cross_annotate(folds, models, vocab)
        by_tokens = {s.tokens: s for s in full}
        for i, af in enumerate(annotated):
            other = 1 - i
            for s, prop in zip(af.corpus, af.propagated):
                masked = [sp for sp in decode_labels(by_tokens[s.tokens].gold, AB) if sp.type == other]
                assert sorted(p.span for p in prop) == masked
                assert all(p.source == other for p in prop)


class TestRun:
    def test_zero_propagation_equals_partial(self):
        folds = mask_split(toy_corpus(), 2, 0)
        vocab = FeatureVocab.build(s.tokens for f in folds for s in f)
        cfg = TrainConfig(batch_size=4, epochs=3)
        run = run_propagate(folds, vocab, cfg, fold_models=zero_models(folds, vocab))
        partial = train_regime(folds, "partial", vocab, cfg).model
        for a, b in zip(run.result.model.params(), partial.params()):
            assert np.array_equal(a, b)
        assert run.result.model.metadata["propagate"]["propagated_spans"] == 0
