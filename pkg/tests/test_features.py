import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ptner.features import BIAS, FeatureVocab, extract, token_templates, word_shape


@pytest.mark.parametrize("token,shape", [("IL-2", "AA-0"), ("p53", "a00"), ("NF-kappaB", "AA-aaaaaA"),
                                         ("(", "("), ("", "")])
def test_word_shape(token, shape):
    assert word_shape(token) == shape


class TestTemplates:
    def test_window_and_sentinels(self):
        feats = token_templates(["IL-2", "binds"], 0)
        assert feats[0] == BIAS
        assert "[-2]w=BOS" in feats and "[-1]w=BOS" in feats
        assert "[1]w=binds" in feats and "[2]w=EOS" in feats
        assert "[0]sh=AA-0" in feats and "[0]lw=il-2" in feats
        assert "[0]p3=il-" in feats and "[0]s1=2" in feats

    def test_short_tokens_skip_long_affixes(self):
        feats = token_templates(["a"], 0)
        assert "[0]p1=a" in feats and not any(f.startswith("[0]p2=") for f in feats)


class TestVocab:
    def test_bias_is_zero(self):
        assert FeatureVocab().get(BIAS) == 0

    def test_dense_ids(self):
        v = FeatureVocab(["x", "y", "x"])
        assert len(v) == 3 and v.names() == [BIAS, "x", "y"]

    def test_frozen_never_grows(self):
        v = FeatureVocab.build([["a", "b"]])
        n = len(v)
        fs = extract(["a", "zzz", "b"], v)
        assert len(v) == n and fs.feat_ids.max() < n
        with pytest.raises(RuntimeError):
            v.add("new")
        with pytest.raises(RuntimeError):
            extract(["a"], v, grow=True)

    def test_min_count(self):
        v = FeatureVocab.build([["a", "b"], ["a"]], min_count=2)
        assert "[0]w=a" in v and "[0]w=b" not in v


class TestExtract:
    def test_grow(self):
        v = FeatureVocab()
        fs = extract(["x", "y"], v, grow=True)
        assert len(v) > 1 and fs.length == 2
        assert set(fs.active(0).tolist()) == {v.get(f) for f in token_templates(["x", "y"], 0)}

    def test_ids_unique_per_position(self):
        v = FeatureVocab()
        fs = extract(["a", "a", "a"], v, grow=True)
        for t in range(3):
            ids = fs.active(t)
            assert len(ids) == len(set(ids.tolist()))

    @given(st.lists(st.text(min_size=1, max_size=6).filter(lambda s: not s.isspace()), min_size=1, max_size=8))
    def test_deterministic(self, tokens):
        v = FeatureVocab.build([tokens])
        a, b = extract(tokens, v), extract(tokens, v)
        assert np.array_equal(a.feat_ids, b.feat_ids) and np.array_equal(a.positions, b.positions)
        assert sorted(set(a.positions.tolist())) == list(range(len(tokens)))

    def test_position_local(self):
        # changing a token only changes features within the +-2 window
        v = FeatureVocab()
        a = extract(list("abcdefg"), v, grow=True)
        b = extract(list("abcXefg"), v, grow=True)
        for t in (0, 6):
            assert np.array_equal(a.active(t), b.active(t))
        assert not np.array_equal(a.active(3), b.active(3))
