import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ptner.labels import (IOB2, EntitySpan, LabelError, LabelSpace, canonical_type_order, count_repairs,
                          decode_labels, encode_spans, project)

AB = LabelSpace(("A", "B"))
S = AB.from_string


def labels_of(*names):
    return [S(n) for n in names]


class TestLabelSpace:
    def test_iobes_ids(self):
        assert AB.n_labels == 9
        assert [AB.to_string(i) for i in range(9)] == [
            "O", "B-A", "I-A", "E-A", "S-A", "B-B", "I-B", "E-B", "S-B"]

    def test_iob2_ids(self):
        sp = LabelSpace(("A", "B", "C"), IOB2)
        assert sp.n_labels == 7
        assert sp.label_id("I", 2) == 6

    def test_string_round_trip(self):
        for i in range(AB.n_labels):
            assert AB.from_string(AB.to_string(i)) == i

    @pytest.mark.parametrize("text", ["X-A", "B-C", "BA", "b-A", ""])
    def test_malformed_labels_rejected(self, text):
        with pytest.raises(LabelError):
            AB.from_string(text)

    def test_duplicate_types_rejected(self):
        with pytest.raises(LabelError):
            LabelSpace(("A", "A"))

    def test_type_order(self):
        assert canonical_type_order(["RNA", "protein", "DNA"]) == ["DNA", "protein", "RNA"]
        assert canonical_type_order(["cell-line", "DNA"]) == ["DNA", "cell-line"]
        assert canonical_type_order(["zeta", "DNA", "alpha"]) == ["DNA", "alpha", "zeta"]

    def test_transition_mask_iobes(self):
        start, trans, stop = AB.transition_mask()
        assert start[S("B-A")] and not start[S("I-A")] and not start[S("E-B")]
        assert trans[S("B-A"), S("E-A")] and not trans[S("B-A"), S("E-B")]
        assert not trans[S("O"), S("I-A")] and trans[S("E-A"), S("S-B")]
        assert stop[S("E-A")] and not stop[S("B-B")]


class TestEncodeDecode:
    def test_empty(self):
        assert encode_spans([], 3, AB) == [0, 0, 0]

    def test_single_token_is_s(self):
        assert encode_spans([EntitySpan(1, 1, 0)], 3, AB) == labels_of("O", "S-A", "O")

    def test_multi_token(self):
        got = encode_spans([EntitySpan(0, 2, 0), EntitySpan(3, 3, 1)], 4, AB)
        assert got == labels_of("B-A", "I-A", "E-A", "S-B")

    def test_iob2_encoding(self):
        sp = LabelSpace(("A", "B"), IOB2)
        got = encode_spans([EntitySpan(0, 1, 0), EntitySpan(2, 2, 1)], 3, sp)
        assert [sp.to_string(g) for g in got] == ["B-A", "I-A", "B-B"]

    def test_overlap_rejected_with_pair(self):
        with pytest.raises(LabelError, match=r"\(0, 2, 0\).*\(2, 3, 1\)"):
            encode_spans([EntitySpan(0, 2, 0), EntitySpan(2, 3, 1)], 5, AB)

    @pytest.mark.parametrize("span", [EntitySpan(2, 3, 0), EntitySpan(-1, 0, 0), EntitySpan(1, 0, 0)])
    def test_out_of_range_rejected(self, span):
        with pytest.raises(LabelError):
            encode_spans([span], 3, AB)

    def test_decode_examples(self):
        assert decode_labels(labels_of("B-A", "I-A", "E-A", "O"), AB) == [(0, 2, 0)]
        assert decode_labels(labels_of("O", "S-B", "O"), AB) == [(1, 1, 1)]

    def test_repair_run_without_begin(self):
        lab = labels_of("I-A", "E-A", "O")
        assert decode_labels(lab, AB) == [(0, 1, 0)]
        assert count_repairs(lab, AB) == 1

    def test_repairs(self):
        # type switch mid-run splits; dangling B becomes a single-token span
        assert decode_labels(labels_of("B-A", "I-B", "E-B"), AB) == [(0, 0, 0), (1, 2, 1)]
        assert decode_labels(labels_of("B-A", "O", "E-A"), AB) == [(0, 0, 0), (2, 2, 0)]
        assert decode_labels(labels_of("S-A", "I-A"), AB) == [(0, 0, 0), (1, 1, 0)]
        assert count_repairs(labels_of("B-A", "I-A", "E-A"), AB) == 0

    def test_decode_is_total(self):
        for seq in itertools.product(range(AB.n_labels), repeat=3):
            spans = decode_labels(seq, AB)
            # spans are disjoint, ordered and cover exactly the non-O positions
            covered = [t for s in spans for t in range(s.start, s.end + 1)]
            assert covered == sorted(covered)
            assert covered == [t for t, l in enumerate(seq) if l]


@st.composite
def span_sets(draw, n_types=3, max_len=12):
    length = draw(st.integers(1, max_len))
    spans, t = [], 0
    while t < length:
        if draw(st.booleans()):
            end = draw(st.integers(t, min(length - 1, t + 3)))
            spans.append(EntitySpan(t, end, draw(st.integers(0, n_types - 1))))
            t = end + 1 + draw(st.integers(0, 2))
        else:
            t += 1
    return spans, length


class TestProperties:
    SPACE = LabelSpace(("A", "B", "C"))

    @given(span_sets())
    def test_decode_encode_round_trip(self, data):
        spans, length = data
        labels = encode_spans(spans, length, self.SPACE)
        assert decode_labels(labels, self.SPACE) == spans
        assert count_repairs(labels, self.SPACE) == 0

    @given(span_sets())
    def test_iob2_round_trip(self, data):
        spans, length = data
        sp = LabelSpace(self.SPACE.types, IOB2)
        assert decode_labels(encode_spans(spans, length, sp), sp) == spans

    @given(span_sets(), st.sets(st.integers(0, 2)), st.sets(st.integers(0, 2)))
    @settings(max_examples=200)
    def test_projection_algebra(self, data, t1, t2):
        y = encode_spans(*data, self.SPACE)
        p1 = project(y, t1, self.SPACE)
        assert project(p1, t1, self.SPACE) == p1
        assert project(p1, t2, self.SPACE) == project(y, t1 & t2, self.SPACE)
        # projecting a well-formed sequence drops whole spans
        assert decode_labels(p1, self.SPACE) == [s for s in data[0] if s.type in t1]


class TestProject:
    def test_example(self):
        y = labels_of("B-A", "E-A", "O", "S-B")
        assert project(y, {0}, AB) == labels_of("B-A", "E-A", "O", "O")

    def test_identity(self):
        y = labels_of("B-A", "E-A", "O", "S-B")
        assert project(y, {0, 1}, AB) == y

    def test_exhaustive_idempotence(self):
        for y in itertools.product(range(9), repeat=3):
            once = project(y, {0}, AB)
            assert project(once, {0}, AB) == once

    def test_bad_typeset(self):
        with pytest.raises(LabelError):
            project([0], {2}, AB)
