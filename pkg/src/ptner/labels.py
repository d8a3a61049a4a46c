"""Entity types, IOBES/IOB2 label codecs and type projection.

Labels are dense integers. ``O`` is always 0. Under IOBES the four labels of
type ``t`` are ``B=4t+1, I=4t+2, E=4t+3, S=4t+4``; under IOB2 the two labels of
type ``t`` are ``B=2t+1, I=2t+2``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

logger = logging.getLogger(__name__)

IOBES = "IOBES"
IOB2 = "IOB2"

_KINDS = {IOBES: "BIES", IOB2: "BI"}

# Customary ordering of the JNLPBA types; both spellings seen in the wild.
JNLPBA_ORDER = ("DNA", "protein", "cell_type", "cell_line", "RNA")
_JNLPBA_ALIASES = {"cell-type": "cell_type", "cell-line": "cell_line"}


class EntitySpan(NamedTuple):
    start: int
    end: int  # inclusive
    type: int


class LabelError(ValueError):
    pass


def canonical_type_order(names: Iterable[str]) -> list[str]:
    """JNLPBA order when every name is a JNLPBA type, lexicographic otherwise."""
    names = sorted(set(names))
    rank = {n: i for i, n in enumerate(JNLPBA_ORDER)}
    if names and all(_JNLPBA_ALIASES.get(n, n) in rank for n in names):
        return sorted(names, key=lambda n: rank[_JNLPBA_ALIASES.get(n, n)])
    return names


@dataclass(frozen=True)
class LabelSpace:
    types: tuple[str, ...]
    schema: str = IOBES
    _index: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "types", tuple(self.types))
        if self.schema not in _KINDS:
            raise LabelError(f"unknown schema {self.schema!r}")
        if len(set(self.types)) != len(self.types):
            raise LabelError(f"duplicate type names in {self.types}")
        for name in self.types:
            if not name or any(c.isspace() for c in name):
                raise LabelError(f"invalid type name {name!r}")
        object.__setattr__(self, "_index", {n: i for i, n in enumerate(self.types)})

    @classmethod
    def from_names(cls, names: Iterable[str], schema: str = IOBES) -> "LabelSpace":
        return cls(tuple(canonical_type_order(names)), schema)

    @property
    def kinds(self) -> str:
        return _KINDS[self.schema]

    @property
    def n_types(self) -> int:
        return len(self.types)

    @property
    def n_labels(self) -> int:
        return len(self.kinds) * len(self.types) + 1

    @property
    def all_types(self) -> frozenset[int]:
        return frozenset(range(len(self.types)))

    def type_index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise LabelError(f"unknown entity type {name!r}") from None

    def typeset(self, names: Iterable[str]) -> frozenset[int]:
        return frozenset(self.type_index(n) for n in names)

    def label_id(self, kind: str, type_: int | None = None) -> int:
        if kind == "O":
            return 0
        k = self.kinds.find(kind)
        if k < 0 or type_ is None or not 0 <= type_ < len(self.types):
            raise LabelError(f"no label {kind}-{type_} under {self.schema}")
        return len(self.kinds) * type_ + k + 1

    def kind_of(self, label: int) -> str:
        if label == 0:
            return "O"
        return self.kinds[(label - 1) % len(self.kinds)]

    def type_of(self, label: int) -> int | None:
        if label == 0:
            return None
        return (label - 1) // len(self.kinds)

    def label_types(self) -> np.ndarray:
        """Type index of every label id, -1 for O."""
        out = np.full(self.n_labels, -1, dtype=np.int64)
        out[1:] = np.arange(self.n_labels - 1) // len(self.kinds)
        return out

    def to_string(self, label: int) -> str:
        if label == 0:
            return "O"
        return f"{self.kind_of(label)}-{self.types[self.type_of(label)]}"

    def parse(self, text: str) -> tuple[str, int | None]:
        """Parse a label string into (kind, type) without schema checks on the kind.

        Any of B/I/E/S is accepted so that IOB2 input can be read under IOBES
        and vice versa; the corpus reader re-encodes via spans.
        """
        if text == "O":
            return "O", None
        kind, sep, name = text.partition("-")
        if not sep or kind not in ("B", "I", "E", "S"):
            raise LabelError(f"malformed label {text!r}")
        return kind, self.type_index(name)

    def from_string(self, text: str) -> int:
        kind, type_ = self.parse(text)
        return self.label_id(kind, type_)

    def transition_mask(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Boolean (start, transitions, stop) masks of schema-valid moves."""
        n = self.n_labels
        kinds = [self.kind_of(i) for i in range(n)]
        types = [self.type_of(i) for i in range(n)]
        trans = np.zeros((n, n), dtype=bool)
        if self.schema == IOBES:
            start = np.array([k in "OBS" for k in kinds])
            stop = np.array([k in "OES" for k in kinds])
            for a in range(n):
                for b in range(n):
                    if kinds[a] in "BI":
                        trans[a, b] = kinds[b] in "IE" and types[a] == types[b]
                    else:
                        trans[a, b] = kinds[b] in "OBS"
        else:
            start = np.array([k in "OB" for k in kinds])
            stop = np.ones(n, dtype=bool)
            for a in range(n):
                for b in range(n):
                    if kinds[b] == "I":
                        trans[a, b] = kinds[a] in "BI" and types[a] == types[b]
                    else:
                        trans[a, b] = True
        return start, trans, stop


def encode_spans(spans: Sequence[EntitySpan], length: int, space: LabelSpace) -> list[int]:
    labels = [0] * length
    ordered = sorted(spans, key=lambda s: (s.start, s.end))
    for i, sp in enumerate(ordered):
        if not 0 <= sp.start <= sp.end < length:
            raise LabelError(f"span {tuple(sp)} out of range for length {length}")
        if not 0 <= sp.type < space.n_types:
            raise LabelError(f"span {tuple(sp)} has unknown type")
        if i and ordered[i - 1].end >= sp.start:
            raise LabelError(f"overlapping spans {tuple(ordered[i - 1])} and {tuple(sp)}")
        if space.schema == IOBES and sp.start == sp.end:
            labels[sp.start] = space.label_id("S", sp.type)
            continue
        labels[sp.start] = space.label_id("B", sp.type)
        for t in range(sp.start + 1, sp.end + 1):
            labels[t] = space.label_id("I", sp.type)
        if space.schema == IOBES:
            labels[sp.end] = space.label_id("E", sp.type)
    return labels


def _chunks(tags: Sequence[tuple[str, int | None]]) -> list[tuple[int, int, int]]:
    """conlleval-style chunking over (kind, type) pairs."""
    spans = []
    start = None
    prev_kind, prev_type = "O", None
    for t, (kind, type_) in enumerate(list(tags) + [("O", None)]):
        if start is not None and (
            prev_kind in "ES" or (prev_kind in "BI" and kind in "BSO") or prev_type != type_
        ):
            spans.append((start, t - 1, prev_type))
            start = None
        if kind != "O" and (kind in "BS" or prev_kind in "ESO" or prev_type != type_):
            start = t
        prev_kind, prev_type = kind, type_
    return spans


def _well_formed(kinds: str, schema: str) -> bool:
    if schema == IOBES:
        if len(kinds) == 1:
            return kinds == "S"
        return kinds[0] == "B" and kinds[-1] == "E" and set(kinds[1:-1]) <= {"I"}
    return kinds[0] == "B" and set(kinds[1:]) <= {"I"}


def _decode(labels: Sequence[int], space: LabelSpace) -> tuple[list[EntitySpan], int]:
    tags = [(space.kind_of(l), space.type_of(l)) for l in labels]
    spans, repairs = [], 0
    for start, end, type_ in _chunks(tags):
        kinds = "".join(k for k, _ in tags[start:end + 1])
        if not _well_formed(kinds, space.schema):
            repairs += 1
            logger.debug("repaired ill-formed chunk %s at %d..%d", kinds, start, end)
        spans.append(EntitySpan(start, end, type_))
    return spans, repairs


def decode_labels(labels: Sequence[int], space: LabelSpace) -> list[EntitySpan]:
    """Spans of a label sequence; total on ill-formed input.

    A maximal same-type run that starts at B/S (or wherever a run must start)
    and ends at E/S (or wherever a run must end) becomes one span, following
    the conlleval chunk rules. Both schemas decode through the same rules, so
    IOB2 input read under IOBES comes out right.
    """
    return _decode(labels, space)[0]


def spans_from_tags(tags: Sequence[tuple[str, int | None]]) -> list[EntitySpan]:
    """Spans of raw (kind, type) pairs, any of B/I/E/S accepted regardless of schema."""
    return [EntitySpan(s, e, t) for s, e, t in _chunks(tags)]


def count_repairs(labels: Sequence[int], space: LabelSpace) -> int:
    """Number of chunks in ``labels`` that are not well formed under the schema."""
    return _decode(labels, space)[1]


def _check_typeset(target: Iterable[int], space: LabelSpace) -> frozenset[int]:
    target = frozenset(target)
    if not target <= space.all_types:
        raise LabelError(f"type set {sorted(target)} not within {space.n_types} types")
    return target


def project(labels: Sequence[int], target: Iterable[int], space: LabelSpace) -> list[int]:
    """Replace every entity label whose type is outside ``target`` with O."""
    target = _check_typeset(target, space)
    keep = np.zeros(space.n_labels, dtype=bool)
    keep[0] = True
    types = space.label_types()
    for t in target:
        keep[types == t] = True
    out = []
    for l in labels:
        if not 0 <= l < space.n_labels:
            raise LabelError(f"label id {l} outside label space")
        out.append(int(l) if keep[l] else 0)
    return out


def typeset_names(typeset: Iterable[int], space: LabelSpace) -> list[str]:
    return [space.types[t] for t in sorted(typeset)]
