"""Model file: a zip container of named sections.

Sections (all little-endian, ``.npy`` entries written without pickling):

``header.json``          format name, format version, schema, type names,
                         dimensions, hard-transition flag, run metadata
``vocab.json``           feature strings, list index = feature id
``emission_rows.npy``    ``<i8`` feature ids of non-zero emission weights
``emission_cols.npy``    ``<i8`` label ids
``emission_vals.npy``    ``<f8`` weights
``transitions.npy``      ``<f8`` (L, L)
``start.npy``, ``stop.npy``  ``<f8`` (L,)

Entries carry a fixed timestamp so identical models give identical bytes.
"""
from __future__ import annotations

import io
import json
import zipfile
from pathlib import Path

import numpy as np

from .crf.core import Model
from .features import FeatureVocab
from .labels import LabelSpace

FORMAT = "ptner-model"
VERSION = 1
_EPOCH = (1980, 1, 1, 0, 0, 0)


def _put(zf: zipfile.ZipFile, name: str, data: bytes) -> None:
    info = zipfile.ZipInfo(name, date_time=_EPOCH)
    info.compress_type = zipfile.ZIP_DEFLATED
    info.external_attr = 0o644 << 16
    zf.writestr(info, data)


def _npy(arr: np.ndarray, dtype: str) -> bytes:
    buf = io.BytesIO()
    np.lib.format.write_array(buf, np.ascontiguousarray(arr, dtype=dtype), allow_pickle=False)
    return buf.getvalue()


def save_model(model: Model, path: str | Path) -> None:
    rows, cols = np.nonzero(model.emission)
    header = {
        "format": FORMAT,
        "version": VERSION,
        "schema": model.space.schema,
        "types": list(model.space.types),
        "n_features": len(model.vocab),
        "n_labels": model.space.n_labels,
        "hard_transitions": model.hard_transitions,
        "metadata": model.metadata,
    }
    path = Path(path)
    try:
        with zipfile.ZipFile(path, "w") as zf:
            _put(zf, "header.json", json.dumps(header, indent=2, sort_keys=True, default=str).encode())
            _put(zf, "vocab.json", json.dumps(model.vocab.names(), ensure_ascii=False).encode())
            _put(zf, "emission_rows.npy", _npy(rows, "<i8"))
            _put(zf, "emission_cols.npy", _npy(cols, "<i8"))
            _put(zf, "emission_vals.npy", _npy(model.emission[rows, cols], "<f8"))
            _put(zf, "transitions.npy", _npy(model.transitions, "<f8"))
            _put(zf, "start.npy", _npy(model.start, "<f8"))
            _put(zf, "stop.npy", _npy(model.stop, "<f8"))
    except OSError as err:
        raise OSError(f"cannot write model {path}: {err}") from err


def load_model(path: str | Path) -> Model:
    path = Path(path)
    with zipfile.ZipFile(path) as zf:
        header = json.loads(zf.read("header.json"))
        if header.get("format") != FORMAT or header.get("version") != VERSION:
            raise ValueError(f"{path}: not a {FORMAT} v{VERSION} file")

        def arr(name):
            return np.lib.format.read_array(io.BytesIO(zf.read(name)), allow_pickle=False).astype(np.float64)

        def idx(name):
            return np.lib.format.read_array(io.BytesIO(zf.read(name)), allow_pickle=False).astype(np.int64)

        space = LabelSpace(tuple(header["types"]), header["schema"])
        vocab = FeatureVocab()
        names = json.loads(zf.read("vocab.json"))
        for name in names:
            vocab.add(name)
        vocab.freeze()
        if len(vocab) != header["n_features"] or space.n_labels != header["n_labels"]:
            raise ValueError(f"{path}: header dimensions disagree with sections")
        emission = np.zeros((len(vocab), space.n_labels))
        emission[idx("emission_rows.npy"), idx("emission_cols.npy")] = arr("emission_vals.npy")
        return Model(space, vocab, emission, arr("transitions.npy"), arr("start.npy"),
                     arr("stop.npy"), bool(header["hard_transitions"]), header.get("metadata", {}))
