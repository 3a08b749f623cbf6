"""Versioned, checksummed model files.

A model file is UTF-8 JSON::

    {"format": "manas-model", "version": 1, "algorithm": "rfc",
     "meta": {...}, "vocabulary": [...], "vocabulary_sha256": "...",
     "preprocess": {...},
     "arrays": {"name": {"dtype": "float64", "shape": [..], "data": [..]}},
     "checksum": "<sha256 of the canonical JSON of every other field>"}

Floats are written with ``repr`` precision so a load reproduces every
parameter bit for bit.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .classical import MODEL_CLASSES, ClassicalModel
from .errors import CorruptModelFile, MissingFile, UnsupportedVersion
from .neural import N_SPECIAL, RNNModel, TransformerModel
from .preprocess import PreprocessConfig
from .vectorize import Vocabulary

FORMAT_TAG = "manas-model"
FORMAT_VERSION = 1
NEURAL_ALGORITHMS = {"rnn": RNNModel, "bert": TransformerModel}


@dataclass(frozen=True)
class SavedModel:
    algorithm: str
    model: object
    vocabulary: Vocabulary
    preprocess: PreprocessConfig | None


def _canonical(obj) -> bytes:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, separators=(",", ":")).encode("utf-8")


def _sha256(obj) -> str:
    return hashlib.sha256(_canonical(obj)).hexdigest()


def _encode_array(a: np.ndarray) -> dict:
    a = np.asarray(a)
    if np.issubdtype(a.dtype, np.integer):
        dtype, data = "int64", [int(x) for x in a.ravel()]
    else:
        dtype, data = "float64", [float(x) for x in a.astype(np.float64).ravel()]
    return {"dtype": dtype, "shape": list(a.shape), "data": data}


def _decode_array(d: dict) -> np.ndarray:
    dtype = {"int64": np.int64, "float64": np.float64}[d["dtype"]]
    return np.array(d["data"], dtype=dtype).reshape(d["shape"])


def algorithm_of(model) -> str:
    if isinstance(model, ClassicalModel):
        return model.algorithm
    if isinstance(model, RNNModel):
        return "rnn"
    if isinstance(model, TransformerModel):
        return "bert"
    raise TypeError(f"cannot persist {type(model).__name__}")


def save_model(model, vocab: Vocabulary, path: str | os.PathLike,
               preprocess: PreprocessConfig | None = None) -> None:
    algorithm = algorithm_of(model)
    if algorithm in NEURAL_ALGORITHMS:
        meta, arrays = model.config(), model.params
    else:
        meta, arrays = model.state()
        meta = {**meta, "n_features": model.n_features}
    body = {
        "format": FORMAT_TAG,
        "version": FORMAT_VERSION,
        "algorithm": algorithm,
        "meta": meta,
        "vocabulary": list(vocab.index_to_token),
        "vocabulary_sha256": _sha256(list(vocab.index_to_token)),
        "preprocess": None if preprocess is None else preprocess.to_dict(),
        "arrays": {k: _encode_array(v) for k, v in arrays.items()},
    }
    body["checksum"] = _sha256(body)
    Path(path).write_bytes(_canonical(body) + b"\n")


def read_model_file(path: str | os.PathLike) -> SavedModel:
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"no such model file: {path}")
    try:
        body = json.loads(path.read_text(encoding="utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CorruptModelFile(f"{path}: unreadable model file ({exc})") from None
    if not isinstance(body, dict) or body.get("format") != FORMAT_TAG:
        raise CorruptModelFile(f"{path}: not a model file")
    version = body.get("version")
    if not isinstance(version, int) or version > FORMAT_VERSION or version < 1:
        raise UnsupportedVersion(f"{path}: model format version {version!r} (supported: {FORMAT_VERSION})")
    checksum = body.pop("checksum", None)
    if checksum != _sha256(body):
        raise CorruptModelFile(f"{path}: checksum mismatch")
    tokens = body["vocabulary"]
    if body["vocabulary_sha256"] != _sha256(tokens):
        raise CorruptModelFile(f"{path}: vocabulary does not match its recorded hash")
    vocab = Vocabulary(tuple(tokens))
    algorithm = body["algorithm"]
    meta = body["meta"]
    try:
        arrays = {k: _decode_array(v) for k, v in body["arrays"].items()}
    except (KeyError, ValueError) as exc:
        raise CorruptModelFile(f"{path}: bad parameter array ({exc})") from None

    if algorithm in NEURAL_ALGORITHMS:
        cls = NEURAL_ALGORITHMS[algorithm]
        if meta["vocab_size"] != len(vocab) + N_SPECIAL:
            raise CorruptModelFile(f"{path}: model expects {meta['vocab_size'] - N_SPECIAL} tokens, "
                                   f"vocabulary has {len(vocab)}")
        model = cls(**meta, params=arrays)
    elif algorithm in MODEL_CLASSES:
        if meta["n_features"] != len(vocab):
            raise CorruptModelFile(f"{path}: model expects {meta['n_features']} features, "
                                   f"vocabulary has {len(vocab)}")
        model = MODEL_CLASSES[algorithm].from_state(meta, arrays)
    else:
        raise CorruptModelFile(f"{path}: unknown algorithm {algorithm!r}")
    pre = body.get("preprocess")
    return SavedModel(algorithm, model, vocab, None if pre is None else PreprocessConfig.from_dict(pre))


def load_model(path: str | os.PathLike):
    """Return ``(model, vocabulary)`` from a file written by :func:`save_model`."""
    saved = read_model_file(path)
    return saved.model, saved.vocabulary
