"""Feature extraction: symbolic, keyword and web/message feature families.

Three families are fitted on training signatures:

* symbolic features (one-hot 5-tuple values, metadata symbol, classtype),
* keyword features (one-hot symbols built from ruleset msg keywords and
  reference system names),
* TF-IDF features over cleaned msg and reference text, L2-normalized per
  document then min-max scaled with training statistics.

Two layouts are assembled from them: ``itrf`` = symbolic + keyword and
``mcf`` = symbolic + TF-IDF.
"""

from __future__ import annotations

import hashlib
import json
import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .rules import RuleSet, msg_keyword_list, reference_system_list
from .sigparse import Signature
from .textprep import clean_text

__all__ = [
    "EmptyTrainingSet",
    "SchemaMismatch",
    "FeatureSchema",
    "FeatureVector",
    "fit_schema",
    "encode_sf",
    "encode_kf",
    "encode_wmf",
    "build_itrf",
    "build_mcf",
    "transform_matrix",
    "SignatureVectorizer",
    "SF_ELEMENTS",
    "LAYOUTS",
]

SF_ELEMENTS = (
    "protocol",
    "src_addr",
    "src_port",
    "dst_addr",
    "dst_port",
    "metadata_symbol",
    "classtype",
)

_ELEMENT_GROUP = {
    "protocol": "five_tuple",
    "src_addr": "five_tuple",
    "src_port": "five_tuple",
    "dst_addr": "five_tuple",
    "dst_port": "five_tuple",
    "metadata_symbol": "metadata",
    "classtype": "classtype",
}

LAYOUTS = ("itrf", "mcf")

ABSENT = "__absent__"
DUMMY = "__none__"

SCHEMA_FILE_VERSION = "sigtriage-schema v1"


class EmptyTrainingSet(ValueError):
    """fit was called with no training signatures."""


class SchemaMismatch(ValueError):
    """A vector or model does not match the schema layout it is used with."""


def idf_value(n_docs: int, df: int) -> float:
    """Smoothed inverse document frequency: ln((N+1)/(df+1)) + 1."""
    return math.log((n_docs + 1) / (df + 1)) + 1.0


def metadata_symbol(sig: Signature) -> str:
    """All metadata key-value pairs, sorted and joined into one symbol."""
    pairs = sorted(f"{p.key} {p.value}" for p in sig.metadata)
    return ",".join(pairs) if pairs else ABSENT


def _sf_value(sig: Signature, element: str) -> str:
    if element == "metadata_symbol":
        return metadata_symbol(sig)
    if element == "classtype":
        return sig.classtype if sig.classtype is not None else ABSENT
    return getattr(sig, element)


def kf_msg_symbol(sig: Signature, keywords: list[str]) -> str:
    """Matched msg keywords concatenated in list order; dummy if none."""
    tokens = set(clean_text(sig.msg))
    present = [w for w in keywords if w.lower() in tokens]
    return "|".join(present) if present else DUMMY


def kf_ref_symbol(sig: Signature, systems: list[str]) -> str:
    """Sorted set of matched reference systems as one symbol; dummy if none."""
    present = {s for s in systems if s.lower() in {r.system for r in sig.references}}
    return "|".join(sorted(present)) if present else DUMMY


@dataclass
class FeatureSchema:
    """Fitted encoders for all three feature families."""

    sf_vocabs: dict[str, list[str]]
    kf_msg_keywords: list[str]
    kf_msg_symbols: list[str]
    kf_ref_systems: list[str]
    kf_ref_symbols: list[str]
    tfidf_msg_vocab: list[str]
    tfidf_msg_idf: np.ndarray
    tfidf_ref_vocab: list[str]
    tfidf_ref_idf: np.ndarray
    wmf_min: np.ndarray
    wmf_max: np.ndarray
    n_train_docs: int
    schema_id: str = field(default="")

    def __post_init__(self):
        if "action" in self.sf_vocabs:
            raise SchemaMismatch("the rule action must never be featurized")
        if not self.schema_id:
            self.schema_id = hashlib.sha256(
                json.dumps(self._payload(), sort_keys=True).encode("utf-8")
            ).hexdigest()[:16]

    # -- widths and layouts -------------------------------------------------

    @property
    def sf_width(self) -> int:
        return sum(len(v) for v in self.sf_vocabs.values())

    @property
    def kf_width(self) -> int:
        return len(self.kf_msg_symbols) + len(self.kf_ref_symbols)

    @property
    def wmf_width(self) -> int:
        return len(self.tfidf_msg_vocab) + len(self.tfidf_ref_vocab)

    def width(self, layout: str) -> int:
        if layout == "itrf":
            return self.sf_width + self.kf_width
        if layout == "mcf":
            return self.sf_width + self.wmf_width
        raise SchemaMismatch(f"unknown layout {layout!r}")

    def dimension_names(self, layout: str) -> list[str]:
        return [name for name, _ in self.dimensions(layout)]

    def dimensions(self, layout: str) -> list[tuple[str, str]]:
        """(name, element group) per dimension, in vector order."""
        dims: list[tuple[str, str]] = []
        for element in SF_ELEMENTS:
            group = _ELEMENT_GROUP[element]
            dims.extend((f"{element}:{cat}", group) for cat in self.sf_vocabs[element])
        if layout == "itrf":
            dims.extend((f"kf_msg:{s}", "msg") for s in self.kf_msg_symbols)
            dims.extend((f"kf_ref:{s}", "reference") for s in self.kf_ref_symbols)
        elif layout == "mcf":
            dims.extend((f"tfidf_msg:{w}", "msg") for w in self.tfidf_msg_vocab)
            dims.extend((f"tfidf_ref:{w}", "reference") for w in self.tfidf_ref_vocab)
        else:
            raise SchemaMismatch(f"unknown layout {layout!r}")
        return dims

    # -- persistence ---------------------------------------------------------

    def _payload(self) -> dict:
        return {
            "sf_vocabs": self.sf_vocabs,
            "kf_msg_keywords": self.kf_msg_keywords,
            "kf_msg_symbols": self.kf_msg_symbols,
            "kf_ref_systems": self.kf_ref_systems,
            "kf_ref_symbols": self.kf_ref_symbols,
            "tfidf_msg_vocab": self.tfidf_msg_vocab,
            "tfidf_msg_idf": np.asarray(self.tfidf_msg_idf).tolist(),
            "tfidf_ref_vocab": self.tfidf_ref_vocab,
            "tfidf_ref_idf": np.asarray(self.tfidf_ref_idf).tolist(),
            "wmf_min": np.asarray(self.wmf_min).tolist(),
            "wmf_max": np.asarray(self.wmf_max).tolist(),
            "n_train_docs": self.n_train_docs,
        }

    def to_json(self) -> str:
        doc = {"version": SCHEMA_FILE_VERSION, "schema_id": self.schema_id}
        doc.update(self._payload())
        return json.dumps(doc, indent=1, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "FeatureSchema":
        doc = json.loads(text)
        if doc.get("version") != SCHEMA_FILE_VERSION:
            raise SchemaMismatch(f"unsupported schema file version {doc.get('version')!r}")
        return cls(
            sf_vocabs=doc["sf_vocabs"],
            kf_msg_keywords=doc["kf_msg_keywords"],
            kf_msg_symbols=doc["kf_msg_symbols"],
            kf_ref_systems=doc["kf_ref_systems"],
            kf_ref_symbols=doc["kf_ref_symbols"],
            tfidf_msg_vocab=doc["tfidf_msg_vocab"],
            tfidf_msg_idf=np.asarray(doc["tfidf_msg_idf"], dtype=float),
            tfidf_ref_vocab=doc["tfidf_ref_vocab"],
            tfidf_ref_idf=np.asarray(doc["tfidf_ref_idf"], dtype=float),
            wmf_min=np.asarray(doc["wmf_min"], dtype=float),
            wmf_max=np.asarray(doc["wmf_max"], dtype=float),
            n_train_docs=doc["n_train_docs"],
            schema_id=doc["schema_id"],
        )

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json())

    @classmethod
    def load(cls, path) -> "FeatureSchema":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json(fh.read())


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray
    schema_id: str
    layout: str


# -- fitting ------------------------------------------------------------------


def _fit_tfidf(docs: list[list[str]]) -> tuple[list[str], np.ndarray]:
    total = Counter()
    df = Counter()
    for tokens in docs:
        total.update(tokens)
        df.update(set(tokens))
    # Words appearing only once across the whole corpus are dropped.
    vocab = sorted(w for w, cnt in total.items() if cnt >= 2)
    n_docs = len(docs)
    idf = np.array([idf_value(n_docs, df[w]) for w in vocab], dtype=float)
    return vocab, idf


def _tfidf_rows(docs: list[list[str]], vocab: list[str], idf: np.ndarray) -> np.ndarray:
    index = {w: i for i, w in enumerate(vocab)}
    out = np.zeros((len(docs), len(vocab)), dtype=float)
    for row, tokens in enumerate(docs):
        for token, cnt in Counter(tokens).items():
            col = index.get(token)
            if col is not None:
                out[row, col] = cnt
    out *= idf
    norms = np.linalg.norm(out, axis=1, keepdims=True)
    np.divide(out, norms, out=out, where=norms > 0)
    return out


def fit_schema(train: list[tuple[Signature, str]], rs: RuleSet) -> FeatureSchema:
    """Fit all feature families on (signature, reference text) pairs."""
    if not train:
        raise EmptyTrainingSet("cannot fit a feature schema on an empty training set")
    sigs = [sig for sig, _ in train]

    sf_vocabs = {
        element: sorted({_sf_value(sig, element) for sig in sigs})
        for element in SF_ELEMENTS
    }

    keywords = msg_keyword_list(rs)
    systems = reference_system_list(rs)
    kf_msg_symbols = sorted({kf_msg_symbol(sig, keywords) for sig in sigs})
    kf_ref_symbols = sorted({kf_ref_symbol(sig, systems) for sig in sigs})

    msg_docs = [clean_text(sig.msg) for sig in sigs]
    ref_docs = [clean_text(ref_text) for _, ref_text in train]
    msg_vocab, msg_idf = _fit_tfidf(msg_docs)
    ref_vocab, ref_idf = _fit_tfidf(ref_docs)

    wmf_train = np.hstack(
        [
            _tfidf_rows(msg_docs, msg_vocab, msg_idf),
            _tfidf_rows(ref_docs, ref_vocab, ref_idf),
        ]
    )
    wmf_min = wmf_train.min(axis=0) if wmf_train.size else np.zeros(0)
    wmf_max = wmf_train.max(axis=0) if wmf_train.size else np.zeros(0)

    return FeatureSchema(
        sf_vocabs=sf_vocabs,
        kf_msg_keywords=keywords,
        kf_msg_symbols=kf_msg_symbols,
        kf_ref_systems=systems,
        kf_ref_symbols=kf_ref_symbols,
        tfidf_msg_vocab=msg_vocab,
        tfidf_msg_idf=msg_idf,
        tfidf_ref_vocab=ref_vocab,
        tfidf_ref_idf=ref_idf,
        wmf_min=wmf_min,
        wmf_max=wmf_max,
        n_train_docs=len(train),
    )


# -- encoding ------------------------------------------------------------------


def _one_hot(vocab: list[str], value: str) -> np.ndarray:
    # Unseen categories encode as an all-zero block.
    block = np.zeros(len(vocab), dtype=float)
    try:
        block[vocab.index(value)] = 1.0
    except ValueError:
        pass
    return block


def encode_sf(sig: Signature, schema: FeatureSchema) -> np.ndarray:
    blocks = [
        _one_hot(schema.sf_vocabs[element], _sf_value(sig, element))
        for element in SF_ELEMENTS
    ]
    return np.concatenate(blocks)


def encode_kf(sig: Signature, schema: FeatureSchema) -> np.ndarray:
    msg_block = _one_hot(schema.kf_msg_symbols, kf_msg_symbol(sig, schema.kf_msg_keywords))
    ref_block = _one_hot(schema.kf_ref_symbols, kf_ref_symbol(sig, schema.kf_ref_systems))
    return np.concatenate([msg_block, ref_block])


def encode_wmf(msg_text: str, ref_text: str, schema: FeatureSchema) -> np.ndarray:
    row = np.hstack(
        [
            _tfidf_rows([clean_text(msg_text)], schema.tfidf_msg_vocab, schema.tfidf_msg_idf)[0],
            _tfidf_rows([clean_text(ref_text)], schema.tfidf_ref_vocab, schema.tfidf_ref_idf)[0],
        ]
    )
    span = schema.wmf_max - schema.wmf_min
    scaled = np.zeros_like(row)
    nonconst = span > 0
    scaled[nonconst] = (row[nonconst] - schema.wmf_min[nonconst]) / span[nonconst]
    return np.clip(scaled, 0.0, 1.0)


def build_itrf(sig: Signature, ref_text: str, schema: FeatureSchema) -> FeatureVector:
    values = np.concatenate([encode_sf(sig, schema), encode_kf(sig, schema)])
    return FeatureVector(values=values, schema_id=schema.schema_id, layout="itrf")


def build_mcf(sig: Signature, ref_text: str, schema: FeatureSchema) -> FeatureVector:
    values = np.concatenate([encode_sf(sig, schema), encode_wmf(sig.msg, ref_text, schema)])
    return FeatureVector(values=values, schema_id=schema.schema_id, layout="mcf")


_BUILDERS = {"itrf": build_itrf, "mcf": build_mcf}


def transform_matrix(
    items: list[tuple[Signature, str]], schema: FeatureSchema, layout: str
) -> np.ndarray:
    """Feature matrix, one row per (signature, reference text) pair."""
    if layout not in _BUILDERS:
        raise SchemaMismatch(f"unknown layout {layout!r}")
    builder = _BUILDERS[layout]
    if not items:
        return np.zeros((0, schema.width(layout)))
    return np.vstack([builder(sig, ref_text, schema).values for sig, ref_text in items])


def export_matrix_csv(path, matrix: np.ndarray, names: list[str]) -> None:
    if matrix.shape[1] != len(names):
        raise SchemaMismatch("matrix width does not match dimension names")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(f'"{n}"' for n in names) + "\n")
        for row in matrix:
            fh.write(",".join(format(v, ".12g") for v in row) + "\n")


class SignatureVectorizer(BaseEstimator, TransformerMixin):
    """sklearn-style wrapper over :func:`fit_schema` and the encoders.

    X is a list of (Signature, ref_text) pairs.
    """

    def __init__(self, ruleset: RuleSet | None = None, layout: str = "mcf"):
        self.ruleset = ruleset
        self.layout = layout

    def fit(self, X, y=None):
        if self.layout not in LAYOUTS:
            raise SchemaMismatch(f"unknown layout {self.layout!r}")
        rs = self.ruleset if self.ruleset is not None else RuleSet(())
        self.schema_ = fit_schema(list(X), rs)
        return self

    def transform(self, X) -> np.ndarray:
        if not hasattr(self, "schema_"):
            raise SchemaMismatch("vectorizer is not fitted")
        return transform_matrix(list(X), self.schema_, self.layout)

    def get_feature_names_out(self, input_features=None):
        return np.asarray(self.schema_.dimension_names(self.layout), dtype=object)
