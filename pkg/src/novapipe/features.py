"""Deterministic featurization: label encoding, stratified splitting,
input joining, and hashed TF-IDF vectors.

Term hashing uses BLAKE2b with an 8-byte digest interpreted as a big-endian
unsigned integer ("blake2b64"), so the term-to-bucket map is identical on
every platform and run. The hash function identifier travels with the model
artifact.
"""

from __future__ import annotations

import hashlib
import re
from collections import Counter
from dataclasses import dataclass, field
from math import log
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np
from scipy import sparse

from .data_intake import Dataset
from .errors import (
    ClassTooSmallError,
    EmptyCorpusError,
    SingleClassError,
    UnknownColumnError,
)

SEPARATOR = " [SEP] "
DEFAULT_HASH_DIMENSIONS = 2 ** 18
HASH_FUNCTION = "blake2b64"
PARTITIONS = ("train", "val", "test")

_TOKEN_RE = re.compile(r"[^\W_]+")  # maximal alphanumeric runs


@dataclass(frozen=True)
class LabelEncoder:
    """Labels ordered by descending training frequency, ties lexicographic."""

    ordered_labels: tuple[str, ...]

    def __post_init__(self):
        if len(self.ordered_labels) < 2:
            raise SingleClassError("need at least two labels")
        if len(set(self.ordered_labels)) != len(self.ordered_labels):
            raise ValueError("labels must be unique")

    @property
    def index_of(self) -> dict[str, int]:
        return {lab: i for i, lab in enumerate(self.ordered_labels)}

    @property
    def num_classes(self) -> int:
        return len(self.ordered_labels)

    def encode(self, labels: Iterable[str]) -> np.ndarray:
        index = self.index_of
        return np.array([index[lab] for lab in labels], dtype=np.int64)


@dataclass(frozen=True)
class FeatureSpec:
    """Fitted hashed TF-IDF parameters; immutable once fitted."""

    hash_dimensions: int = DEFAULT_HASH_DIMENSIONS
    ngram_orders: tuple[int, ...] = (1, 2)
    idf_weights: dict[int, float] = field(default_factory=dict)
    normalization: str = "l2"
    hash_function: str = HASH_FUNCTION

    def to_dict(self) -> dict:
        return {
            "hash_dimensions": self.hash_dimensions,
            "ngram_orders": list(self.ngram_orders),
            "idf_weights": {str(b): w for b, w in sorted(self.idf_weights.items())},
            "normalization": self.normalization,
            "hash_function": self.hash_function,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureSpec":
        return cls(
            hash_dimensions=int(d["hash_dimensions"]),
            ngram_orders=tuple(d["ngram_orders"]),
            idf_weights={int(b): float(w) for b, w in d["idf_weights"].items()},
            normalization=d["normalization"],
            hash_function=d["hash_function"],
        )


@dataclass(frozen=True)
class SplitAssignment:
    partition_of: dict[int, str]  # row index -> "train" | "val" | "test"
    seed: int

    def indices(self, partition: str) -> list[int]:
        return sorted(i for i, p in self.partition_of.items() if p == partition)


def join_inputs(row: Mapping[str, Optional[str]], input_columns: Sequence[str]) -> str:
    """Join input cells in column order with the literal ``" [SEP] "``.

    Missing cells contribute empty text but keep their separator slot.
    """
    parts = []
    for col in input_columns:
        if col not in row:
            raise UnknownColumnError(col)
        cell = row[col]
        parts.append(cell if cell is not None else "")
    return SEPARATOR.join(parts)


def encode_labels(train_labels: Sequence[str]) -> LabelEncoder:
    """Order labels by (descending count, ascending label) over the training set."""
    counts = Counter(train_labels)
    if len(counts) < 2:
        raise SingleClassError(f"got {len(counts)} distinct label(s)")
    ordered = sorted(counts, key=lambda lab: (-counts[lab], lab))
    return LabelEncoder(ordered_labels=tuple(ordered))


def _class_rng(seed: int, label: str) -> np.random.Generator:
    # Per-class stream keyed by a stable hash so iteration order over classes
    # cannot influence the assignment.
    digest = hashlib.blake2b(f"{seed}|{label}".encode("utf-8"), digest_size=8).digest()
    return np.random.default_rng(int.from_bytes(digest, "big"))


def _partition_sizes(n: int, ratios: Sequence[float]) -> list[int]:
    # Largest-remainder allocation; ties favor earlier partitions (train first).
    shares = [n * r for r in ratios]
    base = [int(s) for s in shares]
    leftover = n - sum(base)
    order = sorted(range(len(ratios)), key=lambda i: (-(shares[i] - base[i]), i))
    for i in order[:leftover]:
        base[i] += 1
    return base


def stratified_split(
    d: Dataset,
    target: str,
    ratios: Sequence[float] = (0.70, 0.15, 0.15),
    seed: int = 42,
) -> SplitAssignment:
    """Per-class proportional train/val/test assignment, deterministic under seed.

    Expects rows with a missing target to be dropped already.
    """
    labels = d.column(target)
    by_class: dict[str, list[int]] = {}
    for i, lab in enumerate(labels):
        if lab is None:
            raise ValueError(f"row {i} has a missing target; drop such rows first")
        by_class.setdefault(lab, []).append(i)

    for lab in sorted(by_class):
        if len(by_class[lab]) < 3:
            raise ClassTooSmallError(lab, len(by_class[lab]))

    partition_of: dict[int, str] = {}
    for lab in sorted(by_class):
        idx = np.array(by_class[lab], dtype=np.int64)
        rng = _class_rng(seed, lab)
        idx = idx[rng.permutation(len(idx))]
        n_train, n_val, _ = _partition_sizes(len(idx), ratios)
        for j, row in enumerate(idx.tolist()):
            if j < n_train:
                partition_of[row] = "train"
            elif j < n_train + n_val:
                partition_of[row] = "val"
            else:
                partition_of[row] = "test"
    return SplitAssignment(partition_of=partition_of, seed=seed)


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


def terms_of(text: str, ngram_orders: Sequence[int] = (1, 2)) -> list[str]:
    tokens = tokenize(text)
    out: list[str] = []
    if 1 in ngram_orders:
        out.extend(tokens)
    if 2 in ngram_orders:
        out.extend(f"{a} {b}" for a, b in zip(tokens, tokens[1:]))
    return out


def hash_bucket(term: str, hash_dimensions: int = DEFAULT_HASH_DIMENSIONS) -> int:
    digest = hashlib.blake2b(term.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big") % hash_dimensions


def fit_features(
    train_texts: Sequence[str],
    hash_dimensions: int = DEFAULT_HASH_DIMENSIONS,
    ngram_orders: tuple[int, ...] = (1, 2),
) -> FeatureSpec:
    """Fit bucket document frequencies on the training split only.

    idf(b) = ln((1 + N) / (1 + df(b))) + 1 with N training documents.
    """
    if not train_texts:
        raise EmptyCorpusError("no training texts")
    if hash_dimensions <= 0 or hash_dimensions & (hash_dimensions - 1):
        raise ValueError("hash_dimensions must be a power of two")

    n_docs = len(train_texts)
    df: Counter[int] = Counter()
    for text in train_texts:
        buckets = {hash_bucket(t, hash_dimensions) for t in terms_of(text, ngram_orders)}
        df.update(buckets)

    idf = {b: log((1 + n_docs) / (1 + df_b)) + 1.0 for b, df_b in df.items()}
    return FeatureSpec(
        hash_dimensions=hash_dimensions,
        ngram_orders=ngram_orders,
        idf_weights=idf,
    )


def _bucket_counts(text: str, spec: FeatureSpec) -> Counter[int]:
    counts: Counter[int] = Counter()
    for term in terms_of(text, spec.ngram_orders):
        counts[hash_bucket(term, spec.hash_dimensions)] += 1
    return counts


def vectorize(text: str, spec: FeatureSpec) -> sparse.csr_matrix:
    """One L2-normalized tf-idf row; all-zero input stays the zero vector."""
    return vectorize_all([text], spec)


def vectorize_all(texts: Sequence[str], spec: FeatureSpec) -> sparse.csr_matrix:
    """Stack tf-idf rows for a batch of texts into one sparse matrix."""
    data: list[float] = []
    indices: list[int] = []
    indptr = [0]
    for text in texts:
        row: list[tuple[int, float]] = []
        for bucket, tf in _bucket_counts(text, spec).items():
            idf = spec.idf_weights.get(bucket)
            if idf is not None:  # buckets unseen in training carry no weight
                row.append((bucket, tf * idf))
        row.sort()
        norm = np.sqrt(sum(v * v for _, v in row))
        if norm > 0:
            row = [(b, v / norm) for b, v in row]
        indices.extend(b for b, _ in row)
        data.extend(v for _, v in row)
        indptr.append(len(data))
    return sparse.csr_matrix(
        (np.array(data, dtype=np.float64),
         np.array(indices, dtype=np.int64),
         np.array(indptr, dtype=np.int64)),
        shape=(len(texts), spec.hash_dimensions),
    )
