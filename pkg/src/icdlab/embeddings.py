"""Word-vector tables and document embedding composition.

Document vectors are built from pre-trained word vectors in the plain text
``.vec`` format: a ``"V D"`` header followed by one ``token f1 ... fD`` line
per word. Tokens missing from the table contribute nothing.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import ContractError, ParseError

N_SECTIONS = 7


class Composition(str, enum.Enum):
    SUM_NORM = "sumnorm"
    SECTION_CONCAT = "sections"
    STAT_CONCAT = "stats"
    AVERAGED_SUM_NORM = "averaged-sumnorm"


class WordVectorTable:
    """Immutable token -> vector map with a fixed dimension.

    Vectors live in one read-only ``(vocab_size, dimension)`` float64 matrix;
    ``index`` maps each token to its row.
    """

    def __init__(self, vectors: Mapping[str, Sequence[float]] | None = None, dimension=None):
        vectors = dict(vectors or {})
        if dimension is None:
            if not vectors:
                raise ContractError("dimension is required for an empty table")
            dimension = len(next(iter(vectors.values())))
        if dimension < 1:
            raise ContractError("dimension must be positive")
        matrix = np.zeros((len(vectors), dimension), dtype=np.float64)
        index = {}
        for row, (token, vec) in enumerate(vectors.items()):
            vec = np.asarray(vec, dtype=np.float64)
            if vec.shape != (dimension,):
                raise ContractError(f"vector for {token!r} has shape {vec.shape}, expected ({dimension},)")
            if not np.all(np.isfinite(vec)):
                raise ContractError(f"vector for {token!r} has non-finite components")
            matrix[row] = vec
            index[token] = row
        matrix.setflags(write=False)
        self._matrix = matrix
        self._index = index
        self.dimension = int(dimension)

    @property
    def vocab_size(self):
        return len(self._index)

    @property
    def matrix(self):
        return self._matrix

    def __contains__(self, token):
        return token in self._index

    def __len__(self):
        return len(self._index)

    def get(self, token):
        """Return the vector for ``token`` or ``None`` when it is absent."""
        row = self._index.get(token)
        if row is None:
            return None
        return self._matrix[row]

    def rows(self, tokens: Sequence[str]) -> np.ndarray:
        """Row indices of the in-vocabulary tokens, in input order."""
        index = self._index
        return np.fromiter((index[t] for t in tokens if t in index), dtype=np.intp)


def load_vector_file(path) -> WordVectorTable:
    """Parse a text-format word-vector file.

    Duplicate tokens keep the last vector seen. A trailing newline, CRLF line
    endings and the single trailing space fastText writes after each vector
    are tolerated; any other deviation raises :class:`ParseError`.
    """
    path = Path(path)
    try:
        text = path.read_bytes().decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"not valid UTF-8 ({exc.reason})", path=path) from None
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    lines = [ln[:-1] if ln.endswith("\r") else ln for ln in lines]
    if not lines:
        raise ParseError("empty file; expected header 'V D'", line=1, path=path)

    header = lines[0].split(" ")
    if len(header) != 2 or not all(h.isdigit() for h in header):
        raise ParseError(f"malformed header {lines[0]!r}; expected 'V D'", line=1, path=path)
    n_words, dim = int(header[0]), int(header[1])
    if n_words == 0 or dim == 0:
        raise ParseError("header declares an empty table (V and D must be positive)", line=1, path=path)
    if len(lines) - 1 != n_words:
        # first line that is either surplus or missing
        bad_line = n_words + 2 if len(lines) - 1 > n_words else len(lines) + 1
        raise ParseError(f"header declares {n_words} vectors but file has {len(lines) - 1}", line=bad_line, path=path)

    vectors: dict[str, np.ndarray] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(" ")
        if len(parts) == dim + 2 and parts[-1] == "":
            parts.pop()
        if len(parts) != dim + 1 or parts[0] == "":
            raise ParseError(f"expected a token and {dim} floats, got {len(parts) - 1} fields", line=lineno, path=path)
        try:
            vec = np.array([float(p) for p in parts[1:]], dtype=np.float64)
        except ValueError:
            raise ParseError("unparseable float", line=lineno, path=path) from None
        if not np.all(np.isfinite(vec)):
            raise ParseError("non-finite value", line=lineno, path=path)
        token = parts[0]
        vectors.pop(token, None)
        vectors[token] = vec
    return WordVectorTable(vectors, dimension=dim)


def write_vector_file(table_or_vectors, path):
    """Write vectors in the text format read by :func:`load_vector_file`."""
    if isinstance(table_or_vectors, WordVectorTable):
        items = [(t, table_or_vectors.get(t)) for t in table_or_vectors._index]
        dim = table_or_vectors.dimension
    else:
        items = list(table_or_vectors.items())
        dim = len(items[0][1])
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{len(items)} {dim}\n")
        for token, vec in items:
            fh.write(token + " " + " ".join(repr(float(v)) for v in vec) + "\n")


@dataclass(frozen=True)
class DocumentEmbedding:
    values: np.ndarray = field(repr=False)
    composition: Composition

    def __len__(self):
        return len(self.values)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)


def _sum_norm(tokens, table):
    rows = table.rows(tokens)
    if rows.size == 0:
        return np.zeros(table.dimension)
    total = table.matrix[rows].sum(axis=0)
    norm = math.sqrt(float(total @ total))
    if norm == 0.0:
        return np.zeros(table.dimension)
    return total / norm


def embed_document(tokens: Sequence[str], table: WordVectorTable) -> DocumentEmbedding:
    """Unit-length sum of the token vectors; zero vector if nothing is in vocabulary."""
    return DocumentEmbedding(_sum_norm(tokens, table), Composition.SUM_NORM)


def embed_sections_concat(sections: Sequence[Sequence[str]], table: WordVectorTable) -> DocumentEmbedding:
    """Concatenate the per-section sum-norm embeddings of exactly seven sections."""
    if len(sections) != N_SECTIONS:
        raise ContractError(f"expected {N_SECTIONS} sections, got {len(sections)}")
    values = np.concatenate([_sum_norm(s, table) for s in sections])
    return DocumentEmbedding(values, Composition.SECTION_CONCAT)


def embed_stats_concat(tokens: Sequence[str], table: WordVectorTable) -> DocumentEmbedding:
    """Per-coordinate min, max, mean, sd, q1, q3 over the in-vocabulary vectors."""
    rows = table.rows(tokens)
    d = table.dimension
    if rows.size == 0:
        return DocumentEmbedding(np.zeros(6 * d), Composition.STAT_CONCAT)
    vecs = table.matrix[rows]
    # population sd; percentiles use linear interpolation between closest ranks
    q1, q3 = np.percentile(vecs, [25.0, 75.0], axis=0, method="linear")
    values = np.concatenate([
        vecs.min(axis=0),
        vecs.max(axis=0),
        vecs.mean(axis=0),
        vecs.std(axis=0, ddof=0),
        q1,
        q3,
    ])
    return DocumentEmbedding(values, Composition.STAT_CONCAT)


def average_embeddings(embeddings: Sequence) -> DocumentEmbedding:
    """Coordinate-wise mean of several embeddings (no renormalisation)."""
    if len(embeddings) == 0:
        raise ContractError("cannot average an empty list of embeddings")
    arrays = [np.asarray(e, dtype=np.float64) for e in embeddings]
    width = arrays[0].shape
    for a in arrays[1:]:
        if a.shape != width:
            raise ContractError(f"embedding lengths differ: {width} vs {a.shape}")
    comps = {e.composition for e in embeddings if isinstance(e, DocumentEmbedding)}
    comp = comps.pop() if len(comps) == 1 else Composition.AVERAGED_SUM_NORM
    if comp == Composition.SUM_NORM:
        comp = Composition.AVERAGED_SUM_NORM
    # sort before summing so the result does not depend on list order
    stacked = np.sort(np.stack(arrays), axis=0)
    return DocumentEmbedding(stacked.sum(axis=0) / len(arrays), comp)
