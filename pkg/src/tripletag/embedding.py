"""Character-word mixed embeddings.

Every character gets a trainable vector from a character table; characters of
a segmented word additionally share that word's frozen pretrained vector,
projected into the character dimension. The per-character mixed vector is the
sum of the two. Words come from a plain-text vector file and are never
updated; characters outside the vocabulary map to the reserved UNK id 0.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from . import numerics as nm
from .numerics import Tensor

UNK = "<unk>"


class WordVectorParseError(ValueError):
    """Malformed word-vector file; message carries the offending line number."""


class CharVocab:
    """char -> dense id map with id 0 reserved for unknown characters."""

    def __init__(self, chars: Iterable[str]):
        self._id = {UNK: 0}
        for c in chars:
            if c not in self._id:
                self._id[c] = len(self._id)
        self._chars = list(self._id)

    @classmethod
    def from_texts(cls, texts: Iterable[str]) -> "CharVocab":
        return cls(c for text in texts for c in text)

    def __len__(self) -> int:
        return len(self._id)

    def id_of(self, char: str) -> int:
        return self._id.get(char, 0)

    def chars(self) -> list[str]:
        """All entries ordered by id (index 0 is the UNK sentinel)."""
        return list(self._chars)

    def ids(self, text: str) -> list[int]:
        return [self.id_of(c) for c in text]


class WordLexicon:
    """word -> frozen pretrained vector, all of one dimension."""

    def __init__(self, vectors: dict[str, np.ndarray]):
        if not vectors:
            raise ValueError("lexicon is empty")
        dims = {v.shape for v in vectors.values()}
        if len(dims) != 1:
            raise ValueError(f"inconsistent vector dimensions: {sorted(dims)}")
        if "" in vectors:
            raise ValueError("empty-string key")
        self._vec = {}
        for w, v in vectors.items():
            arr = np.asarray(v, dtype=np.float64).copy()
            arr.flags.writeable = False
            self._vec[w] = arr
        self.dim = next(iter(self._vec.values())).shape[0]
        self.max_word_len = max(len(w) for w in self._vec)

    def __len__(self) -> int:
        return len(self._vec)

    def __contains__(self, word: str) -> bool:
        return word in self._vec

    def get(self, word: str) -> Optional[np.ndarray]:
        return self._vec.get(word)

    def words(self) -> list[str]:
        return list(self._vec)


def load_word_vectors(path) -> WordLexicon:
    """Read the classic text vector format: "<count> <dim>" header, then one
    line per word ("word v1 .. v_dim"). Duplicates keep the last occurrence."""
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or not lines[0].strip():
        raise WordVectorParseError("line 1: missing '<count> <dim>' header")
    header = lines[0].split()
    if len(header) != 2:
        raise WordVectorParseError(f"line 1: expected '<count> <dim>', got {lines[0]!r}")
    try:
        count, dim = int(header[0]), int(header[1])
    except ValueError:
        raise WordVectorParseError(
            f"line 1: non-integer header fields {lines[0]!r}") from None
    if count <= 0 or dim <= 0:
        raise WordVectorParseError(f"line 1: non-positive count/dim {lines[0]!r}")

    body = lines[1:]
    if len([ln for ln in body if ln.strip()]) < count:
        raise WordVectorParseError(
            f"line {len(lines)}: file ends after "
            f"{len([ln for ln in body if ln.strip()])} of {count} rows")
    vectors: dict[str, np.ndarray] = {}
    rows_seen = 0
    for lineno, line in enumerate(body, start=2):
        if not line.strip():
            continue
        rows_seen += 1
        if rows_seen > count:
            raise WordVectorParseError(
                f"line {lineno}: more rows than the declared count {count}")
        parts = line.split()
        if len(parts) != dim + 1:
            raise WordVectorParseError(
                f"line {lineno}: expected 1 word + {dim} values, "
                f"got {len(parts)} fields")
        word = parts[0]
        try:
            vec = np.array([float(x) for x in parts[1:]], dtype=np.float64)
        except ValueError:
            raise WordVectorParseError(
                f"line {lineno}: non-numeric vector component") from None
        if word in vectors:
            warnings.warn(f"duplicate word {word!r} at line {lineno}; "
                          "keeping the last occurrence")
        vectors[word] = vec
    return WordLexicon(vectors)


@dataclass
class Segment:
    word: str
    start: int
    length: int


def segment(text: str, lexicon: Optional[WordLexicon]) -> list[Segment]:
    """Forward maximum matching against the lexicon keys.

    At each position take the longest lexicon word starting there; with no
    match, emit a single-character segment. Segments always cover the text.
    """
    if not text:
        raise ValueError("text is empty")
    if lexicon is None:
        return [Segment(c, i, 1) for i, c in enumerate(text)]
    out = []
    n = len(text)
    i = 0
    while i < n:
        match = None
        for length in range(min(lexicon.max_word_len, n - i), 0, -1):
            cand = text[i : i + length]
            if cand in lexicon:
                match = cand
                break
        if match is None:
            match = text[i]
        out.append(Segment(match, i, len(match)))
        i += len(match)
    return out


@dataclass
class EmbedParams:
    """Trainable character table (V_c x m) and word-vector projection (d_w x m)."""

    char_table: Tensor
    projection: Optional[Tensor]
    m: int

    @classmethod
    def init(cls, rng: np.random.Generator, vocab_size: int, m: int,
             word_dim: Optional[int]) -> "EmbedParams":
        char_table = nm.uniform_init(rng, vocab_size, m)
        projection = nm.uniform_init(rng, word_dim, m) if word_dim else None
        return cls(char_table=char_table, projection=projection, m=m)


def char_rows(text: str, vocab: CharVocab, params: EmbedParams) -> Tensor:
    """(n x m) matrix of per-character table rows; gradient reaches the table."""
    return nm.stack_rows([nm.row(params.char_table, vocab.id_of(c))
                          for c in text])


def mix_embed(text: str, vocab: CharVocab, lexicon: Optional[WordLexicon],
              params: EmbedParams) -> Tensor:
    """Mixed embedding: char row + projected word vector, one row per character.

    The word vector of a k-character segment contributes identically to all k
    rows; segments without a lexicon vector contribute zero. Gradients reach
    char_table and projection only; lexicon vectors stay fixed.
    """
    chars = char_rows(text, vocab, params)
    if lexicon is None or params.projection is None:
        return chars
    word_mat = np.zeros((len(text), lexicon.dim))
    for seg in segment(text, lexicon):
        vec = lexicon.get(seg.word)
        if vec is not None:
            word_mat[seg.start : seg.start + seg.length, :] = vec
    projected = nm.matmul(Tensor(word_mat), params.projection)
    return nm.add(chars, projected)
