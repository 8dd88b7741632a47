"""Word-embedding sets: loading, validation, intersection, standardization.

The on-disk format is plain text, one record per line::

    word 0.013 -0.27 1.9e-02 ...

Fields are separated by one or more spaces or tabs, lines starting with
``#`` are ignored, and both LF and CRLF endings are accepted.  Write-back
emits single-space separators, 9 significant digits and LF endings, so a
file written by :func:`write_embeddings` reloads bit-for-bit.

A file may contain several records for the same word (one per word sense,
as produced by multi-prototype embedding methods).  Loading with
``collapse=True`` averages those prototypes into a single vector; without
the flag a repeated word is treated as corrupt input.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import EmbeddingFormatError


@dataclass(frozen=True, eq=False)
class EmbeddingSet:
    """Immutable vocabulary-to-vector map with fixed dimensionality.

    Words are kept lexicographically sorted so that every iteration order
    derived from the set (fold assignment, report rows, write-back) is
    deterministic.  The vector matrix is read-only and safe to share across
    worker threads.
    """

    name: str
    words: tuple[str, ...]
    vectors: np.ndarray
    _index: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        vecs = np.asarray(self.vectors, dtype=np.float64)
        if vecs.ndim != 2:
            raise EmbeddingFormatError("vectors must be a 2-D matrix")
        if len(self.words) != vecs.shape[0]:
            raise EmbeddingFormatError("word count does not match vector count")
        if vecs.shape[0] < 1 or vecs.shape[1] < 1:
            raise EmbeddingFormatError("need at least one word and one dimension")
        if not np.all(np.isfinite(vecs)):
            raise EmbeddingFormatError("vectors contain NaN or Inf")
        if any(w == "" for w in self.words):
            raise EmbeddingFormatError("empty string is not a valid word")
        index = {w: i for i, w in enumerate(self.words)}
        if len(index) != len(self.words):
            raise EmbeddingFormatError("duplicate words in embedding set")
        vecs.setflags(write=False)
        object.__setattr__(self, "vectors", vecs)
        object.__setattr__(self, "_index", index)

    @classmethod
    def from_dict(cls, name: str, entries: dict[str, np.ndarray]) -> "EmbeddingSet":
        """Build a set from a word-to-vector mapping, sorting the vocabulary."""
        if not entries:
            raise EmbeddingFormatError("embedding set cannot be empty")
        words = tuple(sorted(entries))
        vectors = np.array([entries[w] for w in words], dtype=np.float64)
        return cls(name, words, vectors)

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word: str) -> bool:
        return word in self._index

    def lookup(self, word: str) -> np.ndarray | None:
        """Return the stored vector, or None when the word is absent.

        Absence is a value, not an error; no zero-vector fallback.
        """
        i = self._index.get(word)
        return None if i is None else self.vectors[i]

    def vocab(self) -> frozenset[str]:
        return frozenset(self.words)

    def replace_vectors(self, vectors: np.ndarray, name: str | None = None) -> "EmbeddingSet":
        """New set with the same vocabulary and a transformed matrix."""
        return EmbeddingSet(name or self.name, self.words, vectors)


def lookup(emb: EmbeddingSet, word: str) -> np.ndarray | None:
    return emb.lookup(word)


def _parse_value(token: str, path: Path, lineno: int) -> float:
    try:
        value = float(token)
    except ValueError:
        raise EmbeddingFormatError(
            f"{path}:{lineno}: non-numeric token {token!r}"
        ) from None
    if not np.isfinite(value):
        raise EmbeddingFormatError(f"{path}:{lineno}: non-finite value {token!r}")
    return value


def load_embeddings(path: str | Path, collapse: bool = False,
                    name: str | None = None) -> EmbeddingSet:
    """Load an embedding text file into an :class:`EmbeddingSet`.

    With ``collapse=True`` repeated words are replaced by the arithmetic
    mean of their prototype vectors; otherwise a repeated word raises
    :class:`EmbeddingFormatError`.
    """
    path = Path(path)
    if not path.exists():
        raise EmbeddingFormatError(f"embedding file not found: {path}")

    sums: dict[str, np.ndarray] = {}
    counts: dict[str, int] = {}
    dim: int | None = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split()
            word, tokens = parts[0], parts[1:]
            if dim is None:
                dim = len(tokens)
                if dim == 0:
                    raise EmbeddingFormatError(
                        f"{path}:{lineno}: record has no vector values")
            elif len(tokens) != dim:
                raise EmbeddingFormatError(
                    f"{path}:{lineno}: expected {dim} values, got {len(tokens)}")
            vec = np.array([_parse_value(t, path, lineno) for t in tokens])
            if word in sums:
                if not collapse:
                    raise EmbeddingFormatError(
                        f"{path}:{lineno}: duplicate word {word!r} "
                        "(load with collapse to average prototypes)")
                sums[word] += vec
                counts[word] += 1
            else:
                sums[word] = vec
                counts[word] = 1

    if dim is None:
        raise EmbeddingFormatError(f"{path}: file contains no records")
    entries = {w: sums[w] / counts[w] for w in sums}
    return EmbeddingSet.from_dict(name or path.stem, entries)


def write_embeddings(emb: EmbeddingSet, path: str | Path) -> None:
    """Write the set back in the text format (9 significant digits, LF)."""
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for word, vec in zip(emb.words, emb.vectors):
            fh.write(word + " " + " ".join("%.9g" % v for v in vec) + "\n")


def intersect_vocab(sets: list[EmbeddingSet]) -> list[EmbeddingSet]:
    """Restrict every set to the vocabulary shared by all of them.

    Word matching is exact (case-sensitive).  Raises when the shared
    vocabulary is empty.
    """
    if not sets:
        raise EmbeddingFormatError("need at least one embedding set")
    if len(sets) == 1:
        return [sets[0]]
    shared = set(sets[0].words)
    for emb in sets[1:]:
        shared &= emb.vocab()
    if not shared:
        raise EmbeddingFormatError("embedding sets share no vocabulary")
    words = tuple(sorted(shared))
    out = []
    for emb in sets:
        rows = np.array([emb._index[w] for w in words])
        out.append(EmbeddingSet(emb.name, words, emb.vectors[rows]))
    return out


def standardize(emb: EmbeddingSet) -> EmbeddingSet:
    """Scale each dimension to mean 0 and population standard deviation 1.

    Dimensions that are constant across the vocabulary map to all-zeros.
    Requires at least 2 entries.
    """
    if len(emb) < 2:
        raise EmbeddingFormatError("standardize needs at least 2 entries")
    mean = emb.vectors.mean(axis=0)
    std = emb.vectors.std(axis=0)  # population (divide-by-n) convention
    centered = emb.vectors - mean
    scaled = np.divide(centered, std, out=np.zeros_like(centered), where=std > 0)
    return emb.replace_vectors(scaled)
