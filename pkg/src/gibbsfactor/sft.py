"""Shifts of finite type: validation, admissibility, word enumeration, mixing,
and higher-block recoding.

Symbols are dense integer indices internally; names appear only at the I/O
boundary.  A shift of finite type (SFT) is given by a 0/1 adjacency matrix A,
where the transition i -> j is allowed iff A[i, j] == 1.  Words are tuples of
symbol indices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EnumerationLimitError, ValidationError

DEFAULT_MAX_WORDS = 5_000_000

Word = tuple[int, ...]


@dataclass(frozen=True)
class Alphabet:
    """Ordered finite alphabet of distinct, non-empty symbol names."""

    symbols: tuple[str, ...]

    def __post_init__(self):
        if len(self.symbols) == 0:
            raise ValidationError("alphabet must be non-empty")
        if any(not isinstance(s, str) or s == "" for s in self.symbols):
            raise ValidationError("symbol names must be non-empty strings")
        if len(set(self.symbols)) != len(self.symbols):
            raise ValidationError("symbol names must be pairwise distinct")

    @property
    def size(self) -> int:
        return len(self.symbols)

    def index(self, name: str) -> int:
        try:
            return self.symbols.index(name)
        except ValueError:
            raise ValidationError(f"unknown symbol {name!r}") from None

    def name(self, i: int) -> str:
        return self.symbols[i]


@dataclass(frozen=True, eq=False)
class Sft:
    """One-sided shift of finite type over `alphabet` with 0/1 adjacency."""

    alphabet: Alphabet
    adjacency: np.ndarray  # shape (d, d), dtype uint8, entries in {0, 1}

    @property
    def size(self) -> int:
        return self.alphabet.size

    def successors(self, i: int) -> np.ndarray:
        return np.flatnonzero(self.adjacency[i])

    def predecessors(self, j: int) -> np.ndarray:
        return np.flatnonzero(self.adjacency[:, j])


def build_sft(alphabet: Alphabet, adjacency) -> Sft:
    """Validate and freeze an SFT.

    Rejects non-square or non-binary matrices and stranded symbols (an empty
    row or column).  Does not require mixing; see :func:`mixing_index`.
    """
    a = np.asarray(adjacency)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"adjacency must be square, got shape {a.shape}")
    if a.shape[0] != alphabet.size:
        raise ValidationError(
            f"adjacency dimension {a.shape[0]} != alphabet size {alphabet.size}"
        )
    if not np.isin(a, (0, 1)).all():
        raise ValidationError("adjacency entries must be 0 or 1")
    a = a.astype(np.uint8)
    for i in range(a.shape[0]):
        if not a[i].any():
            raise ValidationError(f"empty row: symbol {alphabet.name(i)!r} has no successor")
        if not a[:, i].any():
            raise ValidationError(f"empty column: symbol {alphabet.name(i)!r} has no predecessor")
    a.setflags(write=False)
    return Sft(alphabet=alphabet, adjacency=a)


def wielandt_cap(d: int) -> int:
    """Primitivity exponent bound: a primitive d x d matrix has A^p > 0 for
    p = d^2 - 2d + 2, so checking up to this cap is conclusive."""
    return max(1, d * d - 2 * d + 2)


def mixing_index(sft: Sft, cap: int | None = None) -> int | None:
    """Smallest p <= cap with all entries of A^p positive, else None.

    Powers use saturating boolean (OR/AND) arithmetic, never integer counts,
    so there is no overflow.  None means "not mixing within cap"; with the
    default (Wielandt) cap that is conclusive.
    """
    if cap is None:
        cap = wielandt_cap(sft.size)
    if cap < 1:
        raise ValidationError("cap must be >= 1")
    base = sft.adjacency.astype(bool)
    power = base.copy()
    for p in range(1, cap + 1):
        if power.all():
            return p
        # boolean matrix product: (P & B) any along the contracted axis
        power = (power[:, :, None] & base[None, :, :]).any(axis=1)
    return None


def is_admissible(sft: Sft, word) -> bool:
    """True iff every consecutive pair of `word` is an allowed transition.

    Length-0 and length-1 words are admissible (build_sft already rejected
    stranded symbols, so no special case is needed).
    """
    w = tuple(word)
    d = sft.size
    for s in w:
        if not 0 <= s < d:
            raise ValidationError(f"symbol index {s} out of bounds for alphabet size {d}")
    return all(sft.adjacency[a, b] for a, b in zip(w, w[1:]))


def word_matrix(sft: Sft, n: int, max_words: int = DEFAULT_MAX_WORDS) -> np.ndarray:
    """All admissible words of length n as a (count, n) int array in
    lexicographic order.  Internal bulk form of :func:`enumerate_words`."""
    if n < 0:
        raise ValidationError("word length must be >= 0")
    d = sft.size
    if n == 0:
        return np.empty((1, 0), dtype=np.int64)
    level = np.arange(d, dtype=np.int64).reshape(-1, 1)
    succ = [np.flatnonzero(sft.adjacency[i]).astype(np.int64) for i in range(d)]
    succ_flat = np.concatenate(succ)
    offsets = np.zeros(d, dtype=np.int64)
    degs = np.array([len(s) for s in succ], dtype=np.int64)
    offsets[1:] = np.cumsum(degs)[:-1]
    for _ in range(n - 1):
        last = level[:, -1]
        deg = degs[last]
        total = int(deg.sum())
        if total > max_words:
            raise EnumerationLimitError(
                f"enumeration would produce {total} words, exceeding the cap of {max_words}"
            )
        parent = np.repeat(np.arange(level.shape[0]), deg)
        # within-group offsets 0..deg-1 for each parent, fully vectorized
        ends = np.cumsum(deg)
        within = np.arange(total) - np.repeat(ends - deg, deg)
        new_last = succ_flat[np.repeat(offsets[last], deg) + within]
        level = np.column_stack([level[parent], new_last])
    return level


def enumerate_words(sft: Sft, n: int, max_words: int = DEFAULT_MAX_WORDS) -> list[Word]:
    """All admissible words of length n, lexicographic, no duplicates."""
    return [tuple(row) for row in word_matrix(sft, n, max_words).tolist()]


def count_words(sft: Sft, n: int, max_words: int = DEFAULT_MAX_WORDS) -> int:
    return word_matrix(sft, n, max_words).shape[0]


@dataclass(frozen=True, eq=False)
class Recoding:
    """Higher-block presentation: symbols of `block_sft` are the admissible
    k-words of the base SFT, with transitions given by (k-1)-overlap."""

    base: Sft
    block_length: int
    block_words: tuple[Word, ...]  # lexicographic admissible k-words
    block_sft: Sft
    to_block: dict  # Word -> block symbol index

    @property
    def size(self) -> int:
        return len(self.block_words)


def _block_name(alphabet: Alphabet, word: Word) -> str:
    names = [alphabet.name(s) for s in word]
    if all(len(x) == 1 for x in names):
        return "".join(names)
    return ",".join(names)


def higher_block_recode(sft: Sft, k: int, max_words: int = DEFAULT_MAX_WORDS) -> Recoding:
    """Recode to blocks of length k, so depth-k potentials become depth-1.

    Block transition u -> v is allowed iff u[1:] == v[:-1] and the final base
    transition u[-1] -> v[-1] is allowed (for k >= 2 the latter is implied by
    v being admissible).  k = 1 yields an isomorphic copy.
    """
    if k < 1:
        raise ValidationError("block length must be >= 1")
    words = enumerate_words(sft, k, max_words)
    to_block = {w: i for i, w in enumerate(words)}
    m = len(words)
    adj = np.zeros((m, m), dtype=np.uint8)
    by_prefix: dict[Word, list[int]] = {}
    for j, v in enumerate(words):
        by_prefix.setdefault(v[:-1], []).append(j)
    for i, u in enumerate(words):
        for j in by_prefix.get(u[1:], ()):
            if sft.adjacency[u[-1], words[j][-1]]:
                adj[i, j] = 1
    names = tuple(_block_name(sft.alphabet, w) for w in words)
    block_sft = build_sft(Alphabet(names), adj)
    return Recoding(
        base=sft,
        block_length=k,
        block_words=tuple(words),
        block_sft=block_sft,
        to_block=to_block,
    )


def block_word(recoding: Recoding, word) -> tuple[int, ...]:
    """Translate a base word of length >= k into its block-symbol word."""
    w = tuple(word)
    k = recoding.block_length
    if len(w) < k:
        raise ValidationError(f"word shorter than block length {k}")
    try:
        return tuple(recoding.to_block[w[t:t + k]] for t in range(len(w) - k + 1))
    except KeyError as e:
        raise ValidationError(f"word contains inadmissible block {e.args[0]}") from None
