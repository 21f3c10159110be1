"""1-block factor maps: fiber decompositions, block operators, projected
cylinder measures (two independent routes), and the fiber-wise mixing test.

A 1-block factor map sends each domain symbol to an image symbol; its image
is a sofic shift.  On the block recoding the map acts letterwise, grouping
domain block symbols into fibers over image block words.  For an image
transition b -> b' the block operator is the sub-matrix of the transfer
matrix with rows in fiber(b) and columns in fiber(b') (source-row
orientation, matching the transfer matrix).  Projected cylinder masses are

    proj[b_0 ... b_n] = lambda^{-n} * nu_{b_0}^T  L_{b_0 b_1} ... L_{b_{n-1} b_n}  h_{b_n}

with nu_b, h_b the fiber restrictions of the Perron vectors.  The brute-force
route sums domain cylinder measures over all admissible preimage words and
serves as the independent oracle for the product formula.

Image-word admissibility always goes through boolean block products (never a
plain block adjacency): the image is sofic, so a word is admissible iff some
lift exists, i.e. iff the product is nonzero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import EnumerationLimitError, ValidationError
from .potential import PerronData, TransferMatrix, cylinder_measure
from .sft import DEFAULT_MAX_WORDS, Alphabet, Word


@dataclass(frozen=True, eq=False)
class FactorSystem:
    """A factor map bundled with its fiber decomposition and block operators.

    fibers[b] lists the domain block symbols over image block word b; blocks
    holds the nonzero operators keyed by image block transitions.  For
    depth >= 2 potentials everything lives on the block recoding and image
    block words are sliding windows of image symbol words.
    """

    tm: TransferMatrix
    image_alphabet: Alphabet
    symbol_map: tuple[int, ...]              # domain symbol -> image symbol
    image_block_words: tuple[Word, ...]      # realized image k-words, lexicographic
    image_block_index: dict                  # image k-word -> index
    block_symbol_map: tuple[int, ...]        # domain block -> image block
    fibers: tuple[tuple[int, ...], ...]      # per image block, domain block indices
    blocks: dict                             # (b, b') -> float ndarray
    bool_blocks: dict                        # (b, b') -> bool ndarray
    exact_blocks: dict | None                # (b, b') -> Fraction rows

    @property
    def block_length(self) -> int:
        return self.tm.recoding.block_length

    def fiber_h(self, pd: PerronData, b: int):
        if pd.exact:
            return [pd.h[i] for i in self.fibers[b]]
        return np.asarray(pd.h)[list(self.fibers[b])]

    def fiber_nu(self, pd: PerronData, b: int):
        if pd.exact:
            return [pd.nu[i] for i in self.fibers[b]]
        return np.asarray(pd.nu)[list(self.fibers[b])]


def build_factor(tm: TransferMatrix, symbol_map, image_alphabet: Alphabet) -> FactorSystem:
    """Group the transfer matrix into fiber blocks under a 1-block map.

    `symbol_map` gives the image symbol index of every domain symbol.
    Raises on unmapped domain symbols and on image symbols with empty fiber.
    """
    sft = tm.sft
    d = sft.size
    smap = list(symbol_map)
    if len(smap) != d:
        raise ValidationError(f"symbol map covers {len(smap)} of {d} domain symbols")
    for i, b in enumerate(smap):
        if not 0 <= b < image_alphabet.size:
            raise ValidationError(
                f"symbol {sft.alphabet.name(i)!r} maps to out-of-range image index {b}"
            )
    for b in range(image_alphabet.size):
        if b not in smap:
            raise ValidationError(
                f"empty fiber: image symbol {image_alphabet.name(b)!r} has no preimage"
            )
    rec = tm.recoding
    image_words = sorted({tuple(smap[s] for s in bw) for bw in rec.block_words})
    index = {w: i for i, w in enumerate(image_words)}
    bsm = tuple(index[tuple(smap[s] for s in bw)] for bw in rec.block_words)
    fibers: list[list[int]] = [[] for _ in image_words]
    for dom, img in enumerate(bsm):
        fibers[img].append(dom)
    pos = {}
    for img, members in enumerate(fibers):
        for p, dom in enumerate(members):
            pos[dom] = p
    blocks: dict = {}
    adj = rec.block_sft.adjacency
    for i in range(rec.size):
        for j in np.flatnonzero(adj[i]):
            key = (bsm[i], bsm[int(j)])
            if key not in blocks:
                blocks[key] = np.zeros((len(fibers[key[0]]), len(fibers[key[1]])))
            blocks[key][pos[i], pos[int(j)]] = tm.weights[i, j]
    exact_blocks = None
    if tm.exact_weights is not None:
        exact_blocks = {}
        for (b0, b1), m in blocks.items():
            rows = [[Fraction(0)] * m.shape[1] for _ in range(m.shape[0])]
            for p, i in enumerate(fibers[b0]):
                for q, j in enumerate(fibers[b1]):
                    rows[p][q] = tm.exact_weights[i][j]
            exact_blocks[(b0, b1)] = rows
    bool_blocks = {key: m > 0 for key, m in blocks.items()}
    for m in blocks.values():
        m.setflags(write=False)
    return FactorSystem(
        tm=tm,
        image_alphabet=image_alphabet,
        symbol_map=tuple(smap),
        image_block_words=tuple(image_words),
        image_block_index=index,
        block_symbol_map=bsm,
        fibers=tuple(tuple(f) for f in fibers),
        blocks=blocks,
        bool_blocks=bool_blocks,
        exact_blocks=exact_blocks,
    )


def image_block_word(fs: FactorSystem, yword: Word) -> list[int] | None:
    """Sliding-window translation of an image symbol word to image block
    indices; None when some window is not a realized image block."""
    k = fs.block_length
    out = []
    for t in range(len(yword) - k + 1):
        idx = fs.image_block_index.get(tuple(yword[t:t + k]))
        if idx is None:
            return None
        out.append(idx)
    return out


def _check_image_word(fs: FactorSystem, yword) -> Word:
    w = tuple(yword)
    for s in w:
        if not 0 <= s < fs.image_alphabet.size:
            raise ValidationError(f"image symbol index {s} out of bounds")
    return w


def image_admissible(fs: FactorSystem, yword) -> bool:
    """True iff the image word has an admissible lift (nonzero boolean
    block product); the image language is sofic, so this is the criterion."""
    w = _check_image_word(fs, yword)
    k = fs.block_length
    if len(w) == 0:
        return True
    if len(w) < k:
        return any(bw[:len(w)] == w for bw in fs.image_block_words)
    blocks = image_block_word(fs, w)
    if blocks is None:
        return False
    reach = np.ones(len(fs.fibers[blocks[0]]), dtype=bool)
    for a, b in zip(blocks, blocks[1:]):
        m = fs.bool_blocks.get((a, b))
        if m is None:
            return False
        reach = (reach[:, None] & m).any(axis=0)
        if not reach.any():
            return False
    return True


def block_product(fs: FactorSystem, yword):
    """Product of block operators along an admissible image word of length
    >= 2 (in block coordinates).

    Float mode returns (matrix, log_scale) with the product renormalized by
    its maximum entry at every step; exact mode returns the raw Fraction
    matrix (log_scale 0).
    """
    w = _check_image_word(fs, yword)
    k = fs.block_length
    if len(w) < k + 1:
        raise ValidationError("block products need at least two block symbols")
    blocks = image_block_word(fs, w)
    if blocks is None:
        raise ValidationError("image word is not admissible")
    if fs.exact_blocks is not None:
        prod = None
        for a, b in zip(blocks, blocks[1:]):
            m = fs.exact_blocks.get((a, b))
            if m is None:
                raise ValidationError("image word is not admissible")
            prod = m if prod is None else _fmat_mul(prod, m)
        return prod, 0.0
    prod = None
    log_scale = 0.0
    for a, b in zip(blocks, blocks[1:]):
        m = fs.blocks.get((a, b))
        if m is None:
            raise ValidationError("image word is not admissible")
        prod = m.copy() if prod is None else prod @ m
        top = prod.max()
        if top == 0:
            raise ValidationError("image word is not admissible")
        prod /= top
        log_scale += math.log(top)
    return prod, log_scale


def _fmat_mul(a, b):
    n, k, m = len(a), len(b), len(b[0])
    return [
        [sum((a[i][t] * b[t][j] for t in range(k)), Fraction(0)) for j in range(m)]
        for i in range(n)
    ]


def projected_measure(fs: FactorSystem, pd: PerronData, yword):
    """Projected cylinder mass via the block-operator product formula.

    Float mode returns the natural log (-inf for measure zero); exact mode
    returns the Fraction.  Image words shorter than the block length are
    summed over their realized block extensions.
    """
    w = _check_image_word(fs, yword)
    if len(w) == 0:
        raise ValidationError("projected measure needs a nonempty image word")
    k = fs.block_length
    if len(w) < k:
        matching = [b for b, bw in enumerate(fs.image_block_words) if bw[:len(w)] == w]
        if pd.exact:
            total = Fraction(0)
            for b in matching:
                total += sum((pd.nu[i] * pd.h[i] for i in fs.fibers[b]), Fraction(0))
            return total
        total = sum(
            float(np.dot(fs.fiber_nu(pd, b), fs.fiber_h(pd, b))) for b in matching
        )
        return math.log(total) if total > 0 else -math.inf
    blocks = image_block_word(fs, w)
    if blocks is None:
        return Fraction(0) if pd.exact else -math.inf
    n_steps = len(blocks) - 1
    if pd.exact:
        vec = fs.fiber_nu(pd, blocks[0])
        for a, b in zip(blocks, blocks[1:]):
            m = fs.exact_blocks.get((a, b))
            if m is None:
                return Fraction(0)
            vec = [
                sum((vec[i] * m[i][j] for i in range(len(vec))), Fraction(0))
                for j in range(len(m[0]))
            ]
        total = sum(
            (v * hh for v, hh in zip(vec, fs.fiber_h(pd, blocks[-1]))), Fraction(0)
        )
        return total / pd.lam**n_steps
    vec = fs.fiber_nu(pd, blocks[0]).astype(float)
    log_scale = 0.0
    for a, b in zip(blocks, blocks[1:]):
        m = fs.blocks.get((a, b))
        if m is None:
            return -math.inf
        vec = vec @ m
        top = vec.max()
        if top == 0:
            return -math.inf
        vec /= top
        log_scale += math.log(top)
    total = float(vec @ fs.fiber_h(pd, blocks[-1]))
    if total <= 0:
        return -math.inf
    return math.log(total) + log_scale - n_steps * pd.log_lam


def projected_measure_bruteforce(fs: FactorSystem, pd: PerronData, yword,
                                 max_words: int = DEFAULT_MAX_WORDS):
    """Projected cylinder mass as a plain sum of domain cylinder measures
    over every admissible preimage word; the independent oracle for
    :func:`projected_measure`.

    The preimage tree is walked with incremental transition products, which
    per leaf reproduces cylinder_measure exactly.
    """
    w = _check_image_word(fs, yword)
    if len(w) == 0:
        raise ValidationError("projected measure needs a nonempty image word")
    sft = fs.tm.sft
    adjacency = sft.adjacency
    fibers_by_symbol: list[list[int]] = [[] for _ in range(fs.image_alphabet.size)]
    for s, b in enumerate(fs.symbol_map):
        fibers_by_symbol[b].append(s)
    rec = fs.tm.recoding
    k = rec.block_length
    exact = pd.exact

    # short words: enumerate preimages level by level, per-word measure calls
    if len(w) < k:
        total_exact = Fraction(0)
        logs: list[float] = []
        frontier: list[Word] = [(s,) for s in fibers_by_symbol[w[0]]]
        for t in range(1, len(w)):
            nxt = []
            for u in frontier:
                for s in fibers_by_symbol[w[t]]:
                    if adjacency[u[-1], s]:
                        nxt.append(u + (s,))
            frontier = nxt
            if len(frontier) > max_words:
                raise EnumerationLimitError("preimage enumeration exceeded budget")
        for u in frontier:
            mv = cylinder_measure(pd, u)
            if exact:
                total_exact += mv
            elif mv != -math.inf:
                logs.append(mv)
        if exact:
            return total_exact
        return _logsum(logs)

    # general case: carry nu * (product of weights) / lambda^t along the tree
    log_lam = pd.log_lam
    total_exact = Fraction(0)
    logs = []
    count = 0
    # stack entries: (position, domain block index, partial value)
    start_blocks = [
        i for i, bw in enumerate(rec.block_words)
        if tuple(fs.symbol_map[s] for s in bw) == w[:k]
    ]
    if exact:
        stack = [(k, i, pd.nu[i]) for i in reversed(start_blocks)]
    else:
        stack = [(k, i, math.log(float(pd.nu[i]))) for i in reversed(start_blocks)]
    wmat = fs.tm.weights
    logw = fs.tm.log_weights
    exact_w = fs.tm.exact_weights
    block_words = rec.block_words
    adj = rec.block_sft.adjacency
    while stack:
        t, blk, val = stack.pop()
        count += 1
        if count > max_words:
            raise EnumerationLimitError("preimage enumeration exceeded budget")
        if t == len(w):
            if exact:
                total_exact += val * pd.h[blk]
            else:
                logs.append(val + math.log(float(pd.h[blk])))
            continue
        target = w[t]
        for j in np.flatnonzero(adj[blk]):
            j = int(j)
            if fs.symbol_map[block_words[j][-1]] != target:
                continue
            if exact:
                stack.append((t + 1, j, val * exact_w[blk][j] / pd.lam))
            else:
                stack.append((t + 1, j, val + logw[blk, j] - log_lam))
    if exact:
        return total_exact
    return _logsum(logs)


def _logsum(logs: list[float]) -> float:
    if not logs:
        return -math.inf
    top = max(logs)
    if top == -math.inf:
        return -math.inf
    return top + math.log(sum(math.exp(x - top) for x in logs))


def enumerate_image_words(fs: FactorSystem, n: int,
                          max_words: int = DEFAULT_MAX_WORDS) -> list[Word]:
    """All admissible image words of length n, lexicographic.  Enumeration
    runs over image blocks carrying the reachable domain-block set, so only
    sofic-admissible words appear and dead branches are pruned early."""
    if n < 0:
        raise ValidationError("length must be >= 0")
    if n == 0:
        return [()]
    k = fs.block_length
    if n < k:
        return sorted({bw[:n] for bw in fs.image_block_words})
    succ: dict[int, list[int]] = {}
    for (a, b) in fs.bool_blocks:
        succ.setdefault(a, []).append(b)
    for lst in succ.values():
        lst.sort(key=lambda b: fs.image_block_words[b])
    out: list[Word] = []
    budget = [max_words]

    def walk(word: tuple[int, ...], b: int, reach: np.ndarray, remaining: int):
        if remaining == 0:
            out.append(word)
            budget[0] -= 1
            if budget[0] < 0:
                raise EnumerationLimitError("image word enumeration exceeded budget")
            return
        for b2 in succ.get(b, ()):
            m = fs.bool_blocks[(b, b2)]
            r2 = (reach[:, None] & m).any(axis=0)
            if r2.any():
                walk(word + (fs.image_block_words[b2][-1],), b2, r2, remaining - 1)

    for b0 in sorted(range(len(fs.image_block_words)),
                     key=lambda b: fs.image_block_words[b]):
        walk(fs.image_block_words[b0], b0,
             np.ones(len(fs.fibers[b0]), dtype=bool), n - k)
    return sorted(out)


@dataclass(frozen=True)
class FwmReport:
    """Result of the fiber-wise mixing test at a single N (in block
    coordinates when the system was recoded)."""

    n: int
    holds: bool
    witnesses: tuple
    words_checked: int
    recoded: bool


def fwm_check(fs: FactorSystem, n: int, max_words: int = DEFAULT_MAX_WORDS,
              witness_cap: int = 100) -> FwmReport:
    """Test fiber-wise mixing at span N.

    For every admissible image word of N+1 block symbols the boolean block
    product (rows fiber of the first block, columns fiber of the last) must
    be all-positive: every prescribed pair of end symbols lifts.  Witnesses
    list failing (image word, first symbol, last symbol) triples, capped.
    """
    if n < 1:
        raise ValidationError("fiber-wise mixing span must be >= 1")
    succ: dict[int, list[int]] = {}
    for (a, b) in fs.bool_blocks:
        succ.setdefault(a, []).append(b)
    for lst in succ.values():
        lst.sort(key=lambda b: fs.image_block_words[b])
    witnesses: list = []
    checked = 0
    budget = [max_words]
    holds = [True]

    def walk(word, b, mat, remaining):
        budget[0] -= 1
        if budget[0] < 0:
            raise EnumerationLimitError("fiber-wise mixing check exceeded budget")
        if remaining == 0:
            nonlocal checked
            checked += 1
            if not mat.all():
                holds[0] = False
                if len(witnesses) < witness_cap:
                    fiber0 = fs.fibers[fs.image_block_index[word[:fs.block_length]]]
                    fiberN = fs.fibers[b]
                    for i, j in zip(*np.nonzero(~mat)):
                        if len(witnesses) >= witness_cap:
                            break
                        witnesses.append((word, fiber0[int(i)], fiberN[int(j)]))
            return
        for b2 in succ.get(b, ()):
            m2 = mat @ fs.bool_blocks[(b, b2)]
            if m2.any():
                walk(word + (fs.image_block_words[b2][-1],), b2, m2, remaining - 1)

    k = fs.block_length
    for b0 in sorted(range(len(fs.image_block_words)),
                     key=lambda b: fs.image_block_words[b]):
        eye = np.eye(len(fs.fibers[b0]), dtype=bool)
        walk(fs.image_block_words[b0], b0, eye, n)
    return FwmReport(n=n, holds=holds[0], witnesses=tuple(witnesses),
                     words_checked=checked, recoded=k > 1)


@dataclass(frozen=True)
class FwmSearchResult:
    found: int | None            # smallest passing N, or None
    reports: tuple[FwmReport, ...]


def fwm_search(fs: FactorSystem, max_n: int,
               max_words: int = DEFAULT_MAX_WORDS) -> FwmSearchResult:
    """Try N = 1..max_n independently (no monotonicity assumed) and return
    the first N at which fiber-wise mixing holds, with all per-N reports."""
    if max_n < 1:
        raise ValidationError("max_n must be >= 1")
    reports = []
    for n in range(1, max_n + 1):
        rep = fwm_check(fs, n, max_words)
        reports.append(rep)
        if rep.holds:
            return FwmSearchResult(found=n, reports=tuple(reports))
    return FwmSearchResult(found=None, reports=tuple(reports))
