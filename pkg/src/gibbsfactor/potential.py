"""Locally constant potentials, transfer matrices, Perron data, and Gibbs
cylinder measures.

A depth-k potential assigns a real value phi(w) to every admissible
(k+1)-word w (phi(x) depends on x_0..x_k).  The system is recoded to blocks
of length max(k, 1), on which the transfer operator is a nonnegative matrix

    W[i, j] = exp(phi(word_i . last(word_j)))   when block transition i -> j
              is allowed, 0 otherwise,

i.e. rows are indexed by source blocks and columns by target blocks.  With
W h = lambda h and nu^T W = lambda nu^T, sum(nu) = 1, <h, nu> = 1, the Gibbs
state of phi has cylinder masses

    mu[w_0 ... w_n] = lambda^{-m} (prod of W along the block word)
                      * nu[first block] * h[last block],

where m is the number of block transitions.  This is exactly the operator
representation of the measure; additivity, shift-invariance and total mass
follow from the eigen-equations.

Float-mode measures are computed in log space (long words underflow raw
products); exact mode runs on fractions.Fraction and is available when the
potential was given as a table of rational weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import rational as rat
from .errors import (
    ConvergenceError,
    ExactModeError,
    NotMixingError,
    ValidationError,
)
from .sft import (
    DEFAULT_MAX_WORDS,
    Recoding,
    Sft,
    Word,
    block_word,
    enumerate_words,
    higher_block_recode,
    is_admissible,
    mixing_index,
)

PHI_MODE = "phi"
WEIGHT_MODE = "weight"


@dataclass(frozen=True, eq=False)
class Potential:
    """Depth-k locally constant potential on an SFT.

    `phi` maps every admissible (k+1)-word to its potential value; `weights`
    holds e^phi.  `exact_weights` is present when the input was a table of
    positive rationals (weight mode), enabling exact arithmetic downstream.
    """

    sft: Sft
    depth: int
    mode: str
    phi: dict
    weights: dict
    exact_weights: dict | None

    @property
    def support_words(self) -> list[Word]:
        return sorted(self.phi.keys())


def build_potential(sft: Sft, depth: int, mode: str, table: dict) -> Potential:
    """Validate a potential table.

    The table must cover every admissible (depth+1)-word.  Entries for
    inadmissible words are ignored with a warning.  In weight mode entries
    must be strictly positive; int/Fraction entries keep exact arithmetic
    available.
    """
    import warnings

    if depth < 0:
        raise ValidationError("potential depth must be >= 0")
    if mode not in (PHI_MODE, WEIGHT_MODE):
        raise ValidationError(f"unknown potential mode {mode!r}")
    needed = enumerate_words(sft, depth + 1)
    needed_set = set(needed)
    phi: dict = {}
    weights: dict = {}
    exact: dict | None = {} if mode == WEIGHT_MODE else None
    for key, value in table.items():
        w = tuple(key)
        if w not in needed_set:
            if len(w) != depth + 1 or not is_admissible(sft, w):
                warnings.warn(f"ignoring entry for inadmissible word {w}", stacklevel=2)
                continue
        if mode == PHI_MODE:
            v = float(value)
            if not math.isfinite(v):
                raise ValidationError(f"non-finite potential value for word {w}")
            phi[w] = v
            weights[w] = math.exp(v)
        else:
            if isinstance(value, (int, Fraction)) and exact is not None:
                fr = Fraction(value)
            elif isinstance(value, str) and exact is not None:
                fr = Fraction(value)
            else:
                fr = None
                exact = None
            fv = float(fr) if fr is not None else float(value)
            if fv <= 0 or (fr is not None and fr <= 0):
                raise ValidationError(f"non-positive weight for word {w}")
            weights[w] = fv
            phi[w] = math.log(fv)
            if exact is not None:
                exact[w] = fr
    missing = [w for w in needed if w not in weights]
    if missing:
        raise ValidationError(f"missing table entry for admissible word {missing[0]}")
    return Potential(sft=sft, depth=depth, mode=mode, phi=phi, weights=weights,
                     exact_weights=exact)


def variations(potential: Potential) -> list[float]:
    """var_n(phi) for n = 1..k: max |phi(u) - phi(v)| over admissible
    (k+1)-word pairs agreeing in coordinates 0..n-1.  Empty for depth 0
    (var_n = 0 for all n beyond the depth, by locality)."""
    k = potential.depth
    out = []
    words = potential.support_words
    for n in range(1, k + 1):
        groups: dict = {}
        for w in words:
            lo, hi = groups.get(w[:n], (math.inf, -math.inf))
            v = potential.phi[w]
            groups[w[:n]] = (min(lo, v), max(hi, v))
        out.append(max((hi - lo for lo, hi in groups.values()), default=0.0))
    return out


@dataclass(frozen=True)
class HolderEnvelope:
    """Hölder data of a potential at a chosen theta: the smallest constant
    with var_n <= holder_constant * theta^n for all n."""

    theta: float
    holder_constant: float
    sup_norm: float
    variations: tuple[float, ...]


def holder_envelope(potential: Potential, theta: float) -> HolderEnvelope:
    if not 0 < theta < 1:
        raise ValidationError("theta must lie in (0, 1)")
    var = variations(potential)
    const = max((v / theta**n for n, v in enumerate(var, start=1)), default=0.0)
    sup = max((abs(v) for v in potential.phi.values()), default=0.0)
    return HolderEnvelope(theta=theta, holder_constant=const, sup_norm=sup,
                          variations=tuple(var))


def birkhoff_sum(potential: Potential, word) -> float:
    """Sum of phi over the sliding (k+1)-windows of an admissible word;
    the word determines this Birkhoff sum exactly."""
    w = tuple(word)
    k = potential.depth
    if len(w) < k + 1:
        raise ValidationError(f"word of length {len(w)} too short for depth {k}")
    if not is_admissible(potential.sft, w):
        raise ValidationError("word is not admissible")
    return sum(potential.phi[w[i:i + k + 1]] for i in range(len(w) - k))


@dataclass(frozen=True, eq=False)
class TransferMatrix:
    """Weighted adjacency of the block recoding: W[i, j] = weight of the
    block transition i -> j (source-row orientation)."""

    sft: Sft
    potential: Potential
    recoding: Recoding
    weights: np.ndarray          # (d, d) float
    log_weights: np.ndarray      # log W, -inf where forbidden
    exact_weights: list | None   # Fraction rows, or None

    @property
    def dimension(self) -> int:
        return self.weights.shape[0]


def transfer_matrix(sft: Sft, potential: Potential,
                    max_words: int = DEFAULT_MAX_WORDS) -> TransferMatrix:
    """Build the block transfer matrix of a potential.

    Depth-k systems are recoded to blocks of length max(k, 1); the entry for
    an allowed block transition i -> j is the weight of the (k+1)-word
    word_i . last(word_j) (truncated to the depth window for depth 0).
    """
    if potential.sft is not sft:
        raise ValidationError("potential was built for a different SFT")
    k = max(potential.depth, 1)
    rec = higher_block_recode(sft, k, max_words)
    d = rec.size
    w = np.zeros((d, d))
    exact: list | None = None
    if potential.exact_weights is not None:
        exact = [[Fraction(0)] * d for _ in range(d)]
    window = potential.depth + 1
    adj = rec.block_sft.adjacency
    for i, u in enumerate(rec.block_words):
        for j in np.flatnonzero(adj[i]):
            full = u + (rec.block_words[j][-1],)
            key = full[:window]
            w[i, j] = potential.weights[key]
            if exact is not None:
                exact[i][int(j)] = potential.exact_weights[key]
    with np.errstate(divide="ignore"):
        logw = np.log(w)
    w.setflags(write=False)
    logw.setflags(write=False)
    return TransferMatrix(sft=sft, potential=potential, recoding=rec,
                          weights=w, log_weights=logw, exact_weights=exact)


@dataclass(frozen=True, eq=False)
class PerronData:
    """Leading eigendata of a transfer matrix.

    h is the right eigenvector (W h = lambda h), nu the left one
    (nu^T W = lambda nu^T), normalized so sum(nu) = 1 and <h, nu> = 1.
    In exact mode all three are Fractions and residual is exactly zero.
    """

    tm: TransferMatrix
    lam: float | Fraction
    h: np.ndarray | tuple
    nu: np.ndarray | tuple
    residual: float
    iterations: int
    exact: bool

    @property
    def log_lam(self) -> float:
        return math.log(float(self.lam))


def _require_mixing(tm: TransferMatrix):
    if mixing_index(tm.recoding.block_sft) is None:
        raise NotMixingError(
            "block shift is not topologically mixing; Perron data undefined"
        )


def perron(tm: TransferMatrix, tol: float = 1e-14, max_iter: int = 200_000) -> PerronData:
    """Power iteration for the Perron eigendata, from the all-ones vector.

    Iterates W and W^T with sup-norm normalization until successive iterates
    differ by < tol and both eigen-residuals drop below tol.  Mixing of the
    block shift guarantees convergence; no deflation or shifts are needed.
    """
    if tol <= 0:
        raise ValidationError("tol must be positive")
    _require_mixing(tm)
    w = tm.weights
    d = tm.dimension
    h = np.ones(d)
    nu = np.ones(d)
    lam = 1.0
    for it in range(1, max_iter + 1):
        wh = w @ h
        nw = nu @ w
        h_new = wh / wh.max()
        nu_new = nw / nw.max()
        lam = float(nu_new @ w @ h_new) / float(nu_new @ h_new)
        step = max(np.abs(h_new - h).max(), np.abs(nu_new - nu).max())
        h, nu = h_new, nu_new
        res_h = np.abs(w @ h - lam * h).max() / np.abs(h).max()
        res_nu = np.abs(nu @ w - lam * nu).max() / np.abs(nu).max()
        if step < tol and res_h < tol and res_nu < tol:
            break
    else:
        raise ConvergenceError(f"power iteration did not converge in {max_iter} steps")
    nu = nu / nu.sum()
    h = h / float(h @ nu)
    residual = max(
        float(np.abs(w @ h - lam * h).max() / np.abs(h).max()),
        float(np.abs(nu @ w - lam * nu).max()),
    )
    h.setflags(write=False)
    nu.setflags(write=False)
    return PerronData(tm=tm, lam=lam, h=h, nu=nu, residual=residual,
                      iterations=it, exact=False)


def _exact_eigenvector(m, lam: Fraction) -> list | None:
    d = len(m)
    shifted = [[m[i][j] - (lam if i == j else 0) for j in range(d)] for i in range(d)]
    basis = rat.nullspace(shifted)
    if len(basis) != 1:
        return None
    v = basis[0]
    if all(x <= 0 for x in v):
        v = [-x for x in v]
    if any(x <= 0 for x in v):
        return None  # not the Perron direction
    return v


def perron_exact(tm: TransferMatrix, candidate=None,
                 tol: float = 1e-14, max_iter: int = 200_000) -> PerronData:
    """Exact Perron data over Fractions.

    With `candidate` = (lam, h, nu) the eigen-equations are verified exactly
    and the vectors renormalized.  Without one, the eigenvalue is recovered
    by rationalizing a float power-iteration estimate through a ladder of
    denominator bounds and certifying it with an exact nullspace computation;
    raises ExactModeError when no rational eigenvalue certifies (e.g. the
    golden-mean shift).
    """
    if tm.exact_weights is None:
        raise ExactModeError(
            "exact mode needs a weight-mode potential with rational entries"
        )
    _require_mixing(tm)
    m = tm.exact_weights
    d = len(m)
    if candidate is not None:
        lam, h, nu = candidate
        lam = Fraction(lam)
        h = rat.fvec(h)
        nu = rat.fvec(nu)
        if rat.mat_vec(m, h) != [lam * x for x in h]:
            raise ExactModeError("candidate h is not an exact right eigenvector")
        if rat.vec_mat(nu, m) != [lam * x for x in nu]:
            raise ExactModeError("candidate nu is not an exact left eigenvector")
        if any(x <= 0 for x in h) or any(x <= 0 for x in nu):
            raise ExactModeError("candidate eigenvectors must be strictly positive")
        iterations = 0
    else:
        approx = perron(tm, tol=tol, max_iter=max_iter)
        iterations = approx.iterations
        lam = None
        for den in (1, 10, 100, 10_000, 1_000_000, 10**9):
            cand = Fraction(float(approx.lam)).limit_denominator(den)
            if cand <= 0:
                continue
            h = _exact_eigenvector(m, cand)
            if h is not None:
                lam = cand
                break
        if lam is None:
            raise ExactModeError(
                "leading eigenvalue does not certify as a rational number; "
                "exact mode is unavailable for this system"
            )
        nu = _exact_eigenvector(rat.transpose(m), lam)
        if nu is None:
            raise ExactModeError("left eigenvector could not be certified")
    total = sum(nu, Fraction(0))
    nu = [x / total for x in nu]
    pairing = rat.dot(h, nu)
    h = [x / pairing for x in h]
    return PerronData(tm=tm, lam=lam, h=tuple(h), nu=tuple(nu), residual=0.0,
                      iterations=iterations, exact=True)


def _short_word_blocks(rec: Recoding, word: Word) -> list[int]:
    """Block symbols whose base word extends a too-short cylinder word."""
    n = len(word)
    return [i for i, bw in enumerate(rec.block_words) if bw[:n] == word]


def cylinder_measure(pd: PerronData, word):
    """Gibbs measure of the cylinder [word].

    Returns the natural log of the measure in float mode (-inf for an
    inadmissible word) and the exact Fraction in exact mode (0 for an
    inadmissible word).  Words shorter than the block length are summed
    over their admissible block extensions.
    """
    w = tuple(word)
    tm = pd.tm
    rec = tm.recoding
    if not is_admissible(tm.sft, w):
        return Fraction(0) if pd.exact else -math.inf
    if len(w) == 0:
        return Fraction(1) if pd.exact else 0.0
    if len(w) < rec.block_length:
        idxs = _short_word_blocks(rec, w)
        if pd.exact:
            return sum((pd.nu[i] * pd.h[i] for i in idxs), Fraction(0))
        total = sum(float(pd.nu[i]) * float(pd.h[i]) for i in idxs)
        return math.log(total) if total > 0 else -math.inf
    blocks = block_word(rec, w)
    if pd.exact:
        value = pd.nu[blocks[0]]
        for a, b in zip(blocks, blocks[1:]):
            value *= tm.exact_weights[a][b] / pd.lam
        return value * pd.h[blocks[-1]]
    logv = math.log(pd.nu[blocks[0]])
    for a, b in zip(blocks, blocks[1:]):
        lw = tm.log_weights[a, b]
        if lw == -math.inf:
            return -math.inf
        logv += lw - pd.log_lam
    return logv + math.log(pd.h[blocks[-1]])


def level_log_measures(pd: PerronData, n: int,
                       max_words: int = DEFAULT_MAX_WORDS):
    """Bulk form of cylinder_measure: (words, log measures) for all
    admissible base words of length n, vectorized.  n must be >= the block
    length.  Used by the consistency test suites."""
    from .sft import word_matrix

    tm = pd.tm
    rec = tm.recoding
    k = rec.block_length
    if n < k:
        raise ValidationError(f"bulk measures need length >= block length {k}")
    words = word_matrix(tm.sft, n, max_words)
    if k == 1:
        blocks = words
    else:
        # map every sliding k-window to its block index via positional encode
        d = tm.sft.size
        code = np.zeros(words.shape[0], dtype=np.int64)
        lookup = {}
        for idx, bw in enumerate(rec.block_words):
            c = 0
            for s in bw:
                c = c * d + s
            lookup[c] = idx
        table = np.full(max(lookup) + 1, -1, dtype=np.int64)
        for c, idx in lookup.items():
            table[c] = idx
        blocks = np.empty((words.shape[0], n - k + 1), dtype=np.int64)
        for t in range(n - k + 1):
            code[:] = 0
            for s in range(k):
                code = code * d + words[:, t + s]
            blocks[:, t] = table[code]
    logs = np.log(np.asarray(pd.nu, dtype=float))[blocks[:, 0]]
    logs = logs + np.log(np.asarray(pd.h, dtype=float))[blocks[:, -1]]
    for t in range(blocks.shape[1] - 1):
        logs += pd.tm.log_weights[blocks[:, t], blocks[:, t + 1]] - pd.log_lam
    return words, logs


def gibbs_ratio_bounds(pd: PerronData, potential: Potential, max_len: int,
                       max_words: int = DEFAULT_MAX_WORDS) -> tuple[float, float]:
    """Observed Gibbs constants: min and max of mu[w] * lambda^n * e^{-S phi(w)}
    over all admissible words of each length up to max_len.

    The ratio equals nu[first block] * h[last block], so the bounds stabilize
    as soon as max_len exceeds the block length."""
    k = pd.tm.recoding.block_length
    if max_len < k + 1:
        raise ValidationError(f"max_len must be at least block length + 1 = {k + 1}")
    lo, hi = math.inf, -math.inf
    log_lam = pd.log_lam
    for n in range(k + 1, max_len + 1):
        words, logs = level_log_measures(pd, n, max_words)
        for w, logmu in zip(words.tolist(), logs.tolist()):
            ratio = math.exp(logmu + (n - 1) * log_lam - birkhoff_sum(potential, w))
            lo = min(lo, ratio)
            hi = max(hi, ratio)
    return lo, hi


def ln1_sup_norm(tm: TransferMatrix, n: int) -> float:
    """Sup norm of the n-th transfer iterate applied to the constant one
    function: the largest column sum of W^n."""
    if n < 1:
        raise ValidationError("n must be >= 1")
    p = np.linalg.matrix_power(tm.weights, n)
    return float(p.sum(axis=0).max())
