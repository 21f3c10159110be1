"""Hilbert projective metric on the nonnegative orthant, projective
diameters, and Birkhoff contraction coefficients.

For x, y in the orthant, alpha(x, y) = sup{t > 0 : y - t x >= 0} and
beta(x, y) = inf{t > 0 : t x - y >= 0}; the projective distance is
Theta(x, y) = log(beta / alpha), infinite exactly when the supports differ.
A nonnegative matrix M contracts Theta by tanh(diam/4), where diam is the
projective diameter of its column set.  Locally constant functions collapse
the relevant function cones to the orthant, so this module is the finite
dimensional home of all the contraction arguments used elsewhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EnumerationLimitError, ValidationError
from .sft import DEFAULT_MAX_WORDS


def _as_cone_vector(x) -> np.ndarray:
    v = np.asarray(x, dtype=float)
    if v.ndim != 1:
        raise ValidationError("cone points must be 1-d vectors")
    if (v < 0).any():
        raise ValidationError("cone points must be nonnegative")
    if not (v > 0).any():
        raise ValidationError("cone points must have at least one positive entry")
    return v


def hilbert_alpha_beta(x, y) -> tuple[float, float]:
    """Extremal order comparisons of two orthant points.

    alpha = min over the support of x of y_i/x_i (0 when y vanishes there),
    beta = max over the support of y of y_i/x_i (inf when x vanishes there).
    """
    xv = _as_cone_vector(x)
    yv = _as_cone_vector(y)
    if xv.shape != yv.shape:
        raise ValidationError("dimension mismatch")
    sx = xv > 0
    sy = yv > 0
    alpha = float((yv[sx] / xv[sx]).min())
    if (sy & ~sx).any():
        beta = math.inf
    else:
        beta = float((yv[sy] / xv[sy]).max())
    return alpha, beta


def hilbert_distance(x, y) -> float:
    """Theta(x, y) = log(beta/alpha); infinite iff the supports differ.
    Projective: scaling either argument by a positive constant is invisible."""
    alpha, beta = hilbert_alpha_beta(x, y)
    if alpha == 0 or beta == math.inf:
        return math.inf
    return math.log(beta) - math.log(alpha)


@dataclass(frozen=True)
class DualFormulaReport:
    """Cross-check of the dual-functional formula for the Hilbert metric."""

    closed_form: float
    coordinate_sup: float
    sampled_max: float
    samples: int
    seed: int


def dual_formula_check(x, y, sample_count: int = 10_000, seed: int = 0) -> DualFormulaReport:
    """Check that Theta(x, y) equals the supremum of
    log(<x, phi><y, psi> / (<y, phi><x, psi>)) over nonnegative dual pairs.

    On the orthant the supremum is attained at coordinate functionals, so
    the coordinate supremum must reproduce the closed form; random sampled
    duals can never exceed it.  Also asserts the zero-pairing equivalence
    <x, phi> = 0 iff <y, phi> = 0 on every sample.
    """
    xv = _as_cone_vector(x)
    yv = _as_cone_vector(y)
    closed = hilbert_distance(xv, yv)
    if closed == math.inf:
        raise ValidationError("dual formula check needs finite distance")
    support = xv > 0
    ratios = yv[support] / xv[support]
    coordinate_sup = math.log(ratios.max()) - math.log(ratios.min())
    rng = np.random.default_rng(seed)
    sampled = 0.0
    dim = xv.shape[0]
    for i in range(sample_count):
        phi = rng.random(dim)
        psi = rng.random(dim)
        if i % 4 == 0:
            # sparse functionals exercise the zero-pairing equivalence
            mask = rng.random(dim) < 0.5
            phi = phi * mask
        xphi, yphi = float(xv @ phi), float(yv @ phi)
        if (xphi == 0) != (yphi == 0):
            raise AssertionError("zero-pairing equivalence violated on a sample")
        xpsi, ypsi = float(xv @ psi), float(yv @ psi)
        if yphi == 0 or xpsi == 0:
            continue
        val = math.log(xphi * ypsi) - math.log(yphi * xpsi)
        sampled = max(sampled, val)
    return DualFormulaReport(closed_form=closed, coordinate_sup=coordinate_sup,
                             sampled_max=sampled, samples=sample_count, seed=seed)


def projective_diameter(m) -> float:
    """Projective diameter of the image of the orthant under a nonnegative
    matrix: the largest Hilbert distance between two columns.  Infinite when
    two columns have different supports; zero columns are rejected."""
    a = np.asarray(m, dtype=float)
    if a.ndim != 2:
        raise ValidationError("matrix expected")
    if (a < 0).any():
        raise ValidationError("matrix must be nonnegative")
    cols = a.T
    for j, c in enumerate(cols):
        if not (c > 0).any():
            raise ValidationError(f"zero column {j}")
    best = 0.0
    for i in range(len(cols)):
        for j in range(i + 1, len(cols)):
            d = hilbert_distance(cols[i], cols[j])
            if d == math.inf:
                return math.inf
            best = max(best, d)
    return best


def birkhoff_coefficient(m) -> float:
    """Contraction coefficient tanh(diam/4) of a nonnegative matrix; 1 when
    the diameter is infinite (including matrices with a zero column)."""
    a = np.asarray(m, dtype=float)
    if (a < 0).any():
        raise ValidationError("matrix must be nonnegative")
    if a.ndim != 2 or not a.any():
        raise ValidationError("matrix must be nonzero")
    for c in a.T:
        if not (c > 0).any():
            return 1.0
    diam = projective_diameter(a)
    if diam == math.inf:
        return 1.0
    return math.tanh(diam / 4.0)


def contraction_check(m, u, v, tol: float = 1e-9) -> bool:
    """True iff Theta(Mu, Mv) <= tanh(diam(M)/4) * Theta(u, v) + tol."""
    a = np.asarray(m, dtype=float)
    uv = _as_cone_vector(u)
    vv = _as_cone_vector(v)
    mu = a @ uv
    mv = a @ vv
    if not (mu > 0).any() or not (mv > 0).any():
        raise ValidationError("degenerate image: M maps an argument to zero")
    lhs = hilbert_distance(mu, mv)
    rhs = birkhoff_coefficient(a) * hilbert_distance(uv, vv)
    if math.isinf(rhs):
        return True
    return lhs <= rhs + tol


@dataclass(frozen=True)
class ContractionProfile:
    """Projective diameters of fiber-block products over all admissible
    image words of a fixed span."""

    n: int
    per_word: dict
    max_delta: float
    max_tau: float
    infinite_words: int


def contraction_profile(fs, n: int, max_words: int = DEFAULT_MAX_WORDS) -> ContractionProfile:
    """Diameter delta of the block product for every admissible image word
    of N+1 block symbols; max_tau = tanh(max_delta/4) is the empirical
    contraction rate.  Infinite deltas flag words whose restricted product
    is not strictly positive (fiber-wise mixing fails there)."""
    if n < 1:
        raise ValidationError("span must be >= 1")
    succ: dict[int, list[int]] = {}
    for (a, b) in fs.bool_blocks:
        succ.setdefault(a, []).append(b)
    for lst in succ.values():
        lst.sort(key=lambda b: fs.image_block_words[b])
    per_word: dict = {}
    budget = [max_words]

    def delta_of(mat: np.ndarray) -> float:
        if (~(mat > 0).any(axis=0)).any():
            return math.inf  # a dead column: image cone touches the boundary
        return projective_diameter(mat)

    def walk(word, b, mat, scale, remaining):
        budget[0] -= 1
        if budget[0] < 0:
            raise EnumerationLimitError("contraction profile exceeded budget")
        if remaining == 0:
            per_word[word] = delta_of(mat)
            return
        for b2 in succ.get(b, ()):
            m2 = mat @ fs.blocks[(b, b2)]
            top = m2.max()
            if top > 0:
                walk(word + (fs.image_block_words[b2][-1],), b2, m2 / top,
                     scale + math.log(top), remaining - 1)

    for b0 in sorted(range(len(fs.image_block_words)),
                     key=lambda b: fs.image_block_words[b]):
        eye = np.eye(len(fs.fibers[b0]))
        walk(fs.image_block_words[b0], b0, eye, 0.0, n)
    deltas = list(per_word.values())
    max_delta = max(deltas) if deltas else 0.0
    max_tau = 1.0 if math.isinf(max_delta) else math.tanh(max_delta / 4.0)
    infinite = sum(1 for d in deltas if math.isinf(d))
    return ContractionProfile(n=n, per_word=per_word, max_delta=max_delta,
                              max_tau=max_tau, infinite_words=infinite)
