"""Regularity analysis of the projected measure's g-function.

The g-function of the projected measure is the limit of the one-step
conditional probabilities

    g_n(y_0 ... y_n) = proj[y_0 ... y_n] / proj[y_1 ... y_n],

evaluated here at cylinder approximants (fixed truncation) and along
eventually periodic points (with tail powers computed by exponent doubling
and Aitken extrapolation of the stage values).  Variation profiles measure
how fast log g_n varies across words sharing a prefix, a least-squares fit
classifies the decay as exponential or polynomial, and the explicit
Birkhoff-contraction rate bound provides the theoretical comparison line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import EnumerationLimitError, ValidationError
from .factor import FactorSystem, projected_measure
from .potential import PerronData
from .sft import DEFAULT_MAX_WORDS, Word


@dataclass(frozen=True)
class GApproximant:
    """One-step conditional probability at a finite word; value in (0, 1]."""

    word: Word
    value: float | Fraction
    n: int


def g_approx(fs: FactorSystem, pd: PerronData, yword) -> GApproximant:
    """Ratio of projected measures of a word and its first-symbol-dropped
    suffix.  The word must be admissible with length >= block length + 1."""
    w = tuple(yword)
    if len(w) < fs.block_length + 1:
        raise ValidationError("g approximant needs at least two block symbols")
    num = projected_measure(fs, pd, w)
    den = projected_measure(fs, pd, w[1:])
    if pd.exact:
        if den == 0:
            raise ValidationError("image word is not admissible")
        return GApproximant(word=w, value=num / den, n=len(w) - 1)
    if num == -math.inf or den == -math.inf:
        raise ValidationError("image word is not admissible")
    return GApproximant(word=w, value=math.exp(num - den), n=len(w) - 1)


class _PeriodicWordEngine:
    """Projected measures of prefix . tail^r along an eventually periodic
    image point, with the repeated-tail product raised by binary powering.

    The block sequence of prefix . tail^inf is eventually periodic: after the
    a = len(prefix) leading blocks it cycles with period c = len(tail).  The
    product along prefix . tail^r therefore factors as

        (head product) . D^u . E,

    with D the full-cycle product and E a fixed partial cycle, where only u
    grows with r.  Works on floats with per-step renormalization or on exact
    Fractions, depending on the Perron data.
    """

    def __init__(self, fs: FactorSystem, pd: PerronData, prefix, tail):
        self.fs = fs
        self.pd = pd
        self.prefix = tuple(prefix)
        self.tail = tuple(tail)
        if not self.tail:
            raise ValidationError("periodic tail must be nonempty")
        k = fs.block_length
        a, c = len(self.prefix), len(self.tail)
        point = list(self.prefix) + [self.tail[i % c] for i in range(k + c + 1)]

        def window(t):
            idx = fs.image_block_index.get(tuple(point[t:t + k]))
            if idx is None:
                raise ValidationError("point is not admissible (bad block window)")
            return idx

        self.pre_blocks = [window(t) for t in range(a)]
        self.cycle_blocks = [window(a + s) for s in range(c)]
        self.exact = pd.exact
        mats = fs.exact_blocks if self.exact else fs.blocks

        def trans(b0, b1):
            m = mats.get((b0, b1))
            if m is None:
                raise ValidationError("point is not admissible (dead transition)")
            return m

        chain = self.pre_blocks + [self.cycle_blocks[0]]
        self.head = None  # product over the a prefix transitions
        self.head_scale = 0.0
        for b0, b1 in zip(chain, chain[1:]):
            self.head, self.head_scale = self._mul(self.head, self.head_scale,
                                                   trans(b0, b1))
        self.cycle_mats = [
            trans(self.cycle_blocks[s], self.cycle_blocks[(s + 1) % c])
            for s in range(c)
        ]
        # r repetitions leave c*r - k cycle transitions: u full cycles + s extra
        self.s = (-k) % c
        self.ucorr = (k + self.s) // c
        self.end_block = self.cycle_blocks[self.s]
        self.partial = None
        self.partial_scale = 0.0
        for s in range(self.s):
            self.partial, self.partial_scale = self._mul(
                self.partial, self.partial_scale, self.cycle_mats[s])
        self.min_reps = max(self.ucorr, math.ceil((k + 1 - a) / c), 1)

    def _mul(self, acc, scale, m):
        if acc is None:
            if self.exact:
                return [row[:] for row in m], 0.0
            return np.array(m, dtype=float), scale
        if self.exact:
            n, kk, mm = len(acc), len(m), len(m[0])
            out = [
                [sum((acc[i][t] * m[t][j] for t in range(kk)), Fraction(0))
                 for j in range(mm)]
                for i in range(n)
            ]
            return out, 0.0
        out = acc @ m
        top = out.max()
        if top == 0:
            raise ValidationError("point is not admissible (zero product)")
        return out / top, scale + math.log(top)

    def measure(self, reps: int):
        """Projected measure of prefix . tail^reps (log or exact Fraction)."""
        if reps < self.min_reps:
            raise ValidationError(f"need at least {self.min_reps} repetitions")
        k = self.fs.block_length
        a, c = len(self.prefix), len(self.tail)
        u = reps - self.ucorr
        prod, scale = self.head, self.head_scale
        powed, pscale = self._cycle_power_tracked(u)
        prod, scale = self._chain(prod, scale, powed, pscale)
        prod, scale = self._chain(prod, scale, self.partial, self.partial_scale)
        n_steps = a + c * reps - k
        start = self.pre_blocks[0] if a else self.cycle_blocks[0]
        nu = self.fs.fiber_nu(self.pd, start)
        h = self.fs.fiber_h(self.pd, self.end_block)
        if self.exact:
            if prod is None:
                total = sum((x * y for x, y in zip(nu, h)), Fraction(0))
            else:
                vec = [
                    sum((nu[i] * prod[i][j] for i in range(len(nu))), Fraction(0))
                    for j in range(len(prod[0]))
                ]
                total = sum((x * y for x, y in zip(vec, h)), Fraction(0))
            return total / self.pd.lam**n_steps
        if prod is None:
            total = float(np.dot(nu, h))
            return math.log(total) - n_steps * self.pd.log_lam
        total = float(nu @ prod @ h)
        if total <= 0:
            return -math.inf
        return math.log(total) + scale - n_steps * self.pd.log_lam

    def _chain(self, acc, scale, m, mscale):
        if m is None:
            return acc, scale
        if acc is None:
            return m, mscale
        out, s = self._mul(acc, scale, m)
        return out, s + mscale

    def _cycle_power_tracked(self, u: int):
        if u == 0:
            return None, 0.0
        base, base_scale = None, 0.0
        for m in self.cycle_mats:
            base, base_scale = self._mul(base, base_scale, m)
        acc, acc_scale = None, 0.0
        while u:
            if u & 1:
                acc, acc_scale = self._chain(acc, acc_scale, base, base_scale)
            u >>= 1
            if u:
                sq, s2 = self._mul(base, 0.0, base)
                base, base_scale = sq, 2 * base_scale + s2
        return acc, acc_scale


@dataclass(frozen=True)
class GLimitResult:
    value: float
    error_estimate: float
    converged: bool
    stages: tuple          # (n, float value) per stage
    exact_stages: tuple | None  # Fractions in exact mode


def g_limit(fs: FactorSystem, pd: PerronData, prefix, tail,
            jmax: int = 16, tol: float = 1e-9) -> GLimitResult:
    """g at the eventually periodic point prefix . tail^infinity.

    Stage j evaluates the cylinder ratio with 2^j tail repetitions; tail
    powers come from exponent doubling, and Aitken delta-squared acceleration
    is applied to the last three stages.  Convergence is reported, never
    raised: slow sequences (e.g. 1/n gaps) still return their best value.
    """
    prefix = tuple(prefix)
    tail = tuple(tail)
    num = _PeriodicWordEngine(fs, pd, prefix, tail)
    if prefix:
        den = _PeriodicWordEngine(fs, pd, prefix[1:], tail)
        den_shift = 0
    else:
        den = _PeriodicWordEngine(fs, pd, tail[1:], tail)
        den_shift = 1
    a, c = len(prefix), len(tail)
    stages = []
    exact_stages: list | None = [] if pd.exact else None
    values = []
    j0 = 0
    while 2**j0 < max(num.min_reps, den.min_reps + den_shift):
        j0 += 1
    if j0 > jmax:
        raise ValidationError("jmax too small for this point's block structure")
    for j in range(j0, jmax + 1):
        r = 2**j
        mv_num = num.measure(r)
        mv_den = den.measure(r - den_shift)
        n = a + c * r - 1
        if pd.exact:
            gj = mv_num / mv_den
            exact_stages.append(gj)
            gj_f = float(gj)
        else:
            gj_f = math.exp(mv_num - mv_den)
        stages.append((n, gj_f))
        values.append(gj_f)
    # Aitken delta-squared on successive stage triples
    extrapolants = []
    for t in range(2, len(values)):
        x0, x1, x2 = values[t - 2], values[t - 1], values[t]
        d2 = x2 - 2 * x1 + x0
        if d2 == 0:
            extrapolants.append(x2)
        else:
            extrapolants.append(x0 - (x1 - x0) ** 2 / d2)
    if len(extrapolants) >= 2:
        err = abs(extrapolants[-1] - extrapolants[-2])
        value = extrapolants[-1]
        converged = err < tol
    elif extrapolants:
        value, err, converged = extrapolants[-1], math.inf, False
    else:
        value, err, converged = values[-1], math.inf, False
        if len(values) > 1 and values[-1] == values[-2]:
            err, converged = 0.0, True
    return GLimitResult(value=value, error_estimate=err, converged=converged,
                        stages=tuple(stages),
                        exact_stages=tuple(exact_stages) if exact_stages is not None else None)


def image_log_measure_map(fs: FactorSystem, pd: PerronData, length: int,
                          max_words: int = DEFAULT_MAX_WORDS) -> dict:
    """log projected measure for every admissible image word of `length`,
    via one depth-first sweep carrying the renormalized row vector."""
    k = fs.block_length
    if length < k:
        raise ValidationError(f"length must be >= block length {k}")
    succ: dict[int, list[int]] = {}
    for (a, b) in fs.blocks:
        succ.setdefault(a, []).append(b)
    for lst in succ.values():
        lst.sort(key=lambda b: fs.image_block_words[b])
    out: dict = {}
    budget = [max_words]
    log_lam = pd.log_lam
    n_steps = length - k

    def walk(word, b, vec, scale, remaining):
        budget[0] -= 1
        if budget[0] < 0:
            raise EnumerationLimitError("image measure sweep exceeded budget")
        if remaining == 0:
            total = float(vec @ fs.fiber_h(pd, b))
            if total > 0:
                out[word] = math.log(total) + scale - n_steps * log_lam
            return
        for b2 in succ.get(b, ()):
            v2 = vec @ fs.blocks[(b, b2)]
            top = v2.max()
            if top > 0:
                walk(word + (fs.image_block_words[b2][-1],), b2, v2 / top,
                     scale + math.log(top), remaining - 1)

    for b0 in sorted(range(len(fs.image_block_words)),
                     key=lambda b: fs.image_block_words[b]):
        nu = np.asarray(fs.fiber_nu(pd, b0), dtype=float)
        top = nu.max()
        walk(fs.image_block_words[b0], b0, nu / top, math.log(top), n_steps)
    return out


@dataclass(frozen=True)
class VariationProfile:
    """Estimated variations of log g at truncation m: var_hat[n-1] is the
    largest spread of log g_m over image words agreeing in coordinates
    0..n-1.  Nonincreasing in n by construction."""

    m: int
    n_values: tuple[int, ...]
    var_hat: tuple[float, ...]
    pair_counts: tuple[int, ...]


def variation_profile(fs: FactorSystem, pd: PerronData, m: int, n_max: int,
                      max_words: int = DEFAULT_MAX_WORDS) -> VariationProfile:
    """Empirical variation decay of the g approximants at truncation m.

    Evaluates log g_m on every admissible image word of length m+1, then for
    each n takes the maximal spread within prefix classes of depth n.
    """
    k = fs.block_length
    if m < k + 1:
        raise ValidationError(f"m must be at least block length + 1 = {k + 1}")
    if not 2 <= n_max < m:
        raise ValidationError("need 2 <= n_max < m")
    full = image_log_measure_map(fs, pd, m + 1, max_words)
    suff = image_log_measure_map(fs, pd, m, max_words)
    ghat = {w: lv - suff[w[1:]] for w, lv in full.items()}
    n_values = tuple(range(1, n_max + 1))
    var_hat = []
    pair_counts = []
    for n in n_values:
        groups: dict = {}
        for w, v in ghat.items():
            lo, hi, cnt = groups.get(w[:n], (math.inf, -math.inf, 0))
            groups[w[:n]] = (min(lo, v), max(hi, v), cnt + 1)
        spread = max((hi - lo for lo, hi, _ in groups.values()), default=0.0)
        pairs = sum(c * (c - 1) // 2 for _, _, c in groups.values())
        var_hat.append(max(spread, 0.0))
        pair_counts.append(pairs)
    return VariationProfile(m=m, n_values=n_values, var_hat=tuple(var_hat),
                            pair_counts=tuple(pair_counts))


@dataclass(frozen=True)
class DecayFit:
    """Least-squares classification of a variation profile's decay regime."""

    exp_rate: float          # rho in var_n ~ rho^n
    poly_exponent: float     # p in var_n ~ n^-p
    r_squared_exp: float
    r_squared_poly: float
    classification: str      # exponential | polynomial | inconclusive | constant
    window: tuple[int, int]
    points: int


def _linfit(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    slope, intercept = np.polyfit(x, y, 1)
    pred = slope * x + intercept
    ss_res = float(((y - pred) ** 2).sum())
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return float(slope), float(intercept), r2


def decay_fit(profile: VariationProfile, n0: int = 2) -> DecayFit:
    """Fit both log var_n ~ a + n log(rho) and log var_n ~ a - p log(n) on
    the window n >= n0 (zero entries excluded) and classify by fit quality.
    An all-zero profile is the Hölder-trivial case, classified 'constant'."""
    pts = [(n, v) for n, v in zip(profile.n_values, profile.var_hat)
           if n >= n0 and v > 0]
    if all(v == 0 for v in profile.var_hat):
        return DecayFit(exp_rate=0.0, poly_exponent=math.inf, r_squared_exp=1.0,
                        r_squared_poly=1.0, classification="constant",
                        window=(n0, profile.n_values[-1]), points=0)
    if len(pts) < 3:
        raise ValidationError("insufficient positive points for a decay fit")
    n = np.array([p[0] for p in pts], dtype=float)
    logv = np.log(np.array([p[1] for p in pts]))
    slope_exp, _, r2_exp = _linfit(n, logv)
    slope_poly, _, r2_poly = _linfit(np.log(n), logv)
    rho = math.exp(slope_exp)
    p = -slope_poly
    if r2_exp >= r2_poly and rho < 1:
        cls = "exponential"
    elif r2_poly > r2_exp and p > 0:
        cls = "polynomial"
    else:
        cls = "inconclusive"
    return DecayFit(exp_rate=rho, poly_exponent=p, r_squared_exp=r2_exp,
                    r_squared_poly=r2_poly, classification=cls,
                    window=(int(n[0]), int(n[-1])), points=len(pts))


def eta_full_shift(theta: float, holder_constant: float, sigma: float) -> float:
    """Explicit contraction rate for full-shift factors:
    tanh((log((1+sigma)/(1-sigma)) + sigma*C*theta/(sigma-theta)) / 2).
    Equals sigma exactly when the potential is constant (C = 0)."""
    if not 0 < theta < sigma < 1:
        raise ValidationError("need 0 < theta < sigma < 1")
    inner = math.log((1 + sigma) / (1 - sigma))
    inner += sigma * holder_constant * theta / (sigma - theta)
    return math.tanh(inner / 2.0)


@dataclass(frozen=True)
class EtaBound:
    """Theoretical contraction-rate bound for the projected g-function.

    m_const bounds the projective diameter of every admissible span-N block
    product on the invariant cone; eta = tanh(m_const/4) is the per-span
    contraction factor, so var_n(log g) = O(eta^(n/N)) with prefactor
    m_const * eta^(-2).  full_shift_eta carries the sharper full-shift value
    when N = 1 (the general bound keeps extra operator-norm terms)."""

    theta: float
    sigma: float
    n_steps: int
    cone_constant: float     # K of the invariant cone
    m_const: float
    eta: float
    prefactor: float
    full_shift_eta: float | None


def eta_general(theta: float, holder_constant: float, sup_norm: float,
                ln1_sup_norm: float, n_steps: int, sigma: float) -> EtaBound:
    """General rate bound for a fiber-wise mixing factor with span N.

    K = C/(sigma - theta^N) * sum_{i=1}^{N} theta^i picks the invariant cone;
    the diameter bound is
        M = 2 log((1+sigma)/(1-sigma)) + 2 N ||phi||_inf + 2 theta K
            + 2 log ||L^N 1||_inf
    and eta = tanh(M/4).  Requires theta^N < sigma < 1.
    """
    if n_steps < 1:
        raise ValidationError("n_steps must be >= 1")
    if not 0 < theta < 1:
        raise ValidationError("theta must lie in (0, 1)")
    if not theta**n_steps < sigma < 1:
        raise ValidationError("need theta^N < sigma < 1")
    if ln1_sup_norm <= 0:
        raise ValidationError("ln1_sup_norm must be positive")
    geo = sum(theta**i for i in range(1, n_steps + 1))
    cone_k = holder_constant / (sigma - theta**n_steps) * geo
    m_const = (
        2 * math.log((1 + sigma) / (1 - sigma))
        + 2 * n_steps * sup_norm
        + 2 * theta * cone_k
        + 2 * math.log(ln1_sup_norm)
    )
    eta = math.tanh(m_const / 4.0)
    fse = eta_full_shift(theta, holder_constant, sigma) if n_steps == 1 else None
    return EtaBound(theta=theta, sigma=sigma, n_steps=n_steps,
                    cone_constant=cone_k, m_const=m_const, eta=eta,
                    prefactor=m_const / eta**2, full_shift_eta=fse)


def _full_shift_bound(theta: float, holder_constant: float, sigma: float) -> EtaBound:
    cone_k = holder_constant * theta / (sigma - theta)
    m_const = 2 * math.log((1 + sigma) / (1 - sigma)) + 2 * sigma * cone_k
    eta = math.tanh(m_const / 4.0)
    return EtaBound(theta=theta, sigma=sigma, n_steps=1, cone_constant=cone_k,
                    m_const=m_const, eta=eta, prefactor=m_const / eta**2 if eta > 0 else math.inf,
                    full_shift_eta=eta)


def eta_optimize(theta: float, holder_constant: float, n_steps: int = 1,
                 sup_norm: float | None = None, ln1_sup_norm: float | None = None,
                 grid_size: int = 64, full_shift: bool = False) -> EtaBound:
    """Minimize the rate bound over sigma on a geometric grid in
    (theta^N, 1); ties break toward smaller sigma.  With full_shift=True the
    sharper full-shift formula is used (requires N = 1)."""
    if grid_size < 2:
        raise ValidationError("grid_size must be >= 2")
    if full_shift and n_steps != 1:
        raise ValidationError("full-shift formula applies only at N = 1")
    if not full_shift and (sup_norm is None or ln1_sup_norm is None):
        raise ValidationError("general bound needs sup_norm and ln1_sup_norm")
    lo = theta**n_steps
    offsets = np.geomspace(1e-4, 1 - 1e-9, grid_size)
    best: EtaBound | None = None
    for g in offsets:
        sigma = lo + (1 - lo) * float(g)
        if not lo < sigma < 1:
            continue
        if full_shift:
            bound = _full_shift_bound(theta, holder_constant, sigma)
        else:
            bound = eta_general(theta, holder_constant, sup_norm, ln1_sup_norm,
                                n_steps, sigma)
        if best is None or bound.eta < best.eta:
            best = bound
    if best is None:
        raise ValidationError("empty sigma grid")
    return best


@dataclass(frozen=True)
class RateVerdict:
    empirical_rate: float
    theoretical_rate: float
    satisfied: bool


def rate_compare(fit: DecayFit, bound: EtaBound, slack: float = 0.02) -> RateVerdict:
    """Check the empirical decay rate against the theoretical bound
    eta^(1/N).  Constant (all-zero) profiles are vacuously within bound."""
    theoretical = bound.eta ** (1.0 / bound.n_steps)
    if fit.classification == "constant":
        return RateVerdict(empirical_rate=0.0, theoretical_rate=theoretical,
                           satisfied=True)
    if fit.classification != "exponential":
        raise ValidationError(
            f"rate comparison needs an exponential fit, got {fit.classification!r}"
        )
    return RateVerdict(empirical_rate=fit.exp_rate, theoretical_rate=theoretical,
                       satisfied=fit.exp_rate <= theoretical + slack)
