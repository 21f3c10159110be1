import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gibbsfactor import (
    Alphabet,
    ExactModeError,
    NotMixingError,
    ValidationError,
    birkhoff_sum,
    build_potential,
    build_sft,
    cylinder_measure,
    enumerate_words,
    gibbs_ratio_bounds,
    holder_envelope,
    level_log_measures,
    ln1_sup_norm,
    perron,
    perron_exact,
    transfer_matrix,
    variations,
)

EX2_ADJ = [[1, 1, 1, 0], [0, 1, 1, 1], [1, 1, 1, 0], [0, 1, 1, 1]]


def make_sft(adj):
    return build_sft(Alphabet(tuple(str(i) for i in range(len(adj)))), adj)


def constant_potential(sft, depth=1):
    table = {w: Fraction(1) for w in enumerate_words(sft, depth + 1)}
    return build_potential(sft, depth, "weight", table)


@pytest.fixture(scope="module")
def ex2_sft():
    return make_sft(EX2_ADJ)


class TestBuildPotential:
    def test_constant_weights(self, ex2_sft):
        pot = constant_potential(ex2_sft)
        assert all(v == 0.0 for v in pot.phi.values())
        assert pot.exact_weights is not None

    def test_depth0_iid(self):
        sft = make_sft([[1, 1], [1, 1]])
        pot = build_potential(sft, 0, "phi",
                              {(0,): math.log(0.3), (1,): math.log(0.7)})
        assert pot.weights[(0,)] == pytest.approx(0.3)

    def test_missing_entry(self, ex2_sft):
        table = {w: 1 for w in enumerate_words(ex2_sft, 2)}
        del table[(0, 0)]
        with pytest.raises(ValidationError, match="missing table entry"):
            build_potential(ex2_sft, 1, "weight", table)

    def test_non_positive_weight(self, ex2_sft):
        table = {w: Fraction(1) for w in enumerate_words(ex2_sft, 2)}
        table[(0, 0)] = Fraction(-1, 2)
        with pytest.raises(ValidationError, match="non-positive"):
            build_potential(ex2_sft, 1, "weight", table)

    def test_inadmissible_entry_warns_and_is_ignored(self, ex2_sft):
        table = {w: Fraction(1) for w in enumerate_words(ex2_sft, 2)}
        table[(1, 0)] = Fraction(5)
        with pytest.warns(UserWarning, match="inadmissible"):
            pot = build_potential(ex2_sft, 1, "weight", table)
        assert (1, 0) not in pot.weights

    def test_float_weights_disable_exact(self, ex2_sft):
        table = {w: 1.5 for w in enumerate_words(ex2_sft, 2)}
        pot = build_potential(ex2_sft, 1, "weight", table)
        assert pot.exact_weights is None

    def test_non_finite_phi_rejected(self, ex2_sft):
        table = {w: 0.0 for w in enumerate_words(ex2_sft, 2)}
        table[(0, 0)] = math.inf
        with pytest.raises(ValidationError, match="non-finite"):
            build_potential(ex2_sft, 1, "phi", table)


class TestVariations:
    def test_constant_is_zero(self, ex2_sft):
        assert variations(constant_potential(ex2_sft)) == [0.0]

    def test_depth1_example(self):
        sft = make_sft([[1, 1], [1, 1]])
        pot = build_potential(sft, 1, "phi",
                              {(0, 0): 0.0, (0, 1): 1.0, (1, 0): 0.0, (1, 1): 0.0})
        assert variations(pot) == [1.0]

    def test_depth0_empty(self):
        sft = make_sft([[1, 1], [1, 1]])
        pot = build_potential(sft, 0, "phi", {(0,): 1.0, (1,): -1.0})
        assert variations(pot) == []

    def test_nonincreasing_depth2(self):
        sft = make_sft([[1, 1], [1, 1]])
        words = enumerate_words(sft, 3)
        rng = np.random.default_rng(7)
        pot = build_potential(sft, 2, "phi",
                              {w: float(rng.normal()) for w in words})
        v = variations(pot)
        assert len(v) == 2 and v[0] >= v[1]


class TestHolderEnvelope:
    def test_constant(self, ex2_sft):
        env = holder_envelope(constant_potential(ex2_sft), 0.5)
        assert env.holder_constant == 0.0 and env.sup_norm == 0.0

    def test_var1_over_theta(self):
        sft = make_sft([[1, 1], [1, 1]])
        pot = build_potential(sft, 1, "phi",
                              {(0, 0): 0.0, (0, 1): 1.0, (1, 0): 0.0, (1, 1): 0.0})
        assert holder_envelope(pot, 0.5).holder_constant == pytest.approx(2.0)

    def test_componentwise_max(self):
        # var profile (0.4, 0.1) at theta 0.5 -> max(0.8, 0.4) = 0.8
        sft = make_sft([[1, 1], [1, 1]])
        table = {w: 0.4 * (w[1] == 1) + 0.1 * (w == (0, 0, 0))
                 for w in enumerate_words(sft, 3)}
        pot = build_potential(sft, 2, "phi", table)
        assert variations(pot) == [pytest.approx(0.4), pytest.approx(0.1)]
        assert holder_envelope(pot, 0.5).holder_constant == pytest.approx(0.8)

    def test_theta_out_of_range(self, ex2_sft):
        with pytest.raises(ValidationError):
            holder_envelope(constant_potential(ex2_sft), 1.0)

    def test_envelope_dominates_variations(self, ex2_sft):
        pot = constant_potential(ex2_sft)
        env = holder_envelope(pot, 0.3)
        for n, v in enumerate(env.variations, start=1):
            assert v <= env.holder_constant * env.theta**n + 1e-15


class TestBirkhoffSum:
    def test_constant_zero(self, ex2_sft):
        assert birkhoff_sum(constant_potential(ex2_sft), (0, 1, 2, 2)) == 0.0

    def test_counts_pattern_occurrences(self):
        sft = make_sft([[1, 1], [1, 1]])
        pot = build_potential(sft, 1, "phi",
                              {(0, 0): 0.0, (0, 1): 1.0, (1, 0): 0.0, (1, 1): 0.0})
        assert birkhoff_sum(pot, (0, 1, 0, 1)) == pytest.approx(2.0)

    def test_depth0_linear(self):
        sft = make_sft([[1, 1], [1, 1]])
        pot = build_potential(sft, 0, "phi", {(0,): 0.25, (1,): 0.25})
        assert birkhoff_sum(pot, (0, 1, 1, 0, 1)) == pytest.approx(5 * 0.25)

    def test_too_short(self, ex2_sft):
        with pytest.raises(ValidationError, match="too short"):
            birkhoff_sum(constant_potential(ex2_sft), (0,))

    def test_inadmissible(self, ex2_sft):
        with pytest.raises(ValidationError, match="not admissible"):
            birkhoff_sum(constant_potential(ex2_sft), (1, 0))


class TestTransferMatrix:
    def test_example_pattern_is_adjacency(self, ex2_sft):
        tm = transfer_matrix(ex2_sft, constant_potential(ex2_sft))
        assert np.array_equal(tm.weights, np.array(EX2_ADJ, dtype=float))

    def test_depth0_row_scaling(self):
        sft = make_sft([[1, 1], [1, 1]])
        pot = build_potential(sft, 0, "weight", {(0,): Fraction(1, 3), (1,): Fraction(2, 3)})
        tm = transfer_matrix(sft, pot)
        assert np.allclose(tm.weights, [[1 / 3, 1 / 3], [2 / 3, 2 / 3]])
        assert tm.exact_weights[0][0] == Fraction(1, 3)

    def test_rational_entries_exact(self, ex2_sft):
        tm = transfer_matrix(ex2_sft, constant_potential(ex2_sft))
        assert tm.exact_weights[0][0] == Fraction(1)
        assert tm.exact_weights[1][0] == Fraction(0)

    def test_depth2_blocks(self, ex2_sft):
        words = enumerate_words(ex2_sft, 3)
        pot = build_potential(ex2_sft, 2, "phi", {w: 0.1 for w in words})
        tm = transfer_matrix(ex2_sft, pot)
        assert tm.dimension == 12
        # each allowed block step carries weight e^{0.1}
        nz = tm.weights[tm.weights > 0]
        assert np.allclose(nz, math.exp(0.1))


class TestPerron:
    def test_example_eigendata_float(self, ex2_sft):
        tm = transfer_matrix(ex2_sft, constant_potential(ex2_sft))
        pd = perron(tm)
        assert pd.lam == pytest.approx(3.0, abs=1e-12)
        assert np.allclose(pd.h, np.ones(4), atol=1e-10)
        assert np.allclose(pd.nu, np.array([1, 2, 2, 1]) / 6, atol=1e-10)

    def test_example_eigendata_exact(self, ex2_sft):
        tm = transfer_matrix(ex2_sft, constant_potential(ex2_sft))
        pd = perron_exact(tm)
        assert pd.lam == Fraction(3)
        assert pd.h == (Fraction(1),) * 4
        assert pd.nu == (Fraction(1, 6), Fraction(1, 3), Fraction(1, 3), Fraction(1, 6))

    def test_exact_candidate_verified(self, ex2_sft):
        tm = transfer_matrix(ex2_sft, constant_potential(ex2_sft))
        pd = perron_exact(tm, candidate=(3, (1, 1, 1, 1), (1, 2, 2, 1)))
        assert pd.nu == (Fraction(1, 6), Fraction(1, 3), Fraction(1, 3), Fraction(1, 6))

    def test_exact_candidate_rejected(self, ex2_sft):
        tm = transfer_matrix(ex2_sft, constant_potential(ex2_sft))
        with pytest.raises(ExactModeError):
            perron_exact(tm, candidate=(3, (1, 2, 1, 1), (1, 2, 2, 1)))

    def test_full_2_shift(self):
        sft = make_sft([[1, 1], [1, 1]])
        pd = perron(transfer_matrix(sft, constant_potential(sft)))
        assert pd.lam == pytest.approx(2.0, abs=1e-12)
        assert np.allclose(pd.h, [1, 1]) and np.allclose(pd.nu, [0.5, 0.5])

    def test_golden_mean_irrational(self):
        sft = make_sft([[1, 1], [1, 0]])
        table = {w: Fraction(1) for w in enumerate_words(sft, 2)}
        tm = transfer_matrix(sft, build_potential(sft, 1, "weight", table))
        pd = perron(tm)
        assert pd.lam == pytest.approx((1 + math.sqrt(5)) / 2, abs=1e-12)
        with pytest.raises(ExactModeError):
            perron_exact(tm)

    def test_residual_bound(self, ex2_sft):
        tm = transfer_matrix(ex2_sft, constant_potential(ex2_sft))
        pd = perron(tm, tol=1e-14)
        w = tm.weights
        assert np.abs(w @ pd.h - pd.lam * pd.h).max() <= 1e-13 * np.abs(pd.h).max()
        assert np.abs(pd.nu @ w - pd.lam * pd.nu).max() <= 1e-13

    def test_normalization(self, ex2_sft):
        tm = transfer_matrix(ex2_sft, constant_potential(ex2_sft))
        pd = perron(tm)
        assert float(np.sum(pd.nu)) == pytest.approx(1.0, abs=1e-14)
        assert float(pd.h @ pd.nu) == pytest.approx(1.0, abs=1e-14)

    def test_non_mixing_rejected(self):
        sft = make_sft([[0, 1], [1, 0]])
        tm = transfer_matrix(sft, constant_potential(sft))
        with pytest.raises(NotMixingError):
            perron(tm)


class TestCylinderMeasure:
    def test_example_exact_values(self, ex2_exact):
        pd = ex2_exact.pd
        assert cylinder_measure(pd, (0,)) == Fraction(1, 6)
        assert cylinder_measure(pd, (0, 0)) == Fraction(1, 18)
        assert cylinder_measure(pd, (1, 0)) == Fraction(0)

    def test_full_shift_uniform(self, full2_exact):
        pd = full2_exact.pd
        for word in [(0,), (1, 1), (0, 1, 0)]:
            assert cylinder_measure(pd, word) == Fraction(1, 2**len(word))

    def test_float_matches_exact(self, ex2_exact, ex2_float):
        for word in [(0,), (2, 1), (0, 1, 2, 2), (3, 2, 0, 0, 1)]:
            exact = cylinder_measure(ex2_exact.pd, word)
            logv = cylinder_measure(ex2_float.pd, word)
            assert logv == pytest.approx(math.log(exact), abs=1e-12)

    def test_inadmissible_float_is_neg_inf(self, ex2_float):
        assert cylinder_measure(ex2_float.pd, (1, 0)) == -math.inf

    def test_depth2_short_word_sums_extensions(self, ex2_sft):
        words = enumerate_words(ex2_sft, 3)
        pot = build_potential(ex2_sft, 2, "weight", {w: Fraction(1) for w in words})
        tm = transfer_matrix(ex2_sft, pot)
        pd = perron_exact(tm)
        one = cylinder_measure(pd, (0,))
        two = sum(cylinder_measure(pd, (0, b)) for b in range(4))
        assert one == two

    def test_total_mass_exact(self, ex2_exact):
        assert sum(cylinder_measure(ex2_exact.pd, (a,)) for a in range(4)) == 1

    def test_additivity_exact(self, ex2_exact):
        pd = ex2_exact.pd
        for word in [(0,), (2,), (0, 1), (3, 2, 2)]:
            ext = sum(cylinder_measure(pd, word + (b,)) for b in range(4))
            assert ext == cylinder_measure(pd, word)

    def test_shift_invariance_exact(self, ex2_exact):
        pd = ex2_exact.pd
        for word in [(0,), (1,), (2, 2), (0, 1, 1)]:
            pre = sum(cylinder_measure(pd, (a,) + word) for a in range(4))
            assert pre == cylinder_measure(pd, word)


class TestLevelMeasures:
    def test_matches_per_word_calls(self, ex2_float):
        words, logs = level_log_measures(ex2_float.pd, 4)
        for i in range(0, len(words), 7):
            w = tuple(words[i])
            assert logs[i] == pytest.approx(cylinder_measure(ex2_float.pd, w), abs=1e-12)

    def test_level_mass_is_one(self, ex2_float, golden_float):
        for pipe in (ex2_float, golden_float):
            for n in (1, 3, 6):
                _, logs = level_log_measures(pipe.pd, n)
                assert np.exp(logs).sum() == pytest.approx(1.0, abs=1e-12)

    def test_depth2_blocks_path(self, ex2_sft):
        words3 = enumerate_words(ex2_sft, 3)
        pot = build_potential(ex2_sft, 2, "weight", {w: Fraction(1) for w in words3})
        pd = perron(transfer_matrix(ex2_sft, pot))
        words, logs = level_log_measures(pd, 4)
        assert np.exp(logs).sum() == pytest.approx(1.0, abs=1e-12)
        w0 = tuple(words[0])
        assert logs[0] == pytest.approx(cylinder_measure(pd, w0), abs=1e-12)


class TestGibbsRatioBounds:
    def test_example_bounds(self, ex2_exact):
        pot = ex2_exact.potential
        lo, hi = gibbs_ratio_bounds(ex2_exact.pd, pot, 4)
        assert lo == pytest.approx(1 / 6, abs=1e-12)
        assert hi == pytest.approx(1 / 3, abs=1e-12)

    def test_full_shift_constant(self):
        sft = make_sft([[1, 1], [1, 1]])
        pot = constant_potential(sft)
        pd = perron_exact(transfer_matrix(sft, pot))
        lo, hi = gibbs_ratio_bounds(pd, pot, 4)
        assert lo == pytest.approx(0.5, abs=1e-12)
        assert hi == pytest.approx(0.5, abs=1e-12)

    def test_stabilizes_in_max_len(self, golden_float):
        pot = golden_float.potential
        b3 = gibbs_ratio_bounds(golden_float.pd, pot, 3)
        b5 = gibbs_ratio_bounds(golden_float.pd, pot, 5)
        assert b3 == pytest.approx(b5, abs=1e-12)


class TestLn1SupNorm:
    def test_full_shift_q(self):
        for q in (2, 3, 5):
            sft = make_sft([[1] * q for _ in range(q)])
            tm = transfer_matrix(sft, constant_potential(sft))
            assert ln1_sup_norm(tm, 1) == pytest.approx(q)
            assert ln1_sup_norm(tm, 3) == pytest.approx(q**3)


@st.composite
def random_weighted_shifts(draw):
    n = draw(st.integers(min_value=2, max_value=4))
    adj = np.zeros((n, n), dtype=int)
    for i in range(n):
        adj[i][(i + 1) % n] = 1
    adj[0][0] = 1
    for i, j in draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)),
                              max_size=6)):
        adj[i][j] = 1
    sft = make_sft(adj.tolist())
    seed = draw(st.integers(0, 2**16))
    rng = np.random.default_rng(seed)
    table = {w: float(rng.uniform(0.5, 2.0)) for w in enumerate_words(sft, 2)}
    return sft, build_potential(sft, 1, "weight", table)


class TestMeasureProperties:
    @given(random_weighted_shifts())
    @settings(max_examples=25, deadline=None)
    def test_additivity_and_mass(self, sys):
        sft, pot = sys
        pd = perron(transfer_matrix(sft, pot))
        total = sum(math.exp(cylinder_measure(pd, (a,))) for a in range(sft.size))
        assert total == pytest.approx(1.0, rel=1e-11)
        for word in enumerate_words(sft, 2):
            parent = cylinder_measure(pd, word)
            ext = [cylinder_measure(pd, word + (b,)) for b in range(sft.size)]
            total = sum(math.exp(x) for x in ext if x != -math.inf)
            assert total == pytest.approx(math.exp(parent), rel=1e-11)
