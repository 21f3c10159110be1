"""End-to-end walkthrough of the built-in four-symbol example.

Reproduces the headline numbers: exact Perron data, projected cylinder
measures against the brute-force oracle, the g value at the zero-run point,
the 1/(3m) gap law, the failed fiber-wise mixing search, and the polynomial
variation decay that rules out a Hölder g-function.
"""

import argparse

import gibbsfactor as gf
from gibbsfactor import fixtures


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--jmax", type=int, default=14)
    parser.add_argument("--m", type=int, default=14, help="variation truncation")
    args = parser.parse_args()

    pipe = gf.build_pipeline(fixtures.example2(), exact=True)
    fs, pd = pipe.factor, pipe.pd
    print("== Perron data (exact) ==")
    print(f"lambda = {pd.lam}")
    print(f"h      = {tuple(str(x) for x in pd.h)}")
    print(f"nu     = {tuple(str(x) for x in pd.nu)}")

    print("\n== projected cylinder measures (formula vs oracle) ==")
    for word in [(0,), (0, 0), (0, 1), (1, 0), (0, 0, 0)]:
        a = gf.projected_measure(fs, pd, word)
        b = gf.projected_measure_bruteforce(fs, pd, word)
        label = "".join(map(str, word))
        print(f"proj[{label}] = {a}   oracle = {b}   match = {a == b}")

    print("\n== g-function at eventually periodic points ==")
    limit = gf.g_limit(fs, pd, (), (0,), jmax=args.jmax, tol=1e-9)
    print(f"g(0-run) = {limit.value:.9f}   (limit 1/3, est. error {limit.error_estimate:.2e})")
    for m in (16, 32, 64):
        res = gf.g_limit(fs, pd, (0,) * m, (1,), jmax=args.jmax, tol=1e-10)
        gap = m * abs(limit.value - res.value)
        print(f"m = {m:3d}: g(0^m 1-run) = {res.value:.9f}   m*gap = {gap:.6f}")

    print("\n== fiber-wise mixing search ==")
    res = gf.fwm_search(fs, 8)
    word, a0, aN = res.reports[-1].witnesses[0]
    print(f"found = {res.found} (max N = 8); witness word {''.join(map(str, word))} "
          f"with endpoints {a0} -> {aN}")

    print("\n== variation decay of log g ==")
    float_pipe = gf.build_pipeline(fixtures.example2(), exact=False)
    n_max = max(2, args.m // 3)
    prof = gf.variation_profile(float_pipe.factor, float_pipe.pd, args.m, n_max)
    fit = gf.decay_fit(prof, n0=2)
    print(f"var_hat (m = {args.m}): {[round(v, 5) for v in prof.var_hat]}")
    print(f"classification = {fit.classification}, exponent = {fit.poly_exponent:.3f} "
          f"(R^2 poly {fit.r_squared_poly:.4f} vs exp {fit.r_squared_exp:.4f})")


if __name__ == "__main__":
    main()
