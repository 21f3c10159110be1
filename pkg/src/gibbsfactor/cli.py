"""Command-line surface: parse a system file, run one computation, emit a
machine-readable report.

Reports are deterministic given inputs, flags, and seed: JSON with sorted
keys (default) or flat key,value CSV.  Measures are reported as natural-log
values plus a decimal rendering, with an exact "p/q" field in exact mode.
Exit codes: 0 success, 1 a checked mathematical property failed (never a
usage problem), 2 usage or input errors.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction

import numpy as np

from . import fixtures
from .cone import contraction_profile
from .errors import (
    ConvergenceError,
    EnumerationLimitError,
    ExactModeError,
    NotMixingError,
    ValidationError,
)
from .factor import (
    enumerate_image_words,
    fwm_search,
    projected_measure,
    projected_measure_bruteforce,
)
from .ganalysis import (
    decay_fit,
    eta_general,
    eta_optimize,
    g_approx,
    g_limit,
    variation_profile,
)
from .potential import cylinder_measure, holder_envelope, ln1_sup_norm
from .sft import mixing_index
from .sysio import (
    Pipeline,
    build_pipeline,
    format_word,
    parse_system,
    parse_word,
    system_digest,
)

USAGE_ERROR = 2
PROPERTY_VIOLATION = 1


def _sanitize(value):
    """Make results JSON-friendly and deterministic."""
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (np.floating, np.integer)):
        value = value.item()
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        if math.isnan(value):
            return "nan"
        return value
    if isinstance(value, dict):
        return {str(k): _sanitize(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_sanitize(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_sanitize(v) for v in value.tolist()]
    return value


def _flatten(prefix: str, value, rows: list):
    if isinstance(value, dict):
        for k in sorted(value):
            _flatten(f"{prefix}.{k}" if prefix else str(k), value[k], rows)
    elif isinstance(value, list):
        for i, v in enumerate(value):
            _flatten(f"{prefix}[{i}]", v, rows)
    else:
        rows.append((prefix, value))


def emit_report(report: dict, fmt: str):
    if fmt == "json":
        print(json.dumps(report, indent=2, sort_keys=True))
    else:
        rows: list = []
        _flatten("", report, rows)
        print("key,value")
        for key, value in rows:
            print(f"{key},{value}")


def _measure_fields(value, exact: bool) -> dict:
    """Uniform rendering of a measure: log, decimal, and p/q when exact."""
    if exact:
        fr = value
        out = {"exact": str(fr), "measure": float(fr)}
        # numerator/denominator logs stay finite where float(fr) underflows
        out["log_measure"] = (
            math.log(fr.numerator) - math.log(fr.denominator) if fr > 0 else -math.inf
        )
        return out
    return {"log_measure": value,
            "measure": math.exp(value) if value != -math.inf else 0.0}


def _load(args) -> Pipeline:
    desc = parse_system(args.system)
    return build_pipeline(desc, exact=args.exact)


def _need_factor(pipe: Pipeline):
    if pipe.factor is None:
        raise ValidationError("this command needs a factor map in the system file")
    return pipe.factor


def cmd_validate(args):
    desc = parse_system(args.system)
    pipe = build_pipeline(desc, exact=False)
    results = {
        "valid": True,
        "alphabet_size": len(desc.alphabet),
        "mixing_index": mixing_index(pipe.sft),
        "block_length": pipe.tm.recoding.block_length,
        "block_count": pipe.tm.dimension,
        "has_factor": desc.has_factor,
    }
    if desc.has_factor:
        results["image_alphabet_size"] = len(desc.image_alphabet)
    return results, 0, desc


def cmd_perron(args):
    pipe = _load(args)
    pd = pipe.pd
    if pd.exact:
        results = {
            "lambda": str(pd.lam),
            "h": [str(x) for x in pd.h],
            "nu": [str(x) for x in pd.nu],
        }
    else:
        results = {"lambda": pd.lam, "h": list(pd.h), "nu": list(pd.nu)}
    results["residual"] = pd.residual
    results["iterations"] = pd.iterations
    results["exact"] = pd.exact
    return results, 0, pipe.desc


def cmd_measure(args):
    pipe = _load(args)
    word = parse_word(args.word, pipe.sft.alphabet)
    value = cylinder_measure(pipe.pd, word)
    results = {"word": format_word(word, pipe.sft.alphabet)}
    results.update(_measure_fields(value, pipe.pd.exact))
    return results, 0, pipe.desc


def cmd_project(args):
    pipe = _load(args)
    fs = _need_factor(pipe)
    word = parse_word(args.word, fs.image_alphabet)
    value = projected_measure(fs, pipe.pd, word)
    results = {"word": format_word(word, fs.image_alphabet)}
    results.update(_measure_fields(value, pipe.pd.exact))
    code = 0
    if args.oracle:
        oracle = projected_measure_bruteforce(fs, pipe.pd, word, args.budget)
        results["oracle"] = _measure_fields(oracle, pipe.pd.exact)
        if pipe.pd.exact:
            match = value == oracle
        else:
            match = _log_close(value, oracle, args.tol)
        results["match"] = bool(match)
        code = 0 if match else PROPERTY_VIOLATION
    return results, code, pipe.desc


def _log_close(a: float, b: float, tol: float) -> bool:
    if a == -math.inf or b == -math.inf:
        return a == b
    return abs(math.expm1(a - b)) <= tol


def cmd_project_verify(args):
    pipe = _load(args)
    fs = _need_factor(pipe)
    worst = 0.0
    checked = 0
    failures = []
    for length in range(1, args.max_len + 1):
        for word in enumerate_image_words(fs, length, args.budget):
            got = projected_measure(fs, pipe.pd, word)
            oracle = projected_measure_bruteforce(fs, pipe.pd, word, args.budget)
            checked += 1
            if pipe.pd.exact:
                if got != oracle:
                    failures.append(format_word(word, fs.image_alphabet))
            else:
                err = abs(math.expm1(got - oracle)) if got != -math.inf else (
                    0.0 if oracle == -math.inf else math.inf)
                worst = max(worst, err)
                if err > args.tol:
                    failures.append(format_word(word, fs.image_alphabet))
    results = {
        "checked_words": checked,
        "max_len": args.max_len,
        "max_relative_error": worst,
        "failures": failures[:20],
        "passed": not failures,
    }
    return results, 0 if not failures else PROPERTY_VIOLATION, pipe.desc


def cmd_fwm(args):
    pipe = _load(args)
    fs = _need_factor(pipe)
    result = fwm_search(fs, args.max_N, args.budget)
    reports = []
    for rep in result.reports:
        witnesses = [
            {
                "word": format_word(w, fs.image_alphabet),
                "first": fs.tm.recoding.block_sft.alphabet.name(a0),
                "last": fs.tm.recoding.block_sft.alphabet.name(aN),
            }
            for (w, a0, aN) in rep.witnesses[:10]
        ]
        reports.append({"N": rep.n, "holds": rep.holds,
                        "words_checked": rep.words_checked,
                        "witnesses": witnesses})
    results = {
        "found": result.found,
        "fiber_wise_mixing": result.found is not None,
        "max_N": args.max_N,
        "recoded_coordinates": fs.block_length > 1,
        "reports": reports,
    }
    return results, 0, pipe.desc


def cmd_gfun(args):
    pipe = _load(args)
    fs = _need_factor(pipe)
    word = parse_word(args.word, fs.image_alphabet)
    approx = g_approx(fs, pipe.pd, word)
    results = {
        "word": format_word(word, fs.image_alphabet),
        "n": approx.n,
        "value": float(approx.value),
    }
    if pipe.pd.exact:
        results["exact"] = str(approx.value)
    return results, 0, pipe.desc


def cmd_gfun_limit(args):
    pipe = _load(args)
    fs = _need_factor(pipe)
    prefix = parse_word(args.prefix, fs.image_alphabet) if args.prefix else ()
    tail = parse_word(args.tail, fs.image_alphabet)
    res = g_limit(fs, pipe.pd, prefix, tail, jmax=args.jmax, tol=args.tol)
    results = {
        "prefix": format_word(prefix, fs.image_alphabet),
        "tail": format_word(tail, fs.image_alphabet),
        "value": res.value,
        "error_estimate": res.error_estimate,
        "converged": res.converged,
        "stages": [{"n": n, "value": v} for n, v in res.stages],
    }
    if res.exact_stages is not None:
        results["exact_stages"] = [str(x) for x in res.exact_stages]
    return results, 0, pipe.desc


def cmd_variation(args):
    pipe = _load(args)
    fs = _need_factor(pipe)
    profile = variation_profile(fs, pipe.pd, args.m, args.n_max, args.budget)
    results = {
        "m": profile.m,
        "n": list(profile.n_values),
        "var_hat": list(profile.var_hat),
        "pair_counts": list(profile.pair_counts),
    }
    return results, 0, pipe.desc


def cmd_fit(args):
    pipe = _load(args)
    fs = _need_factor(pipe)
    profile = variation_profile(fs, pipe.pd, args.m, args.n_max, args.budget)
    fit = decay_fit(profile, n0=args.n0)
    results = {
        "m": profile.m,
        "n0": args.n0,
        "var_hat": list(profile.var_hat),
        "classification": fit.classification,
        "exp_rate": fit.exp_rate,
        "poly_exponent": fit.poly_exponent,
        "r_squared_exp": fit.r_squared_exp,
        "r_squared_poly": fit.r_squared_poly,
    }
    return results, 0, pipe.desc


def cmd_eta(args):
    pipe = _load(args)
    env = holder_envelope(pipe.potential, args.theta)
    ln1 = ln1_sup_norm(pipe.tm, args.N)
    if args.optimize:
        bound = eta_optimize(args.theta, env.holder_constant, n_steps=args.N,
                             sup_norm=env.sup_norm, ln1_sup_norm=ln1,
                             grid_size=args.grid)
    else:
        sigma = args.sigma
        if sigma is None:
            raise ValidationError("eta needs --sigma or --optimize")
        bound = eta_general(args.theta, env.holder_constant, env.sup_norm,
                            ln1, args.N, sigma)
    results = {
        "theta": bound.theta,
        "sigma": bound.sigma,
        "N": bound.n_steps,
        "holder_constant": env.holder_constant,
        "sup_norm": env.sup_norm,
        "cone_constant": bound.cone_constant,
        "m_const": bound.m_const,
        "eta": bound.eta,
        "prefactor": bound.prefactor,
        "rate_per_symbol": bound.eta ** (1.0 / bound.n_steps),
    }
    if bound.full_shift_eta is not None:
        results["full_shift_eta"] = bound.full_shift_eta
    return results, 0, pipe.desc


def cmd_contraction(args):
    pipe = _load(args)
    fs = _need_factor(pipe)
    profile = contraction_profile(fs, args.N, args.budget)
    results = {
        "N": profile.n,
        "words": len(profile.per_word),
        "max_delta": profile.max_delta,
        "max_tau": profile.max_tau,
        "infinite_words": profile.infinite_words,
    }
    return results, 0, pipe.desc


def cmd_example2(args):
    desc = fixtures.example2()
    pipe = build_pipeline(desc, exact=True)
    fs = pipe.factor
    limit = g_limit(fs, pipe.pd, (), (0,), jmax=max(args.jmax, 14), tol=1e-9)
    fwm = fwm_search(fs, 8, args.budget)
    results = {
        "lambda": str(pipe.pd.lam),
        "h": [str(x) for x in pipe.pd.h],
        "nu": [str(x) for x in pipe.pd.nu],
        "g_zero_run_limit": limit.value,
        "fiber_wise_mixing": fwm.found is not None,
        "fwm_search_max_N": 8,
    }
    return results, 0, desc


HANDLERS = {
    "validate": cmd_validate,
    "perron": cmd_perron,
    "measure": cmd_measure,
    "project": cmd_project,
    "project-verify": cmd_project_verify,
    "fwm": cmd_fwm,
    "gfun": cmd_gfun,
    "gfun-limit": cmd_gfun_limit,
    "variation": cmd_variation,
    "fit": cmd_fit,
    "eta": cmd_eta,
    "contraction": cmd_contraction,
    "example2": cmd_example2,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--exact", action="store_true",
                        help="exact rational arithmetic (weight-mode rational tables)")
    common.add_argument("--tol", type=float, default=1e-10,
                        help="comparison tolerance for verification commands")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized checks")
    common.add_argument("--budget", type=int, default=5_000_000,
                        help="enumeration budget (words)")
    common.add_argument("--format", choices=("json", "csv"), default="json")

    parser = argparse.ArgumentParser(
        prog="gibbsfactor",
        description="Gibbs states of locally constant potentials, their 1-block "
                    "factor projections, and the regularity of the projected "
                    "g-function.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, needs_file=True, **kwargs):
        p = sub.add_parser(name, parents=[common], **kwargs)
        if needs_file:
            p.add_argument("system", help="system description JSON file")
        return p

    add("validate", help="parse and validate a system file")
    add("perron", help="leading eigendata of the transfer matrix")
    p = add("measure", help="Gibbs measure of a domain cylinder")
    p.add_argument("--word", required=True)
    p = add("project", help="projected measure of an image cylinder")
    p.add_argument("--word", required=True)
    p.add_argument("--oracle", action="store_true",
                   help="also run the brute-force oracle and compare")
    p = add("project-verify", help="oracle comparison over all image words")
    p.add_argument("--max-len", type=int, default=8)
    p = add("fwm", help="fiber-wise mixing search")
    p.add_argument("--max-N", type=int, default=8)
    p = add("gfun", help="g-function approximant at an image word")
    p.add_argument("--word", required=True)
    p = add("gfun-limit", help="g at an eventually periodic image point")
    p.add_argument("--prefix", default="")
    p.add_argument("--tail", required=True)
    p.add_argument("--jmax", type=int, default=16)
    p = add("variation", help="variation profile of log g at truncation m")
    p.add_argument("--m", type=int, default=14)
    p.add_argument("--n-max", type=int, default=None)
    p = add("fit", help="variation profile plus decay classification")
    p.add_argument("--m", type=int, default=14)
    p.add_argument("--n-max", type=int, default=None)
    p.add_argument("--n0", type=int, default=2)
    p = add("eta", help="theoretical contraction-rate bound")
    p.add_argument("--theta", type=float, default=0.5)
    p.add_argument("--sigma", type=float, default=None)
    p.add_argument("--optimize", action="store_true")
    p.add_argument("--N", type=int, default=1)
    p.add_argument("--grid", type=int, default=64)
    p = add("contraction", help="projective diameters of span-N block products")
    p.add_argument("--N", type=int, default=1)
    p = add("example2", needs_file=False,
            help="run the built-in four-symbol example end to end")
    p.add_argument("--jmax", type=int, default=14)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "n_max", None) is None and hasattr(args, "n_max"):
        # default fit window: first third, keeping truncation bias subdominant
        args.n_max = max(2, args.m // 3)
    handler = HANDLERS[args.command]
    try:
        results, code, desc = handler(args)
    except (ValidationError, ExactModeError, NotMixingError, ConvergenceError,
            EnumerationLimitError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return USAGE_ERROR
    report = {
        "schema_version": 1,
        "command": args.command,
        "inputs_digest": system_digest(desc),
        "results": _sanitize(results),
        "diagnostics": {
            "exact": args.exact,
            "tol": args.tol,
            "seed": args.seed,
            "budget": args.budget,
        },
    }
    emit_report(report, args.format)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
