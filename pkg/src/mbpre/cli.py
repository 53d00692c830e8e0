"""Command-line interface.

Every subcommand echoes its seed and full parameters, writes results to
stdout (JSON with --json, flat key = value lines otherwise) and
diagnostics to stderr. Identical command lines produce byte-identical
JSON. Exit codes: 0 success, 2 usage error, 3 model or invariant error,
4 resource-budget error.
"""

from __future__ import annotations

import argparse
import json
import os
import secrets
import sys

import numpy as np

from . import __version__, carpet, extinction, lyapunov, proofkit
from .classify import check_conditions, classify
from .errors import BudgetError, InvariantError, ModelFormatError
from .model import parse_model

_EXIT_USAGE = 2
_EXIT_MODEL = 3
_EXIT_BUDGET = 4


def _parse_seed(text):
    if text == "random":
        return secrets.randbits(63)
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("seed must be an integer or 'random'")
    if value < 0:
        raise argparse.ArgumentTypeError("seed must be non-negative")
    return value


def _default_threads():
    return os.cpu_count() or 1


def _load_model(path):
    try:
        with open(path, "rb") as fh:
            return parse_model(fh.read())
    except OSError as exc:
        raise _UsageError(f"cannot read model file {path}: {exc}")


class _UsageError(Exception):
    pass


def _add_seed_threads(p):
    p.add_argument("--seed", type=_parse_seed, default=0, help="RNG seed (or 'random')")
    p.add_argument("--threads", type=int, default=_default_threads())


def _add_json(p):
    p.add_argument("--json", action="store_true", help="machine-readable output")


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="mbpre",
        description="Multitype branching processes in random environments",
    )
    parser.add_argument("--version", action="version", version=f"mbpre {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="verify classification hypotheses on a model")
    p.add_argument("--model", required=True)
    p.add_argument("--max-word-len", type=int, default=None)
    _add_json(p)

    p = sub.add_parser("lyapunov", help="estimate a growth exponent")
    p.add_argument("--model", required=True)
    p.add_argument("--kind", choices=lyapunov.KINDS, default="sum")
    p.add_argument("--steps", type=int, default=100_000)
    p.add_argument("--batches", type=int, default=32)
    _add_seed_threads(p)
    _add_json(p)

    p = sub.add_parser("extinction", help="extinction vectors by pgf composition")
    p.add_argument("--model", required=True)
    p.add_argument("--mode", choices=("fixed", "converged", "annealed"), default="converged")
    p.add_argument("--word", default=None, help="comma-separated letter indices (fixed mode)")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--max-depth", type=int, default=1 << 16)
    p.add_argument("--envs", type=int, default=100)
    _add_seed_threads(p)
    _add_json(p)

    p = sub.add_parser("simulate", help="population simulation and survival estimate")
    p.add_argument("--model", required=True)
    p.add_argument("--start-type", type=int, default=0)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--horizon", type=int, default=100)
    p.add_argument("--cap", type=int, default=10**6)
    p.add_argument("--growth", action="store_true", help="also estimate the conditioned growth rate")
    _add_seed_threads(p)
    _add_json(p)

    p = sub.add_parser("classify", help="survival/extinction verdict for a model")
    p.add_argument("--model", required=True)
    p.add_argument("--kind", choices=lyapunov.KINDS, default="sum")
    p.add_argument("--steps", type=int, default=100_000)
    p.add_argument("--batches", type=int, default=32)
    p.add_argument("--max-word-len", type=int, default=None)
    _add_seed_threads(p)
    _add_json(p)

    pc = sub.add_parser("carpet", help="random Sierpinski carpet application")
    csub = pc.add_subparsers(dest="carpet_command", required=True)

    p = csub.add_parser("lambda-b", help="growth exponent of the p=1 column matrices")
    p.add_argument("--steps", type=int, default=100_000)
    p.add_argument("--batches", type=int, default=32)
    _add_seed_threads(p)
    _add_json(p)

    p = csub.add_parser("critical", help="critical retention probability interval")
    p.add_argument("--steps", type=int, default=100_000)
    p.add_argument("--batches", type=int, default=32)
    p.add_argument("--bisect", action="store_true", help="cross-check by survival bisection")
    p.add_argument("--trials", type=int, default=400, help="trials per bisection step")
    p.add_argument("--horizon", type=int, default=200)
    p.add_argument("--cap", type=int, default=10**6)
    p.add_argument("--iterations", type=int, default=12)
    _add_seed_threads(p)
    _add_json(p)

    p = csub.add_parser("project", help="sample carpets and measure their projections")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--samples", type=int, default=100)
    _add_seed_threads(p)
    _add_json(p)

    p = csub.add_parser("offspring", help="validate a column law against the geometry")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--column", type=int, required=True, choices=(0, 1, 2))
    p.add_argument("--type", type=int, required=True, choices=(0, 1), dest="parent_type")
    p.add_argument("--samples", type=int, default=100_000)
    _add_seed_threads(p)
    _add_json(p)

    p = sub.add_parser("proofkit", help="run the majorant inequality oracle suite")
    p.add_argument("--model", required=True)
    p.add_argument("--lambda", dest="lambda_", type=float, required=True)
    p.add_argument("--samples", type=int, default=10_000)
    _add_seed_threads(p)
    _add_json(p)

    return parser


def _cmd_check(args):
    model = _load_model(args.model)
    report = check_conditions(model, max_word_len=args.max_word_len)
    params = {"model": args.model, "max_word_len": args.max_word_len}
    return params, report.to_dict()


def _cmd_lyapunov(args):
    model = _load_model(args.model)
    est = lyapunov.estimate_exponent(
        model,
        kind=args.kind,
        steps_per_batch=args.steps,
        batches=args.batches,
        seed=args.seed,
        workers=args.threads,
    )
    params = {
        "model": args.model,
        "kind": args.kind,
        "steps": args.steps,
        "batches": args.batches,
        "threads": args.threads,
    }
    return params, est.to_dict()


def _cmd_extinction(args):
    model = _load_model(args.model)
    params = {"model": args.model, "mode": args.mode, "threads": args.threads}
    if args.mode == "fixed":
        if not args.word:
            raise _UsageError("--word is required in fixed mode")
        try:
            word = [int(x) for x in args.word.split(",")]
        except ValueError:
            raise _UsageError("--word must be comma-separated integers")
        params["word"] = args.word
        res = extinction.extinction_fixed_env(model, word)
        return params, {"q": [float(v) for v in res.q], "depth": res.depth}
    if args.mode == "converged":
        params.update({"tol": args.tol, "max_depth": args.max_depth})
        res = extinction.extinction_converged(model, args.seed, tol=args.tol, max_depth=args.max_depth)
        return params, {
            "q": [float(v) for v in res.q],
            "depth": res.depth,
            "converged": res.converged,
        }
    params.update({"tol": args.tol, "max_depth": args.max_depth, "envs": args.envs})
    mean_q, share = extinction.annealed_extinction(
        model,
        args.envs,
        tol=args.tol,
        max_depth=args.max_depth,
        seed=args.seed,
        workers=args.threads,
    )
    return params, {"mean_q": [float(v) for v in mean_q], "share_converged": share}


def _cmd_simulate(args):
    model = _load_model(args.model)
    params = {
        "model": args.model,
        "start_type": args.start_type,
        "trials": args.trials,
        "horizon": args.horizon,
        "cap": args.cap,
        "growth": args.growth,
        "threads": args.threads,
    }
    est, hw = extinction.survival_probability_mc(
        model, args.start_type, args.trials, args.horizon,
        cap=args.cap, seed=args.seed, workers=args.threads,
    )
    result = {"survival": est, "half_width": hw}
    if args.growth:
        rate, rate_hw, nsurv = extinction.growth_rate_conditioned(
            model, args.start_type, args.trials, args.horizon,
            cap=args.cap, seed=args.seed, workers=args.threads,
        )
        result.update(
            {"growth_rate": rate, "growth_half_width": rate_hw, "surviving_trials": nsurv}
        )
    return params, result


def _cmd_classify(args):
    model = _load_model(args.model)
    report = check_conditions(model, max_word_len=args.max_word_len)
    est = lyapunov.estimate_exponent(
        model,
        kind=args.kind,
        steps_per_batch=args.steps,
        batches=args.batches,
        seed=args.seed,
        workers=args.threads,
    )
    verdict = classify(model, report, est)
    params = {
        "model": args.model,
        "kind": args.kind,
        "steps": args.steps,
        "batches": args.batches,
        "max_word_len": args.max_word_len,
        "threads": args.threads,
    }
    return params, {"report": report.to_dict(), "verdict": verdict.to_dict()}


def _cmd_carpet_lambda_b(args):
    est = carpet.lambda_b(args.steps, args.batches, args.seed, workers=args.threads)
    params = {"steps": args.steps, "batches": args.batches, "threads": args.threads}
    return params, est.to_dict()


def _bisect_critical(args):
    lo, hi = 0.05, 0.95
    children = np.random.SeedSequence(args.seed).spawn(args.iterations)
    for child in children:
        mid = 0.5 * (lo + hi)
        model = carpet.build_carpet_model(mid).model
        seed = int(child.generate_state(1)[0])
        surv, _ = extinction.survival_probability_mc(
            model, 0, args.trials, args.horizon,
            cap=args.cap, seed=seed, workers=args.threads,
        )
        if surv > 0:
            hi = mid
        else:
            lo = mid
    return lo, hi


def _cmd_carpet_critical(args):
    params = {
        "steps": args.steps,
        "batches": args.batches,
        "threads": args.threads,
        "method": "bisect" if args.bisect else "ci",
    }
    if args.bisect:
        params.update(
            {
                "trials": args.trials,
                "horizon": args.horizon,
                "cap": args.cap,
                "iterations": args.iterations,
            }
        )
        lo, hi = _bisect_critical(args)
        return params, {"p_low": lo, "p_high": hi, "method": "bisect"}
    est = carpet.lambda_b(args.steps, args.batches, args.seed, workers=args.threads)
    lo, hi = carpet.critical_p(est)
    return params, {"p_low": lo, "p_high": hi, "method": "ci", "lambda_b": est.to_dict()}


def _cmd_carpet_project(args):
    params = {"p": args.p, "depth": args.depth, "samples": args.samples, "threads": args.threads}
    children = np.random.SeedSequence(args.seed).spawn(args.samples)
    measures = []
    for child in children:
        sq = carpet.sample_carpet(args.p, args.depth, np.random.default_rng(child))
        measures.append(carpet.projection_measure(sq))
    measures = np.array(measures)
    nonempty = measures[measures > 0]
    return params, {
        "measures": [float(m) for m in measures],
        "mean_measure": float(measures.mean()),
        "mean_nonempty_measure": float(nonempty.mean()) if nonempty.size else 0.0,
        "share_empty": float((measures == 0).mean()),
    }


def _cmd_carpet_offspring(args):
    params = {
        "p": args.p,
        "column": args.column,
        "type": args.parent_type,
        "samples": args.samples,
        "threads": args.threads,
    }
    rng = np.random.default_rng(args.seed)
    stats = carpet.empirical_offspring_stats(
        args.p, args.column, args.parent_type, args.samples, rng
    )
    law = carpet.build_carpet_model(args.p).model.letters[args.column].laws[args.parent_type]
    model_pmf = {
        (int(z[0]), int(z[1])): float(p) for z, p in zip(law.counts, law.probs)
    }
    atoms = set(stats.pmf) | set(model_pmf)
    tv = 0.5 * sum(abs(stats.pmf.get(a, 0.0) - model_pmf.get(a, 0.0)) for a in atoms)
    return params, {
        "mean": [float(v) for v in stats.mean],
        "pmf": {f"{a},{b}": p for (a, b), p in sorted(stats.pmf.items())},
        "model_pmf": {f"{a},{b}": p for (a, b), p in sorted(model_pmf.items())},
        "tv_distance": tv,
    }


def _cmd_proofkit(args):
    model = _load_model(args.model)
    report = proofkit.oracle_suite(model, args.lambda_, args.samples, args.seed)
    params = {"model": args.model, "lambda": args.lambda_, "samples": args.samples}
    built = proofkit.build_proof_params(model, args.lambda_)
    return params, {
        "checks": report.to_dicts(),
        "all_passed": report.all_passed,
        "params": {
            "rho": built.rho,
            "alpha": built.alpha,
            "moment_bound": built.moment_bound,
            "delta": built.delta,
            "mu": built.mu,
            "u": built.u,
        },
    }


_HANDLERS = {
    "check": _cmd_check,
    "lyapunov": _cmd_lyapunov,
    "extinction": _cmd_extinction,
    "simulate": _cmd_simulate,
    "classify": _cmd_classify,
    "proofkit": _cmd_proofkit,
}

_CARPET_HANDLERS = {
    "lambda-b": _cmd_carpet_lambda_b,
    "critical": _cmd_carpet_critical,
    "project": _cmd_carpet_project,
    "offspring": _cmd_carpet_offspring,
}


def _flatten(prefix, obj):
    if isinstance(obj, dict):
        for key, value in obj.items():
            yield from _flatten(f"{prefix}.{key}" if prefix else str(key), value)
    elif isinstance(obj, list) and obj and isinstance(obj[0], (dict, list)):
        for i, value in enumerate(obj):
            yield from _flatten(f"{prefix}[{i}]", value)
    else:
        yield f"{prefix} = {json.dumps(obj)}"


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else int(exc.code)
    command = args.command
    if command == "carpet":
        handler = _CARPET_HANDLERS[args.carpet_command]
        command = f"carpet {args.carpet_command}"
    else:
        handler = _HANDLERS[command]
    try:
        params, result = handler(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if isinstance(exc, (ModelFormatError, InvariantError)):
            return _EXIT_MODEL
        return _EXIT_USAGE
    except BudgetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_BUDGET
    except Exception as exc:  # runtime failures: degenerate products, no survivors
        print(f"error: {exc}", file=sys.stderr)
        return 1
    envelope = {
        "tool": "mbpre",
        "version": __version__,
        "command": command,
        "seed": getattr(args, "seed", None),
        "params": params,
        "result": result,
    }
    if args.json:
        print(json.dumps(envelope, indent=2))
    else:
        for line in _flatten("", envelope):
            print(line)
    return 0


if __name__ == "__main__":
    sys.exit(main())
