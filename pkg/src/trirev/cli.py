"""trirev command line: verify, constants, sharpness.

Exit codes: 0 pass, 2 bound violation, 3 construction or convergence failure, 4 bad config.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace

from . import harness
from .discrete import TheoremId, instance_to_json
from .errors import ConfigError, ConstructionFailure, ConvergenceFailure, TrirevError
from .functionals import SearchConfig, family_cap, gram_eigen, sphere_search
from .gen import random_family, sharpness_search
from .rng import stream
from .spaces import cmod, exponent, exponent_label, lp

EXIT_OK, EXIT_VIOLATION, EXIT_FAILURE, EXIT_CONFIG = 0, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="trirev", description="Numerical checks of reverse triangle inequalities.")
    sub = ap.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    v = sub.add_parser("verify", help="run acceptance suites and write a JSON report")
    v.add_argument("--suite", action="append", choices=list(harness.SUITES) + ["all"])
    v.add_argument("--trials", type=int)
    v.add_argument("--seed", type=int)
    v.add_argument("--tol-abs", type=float)
    v.add_argument("--tol-rel", type=float)
    v.add_argument("--out")
    v.add_argument("--config")
    v.add_argument("--jobs", type=int)
    v.add_argument("--sharpness-budget", type=int)
    v.add_argument("--quad-rule", choices=["gauss_legendre", "simpson"])
    v.add_argument("--quad-order", type=int)
    v.add_argument("--quad-panels", type=int)
    v.add_argument("--quad-refinement", type=int)

    c = sub.add_parser("constants", help="estimate c_p for a random family")
    c.add_argument("--space", choices=["lp", "cmod"], default="lp")
    c.add_argument("--norm", default="2", help="exponent of the space norm")
    c.add_argument("--p", default="2", help="exponent of the family constant (inf allowed)")
    c.add_argument("--dim", type=int, default=3)
    c.add_argument("--members", type=int, default=2)
    c.add_argument("--field", choices=["real", "complex"], default="real")
    c.add_argument("--starts", type=int, default=64)
    c.add_argument("--iters", type=int, default=500)
    c.add_argument("--seed", type=int)

    s = sub.add_parser("sharpness", help="search for near-equality instances")
    s.add_argument("--theorem", required=True, choices=[t.value for t in TheoremId])
    s.add_argument("--budget", type=int, default=10_000)
    s.add_argument("--seed", type=int)
    s.add_argument("--out")
    return ap


def read_config(path: str) -> dict:
    """Plain key=value lines; '#' starts a comment."""
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as e:
        raise ConfigError(f"cannot read config {path!r}: {e}") from e
    for n, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected key=value")
        k, v = (x.strip() for x in line.split("=", 1))
        out[k.replace("-", "_")] = v
    return out


_KEYS = {
    "suite": str, "suites": str, "trials": int, "seed": int, "tol_abs": float, "tol_rel": float,
    "out": str, "jobs": int, "sharpness_budget": int, "quad_rule": str, "quad_order": int,
    "quad_panels": int, "quad_refinement": int,
}


def _convert(key, value):
    if key not in _KEYS:
        raise ConfigError(f"unknown config key {key!r}")
    try:
        return _KEYS[key](value)
    except ValueError as e:
        raise ConfigError(f"bad value for {key}: {value!r}") from e


def _env_seed():
    raw = os.environ.get("TRIREV_SEED")
    if raw is None or raw.strip() == "":
        return None
    try:
        return int(raw)
    except ValueError as e:
        raise ConfigError(f"TRIREV_SEED is not an integer: {raw!r}") from e


def build_config(args) -> harness.SuiteConfig:
    """Defaults < config file < TRIREV_SEED (seed only) < command-line flags."""
    vals = {}
    if args.config:
        vals = {k: _convert(k, v) for k, v in read_config(args.config).items()}
    if "seed" not in vals:
        env = _env_seed()
        if env is not None:
            vals["seed"] = env
    flags = {"trials": args.trials, "seed": args.seed, "tol_abs": args.tol_abs, "tol_rel": args.tol_rel,
             "out": args.out, "jobs": args.jobs, "sharpness_budget": args.sharpness_budget,
             "quad_rule": args.quad_rule, "quad_order": args.quad_order, "quad_panels": args.quad_panels,
             "quad_refinement": args.quad_refinement}
    vals.update({k: v for k, v in flags.items() if v is not None})
    suites = args.suite or None
    if suites is None:
        raw = vals.pop("suites", None) or vals.pop("suite", None)
        suites = [x.strip() for x in raw.split(",")] if raw else ["all"]
    vals.pop("suite", None)
    vals.pop("suites", None)
    suites = tuple(harness.SUITES) if "all" in suites else tuple(dict.fromkeys(suites))
    q = harness.cnt.DEFAULT_QUAD
    qkw = {k[5:]: vals.pop(k) for k in list(vals) if k.startswith("quad_")}
    try:
        if qkw:
            q = replace(q, **qkw)
        return harness.SuiteConfig(suites=suites, quad=q, **vals)
    except (TypeError, ValueError) as e:
        raise ConfigError(str(e)) from e


def _write(text: str, path):
    if path:
        try:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as e:
            raise ConfigError(f"cannot write {path!r}: {e}") from e
    else:
        sys.stdout.write(text)


def _cmd_verify(args) -> int:
    cfg = build_config(args)
    report = harness.run_suite(cfg)
    _write(harness.dumps(report), cfg.out)
    return harness.exit_code(report)


def _cmd_constants(args) -> int:
    seed = args.seed if args.seed is not None else (_env_seed() or 0)
    try:
        p = exponent(args.p)
        norm_p = exponent(args.norm)
    except TrirevError as e:
        raise ConfigError(str(e)) from e
    if args.dim < 1 or args.members < 1 or args.starts < 1 or args.iters < 0:
        raise ConfigError("dim, members and starts must be >= 1, iters >= 0")
    sp = cmod(norm_p) if args.space == "cmod" else lp(norm_p, args.dim, args.field)
    fam = random_family(sp, stream(seed, "cli-constants"), args.members)
    search = SearchConfig(starts=args.starts, iters=args.iters, seed=seed)
    est = sphere_search(fam, p, search)
    out = {"space": sp.label(), "p": exponent_label(p), "members": fam.m, "seed": seed,
           "sphere_search": est.value, "cap": family_cap(fam, p),
           "certificate": harness.dsc.pairs(est.certificate),
           "representers": harness.dsc.pairs(fam.matrix)}
    if sp.is_hilbert and p == 2.0:
        g = gram_eigen(fam).value
        out["gram_eigen"] = g
        out["relative_gap"] = abs(g - est.value) / max(g, 1e-300)
    _write(json.dumps(out, indent=2) + "\n", None)
    return EXIT_OK


def _cmd_sharpness(args) -> int:
    seed = args.seed if args.seed is not None else (_env_seed() or 0)
    if args.budget < 0:
        raise ConfigError("budget must be >= 0")
    res = sharpness_search(args.theorem, None, args.budget, seed=seed)
    out = {"theorem_id": res.theorem_id, "best_ratio": res.best_ratio, "bound": res.bound,
           "evaluations": res.evaluations, "exceeded": res.exceeded,
           "witness": instance_to_json(res.witness)}
    _write(json.dumps(out, indent=2) + "\n", args.out)
    return EXIT_VIOLATION if res.exceeded else EXIT_OK


def main(argv=None) -> int:
    try:
        args = _parser().parse_args(argv)
        return {"verify": _cmd_verify, "constants": _cmd_constants, "sharpness": _cmd_sharpness}[args.cmd](args)
    except ConfigError as e:
        print(f"trirev: configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConstructionFailure, ConvergenceFailure) as e:
        print(f"trirev: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
