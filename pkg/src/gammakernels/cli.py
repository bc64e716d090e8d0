"""Command-line front end: ``run`` the suites, ``eval`` one function, ``list`` the registry."""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import gamma as gm
from . import kernels as kn
from .errors import GammaKernelError, PoleProximityError
from .gamma import EvalConfig, ModularParams, Regime
from .verify.suites import REGISTRY, SuiteContext, run_all

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_POLE = 0, 1, 2, 3
DEFAULT_OUTPUT = "gk-reports"


class ConfigError(ValueError):
    pass


def parse_complex(text) -> complex:
    """Accept ``0.41+0.2i``, ``0.41+0.2j``, plain numbers or ``[re, im]`` pairs."""
    if isinstance(text, (list, tuple)):
        if len(text) != 2:
            raise ConfigError(f"complex pair must have two entries, got {text!r}")
        val = complex(float(text[0]), float(text[1]))
    elif isinstance(text, (int, float)) and not isinstance(text, bool):
        val = complex(text)
    elif isinstance(text, str):
        s = text.strip().replace(" ", "").replace("i", "j")
        if s.endswith("j") and (s[:-1] in ("", "+", "-") or s[-2] in "+-"):
            s = s[:-1] + "1j"
        try:
            val = complex(s)
        except ValueError:
            raise ConfigError(f"cannot parse complex number {text!r}") from None
    else:
        raise ConfigError(f"cannot parse complex number {text!r}")
    if not (math.isfinite(val.real) and math.isfinite(val.imag)):
        raise ConfigError(f"non-finite value {text!r}")
    return val


def parse_vector(text: str) -> np.ndarray:
    return np.array([parse_complex(part) for part in text.split(",") if part.strip()])


@dataclass
class SuiteConfig:
    """Resolved run configuration (file values overridden by flags)."""

    params: ModularParams = field(default_factory=ModularParams)
    cfg: EvalConfig = gm.DEFAULT_CONFIG
    seed: int = 42
    n_points: int = 100
    suites: list = field(default_factory=lambda: list(REGISTRY))
    mu: complex = 0.3
    mu_prime: complex = 0.41 + 0.2j
    d: complex = kn.DEFAULT_D
    unconstrained: bool = False
    tol: Optional[float] = None
    jobs: int = 1
    output_path: str = DEFAULT_OUTPUT
    fmt: str = "text"
    mutate: bool = False

    def context(self) -> SuiteContext:
        return SuiteContext(self.params, self.cfg, self.seed, self.n_points, self.mu, self.mu_prime,
                            self.d, self.unconstrained, self.mutate, self.tol)

    def echo(self) -> dict:
        def pair(z):
            return [z.real, z.imag]

        return {"r": self.params.r, "a_plus": self.params.a_plus, "a_minus": self.params.a_minus,
                "seed": self.seed, "points": self.n_points, "suites": list(self.suites),
                "mu": pair(self.mu), "mu_prime": pair(self.mu_prime), "d": pair(self.d),
                "unconstrained": self.unconstrained, "tol": self.tol}


_PARAM_KEYS = ("r", "a_plus", "a_minus")
_CFG_KEYS = {"target_tol": float, "max_product_terms": int, "quad_rel_tol": float,
             "quad_max_depth": int, "continuation_max_steps": int, "pole_guard": float}
_KEYS = set(_PARAM_KEYS) | set(_CFG_KEYS) | {
    "seed", "points", "suites", "mu", "mu_prime", "d", "unconstrained", "tol", "jobs", "output", "format"}


def _real(key, value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key} must be a number")
    if not math.isfinite(value):
        raise ConfigError(f"{key} must be finite")
    return float(value)


def _int(key, value) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{key} must be an integer")
    return value


def load_config_file(path: str) -> dict:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from None
    unknown = set(data) - _KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    nested = [k for k, v in data.items() if isinstance(v, dict)]
    if nested:
        raise ConfigError(f"config must be flat; nested tables: {', '.join(nested)}")
    return data


def resolve_config(args: argparse.Namespace, environ=os.environ) -> SuiteConfig:
    """Merge defaults, the config file, ``GK_SEED`` and explicit flags."""
    raw = load_config_file(args.config) if args.config else {}
    flags = {
        "seed": args.seed, "points": args.points, "jobs": args.jobs, "tol": args.tol,
        "output": args.output, "format": args.format, "suites": args.suite,
        "unconstrained": True if args.unconstrained else None,
    }
    raw.update({k: v for k, v in flags.items() if v is not None})
    if "seed" not in raw and environ.get("GK_SEED"):
        try:
            raw["seed"] = int(environ["GK_SEED"])
        except ValueError:
            raise ConfigError("GK_SEED must be an integer") from None

    conf = SuiteConfig()
    try:
        pvals = {k: _real(k, raw[k]) for k in _PARAM_KEYS if k in raw}
        conf.params = ModularParams(**pvals)
        cvals = {}
        for k, kind in _CFG_KEYS.items():
            if k in raw:
                cvals[k] = _int(k, raw[k]) if kind is int else _real(k, raw[k])
        conf.cfg = replace(gm.DEFAULT_CONFIG, **cvals)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None

    if "seed" in raw:
        conf.seed = _int("seed", raw["seed"])
        if conf.seed < 0:
            raise ConfigError("seed must be nonnegative")
    if "points" in raw:
        conf.n_points = _int("points", raw["points"])
        if conf.n_points < 1:
            raise ConfigError("points must be positive")
    if "jobs" in raw:
        conf.jobs = _int("jobs", raw["jobs"])
        if conf.jobs < 1:
            raise ConfigError("jobs must be positive")
    if "tol" in raw and raw["tol"] is not None:
        conf.tol = _real("tol", raw["tol"])
        if conf.tol <= 0:
            raise ConfigError("tol must be positive")
    for key in ("mu", "mu_prime", "d"):
        if key in raw:
            setattr(conf, key, parse_complex(raw[key]))
    if "suites" in raw:
        suites = raw["suites"]
        if isinstance(suites, str):
            suites = [suites]
        if not isinstance(suites, list) or not all(isinstance(s, str) for s in suites):
            raise ConfigError("suites must be a list of names")
        unknown = [s for s in suites if s not in REGISTRY]
        if unknown:
            raise ConfigError(f"unknown suite(s): {', '.join(unknown)}")
        conf.suites = list(dict.fromkeys(suites))
    if "unconstrained" in raw:
        if not isinstance(raw["unconstrained"], bool):
            raise ConfigError("unconstrained must be true or false")
        conf.unconstrained = raw["unconstrained"]
    if "output" in raw:
        conf.output_path = str(raw["output"])
    if "format" in raw:
        if raw["format"] not in ("json", "text"):
            raise ConfigError("format must be json or text")
        conf.fmt = raw["format"]
    conf.mutate = bool(getattr(args, "mutate_delta2", False))
    return conf


def _clean(obj):
    """Replace non-finite floats by ``None`` so the output stays strict JSON."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def _dump(path: Path, obj) -> None:
    text = json.dumps(_clean(obj), indent=2, ensure_ascii=False, allow_nan=False) + "\n"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def summary_table(reports) -> str:
    lines = [f"{'suite':<32} {'verdict':<7} {'max error':>10} {'threshold':>10}  binding check"]
    for rep in reports:
        b = rep.binding
        err = "-" if b is None else f"{rep.max_rel_error:.2e}"
        thr = "-" if b is None else f"{rep.threshold:.0e}"
        detail = rep.error if rep.error else ("" if b is None else b.name)
        lines.append(f"{rep.suite_name:<32} {rep.verdict:<7} {err:>10} {thr:>10}  {detail}")
    n_pass = sum(r.passed for r in reports)
    lines.append(f"{n_pass}/{len(reports)} suites passed")
    return "\n".join(lines) + "\n"


def cmd_run(args) -> int:
    try:
        conf = resolve_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    started = datetime.now(timezone.utc)
    t0 = time.perf_counter()
    reports = run_all(conf.context(), conf.suites, conf.jobs)
    elapsed = time.perf_counter() - t0

    out = Path(conf.output_path)
    out.mkdir(parents=True, exist_ok=True)
    for rep in reports:
        _dump(out / f"{rep.suite_name}.json", rep.to_dict())
    all_pass = all(r.passed for r in reports)
    summary = {
        "verdict": "PASS" if all_pass else "FAIL",
        "config": conf.echo(),
        "suites": [{"suite": r.suite_name, "verdict": r.verdict, "max_rel_error": r.max_rel_error,
                    "threshold": r.threshold, "label": r.label or None} for r in reports],
    }
    _dump(out / "summary.json", summary)
    table = summary_table(reports)
    with open(out / "summary.txt", "w", encoding="utf-8", newline="\n") as fh:
        fh.write(table)
    # wall-clock data lives apart from the reports so those stay byte-identical
    _dump(out / "run-metadata.json", {
        "started_utc": started.isoformat(timespec="seconds"),
        "elapsed_seconds": round(elapsed, 3),
        "jobs": conf.jobs,
        "suite_seconds": {r.suite_name: round(getattr(r, "runtime", 0.0), 3) for r in reports},
    })
    if conf.fmt == "json":
        sys.stdout.write(json.dumps(_clean(summary), indent=2) + "\n")
    else:
        sys.stdout.write(table)
    return EXIT_OK if all_pass else EXIT_FAIL


# ---------------------------------------------------------------------------
# eval


def _need(args, name):
    val = getattr(args, name)
    if val is None:
        raise ConfigError(f"--{name} is required for {args.function}")
    return val


def _scalar(args, name="z"):
    return parse_complex(_need(args, name))


def _vec(args, name):
    return parse_vector(_need(args, name))


def _eval_params(args) -> ModularParams:
    return ModularParams(args.r, args.a_plus, args.a_minus)


def _spec(args, family, p):
    return kn.KernelSpec(family, Regime.parse(args.regime), parse_complex(args.d), delta=args.delta)


EVALUATORS = {
    "elliptic_gamma": lambda a, p, c: gm.elliptic_gamma(p, _scalar(a), c),
    "elliptic_gamma_series": lambda a, p, c: gm.elliptic_gamma_series(p, _scalar(a), c),
    "hyperbolic_gamma": lambda a, p, c: gm.hyperbolic_gamma(p.a_plus, p.a_minus, _scalar(a), c),
    "trig_gamma": lambda a, p, c: gm.trig_gamma(p.r, a.alpha or p.a_minus, _scalar(a), c),
    "euler_gamma": lambda a, p, c: gm.euler_gamma_c(_scalar(a), c.pole_guard),
    "theta_R": lambda a, p, c: gm.theta_R(p, a.delta, _scalar(a), c),
    "s_fn": lambda a, p, c: gm.s_fn(p, a.delta, _scalar(a), c),
    "p_const": lambda a, p, c: gm.p_const(p, a.delta, c),
    "hyper_c": lambda a, p, c: gm.hyper_c(p.a_delta(a.delta), _scalar(a)),
    "hyper_s": lambda a, p, c: gm.hyper_s(p.a_delta(a.delta), _scalar(a)),
    "s2_kernel": lambda a, p, c: kn.s2_kernel(_spec(a, "A2", p), _vec(a, "v"), _vec(a, "w"),
                                              _vec(a, "z"), p, c),
    "s3_kernel": lambda a, p, c: kn.s3_kernel(_spec(a, "A3", p), parse_complex(a.d), _vec(a, "v"),
                                              _vec(a, "w"), p, c),
    "weight": lambda a, p, c: kn.weight("A2" if _vec(a, "x").size == 3 else "A3", a.regime,
                                        _vec(a, "x"), p, c),
    "toda_kernel": lambda a, p, c: kn.toda_kernel(a.kind, a.sign, _vec(a, "x"), _vec(a, "y"), p, c),
}


def format_complex(value) -> str:
    """Real and imaginary parts with 15 digits after the leading one, e.g. ``1.000000000000000 + 0i``."""
    z = complex(np.asarray(value).reshape(-1)[0]) if np.ndim(value) else complex(value)

    def part(x):
        return "0" if x == 0 else f"{x:#.16g}"

    sign = "-" if (z.imag < 0 or (z.imag == 0 and math.copysign(1, z.imag) < 0)) else "+"
    return f"{part(z.real)} {sign} {part(abs(z.imag))}i"


def cmd_eval(args) -> int:
    try:
        params = _eval_params(args)
        fn = EVALUATORS[args.function]
    except KeyError:
        print(f"unknown function {args.function!r}; choose from {', '.join(EVALUATORS)}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        value = fn(args, params, gm.DEFAULT_CONFIG)
    except PoleProximityError as exc:
        print(f"pole proximity: {exc}", file=sys.stderr)
        return EXIT_POLE
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except GammaKernelError as exc:
        print(f"evaluation error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_POLE
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(format_complex(value))
    return EXIT_OK


def cmd_list(args) -> int:
    for suite in REGISTRY.values():
        print(f"{suite.name}  {suite.ref}  {suite.threshold:g}")
    return EXIT_OK


def _sign_arg(text: str) -> int:
    try:
        return gm.as_sign(text)
    except (TypeError, ValueError):
        raise argparse.ArgumentTypeError(f"expected + or -, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gammakernels", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run verification suites and write reports")
    run.add_argument("--config", metavar="PATH", help="flat TOML file of key = value settings")
    run.add_argument("--suite", action="append", metavar="NAME", help="suite to run (repeatable)")
    run.add_argument("--seed", type=int)
    run.add_argument("--points", type=int)
    run.add_argument("--jobs", type=int)
    run.add_argument("--tol", type=float, help="override the identity thresholds")
    run.add_argument("--unconstrained", action="store_true",
                     help="run kernel suites through the failure-certification path")
    run.add_argument("--output", metavar="DIR")
    run.add_argument("--format", choices=("json", "text"))
    run.add_argument("--mutate-delta2", action="store_true", help=argparse.SUPPRESS)
    run.set_defaults(handler=cmd_run)

    ev = sub.add_parser("eval", help="evaluate one library function at one point")
    ev.add_argument("function", help=", ".join(EVALUATORS))
    ev.add_argument("--z", help="complex argument (vector for s2_kernel)")
    for name in ("v", "w", "x", "y"):
        ev.add_argument(f"--{name}", help="comma-separated complex vector")
    ev.add_argument("--delta", type=_sign_arg, default=1)
    ev.add_argument("--sign", type=_sign_arg, default=1, help="Toda kernel sign")
    ev.add_argument("--kind", choices=("rel", "nonrel"), default="rel")
    ev.add_argument("--regime", default="elliptic", choices=[r.value for r in Regime])
    ev.add_argument("--alpha", type=float)
    ev.add_argument("--d", default=str(kn.DEFAULT_D).strip("()"))
    ev.add_argument("--r", type=float, default=1.0)
    ev.add_argument("--a-plus", type=float, default=1.0)
    ev.add_argument("--a-minus", type=float, default=0.75)
    ev.set_defaults(handler=cmd_eval)

    ls = sub.add_parser("list", help="list suites with references and thresholds")
    ls.set_defaults(handler=cmd_list)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    return args.handler(args)


if __name__ == "__main__":
    sys.exit(main())
