"""Command-line experiment runner.

Every subcommand reads an optional JSON config, applies flag overrides and
writes plot-ready CSV (with a ``# key: value`` metadata header) plus a JSON
summary.  Outputs depend only on the resolved configuration and the seed.
"""
from __future__ import annotations

import argparse
import io
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .clt import clt_experiment
from .criteria import deviation_Dm, singularity_scan
from .flowspec import RankOneSpec, SpecError, check_finiteness, mpnstr
from .kernel import FejerKernel
from .parallel import default_workers
from .phase import DEFAULT_DIGITS
from .riesz import PartialProduct, ft_exact
from .staircase import PRESETS, StaircaseParams, Variant, admissibility, preset, to_spec
from .tower import compare_ft, occurrence_heights
from .words import bound_window, count_in_window, enumerate_words, min_gap

SUBCOMMANDS = ("validate", "riesz-density", "riesz-ft", "tower-check", "bourgain",
               "deviation", "clt", "clt-hist", "words")
_TOP_KEYS = {"cuts", "spacers", "base_height", "precision_digits", "staircase", "kernel", "quadrature"}


class ConfigError(ValueError):
    """Config problem, with the offending key path and (when known) line."""

    def __init__(self, message: str, key: str | None = None, line: int | None = None):
        where = []
        if key is not None:
            where.append(f"key {key!r}")
        if line is not None:
            where.append(f"line {line}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
        self.key = key
        self.line = line


def _key_line(text: str, key: str) -> int | None:
    needle = json.dumps(key.rsplit(".", 1)[-1])
    for i, row in enumerate(text.splitlines(), 1):
        if needle in row:
            return i
    return None


def load_config(path) -> tuple:
    """Return ``(tree, text)``; JSON syntax errors carry their line number."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    try:
        tree = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg}", line=exc.lineno) from exc
    if not isinstance(tree, dict):
        raise ConfigError("top level must be an object", line=1)
    for key in tree:
        if key not in _TOP_KEYS:
            raise ConfigError("unknown key", key=key, line=_key_line(text, key))
    return tree, text


def _rational(value, key, text):
    try:
        return Fraction(value) if isinstance(value, (int, str)) else Fraction(str(value))
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"expected a rational, got {value!r}", key=key,
                          line=_key_line(text, key)) from exc


def _int_list(value, key, text):
    if not isinstance(value, list) or not all(isinstance(v, int) and not isinstance(v, bool) for v in value):
        raise ConfigError("expected an array of integers", key=key, line=_key_line(text, key))
    return tuple(value)


@dataclass
class Setup:
    spec: RankOneSpec
    params: StaircaseParams | None
    preset: str | None
    variant: str | None
    digits: int
    s: float = 1.0
    budget: int = 4096
    cutoff: float | None = None
    config: dict = field(default_factory=dict)

    @property
    def kernel(self) -> FejerKernel:
        return FejerKernel(self.s)


def resolve(args) -> Setup:
    """Merge config file and flags into a ``Setup``."""
    tree, text = ({}, "") if args.config is None else load_config(args.config)
    digits = args.precision_digits
    if digits is None:
        digits = tree.get("precision_digits", DEFAULT_DIGITS)
    if not isinstance(digits, int) or digits < 15:
        raise ConfigError("precision_digits must be an integer >= 15", key="precision_digits",
                          line=_key_line(text, "precision_digits"))
    stair = tree.get("staircase", {})
    if not isinstance(stair, dict):
        raise ConfigError("expected an object", key="staircase", line=_key_line(text, "staircase"))
    for key in stair:
        if key not in {"preset", "variant", "m", "p", "eps"}:
            raise ConfigError("unknown key", key=f"staircase.{key}", line=_key_line(text, key))
    name = args.preset or stair.get("preset")
    variant = args.variant or stair.get("variant")
    if variant is not None:
        try:
            variant = Variant(variant)
        except ValueError as exc:
            raise ConfigError(f"unknown variant {variant!r}", key="staircase.variant",
                              line=_key_line(text, "variant")) from exc
    params = None
    try:
        if "cuts" in tree or "spacers" in tree:
            if name is not None or stair:
                raise ConfigError("give either cuts/spacers or a staircase block, not both", key="cuts",
                                  line=_key_line(text, "cuts"))
            spec = RankOneSpec.from_config({**tree, "precision_digits": digits})
        elif name is not None:
            if name not in PRESETS:
                raise ConfigError(f"unknown preset {name!r}", key="staircase.preset",
                                  line=_key_line(text, "preset"))
            params, spec = preset(name, variant=variant, precision_digits=digits)
            if any(k in stair for k in ("m", "p", "eps")):
                params = _override(params, stair, text, variant)
                spec = to_spec(params)
        elif all(k in stair for k in ("m", "p", "eps")):
            params = _override(None, stair, text, variant or Variant.THEOREM, digits)
            spec = to_spec(params)
        else:
            raise ConfigError("no flow given: supply cuts/spacers, staircase.m/p/eps or a preset")
    except ConfigError:
        raise
    except (SpecError, KeyError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
    kern = tree.get("kernel", {})
    quad = tree.get("quadrature", {})
    s = args.s if getattr(args, "s", None) is not None else kern.get("s", 1.0)
    if not isinstance(s, (int, float)) or s <= 0:
        raise ConfigError("kernel width must be positive", key="kernel.s", line=_key_line(text, "s"))
    budget = quad.get("budget", 4096)
    cutoff = quad.get("cutoff")
    if not isinstance(budget, int) or budget < 1:
        raise ConfigError("budget must be a positive integer", key="quadrature.budget",
                          line=_key_line(text, "budget"))
    if cutoff is not None and (not isinstance(cutoff, (int, float)) or cutoff <= 0):
        raise ConfigError("cutoff must be positive", key="quadrature.cutoff", line=_key_line(text, "cutoff"))
    resolved = {"precision_digits": digits, "kernel": {"s": float(s)},
                "quadrature": {"budget": budget, "cutoff": cutoff}}
    if params is not None:
        resolved["staircase"] = {"preset": name, "variant": params.variant.value, "m": list(params.m),
                                 "p": list(params.p), "eps": [str(e) for e in params.eps]}
    else:
        resolved.update(spec.to_config())
    return Setup(spec, params, name, params.variant.value if params else None, digits,
                 float(s), budget, cutoff, resolved)


def _override(params, stair, text, variant, digits=None):
    m = _int_list(stair["m"], "staircase.m", text) if "m" in stair else params.m
    p = _int_list(stair["p"], "staircase.p", text) if "p" in stair else params.p
    if "eps" in stair:
        if not isinstance(stair["eps"], list):
            raise ConfigError("expected an array", key="staircase.eps", line=_key_line(text, "eps"))
        eps = tuple(_rational(v, "staircase.eps", text) for v in stair["eps"])
    else:
        eps = params.eps
    digits = params.precision_digits if digits is None else digits
    variant = variant if variant is not None else params.variant
    try:
        return StaircaseParams(m, p, eps, variant, digits)
    except SpecError as exc:
        raise ConfigError(str(exc), key="staircase") from exc


def parse_grid(text: str, name: str = "grid") -> np.ndarray:
    """``a:b:n`` (inclusive linspace) or a comma list."""
    try:
        if ":" in text:
            a, b, n = text.split(":")
            return np.linspace(float(a), float(b), int(n))
        return np.array([float(v) for v in text.split(",")])
    except ValueError as exc:
        raise ConfigError(f"bad {name} {text!r}; expected a:b:n or a comma list") from exc


def parse_interval(text: str) -> tuple:
    try:
        a, b = (float(v) for v in text.split(":"))
    except ValueError as exc:
        raise ConfigError(f"bad interval {text!r}; expected a:b") from exc
    return a, b


def parse_stages(text: str | None, spec: RankOneSpec) -> tuple:
    if text is None:
        return tuple(range(spec.stages))
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise ConfigError(f"bad stage list {text!r}") from exc


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def metadata(args, setup: Setup) -> dict:
    return {"tool": f"rieszflow {__version__}", "command": args.command, "preset": setup.preset,
            "variant": setup.variant, "seed": args.seed, "precision_digits": setup.digits,
            "config": setup.config, "options": _options(args)}


def _options(args) -> dict:
    skip = {"command", "config", "out", "summary", "workers", "func", "preset", "variant",
            "precision_digits", "seed"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def write_csv(path, meta: dict, header: list, rows) -> None:
    buf = io.StringIO()
    for key, value in meta.items():
        text = json.dumps(value, sort_keys=True) if isinstance(value, (dict, list)) else value
        buf.write(f"# {key}: {text}\n")
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    _emit(path, buf.getvalue())


def write_json(path, meta: dict, payload: dict) -> None:
    _emit(path, json.dumps({"metadata": meta, "result": payload}, indent=2, sort_keys=True,
                           default=_fmt) + "\n")


def _emit(path, text: str) -> None:
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _summary_path(args):
    if args.summary is not None:
        return args.summary
    if args.out is not None and args.out != "-":
        return str(Path(args.out).with_suffix(".json"))
    return None


def _finish(args, meta, payload):
    path = _summary_path(args)
    if path is None:
        sys.stderr.write(json.dumps({"metadata": meta, "result": payload}, sort_keys=True,
                                    default=_fmt) + "\n")
    else:
        write_json(path, meta, payload)


def cmd_validate(args, setup: Setup) -> int:
    fin = check_finiteness(setup.spec)
    payload = {"finiteness": fin.to_dict(), "stages": setup.spec.stages,
               "heights": [mpnstr(h, setup.digits) for h in setup.spec.heights]}
    ok = True
    if setup.params is not None:
        adm = admissibility(setup.params, setup.spec)
        payload["admissibility"] = adm.to_dict()
        payload["warnings"] = setup.params.monotone_warnings()
        ok = adm.passed
    payload["passed"] = ok
    write_json(args.out, metadata(args, setup), payload)
    return 0 if ok else 1


def _product(args, setup):
    return PartialProduct(setup.spec, parse_stages(args.stages, setup.spec), setup.kernel)


def cmd_riesz_density(args, setup: Setup) -> int:
    pp = _product(args, setup)
    grid = parse_grid(args.grid)
    dens = np.atleast_1d(pp.density_eval(grid))
    meta = metadata(args, setup)
    write_csv(args.out, meta, ["theta", "density"], zip(grid, dens))
    _finish(args, meta, {"stages": list(pp.stages), "points": int(grid.size),
                         "max_density": float(dens.max()), "expansion_size": pp.expansion_size})
    return 0


def cmd_riesz_ft(args, setup: Setup) -> int:
    pp = _product(args, setup)
    grid = parse_grid(args.t_grid, "t-grid")
    values = np.atleast_1d(ft_exact(pp, grid))
    meta = metadata(args, setup)
    write_csv(args.out, meta, ["t", "ft_exact"], zip(grid, values))
    _finish(args, meta, {"stages": list(pp.stages), "points": int(grid.size),
                         "ft_at_0": float(ft_exact(pp, 0.0)), "expansion_size": pp.expansion_size})
    return 0


def cmd_tower_check(args, setup: Setup) -> int:
    tower = occurrence_heights(setup.spec, args.N)
    h = float(tower.height)
    grid = parse_grid(args.t_grid, "t-grid") if args.t_grid else np.linspace(0.0, h / 2, 32)
    rows = [compare_ft(setup.spec, args.N, args.s_width, float(t), tower) for t in grid]
    meta = metadata(args, setup)
    write_csv(args.out, meta, ["t", "autocorr", "ft", "residual", "bound"],
              ((c.t, c.autocorr, c.ft, c.residual, c.bound) for c in rows))
    _finish(args, meta, {"N": args.N, "s": args.s_width, "occurrences": len(tower),
                         "all_within_bound": all(c.ok for c in rows),
                         "max_residual": max(c.residual for c in rows)})
    return 0


def cmd_bourgain(args, setup: Setup) -> int:
    stages = parse_stages(args.stages, setup.spec)
    sets = [stages[:k] for k in range(1, len(stages) + 1)]
    scan = singularity_scan(setup.spec, setup.kernel, sets, budget=args.budget, seed=args.seed,
                            workers=args.workers)
    meta = metadata(args, setup)
    write_csv(args.out, meta, ["L", "beta", "stderr"],
              ((r.L, r.beta, r.stderr) for r in scan.rows))
    _finish(args, meta, {"rows": [r.to_dict() for r in scan.rows], "verdict": scan.verdict,
                         "nonincreasing": scan.nonincreasing, "decreased": scan.decreased})
    return 0


def cmd_deviation(args, setup: Setup) -> int:
    ms = [int(v) for v in args.m.split(",")]
    rows = []
    for m in ms:
        est = deviation_Dm(setup.spec, m, setup.kernel, budget=args.budget, seed=args.seed,
                           workers=args.workers)
        rows.append((m, est.mean, est.stderr))
    meta = metadata(args, setup)
    write_csv(args.out, meta, ["m", "D", "stderr"], rows)
    _finish(args, meta, {"rows": [{"m": m, "D": d, "stderr": e} for m, d, e in rows]})
    return 0


def _need_params(setup: Setup):
    if setup.params is None:
        raise ConfigError("this subcommand needs staircase parameters", key="staircase")
    return setup.params


def _clt(args, setup):
    params = _need_params(setup)
    if not 0 <= args.n < params.stages:
        raise ConfigError(f"--n must lie in 0..{params.stages - 1}")
    return clt_experiment(params, args.n, setup.kernel, parse_interval(args.A), args.samples, args.seed)


def cmd_clt(args, setup: Setup) -> int:
    res = _clt(args, setup)
    meta = metadata(args, setup)
    write_csv(args.out, meta, ["index", "t", "S_n"],
              zip(range(res.samples.size), res.samples, res.statistic))
    _finish(args, meta, res.summary())
    return 0


def cmd_clt_hist(args, setup: Setup) -> int:
    res = _clt(args, setup)
    counts, edges = res.distribution.histogram(args.bins, parse_interval(args.range))
    width = edges[1] - edges[0]
    dens = counts / (res.distribution.count * width)
    meta = metadata(args, setup)
    write_csv(args.out, meta, ["left", "right", "count", "density"],
              zip(edges[:-1], edges[1:], counts, dens))
    _finish(args, meta, res.summary())
    return 0


def cmd_words(args, setup: Setup) -> int:
    params = _need_params(setup)
    ws = enumerate_words(params, args.n, args.max_len)
    omega_cut = float(setup.spec.heights[args.n]) if args.omega is None else args.omega
    vals = ws.abs_floats()
    meta = metadata(args, setup)
    rows = []
    for w, v in zip(ws, vals):
        signs = "".join("+" if e > 0 else "-" for e in w.signs)
        support = " ".join(str(j) for j in w.support)
        rows.append((w.length, support, signs, mpnstr(w.value, 30), bool(v <= omega_cut)))
    write_csv(args.out, meta, ["length", "support", "signs", "value", "in_window"], rows)
    counts, bounds = {}, {}
    for r in range(4, args.max_len + 1, 2):
        counts[r] = count_in_window(ws, omega_cut, r)
        bounds[r] = bound_window(params, args.n, r, omega_cut)
    _finish(args, meta, {"n": args.n, "p_n": params.p[args.n], "words": len(ws),
                         "min_gap": min_gap(ws), "omega": omega_cut,
                         "window_counts": counts, "bounds": bounds,
                         "within_bounds": all(counts[r] <= bounds[r] for r in counts)})
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", "--spec", dest="config", help="JSON config file")
    common.add_argument("--preset", choices=sorted(PRESETS), help="shipped staircase preset")
    common.add_argument("--variant", choices=[v.value for v in Variant], help="omega variant")
    common.add_argument("--precision-digits", type=int, default=None,
                        help=f"working precision in decimal digits (default {DEFAULT_DIGITS})")
    common.add_argument("--workers", type=int, default=None,
                        help="worker threads (default: $RIESZ_FLOW_THREADS or 1); never changes results")
    common.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    common.add_argument("--out", default=None, help="CSV output path (default stdout)")
    common.add_argument("--summary", default=None,
                        help="JSON summary path (default: --out with .json suffix, else stderr)")

    parser = argparse.ArgumentParser(prog="rieszflow", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"rieszflow {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common], help="finiteness and admissibility report (JSON)")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("riesz-density", parents=[common], help="partial Riesz product density on a grid")
    p.add_argument("--stages", help="comma list of stage indices (default: all)")
    p.add_argument("--grid", default="-3:3:201", help="theta grid a:b:n")
    p.add_argument("--s", type=float, default=None, help="kernel width")
    p.set_defaults(func=cmd_riesz_density)

    p = sub.add_parser("riesz-ft", parents=[common], help="exact Fourier transform of the product measure")
    p.add_argument("--stages")
    p.add_argument("--t-grid", default="0:4:41", help="t grid a:b:n")
    p.add_argument("--s", type=float, default=None)
    p.set_defaults(func=cmd_riesz_ft)

    p = sub.add_parser("tower-check", parents=[common], help="tower autocorrelation against ft_exact")
    p.add_argument("--N", type=int, default=2, help="tower stage")
    p.add_argument("--s", dest="s_width", type=float, default=1.0, help="base interval width")
    p.add_argument("--t-grid", default=None, help="t grid (default 32 points in [0, h_N/2])")
    p.set_defaults(func=cmd_tower_check, s=None)

    p = sub.add_parser("bourgain", parents=[common], help="Bourgain integral over nested prefixes")
    p.add_argument("--stages")
    p.add_argument("--budget", type=int, default=10**4, help="Monte Carlo sample count")
    p.add_argument("--s", type=float, default=None)
    p.set_defaults(func=cmd_bourgain)

    p = sub.add_parser("deviation", parents=[common], help="deviation D_m for one or more m")
    p.add_argument("--m", default="1", help="comma list of stage indices")
    p.add_argument("--budget", type=int, default=10**4)
    p.add_argument("--s", type=float, default=None)
    p.set_defaults(func=cmd_deviation)

    for name, func, text in (("clt", cmd_clt, "samples of the normalized cosine sum"),
                             ("clt-hist", cmd_clt_hist, "histogram of the normalized cosine sum")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--n", type=int, default=0, help="stage index")
        p.add_argument("--A", default="1:2", help="sampling interval a:b")
        p.add_argument("--samples", type=int, default=20000)
        p.add_argument("--s", type=float, default=None)
        if name == "clt-hist":
            p.add_argument("--bins", type=int, default=50)
            p.add_argument("--range", default="-4:4", help="histogram range a:b")
        p.set_defaults(func=func)

    p = sub.add_parser("words", parents=[common], help="signed frequency words and window counts")
    p.add_argument("--n", type=int, default=0)
    p.add_argument("--max-len", type=int, default=4)
    p.add_argument("--omega", type=float, default=None, help="window size (default h_n)")
    p.set_defaults(func=cmd_words)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.workers is None:
        args.workers = default_workers()
    try:
        setup = resolve(args)
        return args.func(args, setup)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (SpecError, ArithmeticError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
