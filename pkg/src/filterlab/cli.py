"""Command-line front end: ``filterlab <command> ...``.

Exit codes: 0 when every requested verdict holds (or every experiment
passes), 2 when any fails or an experiment is rejected, 3 when nothing fails
but something is inconclusive, 1 for usage, configuration and input errors.
"""

import argparse
import sys

import numpy as np
import tomli

from . import __version__
from .config import load_config
from .converge import (
    DEFAULT_EPS,
    DEFAULT_HORIZON,
    cluster_implies_limit_audit,
    cluster_point_check,
    f_cauchy_check,
    f_limit_check,
    parse_sequence,
)
from .errors import AuditSkipped, ConfigError, FilterLabError
from .filters import includes, parse_filter, standard_testbed
from .gallery import EXPERIMENTS, list_experiments, run_all
from .modulus import CATALOG, builtin_modulus, modulus_from_expr, validate_modulus
from .natset import DENSITY_TOL, DENSITY_WINDOW, f_density, has_f_density_zero, parse_set
from .report import FORMATS, emit_report, envelope, write_report
from .spaces import DEFAULT_DIM, pairing, parse_functional, parse_space, parse_vector, seminorm
from .verdict import FAILS, INCONCLUSIVE

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_FAILS = 2
EXIT_INCONCLUSIVE = 3


def exit_code(outcomes):
    """Map verdict outcomes / experiment statuses to the tri-state exit code."""
    outcomes = set(outcomes)
    if outcomes & {FAILS, "fail", "rejected"}:
        return EXIT_FAILS
    if INCONCLUSIVE in outcomes:
        return EXIT_INCONCLUSIVE
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    # usage errors exit 1 so that 2 keeps meaning "a verdict fails"
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _count(text):
    """Integers written as ``1000000``, ``1e6`` or ``10**6``."""
    try:
        if "**" in text:
            base, exp = text.split("**")
            value = int(base) ** int(exp)
        else:
            value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value != int(value) or value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return int(value)


def _common():
    p = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    g = p.add_argument_group("global options")
    g.add_argument("--config", help="TOML run configuration")
    g.add_argument(
        "--horizon",
        type=_count,
        help=f"evaluation horizon; defaults: density uses the set's own (1e8 closed-form counts, 1e6 scans), "
        f"filter and converge use {DEFAULT_HORIZON:.0e}, gallery uses each experiment's default",
    )
    g.add_argument("--dim", type=_count, help=f"truncation dimension (default {DEFAULT_DIM})")
    g.add_argument(
        "--tolerance",
        type=float,
        help=f"density tolerance (default {DENSITY_TOL:g}); gallery: overrides each experiment's tolerance",
    )
    g.add_argument("--jobs", type=int, help="worker processes for gallery run-all (default 1)")
    g.add_argument("--seed", type=int, help="seed for randomized inputs (default 0)")
    g.add_argument("--report", help="output path; '-' is standard output (default)")
    g.add_argument("--format", choices=FORMATS, help="report format (default json)")
    return p


def build_parser():
    common = _common()
    parser = _Parser(
        prog="filterlab",
        description="Filters on the natural numbers, f-densities and filter convergence at desk scale.",
        parents=[common],
    )
    parser.add_argument("--version", action="version", version=f"filterlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    mod = sub.add_parser("modulus", help="validate modulus functions", parents=[common])
    msub = mod.add_subparsers(dest="action", required=True, parser_class=_Parser)
    v = msub.add_parser("validate", help="check the modulus axioms on the validation grid", parents=[common])
    v.add_argument("--name", help=f"catalog modulus: {', '.join(CATALOG)}, power(p)")
    v.add_argument("--expr", help="expression in t, e.g. 'log(1 + t)'")
    v.add_argument("--bounded", action="store_true", help="do not claim unboundedness for --expr")
    msub.add_parser("list", help="list catalog moduli", parents=[common])

    den = sub.add_parser(
        "density",
        help="estimate the f-density of a set",
        parents=[common],
        description=f"Tail window {DENSITY_WINDOW:g} of the checkpoints; converged when the tail spread is at most the tolerance.",
    )
    den.add_argument("--set", required=True, dest="set_text", help="set DSL or a name from [sets]")
    den.add_argument("--modulus", help="catalog modulus (default: config [modulus], else identity)")
    den.add_argument("--csv", help="also write the (n, ratio) samples as CSV to this path")
    den.add_argument("--zero", action="store_true", help="report the density-zero verdict instead of the estimate")

    fil = sub.add_parser("filter", help="membership, stationarity and inclusion", parents=[common])
    fsub = fil.add_subparsers(dest="action", required=True, parser_class=_Parser)
    for name, help_text in (("member", "is the set a member?"), ("stationary", "does the set meet every member?")):
        a = fsub.add_parser(name, help=help_text, parents=[common])
        a.add_argument("--filter", required=True, dest="filter_text", help="filter DSL or a name from [filters]")
        a.add_argument("--set", required=True, dest="set_text", help="set DSL or a name from [sets]")
    inc = fsub.add_parser("includes", help="testbed evidence for F1 ⊆ F2", parents=[common])
    inc.add_argument("--f1", required=True)
    inc.add_argument("--f2", required=True)
    inc.add_argument("--sets", nargs="*", help="testbed sets (default: the standard 12-set testbed)")

    sp = sub.add_parser("space", help="pairings and seminorms", parents=[common])
    ssub = sp.add_subparsers(dest="action", required=True, parser_class=_Parser)
    pr = ssub.add_parser("pair", help="⟨x, y⟩ for x in an l∞ model and y in an l1 model", parents=[common])
    pr.add_argument("--x", required=True, help="vector or functional DSL")
    pr.add_argument("--y", required=True, help="vector DSL")
    sn = ssub.add_parser("seminorm", help="p_label(v)", parents=[common])
    sn.add_argument("--space", required=True)
    sn.add_argument("--label", default="norm")
    sn.add_argument("--v", required=True, help="vector DSL")

    cv = sub.add_parser("converge", help="F-limits, cluster points and Cauchy checks", parents=[common])
    csub = cv.add_subparsers(dest="action", required=True, parser_class=_Parser)
    for name in ("limit", "cluster", "cauchy", "audit"):
        a = csub.add_parser(name, parents=[common], help=f"{name} check along a filter")
        a.add_argument("--seq", required=True, help="sequence DSL or a name from [sequences]")
        a.add_argument("--filter", required=True, dest="filter_text")
        a.add_argument("--space", default="scalar", help="space DSL or a name from [spaces] (default scalar)")
        a.add_argument("--eps", type=float, nargs="+", help=f"ε-grid (default {' '.join(f'{e:g}' for e in DEFAULT_EPS)})")
        if name != "cauchy":
            a.add_argument("--candidate", required=True, help="vector DSL")

    gal = sub.add_parser("gallery", help="reproducible experiments", parents=[common])
    gsub = gal.add_subparsers(dest="action", required=True, parser_class=_Parser)
    gsub.add_parser("list", help="list experiments", parents=[common])
    r = gsub.add_parser("run", help="run one experiment", parents=[common])
    r.add_argument("name", choices=list(EXPERIMENTS))
    r.add_argument("--param", action="append", default=[], metavar="KEY=VALUE", help="parameter override (TOML value)")
    r.add_argument("--timing", action="store_true", help="add wall time (makes reports non-reproducible)")
    ra = gsub.add_parser("run-all", help="run every experiment", parents=[common])
    ra.add_argument("--timing", action="store_true", help="add wall time (makes reports non-reproducible)")
    return parser


# ---------------------------------------------------------------------------
# helpers


class _Settings:
    """Command line over config over built-in defaults."""

    def __init__(self, args):
        self.args = args
        self.cfg = load_config(args.config) if getattr(args, "config", None) else None

    def get(self, name, default=None):
        if hasattr(self.args, name):
            return getattr(self.args, name)
        if self.cfg is not None and getattr(self.cfg, name, None) is not None:
            return getattr(self.cfg, name)
        return default

    def named(self, section, text):
        table = getattr(self.cfg, section, {}) if self.cfg else {}
        return table.get(text, text)

    def output(self):
        out = self.cfg.output if self.cfg else {}
        return self.get("report", out.get("report", "-")), self.get("format", out.get("format", "json"))


def _emit(settings, kind, payload):
    path, fmt = settings.output()
    write_report(emit_report(envelope(kind, payload), fmt), path)


def _modulus(settings, name):
    if name:
        return builtin_modulus(name)
    if settings.cfg is not None and settings.cfg.modulus_function() is not None:
        return settings.cfg.modulus_function()
    return builtin_modulus("identity")


def _param_value(text):
    try:
        return tomli.loads(f"v = {text}")["v"]
    except tomli.TOMLDecodeError:
        return text


# ---------------------------------------------------------------------------
# commands


def _cmd_modulus(args, st):
    if args.action == "list":
        _emit(st, "modulus-list", {"catalog": list(CATALOG) + ["power(p)"]})
        return EXIT_OK
    if bool(getattr(args, "name", None)) == bool(getattr(args, "expr", None)):
        raise FilterLabError("give exactly one of --name and --expr")
    if args.name:
        f = builtin_modulus(args.name)
    else:
        f = modulus_from_expr(args.expr, is_unbounded=not args.bounded)
    rep = validate_modulus(f)
    _emit(st, "modulus-validation", rep.to_dict())
    outcomes = ["fails" if a.status == "fails" else INCONCLUSIVE if a.status.startswith("inconclusive") else "holds" for a in rep.axioms.values()]
    return exit_code(outcomes)


def _cmd_density(args, st):
    A = parse_set(st.named("sets", args.set_text))
    f = _modulus(st, args.modulus)
    h = st.get("horizon")
    tol = st.get("tolerance", DENSITY_TOL)
    if args.zero:
        v = has_f_density_zero(A, f, h, tol)
        _emit(st, "density-zero", v.to_dict())
        return exit_code([v.outcome])
    est = f_density(A, f, h, tol=tol)
    _emit(st, "density", est.to_dict())
    if args.csv:
        write_report(emit_report(envelope("density-samples", est.to_dict()), "csv"), args.csv)
    return EXIT_INCONCLUSIVE if est.status == "inconclusive" else EXIT_OK


def _with_tol(F, tol):
    from .gallery import _with_tolerance

    return _with_tolerance(F, tol) if tol is not None else F


def _cmd_filter(args, st):
    h = st.get("horizon", DEFAULT_HORIZON)
    tol = st.get("tolerance")
    if args.action == "includes":
        F1 = _with_tol(parse_filter(st.named("filters", args.f1)), tol)
        F2 = _with_tol(parse_filter(st.named("filters", args.f2)), tol)
        sets = [parse_set(st.named("sets", s)) for s in args.sets] if getattr(args, "sets", None) else standard_testbed()
        v = includes(F1, F2, sets, h)
    else:
        F = _with_tol(parse_filter(st.named("filters", args.filter_text)), tol)
        A = parse_set(st.named("sets", args.set_text))
        v = F.member(A, h) if args.action == "member" else F.is_stationary(A, h)
    _emit(st, f"filter-{args.action}", v.to_dict())
    return exit_code([v.outcome])


def _cmd_space(args, st):
    dim = st.get("dim", DEFAULT_DIM)
    if args.action == "pair":
        y = parse_vector(args.y, dim)
        try:
            x = parse_vector(args.x, dim)
        except FilterLabError:
            x = parse_functional(args.x)
        _emit(st, "pairing", {"x": args.x, "y": args.y, "dim": dim, "value": pairing(x, y)})
    else:
        space = parse_space(st.named("spaces", args.space), dim)
        v = parse_vector(args.v, getattr(space, "dim", dim) or dim)
        _emit(st, "seminorm", {"space": str(space), "label": args.label, "value": seminorm(space, args.label, v)})
    return EXIT_OK


def _cmd_converge(args, st):
    dim = st.get("dim", DEFAULT_DIM)
    h = st.get("horizon", DEFAULT_HORIZON)
    space = parse_space(st.named("spaces", args.space), dim)
    x = parse_sequence(st.named("sequences", args.seq), space)
    F = _with_tol(parse_filter(st.named("filters", args.filter_text)), st.get("tolerance"))
    eps = tuple(args.eps) if getattr(args, "eps", None) else None
    if args.action == "cauchy":
        v = f_cauchy_check(x, F, eps, h)
    else:
        a = parse_vector(args.candidate, getattr(space, "dim", dim) or dim) if not hasattr(space, "keys") else parse_vector(args.candidate)
        if args.action == "limit":
            v = f_limit_check(x, a, F, eps, h)
        elif args.action == "cluster":
            v = cluster_point_check(x, a, F, eps, h)
        else:
            try:
                v = cluster_implies_limit_audit(x, a, F, eps, h)
            except AuditSkipped as exc:
                _emit(st, "converge-audit", {"outcome": INCONCLUSIVE, "diagnostics": {"skipped": str(exc), "preconditions": exc.preconditions}})
                return EXIT_INCONCLUSIVE
    _emit(st, f"converge-{args.action}", v.to_dict())
    return exit_code([v.outcome])


def _gallery_params(st, name, extra=()):
    params = dict(st.cfg.gallery.get(name, {})) if st.cfg else {}
    defaults = EXPERIMENTS[name].defaults
    for key in ("horizon", "dim", "tolerance"):
        if hasattr(st.args, key) and key in defaults:
            params[key] = getattr(st.args, key)
    for item in extra:
        key, sep, value = item.partition("=")
        if not sep:
            raise FilterLabError(f"--param expects KEY=VALUE, got {item!r}")
        key = key.strip()
        if key not in defaults and key != "seed":
            raise FilterLabError(f"unknown parameter {key!r} for {name}; known: {', '.join(defaults)}")
        params[key] = _param_value(value.strip())
    return params


def _cmd_gallery(args, st):
    if args.action == "list":
        rows = [{"name": n, "expected": e, "summary": s} for n, e, s in list_experiments()]
        _emit(st, "gallery-list", rows)
        return EXIT_OK
    seed = st.get("seed", 0)
    timing = getattr(args, "timing", False)
    if args.action == "run":
        reports = run_all(seed, 1, {args.name: _gallery_params(st, args.name, args.param)}, [args.name], timing)
        _emit(st, "gallery-run", reports[0])
    else:
        params = {n: _gallery_params(st, n) for n in EXPERIMENTS}
        reports = run_all(seed, st.get("jobs", 1), params, None, timing)
        _emit(st, "gallery-run-all", reports)
    return exit_code(r["status"] for r in reports)


_COMMANDS = {
    "modulus": _cmd_modulus,
    "density": _cmd_density,
    "filter": _cmd_filter,
    "space": _cmd_space,
    "converge": _cmd_converge,
    "gallery": _cmd_gallery,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        st = _Settings(args)
        np.seterr(all="ignore")
        return _COMMANDS[args.command](args, st)
    except ConfigError as exc:
        for line, msg in exc.errors:
            print(f"config error{f' (line {line})' if line else ''}: {msg}", file=sys.stderr)
        return EXIT_ERROR
    except (FilterLabError, ValueError, KeyError) as exc:
        print(f"filterlab: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
