"""Command-line front end.

Every command prints one report: {"schema": "v1", "command", "config", "result"}.
p-adic numbers appear as digit lists (least significant first) with their
valuation and absolute precision.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import warnings

from . import __version__
from .errors import AnticycloError
from .padic import default_precision

SCHEMA_VERSION = "v1"


class UsageError(Exception):
    """Bad input files or arguments detected after parsing."""


def _load(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}") from None


def _is_padic(obj) -> bool:
    return isinstance(obj, dict) and set(obj) == {"p", "val", "unit", "prec"}


def render(obj):
    """Replace p-adic JSON values by digit expansions, recursively."""
    if _is_padic(obj):
        p, unit, val, prec = obj["p"], int(obj["unit"]), obj["val"], obj["prec"]
        if unit == 0:
            return {"p": p, "val": "inf", "prec": prec, "digits": []}
        digits = []
        for _ in range(prec - val):
            digits.append(unit % p)
            unit //= p
        return {"p": p, "val": val, "prec": prec, "digits": digits}
    if isinstance(obj, dict):
        return {k: render(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [render(v) for v in obj]
    if isinstance(obj, float):
        if obj == math.inf:
            return "inf"
        raise TypeError("floating-point value in a report")
    return obj


def _text(obj, indent=0):
    pad = "  " * indent
    lines = []
    if isinstance(obj, dict):
        if set(obj) == {"p", "val", "prec", "digits"}:
            return [pad + _padic_text(obj)]
        for k, v in obj.items():
            if isinstance(v, (dict, list)) and not (isinstance(v, dict) and set(v) == {"p", "val", "prec", "digits"}):
                lines.append(f"{pad}{k}:")
                lines.extend(_text(v, indent + 1))
            else:
                lines.append(f"{pad}{k}: {_scalar_text(v)}")
        return lines
    if isinstance(obj, list):
        if all(not isinstance(v, (dict, list)) for v in obj):
            return [pad + "[" + ", ".join(_scalar_text(v) for v in obj) + "]"]
        for v in obj:
            sub = _text(v, indent + 1)
            lines.append(pad + "-" + sub[0][len(pad) + 1:] if sub else pad + "-")
            lines.extend(sub[1:])
        return lines
    return [pad + _scalar_text(obj)]


def _padic_text(x):
    if x["val"] == "inf":
        return f"0 + O({x['p']}^{x['prec']})"
    digits = " ".join(str(d) for d in x["digits"])
    return f"p^{x['val']} * [{digits}] + O({x['p']}^{x['prec']})"


def _scalar_text(v):
    if isinstance(v, dict) and set(v) == {"p", "val", "prec", "digits"}:
        return _padic_text(v)
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


# -- command implementations ---------------------------------------------------------


def _curve(path):
    from .elliptic import CurveData

    return CurveData.from_json(_load(path))


def cmd_ap_count(args):
    from .elliptic import count_points

    E = _curve(args.curve)
    n, a = count_points(E, args.q, method=args.method)
    return {"q": args.q, "points": n, "a_q": a, "good_reduction": E.has_good_reduction(args.q)}


def cmd_unit_root(args):
    from .padic import unit_root

    alpha = unit_root(args.ap, args.p, args.prec)
    return {"p": args.p, "a_p": args.ap, "alpha": alpha.to_json(), "residue": alpha.residue()}


def cmd_formal_log(args):
    from .elliptic import LocalPoint, formal_log

    E = _curve(args.curve)
    P = LocalPoint.from_rationals(args.p, args.x, args.y, args.prec + args.guard)
    if not P.on_curve(E):
        raise UsageError("point is not on the curve")
    lg = formal_log(E, args.p, P, args.prec)
    return {"p": args.p, "log": lg.to_json(), "valuation": lg.valuation()}


def _group_or_series(obj):
    from .iwasawa import GroupRingElement, IwasawaSeries

    if "deg" in obj:
        return IwasawaSeries.from_json(obj)
    return GroupRingElement.from_json(obj)


def cmd_ordj(args):
    from .iwasawa import leading_image, ord_J

    f = _group_or_series(_load(args.element))
    o = ord_J(f)
    out = {"ord_J": o, "leading": None}
    if o != math.inf:
        out["leading"] = leading_image(f, o).to_json()
    return out


def cmd_derivop(args):
    from .iwasawa import derivative_operator

    D = derivative_operator(args.p, args.n, args.k, -1 if args.m is None else args.m)
    return {"k": args.k, "element": D.to_json(), "gamma_coeffs": list(D.to_gamma())}


def _heights(path, prec):
    from .heights import HeightSystem

    obj = _load(path)
    return HeightSystem.from_json(obj, prec=prec), obj


def cmd_filtration(args):
    from .heights import compute_filtration

    hs, _ = _heights(args.input, args.prec)
    return compute_filtration(hs.H, hs.r, hs.p, guard=args.guard).to_json()


def cmd_regulator(args):
    from .heights import (derived_enhanced_regulator, derived_regulator_p, enhanced_regulator,
                          sqrt_regulator)

    hs, obj = _heights(args.input, args.prec)
    log_y = args.log_y if args.log_y is not None else obj.get("log_y")
    if args.kind == "enhanced":
        if not hs.H:
            raise UsageError("enhanced regulator needs H^(1)")
        return enhanced_regulator(hs.H[0], hs.t_prime if hs.t_prime is not None else 1).to_json()
    if args.kind == "derived":
        return derived_enhanced_regulator(hs).to_json()
    if log_y is None:
        if args.kind == "p-derived":
            raise UsageError("--kind p-derived needs log_y (flag or input key)")
    if args.kind == "sqrt":
        return sqrt_regulator(hs, log_y).to_json()
    return derived_regulator_p(hs, log_y).to_json()


def _heegner(args):
    from .heegner import HeegnerSystem, generate_system

    if args.system:
        return HeegnerSystem.from_json(_load(args.system))
    if args.p is None or args.ap is None:
        raise UsageError("give --system or both --p and --ap")
    return generate_system(args.p, args.ap, args.n_max, args.prec, args.rank, seed=args.seed)


def cmd_heegner_check(args):
    from .heegner import norm_compatible, regularize, theta

    hs = _heegner(args)
    defects = hs.relation_defects()
    relations = [not any(d) for d in defects]
    out = {"p": hs.p, "a_p": hs.a_p, "n_max": hs.n_max, "relations": relations}
    if not all(relations):
        out["norm_compatible"] = None
        return out
    z = regularize(hs, check=False)
    out["norm_compatible"] = norm_compatible(hs, z)
    compat = []
    for n in range(1, hs.n_max):
        a, b = theta(hs, z, n), theta(hs, z, n - 1)
        compat.append(a.project().equals(b))
    out["theta_compatible"] = compat
    return out


def cmd_theta_ordj(args):
    from .heegner import ord_J_distribution, regularize, theta

    hs = _heegner(args)
    z = regularize(hs)
    levels = range(hs.n_max) if args.n is None else [args.n]
    out = []
    for n in levels:
        th = theta(hs, z, n)
        out.append({"n": n, "ord_J": ord_J_distribution(th), "theta": th.to_json()})
    return {"p": hs.p, "levels": out}


def cmd_admissible(args):
    from .bsd import admissible_search

    E = _curve(args.curve)
    restriction = _load(args.restriction) if args.restriction else None
    if isinstance(restriction, dict):
        restriction = restriction["entries"]
    res = admissible_search(E, args.dk, args.p, args.m, args.bound, jobs=args.jobs, restriction=restriction)
    out = res.to_json()
    out["star_condition"] = args.star
    return out


def cmd_bsd_eval(args):
    from .bsd import (BSDInput, bdp_value, evaluate_series_against_prediction, predict_conjecture_BSD,
                      predict_conjecture_BSD_sqrt, theorem_A_value)
    from .heegner import Distribution
    from .iwasawa import IwasawaSeries

    obj = _load(args.input)
    obj.setdefault("prec", args.prec)
    inp = BSDInput.from_json(obj)
    if args.series:
        series = IwasawaSeries.from_json(_load(args.series))
        theta = Distribution.from_json(_load(args.theta)) if args.theta else None
        return evaluate_series_against_prediction(series, inp, theta, kind=args.kind).to_json()
    out = {"rho": inp.rho, "prediction": predict_conjecture_BSD(inp).to_json()}
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        out["sqrt_prediction"] = predict_conjecture_BSD_sqrt(inp).to_json()
    out["warnings"] = [type(w.message).__name__ for w in caught]
    if (inp.a_p - 1) % inp.p:
        out["theorem_A"] = theorem_A_value(inp).to_json()
    if inp.r == 1 and inp.log_y is not None and "log_zK" in obj:
        out["bdp"] = bdp_value(inp.u_K, inp.c_E, inp.a_p, inp.p, obj["log_zK"]).to_json()
    return out


def _matrix(path, prec):
    from .linalg import PMatrix

    return PMatrix.from_json(_load(path), prec=prec)


def cmd_pf(args):
    from .linalg import pfaffian

    return {"pfaffian": pfaffian(_matrix(args.matrix, args.prec)).to_json()}


def cmd_snf(args):
    from .linalg import coker_order, smith_form

    M = _matrix(args.matrix, args.prec)
    S = smith_form(M)
    order = coker_order(M)
    return {"exponents": list(S.exponents), "rank": S.rank, "prec": S.prec,
            "divisors": [d.to_json() for d in S.divisors()], "coker_order": order}


def cmd_fitting(args):
    from .linalg import fitting_ideal

    M = _matrix(args.matrix, args.prec)
    return {"generator": fitting_ideal(M).to_json()}


# -- parser -----------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--prec", type=int, default=None, help="working precision (default 20 or $ANTICYCLO_PRECISION)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=["json", "text"], default="json")
    common.add_argument("--jobs", type=int, default=None)

    parser = argparse.ArgumentParser(prog="anticyclo", description="anticyclotomic p-adic toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(func=func)
        return sp

    sp = add("ap-count", cmd_ap_count, "count points and a_q")
    sp.add_argument("--curve", required=True)
    sp.add_argument("--q", type=int, required=True)
    sp.add_argument("--method", choices=["auto", "scan", "legendre"], default="auto")

    sp = add("unit-root", cmd_unit_root, "unit root of x^2 - a_p x + p")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--ap", type=int, required=True)

    sp = add("formal-log", cmd_formal_log, "log_omega of a local point")
    sp.add_argument("--curve", required=True)
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--x", required=True)
    sp.add_argument("--y", required=True)
    sp.add_argument("--guard", type=int, default=4, help="extra digits carried on the coordinates")

    sp = add("ordj", cmd_ordj, "ord_J and leading image")
    sp.add_argument("--element", required=True)

    sp = add("derivop", cmd_derivop, "derivative operator D^(k)")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--m", type=int, default=None)

    sp = add("filtration", cmd_filtration, "height filtration")
    sp.add_argument("--input", required=True)
    sp.add_argument("--guard", type=int, default=1)

    sp = add("regulator", cmd_regulator, "regulators")
    sp.add_argument("--input", required=True)
    sp.add_argument("--kind", choices=["enhanced", "derived", "sqrt", "p-derived"], required=True)
    sp.add_argument("--log-y", dest="log_y", default=None)

    for name, func in (("heegner-check", cmd_heegner_check), ("theta-ordj", cmd_theta_ordj)):
        sp = add(name, func, "Heegner system checks" if name == "heegner-check" else "ord_J of theta_n")
        sp.add_argument("--system", default=None)
        sp.add_argument("--p", type=int, default=None)
        sp.add_argument("--ap", type=int, default=None)
        sp.add_argument("--n-max", dest="n_max", type=int, default=3)
        sp.add_argument("--rank", type=int, default=1)
        if name == "theta-ordj":
            sp.add_argument("--n", type=int, default=None)

    sp = add("admissible-search", cmd_admissible, "admissible primes")
    sp.add_argument("--curve", required=True)
    sp.add_argument("--dk", type=int, required=True)
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--m", type=int, default=1)
    sp.add_argument("--bound", type=int, required=True)
    sp.add_argument("--restriction", default=None)
    sp.add_argument("--star", action="store_true", help="record that condition (star) holds")

    sp = add("bsd-eval", cmd_bsd_eval, "predictions and series comparison")
    sp.add_argument("--input", required=True)
    sp.add_argument("--series", default=None)
    sp.add_argument("--theta", default=None)
    sp.add_argument("--kind", choices=["L", "sqrt", "F"], default="L")

    for name, func in (("pf", cmd_pf), ("snf", cmd_snf), ("fitting", cmd_fitting)):
        sp = add(name, func, f"{name} of a matrix")
        sp.add_argument("--matrix", required=True)

    return parser


def _config(args) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k not in ("func", "command")}
    return dict(sorted(cfg.items()))


def run(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with status 2 on usage errors
    if args.prec is None:
        args.prec = default_precision()
    if args.prec < 1:
        parser.error("--prec must be positive")
    try:
        result = args.func(args)
    except UsageError as exc:
        print(f"anticyclo {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (AnticycloError, ArithmeticError) as exc:
        print(f"anticyclo {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except (ValueError, KeyError, TypeError) as exc:
        print(f"anticyclo {args.command}: invalid input: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    report = {"schema": SCHEMA_VERSION, "command": args.command, "config": _config(args), "result": render(result)}
    if args.format == "json":
        out.write(json.dumps(report, indent=2, sort_keys=False) + "\n")
    else:
        out.write("\n".join(_text(report)) + "\n")
    return 0


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
