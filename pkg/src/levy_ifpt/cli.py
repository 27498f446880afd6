"""Command-line front end: ``levy-ifpt <command> ...``.

JSON goes to stdout (or ``--out``), diagnostics to stderr. Exit status is 0
on success, 2 for invalid input and 3 for numerical failures.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from .cva import cva_value, load_spec, mc_cva
from .errors import NumericalError, ValidationError
from .ifpt import frailty_from_dict, simulate_frailty, solve_frailty, solve_rifpt
from .levy_model import load_model, validate
from .mc_engine import McParams, simulate_time_changed_fp
from .qid import build_qid
from .spectral import cramer_lundberg_roots, lambda_star
from .survival import curve_from_dict
from .wiener_hopf import psi_minus, psi_plus

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3


def fmt(x: float) -> str:
    return "%.17g" % x


def _encode(obj) -> str:
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return fmt(x) if math.isfinite(x) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_encode(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_encode(v) for v in obj) + "]"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps(obj) -> str:
    """JSON with every float written to 17 significant digits."""
    return _encode(obj) + "\n"


def csv_text(header: list[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def _complex(z) -> float | list[float]:
    z = complex(z)
    return z.real if z.imag == 0 else [z.real, z.imag]


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from None


def _model(path):
    try:
        model = load_model(path)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from None
    report = validate(model)
    if not report.ok:
        raise ValidationError("; ".join(report.violations))
    return model


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# -- commands -----------------------------------------------------------------


def cmd_roots(args) -> str:
    model = _model(args.model)
    rs = cramer_lundberg_roots(model, complex(args.q.replace(" ", "")))
    out = {
        "q": _complex(rs.q),
        "plus_roots": [_complex(r) for r in rs.plus_roots],
        "minus_roots": [_complex(r) for r in rs.minus_roots],
    }
    if rs.phi_bar is not None:
        out["phi_bar"] = rs.phi_bar
    return dumps(out)


def cmd_wh(args) -> str:
    model = _model(args.model)
    q = complex(args.q.replace(" ", ""))
    theta = complex(args.theta.replace(" ", ""))
    plus = complex(psi_plus(model, q, theta))
    minus = complex(psi_minus(model, q, theta))
    return dumps({
        "q": _complex(q),
        "theta": _complex(theta),
        "psi_plus": [plus.real, plus.imag],
        "psi_minus": [minus.real, minus.imag],
    })


def _lambda(args, model) -> float:
    if args.lambda_frac is not None:
        return args.lambda_frac * lambda_star(model)
    return args.lam


def cmd_qid(args) -> str:
    model = _model(args.model)
    dist = build_qid(model, _lambda(args, model))
    if args.density_csv:
        x = np.linspace(0.0, dist.x_max(1e-10), args.points)
        rows = zip(x, dist.density(x), dist.cdf(x))
        _emit(csv_text(["x", "density", "cdf"], rows), args.density_csv)
    return dumps(dist.to_dict())


def _curve(path):
    return curve_from_dict(_load_json(path))


def cmd_solve(args) -> str:
    model = _model(args.model)
    curve = _curve(args.curve)
    sol = solve_rifpt(model, curve, lam=args.lam, normalize=args.normalize)
    if args.timechange_csv:
        t = np.linspace(0.0, curve.horizon, args.points)
        _emit(csv_text(["t", "I"], zip(t, sol.time_change(t))), args.timechange_csv)
    return dumps(sol.to_dict(n_samples=args.points))


def cmd_validate(args) -> str:
    model = _model(args.model)
    curve = _curve(args.curve)
    sol = solve_rifpt(model, curve, lam=args.lam)
    params = McParams(args.paths, curve.horizon, args.seed)
    fp = simulate_time_changed_fp(sol, params, workers=args.workers)
    grid = np.linspace(curve.horizon / args.points, curve.horizon, args.points)
    est = fp.survival(grid)
    rows = zip(grid, curve.survival(grid), est.survival, est.se)
    return csv_text(["t", "target_survival", "mc_survival", "se"], rows)


def cmd_frailty(args) -> str:
    spec = frailty_from_dict(_load_json(args.spec))
    sol = solve_frailty(spec)
    horizon = max(n.curve.horizon for s in spec.states for n in s.names)
    taus = simulate_frailty(sol, McParams(args.paths, horizon, args.seed), workers=args.workers)
    axes = [np.linspace(horizon / args.points, horizon, args.points)] * spec.dim
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, spec.dim)
    target = sol.joint_survival(mesh)
    rows = []
    for pt, tgt in zip(mesh, target):
        s = float(np.mean(np.all(taus > pt, axis=1)))
        rows.append([*pt, tgt, s, math.sqrt(s * (1 - s) / args.paths)])
    header = [f"t{i + 1}" for i in range(spec.dim)] + ["target_survival", "mc_survival", "se"]
    return csv_text(header, rows)


def cmd_cva(args) -> str:
    spec = load_spec(args.spec)
    res = cva_value(spec, workers=args.workers)
    out = res.to_dict()
    if args.mc_check:
        mc = mc_cva(spec, args.paths, args.seed, workers=args.workers)
        out["mc"] = {"pi": mc.pi, "se": mc.se, "call": mc.call, "call_se": mc.call_se,
                     "paths": mc.paths}
    return dumps(out)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="levy-ifpt", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write the main output here instead of stdout")
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("--workers", type=int, default=None,
                        help="worker threads (default: $LEVY_IFPT_THREADS or 1)")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("roots", parents=[common], help="Cramer-Lundberg roots at level q")
    s.add_argument("--model", required=True)
    s.add_argument("--q", required=True)
    s.set_defaults(func=cmd_roots)

    s = sub.add_parser("wh", parents=[common], help="Wiener-Hopf factors at (q, theta)")
    s.add_argument("--model", required=True)
    s.add_argument("--q", required=True)
    s.add_argument("--theta", required=True)
    s.set_defaults(func=cmd_wh)

    s = sub.add_parser("qid", parents=[common], help="quasi-invariant initial law")
    s.add_argument("--model", required=True)
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--lambda", dest="lam", type=float)
    g.add_argument("--lambda-frac", type=float, help="lambda as a fraction of lambda*")
    s.add_argument("--density-csv", help="also write x,density,cdf here")
    s.add_argument("--points", type=int, default=201)
    s.set_defaults(func=cmd_qid)

    s = sub.add_parser("solve", parents=[common], help="initial law and clock for a curve")
    s.add_argument("--model", required=True)
    s.add_argument("--curve", required=True)
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--lambda", dest="lam", type=float)
    g.add_argument("--normalize", type=float, metavar="T", help="choose lambda so that I(T) = T")
    s.add_argument("--timechange-csv", help="also write t,I samples here")
    s.add_argument("--points", type=int, default=101)
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("validate", parents=[common], help="MC survival of the time-changed passage")
    s.add_argument("--model", required=True)
    s.add_argument("--curve", required=True)
    s.add_argument("--lambda", dest="lam", type=float, required=True)
    s.add_argument("--paths", type=int, default=100_000)
    s.add_argument("--points", type=int, default=20)
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("frailty", parents=[common], help="MC joint survival under a frailty mix")
    s.add_argument("--spec", required=True)
    s.add_argument("--paths", type=int, default=100_000)
    s.add_argument("--points", type=int, default=5)
    s.set_defaults(func=cmd_frailty)

    s = sub.add_parser("cva", parents=[common], help="CVA of a vulnerable call")
    s.add_argument("--spec", required=True)
    s.add_argument("--paths", type=int, default=1_000_000)
    s.add_argument("--mc-check", action="store_true")
    s.set_defaults(func=cmd_cva)
    return p


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = args.func(args)
    except ValidationError as exc:
        print(f"levy-ifpt: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericalError as exc:
        print(f"levy-ifpt: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (OSError, ValueError, KeyError, TypeError) as exc:
        print(f"levy-ifpt: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    _emit(text, args.out)
    return EXIT_OK


def main() -> None:
    sys.exit(run())
