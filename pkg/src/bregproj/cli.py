"""
Command-line front end.

Subcommands: ``div``, ``project``, ``prox``, ``resolve``, ``iterate``,
``certify``, ``measure`` and ``verify``. Every report is JSON (or CSV with
``--format csv``) carrying the library version and the resolved problem;
numbers are printed with 12 significant digits.

Exit codes: 0 success, 1 failed assertion, 2 usage or parse error,
3 infeasible problem.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

import numpy as np

from . import __version__
from .convex_sets import ConvexSet, set_from_dict
from .divergence import bregman, identity_suite
from .embeddings import embedding_from_dict, pullback_project
from .errors import BregprojError, InfeasibleError
from .metrology import (convexity_smoothness_moduli, gradient_check, monotonicity_strength,
                        total_convexity_modulus)
from .operators import (MonotoneMap, certify_quasinonexpansive, cyclic_project, left_prox,
                        left_resolvent, right_prox, right_resolvent)
from .potentials import potential_from_dict
from .projections import left_project, right_project, verify_pythagorean
from .spaces import Space
from .suites import SUITES, run_suite

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_INFEASIBLE = 0, 1, 2, 3
DIGITS = 12


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# parsing helpers


def _json(text, what):
    if text is None:
        return None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{what}: invalid JSON ({exc.msg})") from None


def _point(text, what):
    """``1,0,2`` or a JSON array (nested for matrices; ``[re, im]`` pairs allowed)."""
    if text is None:
        return None
    s = text.strip()
    if s.startswith("["):
        data = _json(s, what)
        arr = np.asarray(data)
        if arr.ndim == 3 and arr.shape[-1] == 2:
            arr = arr[..., 0] + 1j * arr[..., 1]
        return arr.astype(complex) if arr.ndim == 2 else arr.astype(float)
    try:
        return np.array([float(v) for v in s.split(",")])
    except ValueError:
        raise UsageError(f"{what}: expected comma-separated numbers or a JSON array") from None


def _space(args, like=None) -> Space:
    spec = _json(args.space, "--space")
    if spec is None:
        if like is None:
            raise UsageError("--space is required")
        like = np.asarray(like)
        return Space.matrix(like.shape[0]) if like.ndim == 2 else Space.vector(like.size)
    return Space.from_dict(spec)


def _potential(args, space):
    spec = _json(args.potential, "--potential")
    if spec is None:
        raise UsageError("--potential is required")
    return potential_from_dict(spec, space)


def _set(text, what="--set") -> ConvexSet:
    spec = _json(text, what)
    if spec is None:
        raise UsageError(f"{what} is required")
    return set_from_dict(spec)


def _need(value, flag):
    if value is None:
        raise UsageError(f"{flag} is required")
    return value


# ---------------------------------------------------------------------------
# output


def _clean(obj):
    """Make a report JSON-ready with 12 significant digits."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            if np.allclose(obj.imag, 0):
                return _clean(obj.real.tolist())
            return _clean(np.stack([obj.real, obj.imag], axis=-1).tolist())
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if not np.isfinite(v):
            return str(v)
        return float(f"{v:.{DIGITS}g}")
    if isinstance(obj, complex):
        return _clean([obj.real, obj.imag])
    return obj


def _flatten(prefix, obj, out):
    if isinstance(obj, dict):
        for k, v in obj.items():
            _flatten(f"{prefix}.{k}" if prefix else str(k), v, out)
    elif isinstance(obj, list) and obj and any(isinstance(v, (dict, list)) for v in obj):
        for i, v in enumerate(obj):
            _flatten(f"{prefix}[{i}]", v, out)
    elif isinstance(obj, list):
        out.append((prefix, ";".join(str(v) for v in obj)))
    else:
        out.append((prefix, obj))


def _emit(report, args):
    report = _clean({"version": __version__, **report})
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["key", "value"])
        rows = []
        _flatten("", report, rows)
        w.writerows(rows)
        text = buf.getvalue()
    else:
        text = json.dumps(report, indent=2, sort_keys=False) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _resolved(args, **extra):
    keys = ("space", "potential", "embedding", "set", "x", "y", "z", "tol", "seed")
    spec = {k: getattr(args, k, None) for k in keys if getattr(args, k, None) is not None}
    for k in ("space", "potential", "embedding", "set"):
        if k in spec:
            spec[k] = json.loads(spec[k])
    for k in ("x", "y", "z"):
        if k in spec:
            spec[k] = _point(spec[k], "--" + k)
    spec.update(extra)
    return spec


# ---------------------------------------------------------------------------
# commands


def cmd_div(args):
    x = _need(_point(args.x, "--x"), "--x")
    y = _need(_point(args.y, "--y"), "--y")
    emb = embedding_from_dict(_json(args.embedding, "--embedding")) if args.embedding else None
    if emb is not None:
        emb.check_domain(x)
        emb.check_domain(y)
        sp = _space(args, emb.forward(x)) if args.space else emb.target_space(x)
        psi = _potential(args, sp)
        val = bregman(psi, emb.forward(x), emb.forward(y))
    else:
        sp = _space(args, x)
        psi = _potential(args, sp)
        val = bregman(psi, x, y)
    report = {"command": "div", "problem": _resolved(args, resolved_space=sp.to_dict(),
                                                      resolved_potential=psi.to_dict()),
              "value": val.value, "left_in_domain": val.left_in_domain,
              "right_in_interior": val.right_in_interior}
    if args.identities:
        z = _point(args.z, "--z") if args.z else x
        w = _point(args.w, "--w") if args.w else y
        ir = identity_suite(psi, x, y, z, w)
        report["identity_residuals"] = ir._asdict()
    _emit(report, args)
    return EXIT_OK


def cmd_project(args):
    y = _need(_point(args.y, "--y"), "--y")
    K = _set(args.set)
    emb = embedding_from_dict(_json(args.embedding, "--embedding")) if args.embedding else None
    if emb is not None:
        sp = emb.target_space(y) if not args.space else _space(args, y)
        psi = _potential(args, sp)
        res = pullback_project(emb, psi, K, y, side=args.side, tol=args.tol)
    else:
        sp = _space(args, y)
        psi = _potential(args, sp)
        proj = left_project if args.side == "left" else right_project
        res = proj(psi, K, y, tol=args.tol)
    report = {"command": "project", "side": args.side,
              "problem": _resolved(args, resolved_space=sp.to_dict(), resolved_potential=psi.to_dict()),
              "result": res.to_dict()}
    code = EXIT_OK
    if args.verify_pythagorean:
        if emb is not None:
            raise UsageError("--verify-pythagorean is not available with --embedding")
        pr = verify_pythagorean(psi, K, y, args.side, args.verify_pythagorean,
                                rng=np.random.default_rng(args.seed), result=res)
        report["pythagorean"] = {"probes": int(pr.residuals.size), "min_residual": pr.min_residual,
                                 "max_abs_residual": pr.max_abs_residual,
                                 "equality_expected": pr.equality_expected, "passed": pr.passed}
        if not pr.passed:
            code = EXIT_FAIL
    _emit(report, args)
    return code


def _f_spec(args, sp):
    spec = _need(_json(args.f, "--f"), "--f")
    if spec.get("variant") or spec.get("kind") in ("hyperplane", "halfspace", "affine", "box",
                                                   "simplex", "ball", "norm_ball"):
        return set_from_dict(spec)
    return potential_from_dict(spec, sp)


def cmd_prox(args):
    y = _need(_point(args.y, "--y"), "--y")
    sp = _space(args, y)
    psi = _potential(args, sp)
    f = _f_spec(args, sp)
    fn = left_prox if args.side == "left" else right_prox
    res = fn(psi, f, args.lam, y)
    report = {"command": "prox", "side": args.side, "lambda": args.lam,
              "problem": _resolved(args, f=json.loads(args.f)),
              "point": res.point, "residual": res.residual, "iterations": res.iterations,
              "converged": res.converged, "method": res.method}
    _emit(report, args)
    return EXIT_OK


def _operator(args, sp):
    spec = _need(_json(args.operator, "--operator"), "--operator")
    kind = spec.get("kind")
    if kind == "linear":
        return MonotoneMap.linear(sp, spec["M"], spec.get("offset"))
    if kind == "gradient":
        return MonotoneMap.gradient_of(potential_from_dict(spec["potential"], sp))
    if kind == "indicator":
        return MonotoneMap.indicator(set_from_dict(spec["set"]), sp)
    raise UsageError(f"unknown operator kind {kind!r} (linear, gradient, indicator)")


def cmd_resolve(args):
    x = _need(_point(args.x, "--x"), "--x")
    sp = _space(args, x)
    psi = _potential(args, sp)
    T = _operator(args, sp)
    if args.side == "left":
        res = left_resolvent(psi, T, args.lam, x, tol=args.tol or 1e-12)
    else:
        res = right_resolvent(psi, T, args.lam, x, tol=args.tol or 1e-12)
    report = {"command": "resolve", "side": args.side, "lambda": args.lam,
              "problem": _resolved(args, operator=json.loads(args.operator)),
              "point": res.point, "residual": res.residual, "iterations": res.iterations,
              "converged": res.converged, "method": res.method}
    _emit(report, args)
    return EXIT_OK if res.converged else EXIT_FAIL


def cmd_iterate(args):
    y = _need(_point(args.y, "--y"), "--y")
    sp = _space(args, y)
    psi = _potential(args, sp)
    specs = _need(_json(args.sets, "--sets"), "--sets")
    if not isinstance(specs, list) or not specs:
        raise UsageError("--sets must be a non-empty JSON array of set specs")
    sets = [set_from_dict(s) for s in specs]
    target = _point(args.z, "--z") if args.z else None
    tr = cyclic_project(psi, sets, y, mode=args.mode, sweeps=args.sweeps,
                        tol=args.tol or 1e-10, target=target)
    if args.format == "csv":
        text = tr.to_csv()
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    else:
        _emit({"command": "iterate", "mode": args.mode, "problem": _resolved(args, sets=specs),
               "final": tr.final, "sweeps": tr.sweeps, "converged": tr.converged,
               "stop_reason": tr.stop_reason, "divergences": tr.divergences}, args)
    return EXIT_OK if tr.converged else EXIT_FAIL


def cmd_certify(args):
    sp = _space(args)
    psi = _potential(args, sp)
    rng = np.random.default_rng(args.seed)
    if args.set:
        K = _set(args.set)
        fmap = lambda x: left_project(psi, K, x).point  # noqa: E731
        fps = K.sample(rng, psi.sample_interior(rng), 10)
        fps = [p for p in fps if psi.in_interior(p)]
        what = "left_projection"
    elif args.operator:
        T = _operator(args, sp)
        fmap = lambda x: left_resolvent(psi, T, args.lam, x).point  # noqa: E731
        zero = _need(_point(args.z, "--z"), "--z (a zero of the operator)")
        fps = [zero]
        what = "left_resolvent"
    else:
        raise UsageError("certify needs --set or --operator")
    pts = [psi.sample_interior(rng) for _ in range(args.samples)]
    rep = certify_quasinonexpansive(psi, fmap, fps, pts, tol=args.tol or 1e-9)
    _emit({"command": "certify", "map": what, "problem": _resolved(args), "report": vars(rep)}, args)
    return EXIT_OK if rep.left_certified else EXIT_FAIL


def cmd_measure(args):
    rng = np.random.default_rng(args.seed)
    q = args.quantity
    if q == "moduli":
        sp = _space(args)
        out = convexity_smoothness_moduli(sp, seed=args.seed).to_dict()
    elif q == "gradient":
        sp = _space(args)
        psi = _potential(args, sp)
        pts = [psi.sample_interior(rng) for _ in range(args.samples)]
        out = {"max_relative_error": gradient_check(psi, pts), "samples": args.samples}
    elif q == "monotonicity":
        sp = _space(args)
        psi = _potential(args, sp)
        r = vars(monotonicity_strength(psi, args.r, args.samples, seed=args.seed))
        out = r
    elif q == "total-convexity":
        x = _need(_point(args.x, "--x"), "--x")
        sp = _space(args, x)
        psi = _potential(args, sp)
        t = [float(v) for v in args.t.split(",")]
        out = {"t": t, "nu": total_convexity_modulus(psi, x, t, seed=args.seed)}
    else:
        raise UsageError(f"unknown quantity {q!r}")
    _emit({"command": "measure", "quantity": q, "seed": args.seed, "problem": _resolved(args),
           "result": out}, args)
    return EXIT_OK


def cmd_verify(args):
    rep = run_suite(args.suite, seed=args.seed, case=args.case)
    d = rep.to_dict()
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["suite", "check", "value", "relation", "limit", "passed"])
        for c in rep.checks:
            w.writerow([rep.suite, c.name, f"{c.value:.{DIGITS}g}", c.relation,
                        f"{c.limit:.{DIGITS}g}", "pass" if c.passed else "FAIL"])
        text = buf.getvalue()
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    else:
        _emit({"command": "verify", **d}, args)
    if not rep.passed:
        names = ", ".join(c.name for c in rep.failures)
        print(f"verify {rep.suite}: failed checks: {names}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--space", help="space spec (JSON)")
    common.add_argument("--potential", help="potential spec (JSON)")
    common.add_argument("--embedding", help="embedding spec (JSON)")
    common.add_argument("--set", help="constraint set spec (JSON)")
    common.add_argument("--x", help="point (comma list or JSON array)")
    common.add_argument("--y", help="point (comma list or JSON array)")
    common.add_argument("--z", help="point (comma list or JSON array)")
    common.add_argument("--tol", type=float, default=None, help="tolerance")
    common.add_argument("--seed", type=int, default=0, help="random seed")
    common.add_argument("--out", help="write the report to this file")
    common.add_argument("--format", choices=("json", "csv"), default="json")

    p = argparse.ArgumentParser(prog="bregproj", description=__doc__.strip().splitlines()[0])
    p.add_argument("--version", action="version", version=f"bregproj {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("div", parents=[common], help="Bregman divergence D(x, y)")
    s.add_argument("--identities", action="store_true", help="also report identity residuals")
    s.add_argument("--w", help="fourth point for --identities")
    s.set_defaults(func=cmd_div)

    s = sub.add_parser("project", parents=[common], help="left or right projection of --y")
    s.add_argument("--side", choices=("left", "right"), default="left")
    s.add_argument("--verify-pythagorean", type=int, default=0, metavar="N",
                   help="sample N probes of the pythagorean inequality")
    s.set_defaults(func=cmd_project)

    s = sub.add_parser("prox", parents=[common], help="left or right proximal map of --y")
    s.add_argument("--f", required=True, help="function (potential spec) or set spec (JSON)")
    s.add_argument("--lam", type=float, default=1.0)
    s.add_argument("--side", choices=("left", "right"), default="left")
    s.set_defaults(func=cmd_prox)

    s = sub.add_parser("resolve", parents=[common], help="left or right resolvent at --x")
    s.add_argument("--operator", required=True,
                   help='monotone map: {"kind":"linear","M":...}, {"kind":"gradient","potential":...}'
                        ' or {"kind":"indicator","set":...}')
    s.add_argument("--lam", type=float, default=1.0)
    s.add_argument("--side", choices=("left", "right"), default="left")
    s.set_defaults(func=cmd_resolve)

    s = sub.add_parser("iterate", parents=[common], help="cyclic projections from --y")
    s.add_argument("--sets", required=True, help="JSON array of set specs")
    s.add_argument("--mode", choices=("naive_cyclic", "dykstra_hilbert"), default="naive_cyclic")
    s.add_argument("--sweeps", type=int, default=500)
    s.set_defaults(func=cmd_iterate)

    s = sub.add_parser("certify", parents=[common], help="sample quasinonexpansiveness")
    s.add_argument("--operator", help="monotone map spec (resolvent is certified)")
    s.add_argument("--lam", type=float, default=1.0)
    s.add_argument("--samples", type=int, default=200)
    s.set_defaults(func=cmd_certify)

    s = sub.add_parser("measure", parents=[common], help="empirical geometry")
    s.add_argument("quantity", choices=("moduli", "gradient", "monotonicity", "total-convexity"))
    s.add_argument("--samples", type=int, default=200)
    s.add_argument("--r", type=float, default=2.0, help="monotonicity exponent")
    s.add_argument("--t", default="0.1,0.5,1", help="comma list of distances")
    s.set_defaults(func=cmd_measure)

    s = sub.add_parser("verify", parents=[common], help="run a verification suite")
    s.add_argument("suite", choices=sorted(SUITES))
    s.add_argument("--case", help="holder case: " + ", ".join(sorted(
        ["hilbert-halfspace", "lp-left-beta025", "mazur-l1"])))
    s.set_defaults(func=cmd_verify)
    return p


def _apply_threads():
    n = os.environ.get("BREGPROJ_THREADS")
    if n:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, n)


def main(argv=None) -> int:
    _apply_threads()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"bregproj: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InfeasibleError as exc:
        print(f"bregproj: infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (BregprojError, ValueError, KeyError, TypeError) as exc:
        print(f"bregproj: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
