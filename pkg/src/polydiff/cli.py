"""Command-line front end.

Every subcommand writes <out>/<subcommand>.json (plus CSV or JSONL where
relevant) and prints a short summary.  Exit status: 0 success, 1 validation
failure, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import csv
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import arcs, blowup, certify, driver, expsum, extremal, spectrum
from .auxpoly import AuxiliaryFamily
from .config import ConfigError, RunConfig, load_config
from .poly import PolySyntaxError, as_poly
from .serialize import dumps, envelope, write_json

EXIT_OK, EXIT_VALIDATION, EXIT_USAGE = 0, 1, 2


class ValidationError(RuntimeError):
    """Raised by a subcommand when its own verification fails."""

    def __init__(self, message: str, result=None):
        super().__init__(message)
        self.result = result


# -- argument helpers --------------------------------------------------------------

def rational(text: str) -> Fraction:
    """Exact 'a/q' or integer; decimals are accepted but are inexact binary floats."""
    try:
        if "/" in text or "." not in text and "e" not in text.lower():
            return Fraction(text.strip())
        return Fraction(float(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from exc


def int_list(text: str) -> list[int]:
    return [int(x) for x in text.replace(";", ",").split(",") if x.strip()]


def read_set_file(path) -> list[int]:
    out = []
    with Path(path).open() as fh:
        for row in csv.reader(fh):
            for cell in row:
                cell = cell.strip()
                if cell and cell.lstrip("-").isdigit():
                    out.append(int(cell))
    return out


def build_set(args, cfg: RunConfig) -> spectrum.SetInWindow:
    """The input set from --elements, --set-file, --residues q:r1,r2 or --random DENSITY."""
    N = args.N
    if N is None or N < 1:
        raise ValueError("--N must be a positive integer")
    if N > cfg.max_N:
        raise ValueError(f"N = {N} exceeds max_N = {cfg.max_N}")
    if args.elements is not None:
        els = int_list(args.elements)
    elif args.set_file is not None:
        els = read_set_file(args.set_file)
    elif args.residues is not None:
        q, _, rs = args.residues.partition(":")
        q, rs = int(q), set(int_list(rs))
        els = [x for x in range(1, N + 1) if x % q in rs]
    elif args.random is not None:
        rng = np.random.default_rng(cfg.seed)
        els = (np.flatnonzero(rng.random(N) < args.random) + 1).tolist()
    else:
        raise ValueError("give one of --elements, --set-file, --residues, --random")
    return spectrum.SetInWindow(N, tuple(els))


def add_set_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--N", type=int, required=True, help="window [1, N]")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--elements", help="comma-separated elements")
    g.add_argument("--set-file", help="file of integers (one per line or CSV)")
    g.add_argument("--residues", help="q:r1,r2,... selects x in [1, N] with x mod q in {r_i}")
    g.add_argument("--random", type=float, help="random subset of this density (uses the seed)")


def polys_of(args) -> list:
    return [as_poly(h) for h in args.poly]


# -- subcommands --------------------------------------------------------------------

def cmd_certify(args, cfg):
    h = as_poly(args.polynomial)
    cert = certify.certify_intersective(h, args.pmax, args.mode, workers=cfg.threads)
    return cert.to_json(), [f"{h}: {cert.status} (mode {args.mode}, primes <= {args.pmax})"]


def cmd_profile(args, cfg):
    part = tuple(int_list(args.partition)) if args.partition else None
    prof = certify.compute_profile(polys_of(args), part)
    return prof.to_json(), [f"D = {prof.D}, D' = {prof.D_prime}, partition {prof.l1},{prof.l2},{prof.l3}"]


def cmd_aux(args, cfg):
    polys = polys_of(args)
    fam = AuxiliaryFamily(certify.build_root_system(polys, args.mode))
    rows, failures = [], []
    for i in range(len(polys)):
        for d in range(1, args.dmax + 1):
            try:
                e = fam.entry(i, d)
            except certify.UncertifiedPrime as exc:
                failures.append({"i": i, "d": d, "error": f"no certified root at p = {exc.p}"})
                continue
            bad = fam.check_invariants(i, d)
            cb = fam.check_content_bound(i, d)
            if not cb["ok"]:
                bad.append("content bound")
            row = e.to_json()
            row["content"] = cb["lhs"]
            row["content_bound"] = cb["rhs"]
            rows.append(row)
            if bad:
                failures.append({"i": i, "d": d, "error": "; ".join(bad)})
    hard = [f for f in failures if not f["error"].startswith("no certified root")]
    res = {"polys": [str(h) for h in polys], "mode": args.mode, "dmax": args.dmax, "rows": rows,
           "failures": failures}
    lines = [f"{len(rows)} auxiliary polynomials, {len(hard)} invariant failures, "
             f"{len(failures) - len(hard)} skipped (uncertified prime)"]
    if hard:
        raise ValidationError(lines[0], res)
    return res, lines


def cmd_gauss(args, cfg):
    g = as_poly(args.poly)
    aq = args.aq
    if args.kind == "complete":
        v = expsum.gauss_complete(g, aq)
    elif args.kind == "unit":
        v = expsum.gauss_unit(g, aq)
    elif args.kind == "sieved":
        v = expsum.gauss_sieved(g, aq, args.W)
    else:
        v = expsum.gauss_shifted_prime(g, aq, args.d, args.r)
    res = {"poly": str(g), "aq": str(aq), "kind": args.kind, "value": v, "abs": abs(v)}
    return res, [f"G = {v.real:.12g} {v.imag:+.12g}i, |G| = {abs(v):.12g}"]


def cmd_weyl(args, cfg):
    g = as_poly(args.poly)
    s = expsum.weyl_sum(g, args.alpha, args.M, args.variant, beta=args.beta, W=args.W, L=args.L,
                        d=args.d, r=args.r, max_terms=cfg.max_terms)
    v = s.value
    res = {"poly": str(g), "alpha": str(args.alpha), "beta": args.beta, "M": args.M,
           "variant": args.variant, "value": v, "abs": abs(v), "terms": s.terms,
           "error_budget": s.absolute_error_budget}
    return res, [f"S = {v.real:.12g} {v.imag:+.12g}i over {s.terms} terms"]


def cmd_asym(args, cfg):
    g = as_poly(args.poly)
    rep = expsum.verify_asymptotic(g, args.aq, args.beta, args.M, args.variant, Y=args.Y, d=args.d,
                                   r=args.r, chi_r=args.chi, rho=args.rho)
    res = rep.to_json()
    res.update({"poly": str(g), "aq": str(args.aq), "beta": args.beta, "M": args.M,
                "envelope_constant": expsum.envelope_constant(rep, args.aq.denominator, g.coefficient_l1(),
                                                              args.M, g.degree, args.beta)})
    return res, [f"error {rep.error:.6g}, bound {rep.stated_bound:.6g}, measured constant "
                 f"{rep.measured_constant:.6g}"]


def cmd_arcs(args, cfg):
    if (args.K is None) == (args.gamma is None):
        raise ValueError("give exactly one of --K or --gamma")
    if args.N is not None and args.N > cfg.max_N:
        raise ValueError(f"N = {args.N} exceeds max_N = {cfg.max_N}")
    try:
        dec = arcs.decompose(args.N, args.K, args.Q, args.gamma, raise_on_overlap=True)
    except arcs.OverlapDetected as exc:
        raise ValidationError(str(exc), exc.decomposition.to_json() if exc.decomposition else None)
    res = dec.to_json()
    extra = {}
    if args.N is not None:
        path = Path(cfg.output_dir) / "arcs.csv"
        path.parent.mkdir(parents=True, exist_ok=True)
        dec.write_csv(path)
        extra["csv"] = path.name
    res.update(extra)
    c = res["counts"]
    return res, [f"Zero {c['Zero']}, Major {c['Major']}, Minor {c['Minor']}; disjoint {dec.disjoint}"]


def cmd_spectrum(args, cfg):
    A = build_set(args, cfg)
    S = spectrum.balanced_dft(A, args.refine) if args.balanced else spectrum.set_dft(A, args.refine)
    path = Path(cfg.output_dir) / "spectrum.csv"
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "real", "imag", "abs"])
        for t, re, im, ab in S.to_rows():
            w.writerow([t, format(re, ".17g"), format(im, ".17g"), format(ab, ".17g")])
    res = {"N": A.N, "size": A.size, "grid": S.grid, "balanced": S.balanced, "delta": S.delta,
           "parseval": S.parseval, "expected": S.expected, "parseval_ok": S.parseval_ok, "csv": path.name}
    if args.Q:
        width = args.K if args.K is not None else Fraction(1, 4 * args.Q * args.Q)
        res["arc_masses"] = spectrum.arc_partition_masses(S, width, args.Q)
    if not S.parseval_ok:
        raise ValidationError("Parseval check failed", res)
    return res, [f"|A| = {A.size}, Parseval {S.parseval:.12g} vs {S.expected:.12g}"]


def cmd_increment(args, cfg):
    A = build_set(args, cfg)
    theta = args.theta if args.theta is not None else spectrum.measure_theta(A, args.q, args.gamma, cfg.refine)
    try:
        inc = spectrum.density_increment(A, args.q, args.gamma, theta, cfg.c_len)
    except spectrum.NoIncrementFound as exc:
        res = {"found": False, "theta": theta, "target": float(exc.target)}
        return res, [f"no progression reaches density {float(exc.target):.6g} (theta {theta:.6g})"]
    res = inc.to_json()
    res["found"] = True
    return res, [f"progression x + l*{inc.step}, l <= {inc.length}, x = {inc.x}: density "
                 f"{float(inc.density):.6g} >= {float(inc.target):.6g}"]


def _driver_set(args, cfg, polys):
    if args.greedy:
        F = extremal.forbidden_differences(polys, args.N, args.mode)
        return spectrum.SetInWindow(args.N, extremal.greedy_avoiding(F).witness)
    return build_set(args, cfg)


def cmd_driver(args, cfg):
    polys = polys_of(args)
    A = _driver_set(args, cfg, polys)
    dc = driver.DriverConfig(c0=cfg.c0, eps=cfg.eps, Q_max=cfg.Q_max, n_min=cfg.n_min,
                             max_steps=cfg.max_steps, c_len=cfg.c_len, refine=cfg.refine)
    trace = driver.sarkozy_driver(A, polys, args.N, args.mode, dc)
    path = Path(cfg.output_dir) / "driver.jsonl"
    path.parent.mkdir(parents=True, exist_ok=True)
    trace.write(path)
    bad = trace.invariant_violations()
    res = trace.to_json()
    res["invariant_violations"] = bad
    res["jsonl"] = path.name
    lines = [f"status {trace.status} after {len(trace.steps) - 1} steps; "
             f"{len(bad)} invariant violations"]
    if trace.status == "validation_failed" or bad:
        raise ValidationError(lines[0], res)
    return res, lines


def cmd_blowup(args, cfg):
    B = build_set(args, cfg)
    bc = blowup.BlowupConfig(c0=cfg.c0, eps=cfg.eps, c1=cfg.c1 or None)
    r = blowup.blowup_step(B, int_list(args.P), args.U, args.V, args.K, polys_of(args), mode=args.mode,
                           config=bc)
    res = r.to_json()
    lines = [f"|P'| = {len(r.P_prime)}, U' = {r.U_prime}, V' = {r.V_prime}, K' = {r.K_prime}; "
             f"P'1 {r.p1_ok}, P'2 {r.p2_ok}, CR {r.cr['ok']}"]
    if not (r.p1_ok and r.p2_ok and r.cr["ok"]):
        raise ValidationError(lines[0], res)
    return res, lines


def cmd_extremal(args, cfg):
    polys = polys_of(args)
    F = extremal.forbidden_differences(polys, args.N, args.mode, cap=cfg.max_N)
    if args.exact:
        r = extremal.max_avoiding_exact(F, budget=args.budget)
    else:
        r = extremal.greedy_avoiding(F)
    path = Path(cfg.output_dir) / "forbidden.csv"
    path.parent.mkdir(parents=True, exist_ok=True)
    F.write_csv(path)
    res = r.to_json()
    res.update({"N": args.N, "polys": [str(h) for h in polys], "forbidden_csv": path.name})
    kind = "optimal" if r.optimal else "lower bound"
    return res, [f"|A| = {r.size} ({kind}, {r.nodes} nodes)"]


def cmd_residue(args, cfg):
    if args.q > cfg.max_q:
        raise ValueError(f"q = {args.q} exceeds max_q = {cfg.max_q}")
    r = extremal.residue_avoiding_search(polys_of(args), args.q, budget=args.budget, cap=cfg.max_q)
    res = r.to_json()
    res.update({"q": args.q, "forbidden_residues": extremal.forbidden_residues(polys_of(args), args.q)})
    kind = "optimal" if r.optimal else "lower bound"
    return res, [f"|B| = {r.size} mod {args.q} ({kind}): {list(r.witness)}"]


def cmd_digitlift(args, cfg):
    polys = polys_of(args)
    if args.B:
        B = int_list(args.B)
    else:
        B = list(extremal.residue_avoiding_search(polys, args.q, cap=cfg.max_q).witness)
    try:
        r, info = extremal.digit_construction(args.q, B, args.k, polys, args.free_range, args.mode)
    except extremal.ConstructionRejected as exc:
        raise ValidationError(str(exc))
    path = Path(cfg.output_dir) / "digitlift.csv"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("a\n" + "".join(f"{a}\n" for a in r.witness))
    res = dict(info)
    res.update({"verified": r.verified, "ms": r.elapsed_ms, "csv": path.name})
    return res, [f"|A| = {info['size']} in [1, {info['N']}], exponent {info['exponent']:.5f} "
                 f"(target {info['target_exponent']:.5f})"]


# -- parser -----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="polydiff", description=__doc__.splitlines()[0])
    top.add_argument("--config", help="flat key=value configuration file")
    top.add_argument("--param", action="append", default=[], metavar="KEY=VALUE",
                     help=f"override a config entry ({', '.join(RunConfig.keys())})")
    top.add_argument("--out", help="output directory (overrides output_dir)")
    top.add_argument("--seed", type=int, help="seed for random inputs (overrides seed)")
    top.add_argument("--threads", type=int, help="worker cap (overrides threads)")
    top.add_argument("--timings", action="store_true", help="record elapsed milliseconds in the JSON")
    top.add_argument("--quiet", action="store_true", help="suppress the summary")
    sub = top.add_subparsers(dest="command", required=True)

    def poly_args(p, many=True):
        if many:
            p.add_argument("--poly", action="append", required=True, help="polynomial in x (repeat for a system)")
        else:
            p.add_argument("--poly", required=True, help="polynomial in x")

    def mode_arg(p):
        p.add_argument("--mode", choices=certify.MODES, default=certify.INTEGER)

    p = sub.add_parser("certify", help="certify (P-)intersectivity")
    p.add_argument("polynomial")
    mode_arg(p)
    p.add_argument("--pmax", type=int, default=1000)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("profile", help="D and D' of a polynomial system")
    poly_args(p)
    p.add_argument("--partition", help="l1,l2,l3 (default: all in the first group)")
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("aux", help="auxiliary polynomials h^d for d <= dmax, with invariant checks")
    poly_args(p)
    mode_arg(p)
    p.add_argument("--dmax", type=int, default=100)
    p.set_defaults(func=cmd_aux)

    p = sub.add_parser("gauss", help="complete Gauss sums")
    poly_args(p, False)
    p.add_argument("--aq", type=rational, required=True, help="a/q")
    p.add_argument("--kind", choices=("complete", "unit", "sieved", "shifted"), default="complete")
    p.add_argument("--W", type=int, default=1)
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--r", type=int, default=1)
    p.set_defaults(func=cmd_gauss)

    p = sub.add_parser("weyl", help="Weyl sums")
    poly_args(p, False)
    p.add_argument("--alpha", type=rational, required=True)
    p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("--M", type=int, required=True)
    p.add_argument("--variant", choices=("plain", "sieved", "weighted", "prime"), default="plain")
    p.add_argument("--W", type=int)
    p.add_argument("--L", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--r", type=int)
    p.set_defaults(func=cmd_weyl)

    p = sub.add_parser("asym", help="Weyl sum against its major-arc asymptotic")
    poly_args(p, False)
    p.add_argument("--aq", type=rational, required=True)
    p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("--M", type=int, required=True)
    p.add_argument("--variant", choices=("plain", "sieved", "prime"), default="plain")
    p.add_argument("--Y", type=int)
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--r", type=int, default=1)
    p.add_argument("--chi", type=float, default=0.0, help="exceptional character value chi(r); 0 = absent")
    p.add_argument("--rho", type=float, default=0.5)
    p.set_defaults(func=cmd_asym)

    p = sub.add_parser("arcs", help="major/minor arc decomposition")
    p.add_argument("--N", type=int)
    p.add_argument("--K", type=rational, help="Z_N arcs |t/N - a/q| < K/N")
    p.add_argument("--gamma", type=rational, help="circle arcs of radius gamma")
    p.add_argument("--Q", type=int, required=True)
    p.set_defaults(func=cmd_arcs)

    p = sub.add_parser("spectrum", help="Fourier transform of a set, CSV output")
    add_set_args(p)
    p.add_argument("--balanced", action="store_true")
    p.add_argument("--refine", type=int, default=1)
    p.add_argument("--Q", type=int, default=0, help="also report arc masses for q <= Q")
    p.add_argument("--K", type=rational, help="arc width (default 1/(4Q^2) on the circle)")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("increment", help="density increment on a progression of step q")
    add_set_args(p)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--gamma", type=rational, required=True)
    p.add_argument("--theta", type=float, help="default: measured from the M'_q mass")
    p.set_defaults(func=cmd_increment)

    p = sub.add_parser("driver", help="density-increment iteration with per-step validation")
    poly_args(p)
    mode_arg(p)
    add_set_args(p)
    p.add_argument("--greedy", action="store_true", help="start from the greedy avoiding set")
    p.set_defaults(func=cmd_driver)

    p = sub.add_parser("blowup", help="one frequency blow-up step on Z_L")
    poly_args(p)
    mode_arg(p)
    add_set_args(p)
    p.add_argument("--P", default="0", help="comma-separated frequencies")
    p.add_argument("--U", type=int, default=3)
    p.add_argument("--V", type=int, default=1)
    p.add_argument("--K", type=int, default=1)
    p.set_defaults(func=cmd_blowup)

    p = sub.add_parser("extremal", help="largest subset of [1, N] avoiding the forbidden differences")
    poly_args(p)
    mode_arg(p)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--exact", action="store_true", help="branch and bound (default: greedy)")
    p.add_argument("--budget", type=int, default=5_000_000)
    p.set_defaults(func=cmd_extremal)

    p = sub.add_parser("residue", help="largest residue set mod q avoiding forbidden residues")
    poly_args(p)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--budget", type=int, default=50_000_000)
    p.set_defaults(func=cmd_residue)

    p = sub.add_parser("digitlift", help="base-q digit lift of a residue set")
    poly_args(p)
    mode_arg(p)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--B", help="residue set (default: residue search result)")
    p.add_argument("--free-range", choices=("full", "half"), default="full")
    p.set_defaults(func=cmd_digitlift)
    return top


def _strip_timings(obj):
    if isinstance(obj, dict):
        return {k: _strip_timings(v) for k, v in obj.items() if k not in ("ms", "elapsed_ms")}
    if isinstance(obj, list):
        return [_strip_timings(v) for v in obj]
    return obj


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        over = {}
        for kv in args.param:
            k, sep, v = kv.partition("=")
            if not sep:
                raise ConfigError(f"--param expects KEY=VALUE, got {kv!r}")
            over[k.strip()] = v.strip()
        for k, v in (("output_dir", args.out), ("seed", args.seed), ("threads", args.threads)):
            if v is not None:
                over[k] = str(v)
        cfg = load_config(args.config, over)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    t0 = time.perf_counter()
    status, result, lines = EXIT_OK, None, []
    try:
        result, lines = args.func(args, cfg)
    except ValidationError as exc:
        status, result, lines = EXIT_VALIDATION, exc.result, [f"validation failed: {exc}"]
    except (driver.ValidationFailure, extremal.ConstructionRejected) as exc:
        status, result, lines = EXIT_VALIDATION, None, [f"validation failed: {exc}"]
    except (PolySyntaxError, ValueError, LookupError, ArithmeticError, extremal.CapExceeded,
            expsum.ResourceError, spectrum.NoIncrementFound, blowup.EmptySelection,
            blowup.BlowupCapExceeded) as exc:
        mod = type(exc).__module__.rsplit(".", 1)[-1]
        print(f"error [{mod}]: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if not args.timings:
        result = _strip_timings(result)
    else:
        result = dict(result or {})
        result["elapsed_ms"] = (time.perf_counter() - t0) * 1e3
    # only the subcommand's own arguments: output location and timing flags do not belong in the record
    doc = envelope(args.command, result, cfg.hash(), cfg.seed, argv[argv.index(args.command):])
    doc["status"] = "ok" if status == EXIT_OK else "validation_failed"
    path = write_json(Path(cfg.output_dir) / f"{args.command}.json", doc)
    if not args.quiet:
        for line in lines:
            print(line)
        print(f"wrote {path}")
    return status


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
