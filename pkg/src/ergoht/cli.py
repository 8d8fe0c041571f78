"""Command-line interface: constructions, traces, scans, audits, verification.

Outputs are deterministic: identical configurations produce byte-identical
CSV/JSON (no timestamps), and every report embeds a SHA-256 hash of its
resolved configuration.  Exit codes: 0 success, 1 invariant failure,
2 configuration error, 3 digit exhaustion (with the required depth).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

from . import decomp as dc
from .cf import CFNumber
from .circle import IntervalUnion, OrbitSegment, UnitPoint, segment_sum
from .constructors import (
    DivergentBuildConfig,
    build_divergent,
    build_liouville_convergent,
    sigma_blocks,
    verify_growth_bounds,
    verify_liouville,
)
from .discrepancy import PointSample, brute_force_discrepancy, discrepancy, sn_growth
from .eht import WeightScheme, cauchy_gap_scan, summation_by_parts, weighted_partial_sums
from .errors import ConfigError, DigitExhaustionError, ErgohtError
from .signs import sign_range

AlphaLike = Union[CFNumber, Fraction]

RELAXED_DEFAULTS = dict(B=1, A_relaxed=Fraction(1, 5), growth_factor=100)


def parse_alpha(spec: str) -> AlphaLike:
    """Named preset, CF JSON array, or p/q rational (exact test mode)."""
    if spec == "golden":
        return CFNumber.golden()
    if spec == "sqrt2":
        return CFNumber.sqrt2_fractional()
    if spec == "thm3":
        return build_liouville_convergent([1], 5)
    if spec == "relaxed-divergent":
        cfg = DivergentBuildConfig(mode="relaxed", depth=4, **RELAXED_DEFAULTS)
        return build_divergent(cfg).cf
    if spec.startswith("["):
        return CFNumber.from_json(spec)
    try:
        frac = Fraction(spec)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"cannot parse alpha spec {spec!r}") from exc
    if not (0 < frac < 1):
        raise ConfigError("rational alpha must lie in (0,1)")
    return frac


def parse_u(spec: str) -> IntervalUnion:
    if spec == "halfcircle":
        return IntervalUnion.halfcircle()
    if spec == "quarters":
        return IntervalUnion.quarters()
    try:
        return IntervalUnion.from_json(spec)
    except ErgohtError:
        raise
    except Exception as exc:
        raise ConfigError(f"cannot parse U spec {spec!r}") from exc


def parse_x(spec: str) -> UnitPoint:
    try:
        return UnitPoint.mod1(Fraction(spec))
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"cannot parse x {spec!r}") from exc


def config_hash(config: dict) -> str:
    canon = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def _emit_json(payload: dict, config: dict, path: Optional[str]):
    payload = dict(payload)
    payload["config_sha256"] = config_hash(config)
    text = json.dumps(payload, sort_keys=True, indent=1)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _open_csv(path: Optional[str]):
    return open(path, "w", newline="") if path else sys.stdout


# -- subcommands ----------------------------------------------------------------


def cmd_construct(args) -> int:
    config = {k: str(v) for k, v in vars(args).items() if k not in ("func", "out")}
    if args.kind == "divergent":
        prefix = tuple(int(t) for t in args.prefix.split(",")) if args.prefix else None
        cfg = DivergentBuildConfig(
            B=args.B,
            depth=args.depth,
            mode=args.mode,
            A_relaxed=Fraction(args.A) if args.A else None,
            growth_factor=args.growth,
            prefix=prefix,
        )
        build = build_divergent(cfg)
        payload = {"cf": json.loads(build.cf.to_json()), "report": build.report()}
    else:
        prefix = [int(t) for t in args.prefix.split(",")] if args.prefix else [1]
        cf = build_liouville_convergent(prefix, args.depth)
        growth = verify_growth_bounds(cf, args.depth)
        witnesses = verify_liouville(cf, args.v, args.depth)
        payload = {
            "cf": json.loads(cf.to_json()),
            "report": {
                "q": [str(cf.q(k)) for k in range(1, args.depth + 1)],
                "growth_bounds_ok": growth.ok,
                "growth_failures": list(growth.failures),
                "summability_partials": [f"{t:.6g}" for t in growth.partials],
                "liouville_v": str(args.v),
                "liouville_witnesses": [w.k for w in witnesses],
            },
        }
    _emit_json(payload, config, args.out)
    return 0


def cmd_trace(args) -> int:
    config = {k: str(v) for k, v in vars(args).items() if k not in ("func", "csv")}
    alpha = parse_alpha(args.alpha)
    U = parse_u(args.U)
    x = parse_x(args.x)
    w = WeightScheme.harmonic(args.kappa)
    trace = weighted_partial_sums(alpha, x, U, w, args.N, mode=args.mode)
    fh = _open_csv(args.csv)
    try:
        fh.write(f"# config_sha256={config_hash(config)}\n")
        writer = csv.writer(fh)
        if trace.exact:
            writer.writerow(["n", "c_n", "s_n", "S_N_num", "S_N_den"])
        else:
            writer.writerow(["n", "c_n", "s_n", "S_N_lo", "S_N_hi"])
        for row in trace.rows():
            writer.writerow(row)
    finally:
        if args.csv:
            fh.close()
    return 0


def cmd_scan(args) -> int:
    config = {k: str(v) for k, v in vars(args).items() if k not in ("func", "out")}
    alpha = parse_alpha(args.alpha)
    U = parse_u(args.U)
    x = parse_x(args.x)
    lo, hi = (int(t) for t in args.range.split(":"))
    w = WeightScheme.harmonic(args.kappa)
    found = cauchy_gap_scan(alpha, x, U, w, lo, hi, Fraction(args.theta))
    payload = {
        "range": [lo, hi],
        "theta": str(Fraction(args.theta)),
        "witnesses": [
            {"n1": g.n1, "n2": g.n2, "value_lo": f"{float(g.value_lo):.9g}", "kind": g.kind}
            for g in found
        ],
    }
    _emit_json(payload, config, args.out)
    return 0


def cmd_decompose(args) -> int:
    config = {k: str(v) for k, v in vars(args).items() if k not in ("func", "out")}
    alpha = parse_alpha(args.alpha)
    U = parse_u(args.U)
    x = parse_x(args.x)
    if isinstance(alpha, Fraction):
        raise ConfigError("decompose needs a CF alpha (window lengths come from q_k)")
    levels = args.levels
    B = U.B
    k0 = dc.shift_index([alpha.q(k) for k in range(1, 64)], B)
    ps = dc.shifted_ladder([alpha.q(k) for k in range(1, k0 + levels)], B, levels)
    N = args.N if args.N else int(args.windows) * ps.Q[-1]
    if N % ps.Q[-1]:
        raise ConfigError(f"N must be a multiple of Q_levels = {ps.Q[-1]}")
    signs = sign_range(alpha, x, U, 1, N)
    result = dc.decompose(signs, [alpha.q(k) for k in range(1, k0 + levels)], B, levels)
    audit = result.audit()
    for entry, lev in zip(audit["levels"], result.levels):
        i = lev.level
        if i > 5:
            entry["D_bound"] = str(dc.level_bound(ps, i))
    _emit_json(audit, config, args.out)
    ok = all(
        e.get("residual_ok") in (True, None) and e.get("pair_permutation_ok") in (True, None)
        for e in audit["levels"]
    )
    return 0 if ok else 1


def cmd_discrepancy(args) -> int:
    config = {k: str(v) for k, v in vars(args).items() if k not in ("func", "csv")}
    alpha = parse_alpha(args.alpha)
    x = parse_x(args.x)
    if isinstance(alpha, Fraction):
        sample = PointSample.from_rational(alpha, x, args.N)
    else:
        sample = PointSample.from_cf(alpha, x, args.N)
    rep = discrepancy(sample)
    fh = _open_csv(args.csv)
    try:
        fh.write(f"# config_sha256={config_hash(config)}\n")
        writer = csv.writer(fh)
        writer.writerow(["N", "D_lo", "D_hi", "witness_lo", "witness_hi", "witness_kind"])
        writer.writerow([rep.N, rep.d_lo, rep.d_hi, rep.witness_lo, rep.witness_hi, rep.witness_kind])
    finally:
        if args.csv:
            fh.close()
    return 0


def _verify_invariants(alpha, x, U, N: int, rng: np.random.Generator) -> list[tuple[str, bool, str]]:
    checks: list[tuple[str, bool, str]] = []

    def record(name: str, ok: bool, info: str = ""):
        checks.append((name, bool(ok), info))

    if isinstance(alpha, CFNumber):
        depth = 24
        alpha.ensure(depth + 1)
        dets = [
            abs(alpha.p(k) * alpha.q(k - 1) - alpha.p(k - 1) * alpha.q(k)) for k in range(1, depth)
        ]
        record("convergent_determinant", all(d == 1 for d in dets))
        nested = all(
            alpha.enclose(k).contains_interval(alpha.enclose(k + 1)) for k in range(1, depth - 1)
        )
        record("enclosure_nesting", nested)

        signs = sign_range(alpha, x, U, 1, N)
        csum = np.concatenate([[0], np.cumsum(signs.astype(np.int64))])
        ok_dk, worst = True, 0
        for k in range(1, 14):
            qk = alpha.q(k)
            if qk > N:
                break
            sums = csum[qk:] - csum[:-qk]
            worst = max(worst, int(np.abs(sums).max()))
            if np.abs(sums).max() >= 4 * U.B:
                ok_dk = False
        record("denjoy_koksma_windows", ok_dk, f"max |window sum| = {worst}")

        odd_idx = rng.integers(1, N // 2, size=8)
        parity_ok = True
        for start in odd_idx:
            ln = int(rng.integers(1, 30) * 2 - 1)
            seg = int(csum[start + ln - 1] - csum[start - 1])
            if seg % 2 != ln % 2 or seg == 0 and ln % 2 == 1:
                parity_ok = False
        record("odd_segment_parity", parity_ok)
    else:
        signs = sign_range(alpha, x, U, 1, N)
        record("rational_mode_signs", len(signs) == N)

    n_sb = min(N, 600)
    w = WeightScheme.harmonic(0)
    trace = weighted_partial_sums(alpha, x, U, w, n_sb)
    boundary, series = summation_by_parts(trace, 0)
    record("summation_by_parts_identity", boundary + series == trace.S(n_sb))

    n_d = min(N, 200)
    if isinstance(alpha, Fraction):
        sample = PointSample.from_rational(alpha, x, n_d)
    else:
        sample = PointSample.from_cf(alpha, x, n_d)
    rep = discrepancy(sample)
    if rep.exact:
        record("discrepancy_vs_bruteforce", rep.value == brute_force_discrepancy(sample.points()))
    else:
        bf = brute_force_discrepancy(sample.points())
        record("discrepancy_vs_bruteforce", rep.d_lo <= bf <= rep.d_hi)
    growth = sn_growth(alpha, x, U, [10, min(N, 1000), N])
    record("birkhoff_discrepancy_bound", all(c.ok for c in growth))
    return checks


def cmd_verify(args) -> int:
    config = {k: str(v) for k, v in vars(args).items() if k not in ("func", "out")}
    alpha = parse_alpha(args.alpha)
    U = parse_u(args.U)
    x = parse_x(args.x)
    rng = np.random.default_rng(int(config_hash(config)[:8], 16))
    checks = _verify_invariants(alpha, x, U, args.N, rng)
    for name, ok, info in checks:
        line = f"{'PASS' if ok else 'FAIL'} {name}"
        if info:
            line += f" ({info})"
        print(line)
    payload = {
        "checks": [{"name": n, "ok": ok, "info": info} for n, ok, info in checks],
        "all_ok": all(ok for _, ok, _ in checks),
    }
    if args.out:
        _emit_json(payload, config, args.out)
    return 0 if payload["all_ok"] else 1


# -- argument wiring --------------------------------------------------------------


def _add_common(p, with_u=True):
    p.add_argument("--alpha", required=True, help="golden|sqrt2|thm3|relaxed-divergent|CF JSON|p/q")
    if with_u:
        p.add_argument("--U", default="halfcircle", help="halfcircle|quarters|JSON")
    p.add_argument("--x", default="0", help="base point as p/q")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ergoht", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("construct", help="build divergent or Liouville alphas")
    csub = c.add_subparsers(dest="kind", required=True)
    cd = csub.add_parser("divergent")
    cd.add_argument("--B", type=int, default=1)
    cd.add_argument("--depth", type=int, default=4)
    cd.add_argument("--mode", choices=["exact", "relaxed"], default="relaxed")
    cd.add_argument("--A", default="1/5", help="relaxed-mode threshold")
    cd.add_argument("--growth", type=int, default=100)
    cd.add_argument("--prefix", default=None, help="comma-separated digits")
    cd.add_argument("--out", default=None)
    cd.set_defaults(func=cmd_construct, kind="divergent")
    cl = csub.add_parser("liouville")
    cl.add_argument("--prefix", default="1", help="comma-separated digits")
    cl.add_argument("--depth", type=int, default=6)
    cl.add_argument("--v", type=int, default=3, help="Liouville exponent to certify")
    cl.add_argument("--out", default=None)
    cl.set_defaults(func=cmd_construct, kind="liouville")

    t = sub.add_parser("trace", help="weighted partial sums CSV")
    _add_common(t)
    t.add_argument("--N", type=int, required=True)
    t.add_argument("--weights", choices=["harmonic"], default="harmonic")
    t.add_argument("--kappa", type=int, default=0)
    t.add_argument("--mode", choices=["exact", "certified"], default="exact")
    t.add_argument("--csv", default=None)
    t.set_defaults(func=cmd_trace)

    s = sub.add_parser("scan", help="Cauchy-gap witnesses")
    _add_common(s)
    s.add_argument("--range", required=True, help="n_lo:n_hi")
    s.add_argument("--theta", required=True)
    s.add_argument("--kappa", type=int, default=0)
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_scan)

    d = sub.add_parser("decompose", help="near-alternating decomposition audit")
    _add_common(d)
    d.add_argument("--levels", type=int, default=3)
    d.add_argument("--N", type=int, default=None)
    d.add_argument("--windows", type=int, default=4, help="deepest-level windows when N omitted")
    d.add_argument("--out", default=None)
    d.set_defaults(func=cmd_decompose)

    q = sub.add_parser("discrepancy", help="extreme discrepancy of the Kronecker sample")
    _add_common(q, with_u=False)
    q.add_argument("--N", type=int, required=True)
    q.add_argument("--csv", default=None)
    q.set_defaults(func=cmd_discrepancy)

    v = sub.add_parser("verify", help="invariant suite; exit 0 iff all pass")
    _add_common(v)
    v.add_argument("--N", type=int, default=10000)
    v.add_argument("--out", default=None)
    v.set_defaults(func=cmd_verify)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except DigitExhaustionError as exc:
        print(f"error: digit exhaustion: {exc}", file=sys.stderr)
        return 3
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ErgohtError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
