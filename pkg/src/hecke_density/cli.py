"""``hecke-density`` command line.

Exit codes: 0 when every verdict passes, 1 when some verdict fails, 2 on
usage or input errors.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import sys
from dataclasses import asdict

import numpy as np

from . import __version__, satake, sources
from .bounds import MomentBounds
from .dirichlet import (
    DEFAULT_COUPLING,
    GridCouplingError,
    grid_for,
    moment_profile,
    theorem_check,
)
from .optimizer import (
    REFERENCE_VALUES,
    DomainError,
    InfeasibleError,
    dichotomy_check,
    inequality_audit,
    solve_constants,
    tradeoff_sweep,
)
from .report import Report, ReportWriteError, Verdict, emit_report


class UsageError(Exception):
    pass


# -- argument helpers ------------------------------------------------------------


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _add_output(p):
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out", metavar="PATH", help="write the report here instead of stdout")
    p.add_argument("--timestamp", action="store_true",
                   help="record the wall-clock time (breaks byte-reproducibility)")


def _add_source(p, default="tau"):
    p.add_argument("--source", choices=sources.SOURCES, default=default)
    p.add_argument("--input", metavar="PATH", help="CSV file for --source csv")
    p.add_argument("--limit", type=int, default=30000, help="prime limit for tau data")
    p.add_argument("--count", type=int, default=100000, help="sample size for synthetic data")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--s-grid", type=_float_list, metavar="S,S,...",
                   help="explicit s values (default: 1 + 10^{-j/2} filtered by coupling)")
    p.add_argument("--coupling", type=float, default=DEFAULT_COUPLING)


def _add_bounds(p):
    d = MomentBounds()
    for name in ("m2", "m3", "m4", "m6", "m8"):
        p.add_argument(f"--{name}", type=float, default=getattr(d, name.upper()))


def _bounds(args) -> MomentBounds:
    return MomentBounds(args.m2, args.m3, args.m4, args.m6, args.m8)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hecke-density",
        description="Density of large Hecke eigenvalues: data, identities and constants.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("sieve", help="list primes up to a limit")
    p.add_argument("--limit", type=int, required=True)
    _add_output(p)

    p = sub.add_parser("tau", help="Ramanujan tau at primes with integrity checks")
    p.add_argument("--limit", type=int, default=1000)
    p.add_argument("--sequence-out", metavar="PATH", help="also write a p,a_p CSV")
    _add_output(p)

    p = sub.add_parser("sample", help="synthetic Sato-Tate or dihedral eigenvalues")
    p.add_argument("--kind", choices=("sato_tate", "dihedral"), default="sato_tate")
    p.add_argument("--count", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sequence-out", metavar="PATH", help="also write a p,a_p CSV")
    _add_output(p)

    p = sub.add_parser("validate", help="Kim-Sarnak bound |a_p| <= 2 p^{7/64}")
    _add_source(p)
    _add_output(p)

    p = sub.add_parser("identities", help="Clebsch-Gordan identities on random parameters")
    p.add_argument("--samples", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    _add_output(p)

    p = sub.add_parser("moments", help="self-normalized moment profile")
    _add_source(p, default="sato_tate")
    _add_bounds(p)
    _add_output(p)

    p = sub.add_parser("density", help="upper density of {a_p > threshold}")
    _add_source(p)
    p.add_argument("--threshold", type=float, required=True)
    p.add_argument("--delta", type=float, default=0.01)
    _add_output(p)

    p = sub.add_parser("theorem", help="solve for the threshold, then check its density on data")
    _add_source(p)
    p.add_argument("--delta", type=float, default=0.01)
    _add_bounds(p)
    _add_output(p)

    p = sub.add_parser("solve", help="solve for (d, beta, alpha, threshold)")
    p.add_argument("--delta", type=float, default=0.01)
    p.add_argument("--grid-points", type=int, default=10000)
    _add_bounds(p)
    _add_output(p)

    p = sub.add_parser("sweep", help="threshold / density trade-off")
    p.add_argument("--deltas", type=_float_list, default=[0.02, 0.01, 0.005])
    _add_bounds(p)
    _add_output(p)

    p = sub.add_parser("audit", help="finite-sum Hölder and Cauchy-Schwarz checks")
    _add_source(p)
    _add_bounds(p)
    p.add_argument("--delta", type=float, default=0.01)
    _add_output(p)
    return parser


def _load_sequence(args) -> sources.EigenvalueSequence:
    if args.source == "tau":
        return sources.tau_sequence(args.limit)
    if args.source == "sato_tate":
        return sources.sample_sato_tate(args.count, args.seed)
    if args.source == "dihedral":
        return sources.sample_dihedral(args.count, args.seed)
    if not args.input:
        raise UsageError("--source csv needs --input PATH")
    return sources.load_csv(args.input)


def _grid(args, seq):
    return grid_for(seq, args.s_grid, args.coupling)


# -- subcommands -----------------------------------------------------------------


def cmd_sieve(args, rep: Report):
    table = sources.sieve_primes(args.limit)
    rep.rows = [{"index": i + 1, "p": p} for i, p in enumerate(table.primes.tolist())]
    rep.summary = {"limit": args.limit, "count": len(table)}


def cmd_tau(args, rep: Report):
    tau = sources.tau_table(max(args.limit, 7))
    seq = sources.tau_sequence(args.limit, tau)
    rep.rows = [
        {"p": p, "tau_p": tau[p], "a_p": a} for p, a in seq.entries()
    ]
    rep.verdicts = [
        Verdict("tau_small_values", tau[1:8] == [1, -24, 252, -1472, 4830, -6048, -16744],
                f"tau(1..7) = {tau[1:8]}"),
        Verdict("multiplicative_6", tau[6] == tau[2] * tau[3], f"tau(6) = {tau[6]}"),
        Verdict("hecke_4", tau[4] == tau[2] ** 2 - 2**11, f"tau(4) = {tau[4]}"),
        Verdict("deligne", bool(np.all(np.abs(seq.values) <= 2.0)), ""),
    ]
    rep.summary = {"limit": args.limit, "primes": len(seq)}
    if args.sequence_out:
        sources.write_csv(seq, args.sequence_out)


def cmd_sample(args, rep: Report):
    if args.kind == "sato_tate":
        seq = sources.sample_sato_tate(args.count, args.seed)
    else:
        seq = sources.sample_dihedral(args.count, args.seed)
    rep.rows = [{"p": p, "a_p": a} for p, a in seq.entries()]
    a = seq.values
    rep.summary = {f"mean_a{k}": float(np.mean(a**k)) for k in range(1, 9)}
    rep.summary["zero_fraction"] = float(np.mean(a == 0))
    if args.sequence_out:
        sources.write_csv(seq, args.sequence_out)


def cmd_validate(args, rep: Report):
    seq = _load_sequence(args)
    bad = sources.validate_kim_sarnak(seq)
    rep.rows = [v._asdict() for v in bad]
    rep.summary = {"entries": len(seq), "violations": len(bad)}
    rep.verdicts = [Verdict("kim_sarnak", not bad, f"{len(bad)} violation(s)")]


def cmd_identities(args, rep: Report):
    if args.samples < 1:
        raise UsageError("--samples must be positive")
    rng = np.random.default_rng(args.seed)
    theta = rng.uniform(0.0, 2 * np.pi, size=(args.samples, 2))
    alpha, beta = np.exp(1j * theta[:, 0]), np.exp(1j * theta[:, 1])
    for k in satake.SUPPORTED_K:
        disc, resid = satake.verify_cg_batch(alpha, beta, k)
        dec = satake.cg_decomposition(k)
        rep.rows.append({
            "k": k,
            "draws": args.samples,
            "dimension": dec.dimension,
            "parts": " + ".join(f"{m}*[{lab}]" for lab, m in dec.parts),
            "max_discrepancy": float(disc.max()),
            "max_trace_residual": float(resid.max()),
        })
        rep.verdicts.append(Verdict(f"multiset_k{k}", bool(disc.max() < satake.MULTISET_TOL),
                                    f"max {disc.max():.3e}"))
        rep.verdicts.append(Verdict(f"trace_k{k}", bool(resid.max() < satake.TRACE_TOL),
                                    f"max {resid.max():.3e}"))
        rep.verdicts.append(Verdict(f"dimension_k{k}", dec.dimension == 2**k, str(dec.dimension)))


def cmd_moments(args, rep: Report):
    seq = _load_sequence(args)
    prof = moment_profile(seq, _grid(args, seq), _bounds(args))
    rep.rows = [asdict(r) for r in prof.rows]
    closest = prof.closest_to_one()
    for k, row in closest.items():
        rep.verdicts.append(Verdict(
            f"moment_k{k}", row.ok,
            f"s={row.s:.6g} ratio={row.ratio:.6g} {row.target} {row.expected:g} "
            f"(effective size {row.effective_size:.3g})",
        ))


def cmd_density(args, rep: Report):
    seq = _load_sequence(args)
    res = theorem_check(seq, args.threshold, args.delta, _grid(args, seq))
    _density_rows(rep, res)


def _density_rows(rep, res):
    est = res.estimate
    rep.rows = [
        {"s": pt.s, "ratio": pt.ratio, "subset_sum": pt.subset_sum, "increased": pt.increased}
        for pt in est.per_point
    ]
    rep.summary = {
        "threshold": res.threshold,
        "delta": res.delta,
        "estimate": est.value,
        "subset_size": est.subset_size,
        "truncation_limit": est.truncation_limit,
    }
    rep.verdicts.append(Verdict(
        "density_at_least_delta", res.passed, f"estimate {est.value:.6g} vs delta {res.delta:g}"
    ))


def cmd_theorem(args, rep: Report):
    sol = solve_constants(_bounds(args), args.delta)
    seq = _load_sequence(args)
    res = theorem_check(seq, sol.threshold_c, args.delta, _grid(args, seq))
    _density_rows(rep, res)
    rep.summary["d"] = sol.d


def _solution_row(sol) -> dict:
    return {
        "delta": sol.delta,
        "d": sol.d,
        "beta": sol.beta,
        "alpha": sol.alpha,
        "threshold_c": sol.threshold_c,
        "product": sol.product,
        "residual": sol.residual,
    }


def cmd_solve(args, rep: Report):
    sol = solve_constants(_bounds(args), args.delta)
    dich = dichotomy_check(sol, points=args.grid_points)
    rep.rows = [_solution_row(sol)]
    rep.summary = {
        "reference": dict(REFERENCE_VALUES),
        "equation_residuals": sol.equation_residuals(),
        "dichotomy": {
            "f1_crossing": dich.f1_crossing,
            "f2_crossing": dich.f2_crossing,
            "points": dich.points,
        },
    }
    rep.verdicts = [
        Verdict("residual", sol.residual < 1e-9, f"{sol.residual:.3e}"),
        Verdict("dichotomy", dich.passed, dich.first_violation or ""),
    ]


def cmd_sweep(args, rep: Report):
    rows = tradeoff_sweep(_bounds(args), args.deltas)
    prev = None
    monotone = True
    for r in rows:
        if r.feasible:
            rep.rows.append({**_solution_row(r.solution), "status": "ok", "error": None})
            # smaller density targets must not lower the threshold
            if prev is not None and r.delta < prev.delta and r.solution.threshold_c < prev.solution.threshold_c:
                monotone = False
            prev = r
        else:
            rep.rows.append({"delta": r.delta, "status": "infeasible", "error": r.error})
    rep.verdicts = [Verdict("threshold_monotone", monotone, "")]


def cmd_audit(args, rep: Report):
    seq = _load_sequence(args)
    sol = solve_constants(_bounds(args), args.delta)
    audit = inequality_audit(seq, _grid(args, seq), sol)
    rep.rows = [
        {"s": e.s, "name": e.name, "subset": e.subset, "lhs": e.lhs, "rhs": e.rhs,
         "margin": e.margin, "relative_margin": e.relative_margin}
        for e in audit.entries
    ]
    worst = audit.worst
    rep.verdicts = [Verdict(
        "margins_nonnegative", audit.passed,
        f"worst {worst.name}[{worst.subset}] at s={worst.s:.6g}: {worst.relative_margin:.3e}",
    )]


COMMANDS = {
    "sieve": cmd_sieve,
    "tau": cmd_tau,
    "sample": cmd_sample,
    "validate": cmd_validate,
    "identities": cmd_identities,
    "moments": cmd_moments,
    "density": cmd_density,
    "theorem": cmd_theorem,
    "solve": cmd_solve,
    "sweep": cmd_sweep,
    "audit": cmd_audit,
}

_INPUT_ERRORS = (
    UsageError,
    sources.SequenceFormatError,
    sources.DataIntegrityError,
    GridCouplingError,
    InfeasibleError,
    DomainError,
    ReportWriteError,
    OSError,
    ValueError,
)


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    config = {k: v for k, v in sorted(vars(args).items()) if k not in ("out", "timestamp", "command")}
    rep = Report(args.command, config)
    if args.timestamp:
        rep.timestamp = _dt.datetime.now(_dt.timezone.utc).isoformat()
    try:
        COMMANDS[args.command](args, rep)
        emit_report(rep, args.format, args.out)
    except _INPUT_ERRORS as exc:
        print(f"hecke-density {args.command}: error: {exc}", file=sys.stderr)
        return 2
    return 0 if rep.passed else 1


def main() -> None:
    sys.exit(run())
