"""Command-line front end.

Exit codes: 0 success or verdict true, 1 verification failed or the
inequality fails at the queried point, 2 usage error, 3 resource limit.

JSON output (schema ``ramanujan-cert-cli/1``) writes every number as a
pair of decimal strings ``[lo, hi]``; integers appear as ``["n", "n"]``.
The only field that varies between identical runs is ``generated_at``,
which ``--no-timestamp`` drops.

``--config FILE`` reads a JSON object whose keys are the :class:`RunConfig`
field names (``u1``, ``digits``, ``alpha``, ``format``, ``memory_budget``,
``use_paper_constants``, ``checkpoint``, ``no_timestamp``).  Flags given on
the command line win over the file.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass, fields
from datetime import datetime, timezone

from .errors import CertificationError, DomainError, ResourceLimit, ThresholdAboveAnchor
from .numerics import CertReal, PrecisionContext, as_cert
from .theta_bound import U_B4, a_eval
from .logint import scaled_E
from .ramanujan import (
    DEFAULT_U1,
    build_certificate,
    certificate_to_dict,
    epsilon_gap,
    EpsilonParams,
    hassani_dk,
    published_envelope,
    threshold_solve,
)

CLI_SCHEMA = "ramanujan-cert-cli/1"
COMMANDS = ("certify", "threshold", "constants", "check", "scan", "pi", "audit-theta", "dk")


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    """Settings shared by every command; the defaults give the main statement at u1 = 3157.442."""

    command: str
    u1: str = DEFAULT_U1
    digits: int = 60
    alpha: str = "e"
    format: str = "text"
    memory_budget: str | int | None = None
    use_paper_constants: bool = False
    checkpoint: str | None = None
    no_timestamp: bool = False

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        cfg = cls(**{f.name: getattr(args, f.name) for f in fields(cls)})
        if cfg.digits < 40:
            raise UsageError("--digits must be at least 40")
        if cfg.format not in ("text", "json", "csv"):
            raise UsageError(f"unknown format {cfg.format!r}")
        return cfg


_FILE_KEYS = {
    "u1": (str, int, float),
    "digits": (int,),
    "alpha": (str,),
    "format": (str,),
    "memory_budget": (str, int),
    "use_paper_constants": (bool,),
    "checkpoint": (str,),
    "no_timestamp": (bool,),
}


def load_config(path: str) -> dict:
    """Option defaults from a JSON config file."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    if not isinstance(doc, dict):
        raise UsageError("config file must hold a JSON object")
    out = {}
    for key, value in doc.items():
        if key not in _FILE_KEYS:
            raise UsageError(f"unknown config key {key!r}")
        types = _FILE_KEYS[key]
        if not isinstance(value, types) or (isinstance(value, bool) and bool not in types):
            raise UsageError(f"config key {key!r} has the wrong type")
        out[key] = str(value) if key == "u1" else value
    return out


def _common(defaults: dict | None = None) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", default=None, help="JSON file of option defaults")
    p.add_argument("--u1", default=DEFAULT_U1, help="log x1 (decimal, default %(default)s)")
    p.add_argument("--digits", type=int, default=60, help="working decimal digits (default 60)")
    p.add_argument("--alpha", default="e", help="alpha: a decimal or the symbol e (default e)")
    p.add_argument("--format", choices=("text", "json", "csv"), default="text")
    p.add_argument("--memory-budget", default=None,
                   help="sieve memory budget in bytes, suffixes K/M/G accepted "
                        "(default $RAMANUJAN_CERT_MEMORY_BUDGET or 256M)")
    p.add_argument("--checkpoint", default=None, help="sieve checkpoint file for resumable runs")
    p.add_argument("--use-paper-constants", action="store_true",
                   help="use the published m_a = -936.64603213534, M_a = 1177.56019022252")
    p.add_argument("--no-timestamp", action="store_true", help="omit generated_at from json output")
    if defaults:
        p.set_defaults(**defaults)
    return p


def build_parser(defaults: dict | None = None) -> argparse.ArgumentParser:
    common = _common(defaults)
    parser = argparse.ArgumentParser(
        prog="ramanujan-cert",
        description="Certified bound for Ramanujan's prime counting inequality.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("certify", parents=[common], help="full certificate for x >= exp(u1 + 1)")
    sub.add_parser("threshold", parents=[common], help="epsilon-gap threshold u*")
    p = sub.add_parser("constants", parents=[common], help="a(x1) and the envelope constants")
    p.add_argument("--envelope", action="store_true", help="also compute C0, C1, m_a and M_a")
    p = sub.add_parser("check", parents=[common], help="check the inequality at one integer")
    p.add_argument("x", type=int)
    p = sub.add_parser("scan", parents=[common], help="failing integers in [lo, hi]")
    p.add_argument("lo", type=int)
    p.add_argument("hi", type=int)
    p = sub.add_parser("pi", parents=[common], help="exact pi(x) and theta(x)")
    p.add_argument("x", type=int)
    p = sub.add_parser("audit-theta", parents=[common], help="audit |theta(x) - x| <= a(x) x/log^5 x")
    p.add_argument("limit", type=int)
    p = sub.add_parser("dk", parents=[common], help="coefficient d_k of the pi(x)^2 expansion")
    p.add_argument("k", type=int)
    return parser


# ------------------------------------------------------------------ output
def _pair(value, digits: int):
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, int):
        return [str(value), str(value)]
    if isinstance(value, CertReal):
        return list(value.to_decimal_pair(digits, outward=True))
    if isinstance(value, dict):
        return {k: _pair(v, digits) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_pair(v, digits) for v in value]
    raise TypeError(f"cannot serialize {type(value).__name__}")


def _text_value(value) -> str:
    if isinstance(value, CertReal):
        lo, hi = value.to_decimal_pair(20, outward=True)
        return f"[{lo}, {hi}]"
    if isinstance(value, (list, tuple)):
        return ", ".join(_text_value(v) for v in value) if value else "(none)"
    if isinstance(value, dict):
        return ", ".join(f"{k}={_text_value(v)}" for k, v in value.items())
    return str(value).lower() if isinstance(value, bool) else str(value)


def _emit(command: str, report: dict, args, out, csv_rows=None):
    if args.format == "json":
        doc = {"schema": CLI_SCHEMA, "command": command}
        doc.update(_pair(report, args.digits))
        if not args.no_timestamp:
            doc["generated_at"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
        out.write(json.dumps(doc, indent=2, sort_keys=False) + "\n")
    elif args.format == "csv":
        if csv_rows is not None:
            csv_rows(out)
            return
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(("field", "lo", "hi"))
        for key, value in report.items():
            v = _pair(value, args.digits)
            if isinstance(v, list) and len(v) == 2 and all(isinstance(s, str) for s in v):
                writer.writerow((key, v[0], v[1]))
            elif not isinstance(v, (dict, list)):
                writer.writerow((key, v, v))
    else:
        width = max(len(k) for k in report)
        for key, value in report.items():
            out.write(f"{key:<{width}}  {_text_value(value)}\n")


# ---------------------------------------------------------------- commands
def _counter(args):
    from .sieve import PrimeCounter

    return PrimeCounter(memory_budget=args.memory_budget, checkpoint=args.checkpoint,
                        ctx=PrecisionContext(args.digits))


def _alpha(args):
    text = args.alpha.strip()
    if text.lower() == "e":
        return "e"
    try:
        float(text)
    except ValueError:
        raise UsageError(f"alpha must be a decimal or e, got {args.alpha!r}") from None
    return text


def _u1(args, ctx):
    try:
        u1 = as_cert(args.u1, ctx.prec)
    except (ValueError, TypeError, DomainError):
        raise UsageError(f"--u1 must be a decimal, got {args.u1!r}") from None
    if not u1 >= U_B4:
        raise UsageError(f"--u1 must be at least {U_B4}")
    return u1


def _envelope(args, ctx):
    if args.use_paper_constants:
        return published_envelope(args.u1, ctx)
    from .envelope import envelope_constants

    return envelope_constants(_u1(args, ctx), ctx.default_tolerance, ctx)


def cmd_certify(args, ctx, out) -> int:
    _u1(args, ctx)
    env = published_envelope(args.u1, ctx) if args.use_paper_constants else None
    cert = build_certificate(args.u1, ctx, env=env)
    if args.format == "json":
        doc = {"schema": CLI_SCHEMA, "command": "certify"}
        doc.update(certificate_to_dict(cert, timestamp=not args.no_timestamp))
        out.write(json.dumps(doc, indent=2) + "\n")
    else:
        e = cert.env
        report = {
            "u1": cert.u1,
            "a_at_x1": e.a_at_x1,
            "scaled_C0": e.scaled_C0,
            "scaled_C1": e.scaled_C1,
            "m_a": e.m_a,
            "M_a": e.M_a,
            "constants_source": e.source,
            "u_threshold": cert.u_threshold,
            "statement_u": cert.statement_u,
            "gap_at_statement_u": cert.gap_at_statement_u,
            "margin": cert.margin,
            "verdict": cert.verdict,
            "failures": list(cert.failures),
        }
        _emit("certify", report, args, out)
    return 0 if cert.verdict else 1


def cmd_threshold(args, ctx, out) -> int:
    env = _envelope(args, ctx)
    params = EpsilonParams.from_envelope(env)
    statement = env.u1 + 1
    gap = epsilon_gap(statement, params)
    report = {"u1": env.u1, "m_a": env.m_a, "M_a": env.M_a, "constants_source": env.source}
    code = 0
    try:
        solved = threshold_solve(env, ctx.default_tolerance, ctx)
        report["u_threshold"] = solved
    except ThresholdAboveAnchor as exc:
        report["u_threshold"] = exc.threshold
        report["failure"] = str(exc)
        code = 1
    report["statement_u"] = statement
    report["gap_at_statement_u"] = gap
    report["margin"] = statement - gap
    if not (statement - gap).lo > 0:
        code = 1
    _emit("threshold", report, args, out)
    return code


def cmd_constants(args, ctx, out) -> int:
    u1 = _u1(args, ctx)
    report = {"u1": u1, "a_at_x1": a_eval(u1), "scaled_E_at_u1": scaled_E(u1, ctx=ctx).value}
    if args.envelope or args.use_paper_constants:
        env = _envelope(args, ctx)
        report.update({"scaled_C0": env.scaled_C0, "scaled_C1": env.scaled_C1,
                       "m_a": env.m_a, "M_a": env.M_a, "constants_source": env.source})
    _emit("constants", report, args, out)
    return 0


def _check_report(r) -> dict:
    return {
        "x": r.x,
        "alpha": r.alpha,
        "pi_x": r.pi_x,
        "floor_x_over_alpha": r.floor_x_over_alpha,
        "pi_floor": r.pi_floor,
        "lhs": r.lhs,
        "rhs": r.rhs,
        "holds": "undecided" if r.holds is None else r.holds,
    }


def cmd_check(args, ctx, out) -> int:
    from .sieve import check_point, write_csv
    from .sieve.counter import FLOOR_CONVENTION

    if args.x < 2:
        raise UsageError("x must be at least 2")
    r = check_point(args.x, _alpha(args), _counter(args), ctx)
    report = _check_report(r)
    report["floor_convention"] = FLOOR_CONVENTION
    _emit("check", report, args, out, csv_rows=lambda fh: write_csv([r], fh, args.digits))
    return 0 if r.holds else 1


def cmd_scan(args, ctx, out) -> int:
    from .sieve import scan, write_csv

    if not 2 <= args.lo <= args.hi:
        raise UsageError("scan needs 2 <= lo <= hi")
    rep = scan(args.lo, args.hi, _alpha(args), _counter(args), ctx, keep_rows=args.format == "csv")
    report = {"lo": args.lo, "hi": args.hi, "failing": rep.failing, "undecided": rep.undecided}
    report.update(rep.metadata)
    _emit("scan", report, args, out, csv_rows=lambda fh: write_csv(rep.rows, fh, args.digits))
    return 0 if not rep.failing and not rep.undecided else 1


def cmd_pi(args, ctx, out) -> int:
    from .sieve import sieve_pi_theta

    if args.x < 2:
        raise UsageError("x must be at least 2")
    r = sieve_pi_theta(args.x, _counter(args), ctx.prec)
    _emit("pi", {"x": r.x, "pi": r.pi, "theta": r.theta}, args, out)
    return 0


def cmd_audit(args, ctx, out) -> int:
    from .sieve import audit_theta_bound

    if args.limit < 2:
        raise UsageError("limit must be at least 2")
    r = audit_theta_bound(args.limit, _counter(args), ctx)
    report = {
        "limit": r.limit,
        "max_ratio": r.max_ratio,
        "argmax": r.argmax,
        "max_ratio_excluding_2": r.rest_ratio,
        "argmax_excluding_2": r.rest_argmax,
        "exact_ratio_at_argmax_excluding_2": r.rest_exact,
        "primes_seen": r.primes_seen,
        "holds": r.holds,
    }
    _emit("audit-theta", report, args, out)
    return 0 if r.holds else 1


def cmd_dk(args, ctx, out) -> int:
    if args.k < 0:
        raise UsageError("k must be non-negative")
    c = hassani_dk(args.k)
    _emit("dk", {"k": c.k, "d_k": c.d_k}, args, out)
    return 0


HANDLERS = {
    "certify": cmd_certify,
    "threshold": cmd_threshold,
    "constants": cmd_constants,
    "check": cmd_check,
    "scan": cmd_scan,
    "pi": cmd_pi,
    "audit-theta": cmd_audit,
    "dk": cmd_dk,
}


def run(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", default=None)
    try:
        path = pre.parse_known_args(argv)[0].config
        defaults = load_config(path) if path else None
    except UsageError as exc:
        err.write(f"ramanujan-cert: error: {exc}\n")
        return 2
    except SystemExit as exc:
        return int(exc.code or 0)
    parser = build_parser(defaults)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        config = RunConfig.from_args(args)
        ctx = PrecisionContext(config.digits)
        return HANDLERS[args.command](args, ctx, out)
    except UsageError as exc:
        err.write(f"ramanujan-cert: error: {exc}\n")
        return 2
    except ResourceLimit as exc:
        err.write(f"ramanujan-cert: resource limit: {exc}\n")
        return 3
    except (DomainError, ValueError) as exc:
        err.write(f"ramanujan-cert: error: {exc}\n")
        return 2
    except CertificationError as exc:
        err.write(f"ramanujan-cert: verification failed: {type(exc).__name__}: {exc}\n")
        return 1


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
