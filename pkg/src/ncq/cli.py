"""Command-line front end.

Exit codes: 0 when every assertion passes, 1 when one fails (the report is
still written), 2 when the input cannot be parsed.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .serialize import FormatError, canonical_dumps
from .specs import JOB_KINDS, JobSpec, load_job, parse_job

EXIT_OK, EXIT_FAIL, EXIT_PARSE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse exits with 2 already; keep its message format
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARSE, f"{self.prog}: error: {message}\n")


def _numbers(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise FormatError(f"expected comma-separated numbers, got {text!r}") from exc


def _common(p: argparse.ArgumentParser):
    p.add_argument("--spec", help="JSON file holding a job spec or a target spec")
    p.add_argument("--seed", type=int, default=None, help="random seed (default 0)")
    p.add_argument("--unit", choices=("nats", "bits"), default=None)
    p.add_argument("--restarts", type=int, default=None, help="optimizer restarts per block")
    p.add_argument("--max-iters", type=int, default=None)
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--tol", type=float, default=None, help="assertion tolerance override")


def _channel_flags(p: argparse.ArgumentParser):
    p.add_argument("--builtin", help="shorthand for a Fourier multiplier with a random density on this quantum group")
    p.add_argument("--channel", choices=("fourier", "herz_schur", "covariant", "cond_exp", "identity",
                                         "depolarizing"))
    p.add_argument("--qgroup", help="kp, cg:<group> or vng:<group>")
    p.add_argument("--density", help="random, unit, or a JSON file holding an element")
    p.add_argument("--group", help="cyclic:n, dihedral:n, s3 or pauli")
    p.add_argument("--phi", help="comma-separated real values of a function on the group")
    p.add_argument("--rep", help="pauli, regular, trivial, s3:pi or dihedral_2d:k")
    p.add_argument("--f", dest="f", help="comma-separated density values on the group")
    p.add_argument("--onto", help="diagonal, scalars or subgroup:i,j")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ncq", description="Entropy, capacity and structure checks for quantum channels.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("verify-qgroup", help="check the quantum-group axioms")
    p.add_argument("--builtin", help="kp, cg:<group> or vng:<group>")
    _common(p)

    for name, text in (("entropy", "minimum output entropy by three routes"),
                       ("norms", "1 -> p norms"),
                       ("structure", "CP/PPT flags, entanglement breaking, multiplicative domain")):
        p = sub.add_parser(name, help=text)
        _channel_flags(p)
        if name == "norms":
            p.add_argument("--p", help="comma-separated exponents, 'inf' allowed")
        _common(p)

    p = sub.add_parser("capacity", help="classical capacity or Holevo bounds")
    p.add_argument("--classical", help="group for a classical convolution channel")
    p.add_argument("--nu", help="comma-separated probabilities on the group")
    _channel_flags(p)
    _common(p)

    p = sub.add_parser("suite", help="run a named suite")
    p.add_argument("name", choices=("paper-regression", "properties"))
    _common(p)

    p = sub.add_parser("run", help="run a job spec file")
    p.add_argument("job", help="path to a job spec")
    _common(p)
    return parser


def _target_from_flags(args) -> dict | str:
    if getattr(args, "classical", None):
        if not args.nu:
            raise FormatError("--classical needs --nu")
        return {"classical": args.classical, "nu": _numbers(args.nu)}
    kind = getattr(args, "channel", None)
    if getattr(args, "builtin", None) and not kind:
        return {"kind": "fourier", "qgroup": args.builtin, "density": args.density or "random"}
    if not kind:
        raise FormatError("give --spec, --builtin or --channel")
    spec: dict = {"kind": kind}
    if kind == "fourier":
        spec["qgroup"] = args.qgroup or "kp"
        if args.phi:
            spec["phi"] = _numbers(args.phi)
        elif args.density in (None, "random", "unit", "uniform"):
            spec["density"] = args.density or "random"
        else:
            spec["density"] = json.loads(Path(args.density).read_text())
    elif kind == "herz_schur":
        spec.update(group=args.group, phi=_numbers(args.phi or ""))
    elif kind == "covariant":
        spec.update(group=args.group or "pauli", rep=args.rep or "pauli", f=_numbers(args.f or ""))
    elif kind == "cond_exp":
        spec["onto"] = args.onto or "diagonal"
        spec["qgroup"] = args.qgroup or "kp"
    else:
        spec["qgroup"] = args.qgroup or "kp"
    return spec


def _load_spec_file(path: str, kind: str) -> JobSpec:
    try:
        obj = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc
    if isinstance(obj, dict) and obj.get("kind") in JOB_KINDS and "target" in obj:
        job = parse_job(obj, Path(path).parent)
        if job.kind != kind:
            raise FormatError(f"job kind {job.kind!r} does not match command {kind!r}")
        return job
    return JobSpec(kind, obj)


def job_from_args(args) -> JobSpec:
    cmd = args.command
    if cmd == "run":
        job = load_job(args.job)
    elif args.spec:
        job = _load_spec_file(args.spec, cmd)
    elif cmd == "suite":
        job = JobSpec("suite", args.name)
    elif cmd == "verify-qgroup":
        if not args.builtin:
            raise FormatError("give --builtin or --spec")
        job = JobSpec(cmd, args.builtin)
    else:
        job = JobSpec(cmd, _target_from_flags(args))
    overrides = {}
    for name in ("seed", "unit", "restarts", "max_iters", "out", "tol"):
        val = getattr(args, name, None)
        if val is not None:
            overrides[name] = val
    if getattr(args, "p", None):
        overrides["p"] = tuple(x.strip() for x in args.p.split(",") if x.strip())
    if overrides.get("restarts", 1) < 1 or overrides.get("max_iters", 1) < 1 or overrides.get("seed", 0) < 0:
        raise FormatError("--restarts and --max-iters must be positive and --seed non-negative")
    return replace(job, **overrides)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    from .jobs import run_job

    try:
        job = job_from_args(args)
        outcome = run_job(job)
    except FormatError as exc:
        print(f"ncq: invalid input: {exc}", file=sys.stderr)
        return EXIT_PARSE
    text = canonical_dumps(outcome.report)
    if job.out:
        Path(job.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if outcome.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
