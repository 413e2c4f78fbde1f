"""``ordinalvm`` command line.

Exit status: 0 on success (``ACCEPT`` for verify), 1 on a domain error or a
``REJECT``, 2 on a usage error.  Machine-readable lines (``HALTED ...``,
``ACCEPT n``, ``REJECT pos RULE detail``) are written to stdout; diagnostics
go to stderr.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from fractions import Fraction
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Optional, Sequence

from . import codec, diophantine
from .assembler import AssemblyError, assemble
from .certificate import CertificateError, Record, certify
from .machine import Halted, LimitJump, MachineError, Program, run
from .mutations import EXPECTED_RULE, Mutation, MutationKind, MutationSiteError, mutate
from .ordinal import OMEGA, Ordinal, OrdinalSyntaxError, parse_ordinal, succ
from .randomized import soundness_trials
from .verifier import AcceptPrefix, Reject, verify

__all__ = ["main", "build_parser", "WAITER_SOURCE"]

WAITER_SOURCE = """\
# wait until x catches up with y
0: BEQ x y 3
1: INC x
2: BEQ x x 0
3: HALT
"""

FORMATS = ("text", "bits", "packed")


class UsageError(Exception):
    pass


class DomainError(Exception):
    pass


# ---------------------------------------------------------------------------
# helpers


def _read_program(path: str) -> Program:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read program {path}: {exc.strerror}") from None
    return assemble(text)


def _bindings(items: Sequence[str]) -> Dict[str, Ordinal]:
    out = {}
    for item in items or ():
        name, sep, lit = item.partition("=")
        if not sep or not name:
            raise UsageError(f"input binding {item!r} is not NAME=ORDINAL")
        try:
            out[name.strip()] = parse_ordinal(lit.strip())
        except OrdinalSyntaxError as exc:
            raise UsageError(str(exc)) from None
    return out


def _guess_format(path: str, given: Optional[str]) -> str:
    if given:
        return given
    suffix = Path(path).suffix.lower()
    return {".txt": "text", ".bin": "packed", ".packed": "packed"}.get(suffix, "bits")


def _serialize(records: Iterable[Record], fmt: str, registers: Sequence[str]):
    if fmt == "text":
        return "".join(codec.write_text(records, registers))
    bits = codec.encode_bits(records)
    return codec.pack_bits(bits) if fmt == "packed" else bits + "\n"


def _text_records(lines: Iterable[str], registers: Sequence[str]) -> Iterator[Record]:
    count = 0
    for lineno, line in enumerate(lines, 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        try:
            rec = codec.parse_record(body, registers)
        except ValueError as exc:
            raise codec.FrameError(str(exc).replace(" at bit", " at line"), lineno, count) from None
        count += 1
        yield rec


def _load_cert(path: str, fmt: str, registers: Sequence[str]):
    try:
        if fmt == "packed":
            return codec.unpack_bits(Path(path).read_bytes())
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read certificate {path}: {exc.strerror}") from None
    if fmt == "bits":
        return "".join(text.split())
    return _text_records(text.splitlines(), registers)


def _write(out: Optional[str], payload) -> None:
    if out is None or out == "-":
        if isinstance(payload, bytes):
            sys.stdout.buffer.write(payload)
        else:
            sys.stdout.write(payload)
        return
    mode = "wb" if isinstance(payload, bytes) else "w"
    with open(out, mode) as fh:
        fh.write(payload)


def _halted_summary(args):
    program = _read_program(args.program)
    summary = run(program, _bindings(args.input), fuel=args.fuel, max_jumps=args.max_jumps)
    if not isinstance(summary.outcome, Halted):
        raise DomainError(f"run did not halt: {summary.outcome}")
    return program, summary


def _nonneg(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"{text} is negative")
    return value


# ---------------------------------------------------------------------------
# subcommands


def cmd_assemble(args) -> int:
    print(_read_program(args.file).listing())
    return 0


def cmd_run(args) -> int:
    program = _read_program(args.file)
    summary = run(program, _bindings(args.input), fuel=args.fuel, max_jumps=args.max_jumps)
    print(summary.outcome)
    return 0


def cmd_trace(args) -> int:
    program = _read_program(args.file)
    summary = run(program, _bindings(args.input), fuel=args.fuel, max_jumps=args.max_jumps)
    shown, last = 0, None
    for phase in summary.phases:
        if isinstance(phase, LimitJump):
            configs = [] if phase.start == last else [phase.start]
        else:
            configs = phase.configurations
        for cfg in configs:
            if args.limit is not None and shown >= args.limit:
                print("# trace truncated")
                print(summary.outcome)
                return 0
            print(cfg)
            shown, last = shown + 1, cfg
        if isinstance(phase, LimitJump):
            print(f"# limit jump: loop at ip={phase.loop.entry_ip} period={phase.loop.period} -> t={phase.post.time}")
    print(summary.outcome)
    return 0


def cmd_certify(args) -> int:
    program, summary = _halted_summary(args)
    records = certify(summary, args.prefix)
    _write(args.out, _serialize(records, args.format, program.registers))
    return 0


def cmd_verify(args) -> int:
    program = _read_program(args.program)
    fmt = _guess_format(args.cert, args.format)
    stream = _load_cert(args.cert, fmt, program.registers)
    verdict = verify(program, stream, args.max_records)
    print(verdict)
    return 0 if isinstance(verdict, AcceptPrefix) else 1


def cmd_mutate(args) -> int:
    program, summary = _halted_summary(args)
    try:
        kind = MutationKind(args.kind)
    except ValueError:
        raise UsageError(f"unknown mutation kind {args.kind!r}; one of {', '.join(k.value for k in MutationKind)}") from None
    records = mutate(list(certify(summary, args.prefix)), Mutation(kind, args.site))
    _write(args.out, _serialize(records, args.format, program.registers))
    return 0


def _load_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise DomainError(f"{path}: bad JSON: {exc}") from None


def cmd_dioph(args) -> int:
    if args.dioph_cmd == "stretch":
        print(diophantine.stretch(args.g, args.n))
    elif args.dioph_cmd == "dominate":
        print("true" if diophantine.dominates(args.a, args.b) else "false")
    elif args.dioph_cmd == "trunc":
        try:
            r = Fraction(args.r)
        except (ValueError, ZeroDivisionError):
            raise UsageError(f"{args.r!r} is not a rational p/q") from None
        print(diophantine.truncation_witness(r, args.a))
    else:
        system = diophantine.system_from_json(_load_json(args.system))
        data = _load_json(args.witness)
        if not isinstance(data, dict):
            raise DomainError("witness must be a JSON object")
        reals = data.pop("reals", {}) if isinstance(data.get("reals"), dict) else {}
        witness = {k: int(v) for k, v in data.items()}
        ok = diophantine.eval_system(system, witness, {k: Fraction(v) for k, v in reals.items()})
        print("SATISFIED" if ok else "VIOLATED")
        return 0 if ok else 1
    return 0


def cmd_soundness(args) -> int:
    seed = args.seed if args.seed is not None else int(os.environ.get("ORDINALVM_SEED", "0"))
    trials = soundness_trials(seed, args.count)
    bad = [t for t in trials if not t.agrees]
    for t in bad:
        print(f"MISMATCH inputs={t.inputs} accelerated={t.accelerated} plain={t.plain}")
        print(t.program.listing())
    print(f"SOUNDNESS seed={seed} trials={len(trials)} mismatches={len(bad)}")
    return 0 if not bad and len(trials) == args.count else 1


def cmd_demo(args) -> int:
    ok = True

    def check(label: str, good: bool, info: str) -> None:
        nonlocal ok
        ok &= good
        print(f"{'ok  ' if good else 'FAIL'} {label:<28} {info}")

    program = assemble(WAITER_SOURCE)
    summary = run(program, {"y": OMEGA})
    out = summary.outcome
    check("run waiter y=w", isinstance(out, Halted) and out.time == succ(OMEGA), str(out))
    if not isinstance(out, Halted):
        return 1
    t0 = time.perf_counter()
    records = list(certify(summary, args.prefix))
    check("certify", len(records) == args.prefix, f"{len(records)} records in {time.perf_counter() - t0:.2f}s")
    t0 = time.perf_counter()
    verdict = verify(program, records)
    check("verify clean", verdict == AcceptPrefix(args.prefix), f"{verdict} in {time.perf_counter() - t0:.2f}s")
    print()
    print(f"{'mutation':<22} {'expected':<8} verdict")
    kills = 0
    for kind in MutationKind:
        verdict = verify(program, mutate(records, Mutation(kind)))
        killed = isinstance(verdict, Reject) and verdict.rule == EXPECTED_RULE[kind]
        kills += killed
        print(f"{kind.value:<22} {EXPECTED_RULE[kind]:<8} {verdict}")
    print()
    check("mutations rejected", kills == len(MutationKind), f"{kills}/{len(MutationKind)}")
    print("DEMO OK" if ok else "DEMO FAILED")
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# parser


def _run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", action="append", default=[], metavar="NAME=ORDINAL", help="input binding, e.g. y=w*2+3")
    p.add_argument("--fuel", type=_nonneg, default=100_000, help="concrete step budget")
    p.add_argument("--max-jumps", type=_nonneg, default=8, help="limit jumps allowed (0 disables acceleration)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ordinalvm", description="Ordinal register machines and run certificates.")
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("assemble", help="assemble a program and print its listing")
    p.add_argument("file")
    p.set_defaults(func=cmd_assemble)

    p = sub.add_parser("run", help="run a program with limit acceleration")
    p.add_argument("file")
    _run_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("trace", help="print every configuration of a run")
    p.add_argument("file")
    _run_flags(p)
    p.add_argument("--limit", type=_nonneg, default=None, help="stop after this many lines")
    p.set_defaults(func=cmd_trace)

    for name, helptext in (("certify", "emit a certificate prefix"), ("mutate", "emit a corrupted certificate prefix")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--program", required=True)
        _run_flags(p)
        p.add_argument("--prefix", type=_nonneg, default=100_000, help="number of records")
        p.add_argument("--format", choices=FORMATS, default="text")
        p.add_argument("--out", default=None, help="output file (default stdout)")
        if name == "mutate":
            p.add_argument("--kind", required=True, help="mutation kind, e.g. ReverseLess")
            p.add_argument("--site", type=_nonneg, default=None, help="record position to corrupt")
            p.set_defaults(func=cmd_mutate)
        else:
            p.set_defaults(func=cmd_certify)

    p = sub.add_parser("verify", help="check a certificate prefix")
    p.add_argument("--program", required=True)
    p.add_argument("--cert", required=True)
    p.add_argument("--max-records", type=_nonneg, default=None)
    p.add_argument("--format", choices=FORMATS, default=None, help="default: from the file suffix (.txt text, .bin packed, else bits)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("dioph", help="Diophantine utilities")
    dsub = p.add_subparsers(dest="dioph_cmd", required=True)
    q = dsub.add_parser("stretch", help="spread bit i of g to bit n*i")
    q.add_argument("g", type=_nonneg)
    q.add_argument("n", type=_nonneg)
    q = dsub.add_parser("dominate", help="is a bitwise dominated by b")
    q.add_argument("a", type=int)
    q.add_argument("b", type=int)
    q = dsub.add_parser("trunc", help="g with g < 2^a r < g+1")
    q.add_argument("r", metavar="P/Q")
    q.add_argument("a", type=_nonneg)
    q = dsub.add_parser("eval", help="evaluate a constraint system on a witness")
    q.add_argument("--system", required=True)
    q.add_argument("--witness", required=True)
    p.set_defaults(func=cmd_dioph)

    p = sub.add_parser("soundness", help="compare accelerated and plain runs on random programs")
    p.add_argument("--seed", type=int, default=None, help="default: $ORDINALVM_SEED or 0")
    p.add_argument("--count", type=_nonneg, default=50)
    p.set_defaults(func=cmd_soundness)

    p = sub.add_parser("demo", help="waiter run, certificate, verification and mutation table")
    p.add_argument("--prefix", type=_nonneg, default=100_000)
    p.set_defaults(func=cmd_demo)
    return parser


DOMAIN_ERRORS = (
    DomainError,
    AssemblyError,
    MachineError,
    CertificateError,
    MutationSiteError,
    diophantine.BoundaryError,
    diophantine.UnboundVariable,
    ValueError,
)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"ordinalvm: {exc}", file=sys.stderr)
        return 2
    except DOMAIN_ERRORS as exc:
        print(f"ordinalvm: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
