"""Command-line front end.

Exit status is 0 on success, 1 when a verification fails and 2 on bad
input or a pipeline error (the failing stage is named on stderr).
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .allocator import (allocation_violations, build_allocation, format_allocation,
                        image_semimeasure, parse_allocation)
from .bitcore import Dyadic, check_bits, render_bits
from .bitstream import bits_to_bytes, bytes_to_bits, pack_bits, unpack_bits
from .errors import SemiallocError
from .models import parse_model, realize
from .pipeline import (PipelineConfig, PipelineError, pipeline_stages, compress_bits,
                       decompress_bits, make_schedule, run_pipeline)
from .reduction import CodeStream, decode, encode, parse_test, verify_nested_witnesses
from .rounding import RoundedTable, round_stages
from .semimeasure import format_table, parse_table
from .verify import (EXHAUSTIVE_LIMIT, all_outputs, bit_budget_violations,
                     brute_force_image, round_trip_failures)


def _load_model(arg: str, depth: int | None):
    path = Path(arg)
    text = path.read_text() if path.is_file() else arg
    return parse_model(text, depth)


def _load_alloc(path: str):
    return parse_allocation(Path(path).read_text())


def _bits_arg(value: str) -> str:
    return "" if value in ("-", "") else check_bits(value)


def _out(text: str, path: str | None) -> None:
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_round(args) -> int:
    cfg = PipelineConfig(_load_model(args.model, args.depth), args.schedule, stages=args.stages)
    table = realize(cfg.model)
    schedule, shift, _ = make_schedule(args.schedule, table)
    rounded = round_stages(pipeline_stages(cfg, table), schedule)
    _out(format_table(rounded[-1].table), args.out)
    if shift:
        print(f"pad_shift {shift}", file=sys.stderr)
    return 0


def cmd_allocate(args) -> int:
    model = _load_model(args.model, args.depth)
    cfg = PipelineConfig(model, args.schedule, stages=args.stages)
    table = realize(model)
    schedule, _, _ = make_schedule(args.schedule, table)
    if args.rounded:
        rounded = [RoundedTable(parse_table(Path(p).read_text()), schedule) for p in args.rounded]
    else:
        rounded = round_stages(pipeline_stages(cfg, table), schedule)
    _out(format_allocation(build_allocation(rounded)), args.out)
    return 0


def cmd_encode(args) -> int:
    a = _load_alloc(args.alloc)
    target = _bits_arg(args.target)
    if args.stream:
        stream = CodeStream(a)
        print(f"prefix - emitted {render_bits(stream.committed)}")
        for n, b in enumerate(target, 1):
            got = stream.feed(b)
            print(f"prefix {target[:n]} emitted {render_bits(got)}")
        code = stream.finalize()
    else:
        code = encode(a, target)
    if args.out:
        Path(args.out).write_bytes(pack_bits(code))
    print(f"code {render_bits(code)}")
    return 0


def _code_arg(args) -> str:
    if args.code_file:
        return unpack_bits(Path(args.code_file).read_bytes())
    return _bits_arg(args.code)


def cmd_decode(args) -> int:
    a = _load_alloc(args.alloc)
    d = decode(a, _code_arg(args), args.len)
    if d.complete:
        print(f"output {render_bits(d.bits)}")
        return 0
    print(f"output {render_bits(d.bits)}")
    print(f"status underdetermined {d.underdetermined}")
    return 1


def cmd_witness(args) -> int:
    a = _load_alloc(args.alloc)
    t = parse_test(Path(args.test).read_text())
    C = Dyadic.parse(args.bound)
    alpha = _bits_arg(args.alpha)
    chain = verify_nested_witnesses(a, alpha, t, C)
    for w in chain.witnesses:
        print(f"prefix {render_bits(w.prefix)} leaf {w.leaf.stem} test {w.value} "
              f"tight_bound {w.ratio}")
    print(f"limit {chain.limit.leaf.stem} test {chain.limit.value}")
    return 0 if chain.ok(a, t, C) else 1


def cmd_verify(args) -> int:
    a = _load_alloc(args.alloc)
    failed = False

    def line(key, problems):
        nonlocal failed
        failed |= bool(problems)
        print(f"{key} {'true' if not problems else 'false'}")
        for p in problems[:5]:
            print(f"  {p}")

    line("invariants", allocation_violations(a))
    image = image_semimeasure(a)
    if args.rounded:
        ref = parse_table(Path(args.rounded).read_text())
        line("image_equals_rounded", [] if image == ref else ["mismatch"])
    if args.level == "exhaustive":
        if a.K > EXHAUSTIVE_LIMIT:
            print(f"error: exhaustive level needs max grid <= {EXHAUSTIVE_LIMIT}", file=sys.stderr)
            return 2
        outputs = all_outputs(a)
        line("oracle_image_equals_allocation",
             [] if brute_force_image(a, outputs) == image else ["mismatch"])
        line("bit_budget", bit_budget_violations(a, outputs))
    line("round_trip", round_trip_failures(a))
    return 1 if failed else 0


def cmd_pipeline(args) -> int:
    cfg = PipelineConfig(_load_model(args.model, args.depth), args.schedule,
                         outdir=Path(args.out) if args.out else None,
                         level=args.level, stages=args.stages)
    result = run_pipeline(cfg)
    if not args.out:
        sys.stdout.write(result.report.text())
    else:
        for key in ("image_equals_rounded", "oracle_image_equals_rounded", "bit_budget",
                    "round_trip", "status"):
            print(f"{key} {result.report.get(key)}")
    return 0 if result.report.ok else 1


def cmd_compress(args) -> int:
    a = _load_alloc(args.alloc)
    if args.bits is not None:
        bits = _bits_arg(args.bits)
    else:
        bits = bytes_to_bits(Path(args.input).read_bytes())
    res = compress_bits(a, bits)
    Path(args.out).write_bytes(pack_bits(res.code))
    _out(res.report.text(), args.report)
    return 0 if res.report.ok else 1


def cmd_decompress(args) -> int:
    a = _load_alloc(args.alloc)
    code = unpack_bits(Path(args.code).read_bytes())
    bits = decompress_bits(a, code, args.len)
    if args.out:
        if len(bits) % 8 == 0 and not args.packed:
            Path(args.out).write_bytes(bits_to_bytes(bits))
        else:
            Path(args.out).write_bytes(pack_bits(bits))
    else:
        print(f"output {render_bits(bits)}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="semialloc", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def model_args(sp):
        sp.add_argument("--model", required=True, help="model file or inline spec")
        sp.add_argument("--depth", type=int, help="depth when the model text has none")
        sp.add_argument("--schedule", default="d=n", help="d=<expr|table> or budget=<slack>")
        sp.add_argument("--stages", default="depth", choices=["depth", "components", "single"])

    sp = sub.add_parser("round", help="pad and round a model onto its grid")
    model_args(sp)
    sp.add_argument("--out")
    sp.set_defaults(fn=cmd_round)

    sp = sub.add_parser("allocate", help="build and dump the cone allocation")
    model_args(sp)
    sp.add_argument("--rounded", nargs="*", help="rounded stage tables, in order")
    sp.add_argument("--out")
    sp.set_defaults(fn=cmd_allocate)

    sp = sub.add_parser("encode", help="least code of a target string")
    sp.add_argument("--alloc", required=True)
    sp.add_argument("--target", required=True)
    sp.add_argument("--stream", action="store_true")
    sp.add_argument("--out", help="write the code as a bitstream file")
    sp.set_defaults(fn=cmd_encode)

    sp = sub.add_parser("decode", help="first n output bits of a code")
    sp.add_argument("--alloc", required=True)
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--code")
    g.add_argument("--code-file")
    sp.add_argument("--len", type=int, required=True)
    sp.set_defaults(fn=cmd_decode)

    sp = sub.add_parser("witness", help="low-test witnesses along a target")
    sp.add_argument("--alloc", required=True)
    sp.add_argument("--alpha", required=True)
    sp.add_argument("--test", required=True)
    sp.add_argument("--bound", required=True)
    sp.set_defaults(fn=cmd_witness)

    sp = sub.add_parser("verify", help="check an allocation dump")
    sp.add_argument("--alloc", required=True)
    sp.add_argument("--rounded")
    sp.add_argument("--level", default="fast", choices=["fast", "exhaustive"])
    sp.set_defaults(fn=cmd_verify)

    sp = sub.add_parser("pipeline", help="run everything and write a report")
    model_args(sp)
    sp.add_argument("--out", help="output directory")
    sp.add_argument("--level", default="fast", choices=["fast", "exhaustive"])
    sp.set_defaults(fn=cmd_pipeline)

    sp = sub.add_parser("compress", help="stream-encode a short input")
    sp.add_argument("--alloc", required=True)
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--input", help="raw bytes, unpacked MSB first")
    g.add_argument("--bits", help="input given as a bit string")
    sp.add_argument("--out", required=True)
    sp.add_argument("--report")
    sp.set_defaults(fn=cmd_compress)

    sp = sub.add_parser("decompress", help="invert compress")
    sp.add_argument("--alloc", required=True)
    sp.add_argument("--code", required=True, help="bitstream file")
    sp.add_argument("--len", type=int)
    sp.add_argument("--out")
    sp.add_argument("--packed", action="store_true", help="always write a bitstream file")
    sp.set_defaults(fn=cmd_decompress)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.fn(args)
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (SemiallocError, ValueError, OSError) as exc:
        print(f"error: {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
