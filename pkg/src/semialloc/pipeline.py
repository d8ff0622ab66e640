"""End-to-end runs: model -> stages -> rounding -> allocation -> self-checks.

Reports are ``key value`` lines.  Before a report is returned, every number
in it is recomputed along a separate path by :func:`check_report`.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .allocator import Allocation, apply_map, build_allocation, format_allocation, image_semimeasure
from .bitcore import all_strings, ceil_neg_log2, max_depth, render_bits, strings_of_length
from .bitstream import bytes_to_bits
from .errors import SemiallocError
from .models import Mixture, budget_schedule_of, format_model, realize
from .reduction import CodeStream, decode
from .rounding import round_stages
from .schedule import Schedule, parse_d_expr
from .semimeasure import SemimeasureTable, component_stages, depth_stages, format_table
from .verify import (EXHAUSTIVE_LIMIT, all_outputs, bit_budget_violations,
                     brute_force_image, round_trip_failures)

log = logging.getLogger(__name__)


class PipelineError(SemiallocError):
    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage {stage}: {type(cause).__name__}: {cause}")


@dataclass
class PipelineConfig:
    model: object
    schedule: str = "d=n"          # "d=<expr>" or "budget=<slack>"
    outdir: Path | None = None
    level: str = "fast"            # "fast" or "exhaustive"
    stages: str = "depth"          # "depth", "components" or "single"

    @property
    def depth(self) -> int:
        return self.model.depth

    def check(self) -> None:
        if self.level not in ("fast", "exhaustive"):
            raise ValueError(f"unknown verification level {self.level!r}")
        if self.stages not in ("depth", "components", "single"):
            raise ValueError(f"unknown staging {self.stages!r}")
        if self.depth > max_depth():
            raise ValueError(f"depth {self.depth} exceeds maximum {max_depth()}")
        if not (self.schedule.startswith("d=") or self.schedule.startswith("budget=")):
            raise ValueError(f"schedule must be 'd=<expr>' or 'budget=<slack>', got {self.schedule!r}")


@dataclass
class Report:
    lines: list = field(default_factory=list)
    ok: bool = True

    def add(self, key: str, value) -> None:
        self.lines.append(f"{key} {value}")

    def text(self) -> str:
        return "\n".join(self.lines) + "\n"

    def get(self, key: str) -> str | None:
        for line in self.lines:
            k, _, v = line.partition(" ")
            if k == key:
                return v
        return None


@dataclass
class PipelineResult:
    table: SemimeasureTable
    schedule: Schedule
    rounded: list
    allocation: Allocation
    report: Report
    shift: int = 0
    slack: int | None = None


def make_schedule(spec: str, table: SemimeasureTable) -> tuple[Schedule, int, int | None]:
    """Resolve a schedule selector; returns ``(schedule, shift, slack)``.

    Budget schedules whose pad would outweigh 1 are shifted uniformly by
    the least ``w`` that fits, and ``w`` is reported.
    """
    if spec.startswith("d="):
        s = parse_d_expr(spec[2:], table.depth)
        s.check_weight()
        return s, 0, None
    slack = int(spec.split("=", 1)[1])
    s = budget_schedule_of(table, slack)
    w = s.fit_shift()
    return (s.shifted(w) if w else s), w, slack


def pipeline_stages(cfg: PipelineConfig, table: SemimeasureTable) -> list[SemimeasureTable]:
    if cfg.stages == "single":
        return [table]
    if cfg.stages == "components" and isinstance(cfg.model, Mixture):
        return component_stages([realize(c) for c in cfg.model.components],
                                list(cfg.model.weights))
    return depth_stages(table)


def run_pipeline(cfg: PipelineConfig) -> PipelineResult:
    cfg.check()
    step = "realize"
    try:
        table = realize(cfg.model)
        step = "schedule"
        schedule, shift, slack = make_schedule(cfg.schedule, table)
        if cfg.level == "exhaustive" and schedule.max_grid > EXHAUSTIVE_LIMIT:
            raise ValueError(f"exhaustive verification needs max grid <= {EXHAUSTIVE_LIMIT}, "
                             f"got {schedule.max_grid}")
        step = "round"
        rounded = round_stages(pipeline_stages(cfg, table), schedule)
        step = "allocate"
        alloc = build_allocation(rounded)
        step = "verify"
        report = _build_report(cfg, table, schedule, shift, slack, rounded[-1], alloc)
    except SemiallocError as exc:
        raise PipelineError(step, exc) from exc
    problems = check_report(report, table, alloc, shift, slack)
    if problems:
        report.ok = False
        for p in problems[:20]:
            report.add("validator_mismatch", p)
    report.add("status", "ok" if report.ok else "failed")
    result = PipelineResult(table, schedule, rounded, alloc, report, shift, slack)
    if cfg.outdir is not None:
        write_outputs(result, Path(cfg.outdir))
    return result


def write_outputs(result: PipelineResult, outdir: Path) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "rounded.tab").write_text(format_table(result.rounded[-1].table))
    (outdir / "alloc.txt").write_text(format_allocation(result.allocation))
    (outdir / "report.txt").write_text(result.report.text())


def _flag(report: Report, key: str, failures) -> None:
    report.add(key, "true" if not failures else "false")
    if failures:
        report.ok = False
        log.error("%s failed: %s", key, failures[:3])


def _build_report(cfg, table, schedule, shift, slack, final, alloc) -> Report:
    r = Report()
    model_text = format_model(cfg.model).strip().splitlines()
    r.add("model", " | ".join(model_text[1:]))
    r.add("depth", table.depth)
    r.add("schedule", cfg.schedule)
    r.add("pad_shift", shift)
    r.add("pad_weight", schedule.pad_weight())
    r.add("max_grid", alloc.K)
    r.add("stages", alloc.stage)
    r.add("cones_total", sum(alloc.count(x) for x in all_strings(alloc.depth)))
    r.add("level", cfg.level)

    image = image_semimeasure(alloc)
    _flag(r, "image_equals_rounded", [] if image == final.table else ["mismatch"])
    if cfg.level == "exhaustive":
        outputs = all_outputs(alloc)
        oracle = brute_force_image(alloc, outputs)
        _flag(r, "oracle_image_equals_rounded", [] if oracle == final.table else ["mismatch"])
        _flag(r, "bit_budget", bit_budget_violations(alloc, outputs))
    else:
        r.add("oracle_image_equals_rounded", "skipped")
        r.add("bit_budget", "skipped")
    _flag(r, "round_trip", round_trip_failures(alloc))

    for n in range(table.depth + 1):
        lens = [alloc.grid(x) for x in strings_of_length(n)]
        r.add(f"level.{n}.code_len", f"{min(lens)}..{max(lens)}")
    for x in all_strings(table.depth):
        if not alloc.count(x):
            continue
        q = table[x]
        neg = ceil_neg_log2(q) if q else "inf"
        r.add("code", f"{render_bits(x)} len={alloc.grid(x)} ceil_neglog2={neg}")
    return r


# ---------------------------------------------------------------------------
# independent report validation


def _ceil_neglog2_slow(q: Fraction) -> int:
    """Smallest ``k`` with ``2**-k <= q``, by stepping through powers of two."""
    k = 0
    if q >= 1:
        while Fraction(2) ** (1 - k) <= q:
            k -= 1
    else:
        while Fraction(1, 2 ** k) > q:
            k += 1
    return k


def check_report(report: Report, table: SemimeasureTable, alloc: Allocation,
                 shift: int, slack: int | None) -> list[str]:
    """Recompute the per-string code lines without the schedule objects.

    For a budget schedule the expected length is the monotonized
    ``ceil(-log2 Q) + slack + shift + 1``; for all schedules it must match
    the length of the least stem actually allocated.
    """
    problems = []
    expected: dict[str, int] = {}
    if slack is not None:
        for x in all_strings(table.depth):
            raw = max(0, _ceil_neglog2_slow(table[x].to_fraction()) + slack)
            expected[x] = raw if not x else max(raw, expected[x[:-1]])
    seen = 0
    for line in report.lines:
        key, _, value = line.partition(" ")
        if key != "code":
            continue
        seen += 1
        xs, length, neg = value.split()
        x = "" if xs == "-" else xs
        length = int(length.split("=")[1])
        neg = neg.split("=")[1]
        idx = alloc.cone_indices(x)
        if not idx:
            problems.append(f"{xs}: reported but has no cones")
            continue
        stem = format(min(idx), f"0{alloc.grid(x)}b")
        if len(stem) != length:
            problems.append(f"{xs}: reported length {length}, allocated stem has {len(stem)}")
        q = table[x].to_fraction()
        if neg != ("inf" if q == 0 else str(_ceil_neglog2_slow(q))):
            problems.append(f"{xs}: reported ceil(-log2 Q) {neg} is wrong")
        if slack is not None and length != expected[x] + shift + 1:
            problems.append(f"{xs}: length {length} != budget {expected[x]} + {shift} + 1")
        d = decode(alloc, stem, len(x))
        if d.bits != x:
            problems.append(f"{xs}: code does not decode back")
    covered = sum(1 for x in all_strings(table.depth) if alloc.count(x))
    if seen != covered:
        problems.append(f"report lists {seen} strings, {covered} have positive mass")
    return problems


# ---------------------------------------------------------------------------
# stream compression


@dataclass
class CompressResult:
    target: str
    code: str
    committed: list      # committed length after each prefix, index = prefix length
    budgets: list        # grid of each prefix
    report: Report


def compress_bits(alloc: Allocation, bits: str) -> CompressResult:
    if len(bits) > alloc.depth:
        raise ValueError(f"input has {len(bits)} bits, allocation depth is {alloc.depth}")
    stream = CodeStream(alloc)
    committed = [len(stream.committed)]
    for b in bits:
        stream.feed(b)
        committed.append(len(stream.committed))
    code = stream.finalize()
    budgets = [alloc.grid(bits[:n]) for n in range(len(bits) + 1)]
    r = Report()
    r.add("input_bits", len(bits))
    for n, (c, g) in enumerate(zip(committed, budgets)):
        r.add("prefix", f"{n} committed={c} budget={g}")
    r.add("code_bits", len(code))
    over = [n for n, (c, g) in enumerate(zip(committed, budgets)) if c > g]
    if over or decode(alloc, code, len(bits)).bits != bits:
        r.ok = False
    r.add("status", "ok" if r.ok else "failed")
    return CompressResult(bits, code, committed, budgets, r)


def compress_file(alloc: Allocation, data: bytes) -> CompressResult:
    """Compress raw bytes, unpacked most-significant bit first."""
    return compress_bits(alloc, bytes_to_bits(data))


def decompress_bits(alloc: Allocation, code: str, n: int | None = None) -> str:
    """Inverse of :func:`compress_bits`; ``n=None`` returns the full map output."""
    if n is None:
        return apply_map(alloc, code)
    d = decode(alloc, code, n)
    if not d.complete:
        raise ValueError(f"code only determines {d.underdetermined} of {n} bits")
    return d.bits
