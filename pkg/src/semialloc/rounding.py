"""Pad, average and round a semimeasure onto a per-string dyadic grid.

Given a semimeasure ``M`` and a schedule with budgets ``b(x)``, let ``S`` be
the schedule's pad (gap exactly ``2**-b(x)`` at ``x``) and
``A = (M + S) / 2``, whose gap at ``x`` is at least ``2**-(b(x)+1)``.  Each
value of ``A`` is replaced by the largest multiple of ``2**-(b(x)+1)``
strictly below it and the root is set to 1.  The rounding loses less than
one grid cell, which the gap absorbs, so:

* the result is again a semimeasure,
* ``R(x) >= M(x) / 2`` away from the root,
* a pointwise monotone sequence of inputs rounds to a monotone sequence.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .bitcore import ONE, Dyadic
from .errors import InvalidInput, NotMonotoneStages
from .schedule import Schedule
from .semimeasure import (SemimeasureTable, is_monotone_sequence, schedule_pad,
                          stage_violations, validate)


@dataclass(frozen=True)
class RoundedTable:
    table: SemimeasureTable
    schedule: Schedule

    @property
    def depth(self) -> int:
        return self.table.depth

    def __getitem__(self, x: str) -> Dyadic:
        return self.table[x]

    def grid_violations(self) -> list[str]:
        g = self.schedule.grid
        return [x for x, v in self.table.items() if not v.on_grid(g(x))]


def pad_and_round(M: SemimeasureTable, schedule: Schedule,
                  pad: SemimeasureTable | None = None) -> RoundedTable:
    """Round ``(M + pad) / 2`` strictly down onto the schedule's grid.

    ``pad`` may be passed to reuse a precomputed ``schedule_pad(schedule)``.
    """
    if schedule.depth != M.depth:
        raise InvalidInput(f"schedule depth {schedule.depth} != table depth {M.depth}")
    bad = validate(M)
    if bad:
        raise InvalidInput(f"input is not a semimeasure: {bad[0]}")
    schedule.check_weight()
    if pad is None:
        pad = schedule_pad(schedule)
    out = {}
    m_vals = M._values
    s_vals = pad._values
    grid = schedule.grid
    for x, s in s_vals.items():
        out[x] = (m_vals[x] + s).halve().floor_strict(grid(x))
    out[""] = ONE
    return RoundedTable(SemimeasureTable(M.depth, out), schedule)


def round_stages(stages: Sequence[SemimeasureTable], schedule: Schedule) -> list[RoundedTable]:
    """Round every stage with one shared pad; the output stays monotone."""
    if not stages:
        return []
    if not is_monotone_sequence(stages):
        bad = [v for v in stage_violations(stages) if v[1].kind == "stage"]
        i, v = bad[0]
        raise NotMonotoneStages(f"stage {i} {v}")
    pad = schedule_pad(schedule)
    return [pad_and_round(s, schedule, pad) for s in stages]
