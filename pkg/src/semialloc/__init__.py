"""Exact dyadic semimeasures, cone allocation and prefix-monotone coding."""
from .allocator import (Allocation, apply_map, build_allocation, image_semimeasure,
                        preimage)
from .bitcore import Cone, Dyadic, cone_measure, cones_disjoint, dyadic_floor_strict
from .models import budget_schedule_of, realize
from .reduction import (CodeStream, TestAssignment, decode, encode, find_low_test_preimage,
                        verify_nested_witnesses)
from .rounding import RoundedTable, pad_and_round, round_stages
from .schedule import LengthSchedule, StringSchedule, d_linear, d_twolog, parse_d_expr
from .semimeasure import (SemimeasureTable, finite_string_mass, mix, pad_semimeasure,
                          validate)

__version__ = "0.1.0"
