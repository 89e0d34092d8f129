"""Toeplitz approximation of symbol sequences, with exact finitary checks."""

from ._kernels import BACKEND
from .complexity import aligned_words, block_count, blocks, entropy_estimate, verify_complexity_chain
from .construct import (ConstructionTrace, StageParams, build, check_stabilization, provenance_at,
                        schedule, stage_step, verify_stage_properties)
from .metrics import (difference_density, max_gap, periodic_positions, returning_times,
                      toeplitz_coverage)
from .mobius import correlate, mertens, mobius_sieve
from .seq import (Alphabet, BiSequence, CylinderSpec, Word, eval_at, parse_source_spec, shift,
                  window)

__version__ = "0.1.0"
