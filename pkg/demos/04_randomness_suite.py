"""
Are the keys random?
====================

Raw synchronized weights fail most of the NIST SP 800-22 tests. The
distilled keys pass. Each column concatenates the streams of many
sessions; pass a session count as the first argument (default 300).
"""

import sys

from tpmkey import TpmParams
from tpmkey.cli import render_table
from tpmkey.experiment import after_distillation_stream, before_equalization_stream, run_batch
from tpmkey.randsuite import run_suite

sessions = int(sys.argv[1]) if len(sys.argv) > 1 else 300
batch = run_batch(TpmParams(3, 8, 5, 60), sessions, master_seed=0)

before = before_equalization_stream(batch)
after = after_distillation_stream(batch)
print(f"{sessions} sessions: {before.size} raw bits, {after.size} distilled bits\n")

# Tests whose input is too short for a meaningful verdict show n/a.
print(render_table({"raw weights": run_suite(before), "distilled": run_suite(after)}))
