"""
Weights pile up at the bounds
=============================

After synchronization the weights are not uniform over [-L, L]: the two
extreme values are over-represented, more so for wider input alphabets.
Equalization flattens the histogram back to roughly 1/(2L+1) per value.

Pass a session count as the first argument (default 100; 1000 takes a few
minutes for M = 1).
"""

import sys

from tpmkey import TpmParams
from tpmkey.experiment import run_batch, summarize

sessions = int(sys.argv[1]) if len(sys.argv) > 1 else 100

for m in (1, 3, 5):
    summary = summarize(run_batch(TpmParams(3, 8, m, 60), sessions, master_seed=0))
    print(f"M={m}: mean rounds {summary.mean_iterations:7.1f}   "
          f"P(|w| = L) before {summary.before.extrema_mass():.3f}   "
          f"max |p - 1/17| after equalization {summary.after.max_deviation_from_uniform():.4f}")

# %% Histogram for the last batch, before and after
print("\n  w   before   after")
for v, pb, pa in zip(summary.before.values, summary.before.probs, summary.after.probs):
    print(f"{v:3d}   {pb:.4f}  {pa:.4f}  " + "#" * int(pb * 200))
