"""
From shared weights to a key
============================

Synchronized weights are biased, so they are not used as a key directly.
Distillation runs three steps: equalize the value frequencies, drop
enough weights to stay within the entropy the weights really carry, then
hash fixed-size blocks of the encoded remainder.
"""

import numpy as np

from tpmkey import TpmParams, distill_stages, run_session, secret_length, weight_distribution
from tpmkey.distill import DistillConfig, pack_bits

params = TpmParams(3, 8, 3, 60)
sender, recipient = run_session(params, seed_a=10, seed_b=11, seed_inputs=12)
assert sender.synchronized

stages = distill_stages(sender.final_weights, params)
d = weight_distribution(sender.final_weights, params.L)
print(f"weights                 {stages.weights.size}")
print(f"entropy per weight      {stages.entropy:.3f} bits (max {np.log2(17):.3f})")
print(f"entropy budget          {secret_length(params, d):.1f} bits")
print(f"weights kept by dropout {stages.kept.size}")
print(f"encoded bits            {stages.encoded.size}")
print(f"secret bits             {stages.secret.size}")
print("secret                 ", pack_bits(stages.secret).hex())

# %% The other party gets the same key without anything secret being sent
other = distill_stages(recipient.final_weights, params).secret
print("recipient agrees:      ", np.array_equal(other, stages.secret))

# %% Any hashlib algorithm works; the block size follows its digest
wide = distill_stages(sender.final_weights, params, DistillConfig("sha512")).secret
print("sha512 secret bits     ", wide.size)
