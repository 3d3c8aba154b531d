"""
Two tree parity machines learning each other
============================================

Two parties start from independent random weights. They see the same
public inputs, publish only one output bit per round, and learn only
when those bits agree. Eventually their weight matrices coincide.
"""

import numpy as np

from tpmkey import Role, Session, TpmParams, check_sync, generate_input, run_round

params = TpmParams(K=3, L=8, M=1, N=60)
alice = Session.start(params, Role.SENDER, seed=1)
bob = Session.start(params, Role.RECIPIENT, seed=2)
inputs = np.random.default_rng(3)

# %% Distance between the two machines as learning goes on
print("round  differing weights")
while not check_sync(alice, bob):
    run_round(alice, bob, generate_input(params, inputs))
    if alice.round % 200 == 0:
        print(f"{alice.round:5d}  {int((alice.weights != bob.weights).sum()):4d}")

print(f"\nsynchronized after {alice.round} rounds, {alice.updates} of them with an update")

# %% Each side hashes the public inputs and both output bits, its own first,
# so the transcript digests differ while the weight digests match.
print("sender transcript digest   ", alice.transcript_digest().hex()[:32], "...")
print("recipient transcript digest", bob.transcript_digest().hex()[:32], "...")
print("weight digest (equal)      ", alice.digest().hex()[:32], "...")
