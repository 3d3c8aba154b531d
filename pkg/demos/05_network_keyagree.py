"""
Key agreement over a socket
===========================

Each party runs in its own thread and talks over TCP on the loopback
interface. Only inputs, output bits and, every 25 rounds, a digest of the
weights cross the wire. The command line equivalent is

    tpmkey keyagree --listen --seed 1 --out a.hex
    tpmkey keyagree --connect 127.0.0.1 --seed 1 --out b.hex
"""

import threading

import numpy as np

from tpmkey import Role, TpmParams, distill
from tpmkey.netlink import Input, accept, connect, listen, run_remote_session

params = TpmParams(3, 8, 3, 60)
server = listen("127.0.0.1", 0)
port = server.getsockname()[1]
reports = {}


def recipient():
    with accept(server) as channel:
        reports["recipient"] = run_remote_session(channel, params, Role.RECIPIENT, seed_weights=2)


thread = threading.Thread(target=recipient)
thread.start()
with connect("127.0.0.1", port, record=True) as channel:
    reports["sender"] = run_remote_session(channel, params, Role.SENDER, seed_weights=1, seed_inputs=3)
    sent = channel.sent
thread.join()
server.close()

for name, report in reports.items():
    print(f"{name:9s} {report.status.value} after {report.iterations} rounds")

# %% What went over the wire
kinds = {}
for message in sent:
    kinds[type(message).__name__] = kinds.get(type(message).__name__, 0) + 1
print("sender messages:", kinds)
print("first input (first 10 values):", next(m for m in sent if isinstance(m, Input)).values[:10])

# %% Both ends derive the same key locally
a = distill(reports["sender"].final_weights, params)
b = distill(reports["recipient"].final_weights, params)
print(f"{a.size}-bit keys identical: {np.array_equal(a, b)}")
