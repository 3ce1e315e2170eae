"""Adapter that crashes on its first launch and works from the second on.

A sentinel file passed as argv[1] records that the first launch happened.
"""

import json
import os
import sys

sentinel = sys.argv[1]
if not os.path.exists(sentinel):
    with open(sentinel, "w") as handle:
        handle.write("launched once\n")
    sys.stderr.write("first launch, dying\n")
    sys.exit(1)

for line in sys.stdin:
    msg = json.loads(line)
    if msg["op"] == "hello":
        reply = {"protocol_version": 1, "name": "flaky", "supports_covariates": False}
    else:
        reply = {"values": [[row[-1]] * msg["horizon"] for row in msg["context"]]}
    sys.stdout.write(json.dumps(reply) + "\n")
    sys.stdout.flush()
