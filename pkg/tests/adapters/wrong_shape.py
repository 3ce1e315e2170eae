"""Adapter returning one extra forecast step per request."""

import json
import sys

for line in sys.stdin:
    msg = json.loads(line)
    if msg["op"] == "hello":
        reply = {"protocol_version": 1, "name": "wrong_shape", "supports_covariates": False}
    else:
        reply = {"values": [[0.0] * (msg["horizon"] + 1) for _ in msg["context"]]}
    sys.stdout.write(json.dumps(reply) + "\n")
    sys.stdout.flush()
