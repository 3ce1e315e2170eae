"""Well-behaved adapter: repeats each channel's last value plus a bias param."""

import json
import sys


def main():
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        msg = json.loads(line)
        if msg["op"] == "hello":
            reply = {
                "protocol_version": 1,
                "name": "repeat_last",
                "supports_covariates": False,
                "hyper_grid": {"bias": [0.0, 1.0]},
            }
        else:
            bias = msg.get("params", {}).get("bias", 0.0)
            horizon = msg["horizon"]
            reply = {
                "values": [[row[-1] + bias] * horizon for row in msg["context"]]
            }
        sys.stdout.write(json.dumps(reply) + "\n")
        sys.stdout.flush()


if __name__ == "__main__":
    main()
