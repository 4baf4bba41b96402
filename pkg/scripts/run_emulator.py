#!/usr/bin/env python3
"""Serve a machine emulator on a local TCP socket.

Point `wirebend run <file> --port tcp:HOST:PORT` (or the HTTP service's
--machine flag) at it.  `--time-scale 1` executes at physical motion speeds;
the default 0 is instant.
"""

from __future__ import annotations

import argparse
import time

from wirebend.machine import load_profile
from wirebend.protocol import EmulatorServer


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=9477)
    parser.add_argument("--profile", default=None, help="machine profile JSON")
    parser.add_argument("--time-scale", type=float, default=0.0,
                        help="motion duration multiplier (0 = instant)")
    args = parser.parse_args()

    server = EmulatorServer(load_profile(args.profile), host=args.host,
                            port=args.port, time_scale=args.time_scale)
    server.start()
    print(f"emulator listening on tcp:{server.address[0]}:{server.address[1]}")
    try:
        while True:
            time.sleep(1.0)
    except KeyboardInterrupt:
        server.close()


if __name__ == "__main__":
    main()
