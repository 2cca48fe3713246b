"""Entry point: scoreserver --mixture FILE [--tcp HOST:PORT] [--log-level L]."""

import argparse
import sys

from .mixture import load_mixture
from .server import ServerConfig, serve


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="scoreserver",
        description="Serve Gaussian-mixture scores over the line-JSON protocol")
    parser.add_argument("--mixture", required=True,
                        help="mixture JSON file (weights/means/covariances)")
    parser.add_argument("--tcp", metavar="HOST:PORT",
                        help="listen on TCP instead of stdio")
    parser.add_argument("--log-level", default="warning",
                        choices=["debug", "info", "warning", "error"])
    args = parser.parse_args(argv)
    try:
        mixture = load_mixture(args.mixture)
    except (OSError, ValueError, KeyError) as exc:
        print(f"scoreserver: invalid mixture file: {exc}", file=sys.stderr)
        return 2
    try:
        serve(ServerConfig(mixture, tcp_address=args.tcp, log_level=args.log_level))
    except KeyboardInterrupt:
        pass
    return 0


if __name__ == "__main__":
    sys.exit(main())
