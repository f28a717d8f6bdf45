"""Run every shipped config and print one status line per experiment.

    python scripts/run_all.py [--out results] [--only burgers sqg]
"""
import argparse
import sys
import time
from pathlib import Path

from vdl import cli

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="results")
    ap.add_argument("--only", nargs="*", help="config stems to run")
    args = ap.parse_args()
    status = {}
    for cfg in sorted(CONFIGS.glob("*.toml")):
        if args.only and cfg.stem not in args.only:
            continue
        start = time.perf_counter()
        code = cli.main(["run", "--config", str(cfg), "--out", str(Path(args.out) / cfg.stem)])
        status[cfg.stem] = (code, time.perf_counter() - start)
    print()
    for name, (code, secs) in status.items():
        print(f"{name:14s} {['pass', 'error', 'fail'][code]:6s} {secs:7.1f} s")
    return max((c for c, _ in status.values()), default=0)


if __name__ == "__main__":
    sys.exit(main())
