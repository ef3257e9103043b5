"""Command line entry point: one subcommand per experiment.

Exit codes: 0 ok, 1 validation error (bad config, refused domain),
2 numerical failure (or an experiment whose checks did not pass).
"""

import argparse
import json
import logging
import os
import sys

from .errors import NumericalError, ValidationError
from .experiments import KINDS, ExperimentConfig, run

log = logging.getLogger("nctorus")


def build_parser():
    p = argparse.ArgumentParser(prog="nctorus", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="kind", required=True)
    for kind in KINDS:
        sp = sub.add_parser(kind)
        sp.add_argument("--config", required=True, help="JSON experiment config")
        sp.add_argument("--out", default="reports", help="output directory")
        sp.add_argument("--threads", type=int, default=None, help="BLAS thread count")
        sp.add_argument("--verbose", action="store_true")
    return p


def _set_threads(k):
    if k:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ[var] = str(k)


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    _set_threads(args.threads)
    try:
        if not os.path.exists(args.config):
            raise ValidationError(f"config file {args.config} does not exist")
        with open(args.config) as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"config is not valid JSON: {exc}") from exc
        cfg = ExperimentConfig.from_dict(args.kind, data)
        rows, report = run(cfg, args.out)
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    log.info("wrote %d rows", len(rows))
    status = "PASS" if report["passed"] else "FAIL"
    print(f"{args.kind}: {status} {json.dumps(report['summary'], default=str)}")
    return 0 if report["passed"] else 2


if __name__ == "__main__":
    sys.exit(main())
