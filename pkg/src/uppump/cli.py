"""Command-line entry point: ``uppump {spectra,rates,evolve} -c CONFIG``.

Exit status: 0 success, 2 configuration error, 3 numerical invariant
violated during evolution, 4 file-system error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import replace

from . import __version__
from .config import ConfigError, load, shipped_configs
from .lindblad import NumericalInvariantError
from .workflows import run_evolve, run_rates, run_spectra

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4
THREADS_ENV = "UPPUMP_THREADS"

log = logging.getLogger("uppump")


def thread_count(default: int = 1) -> int:
    """Worker threads for the frequency sweep, from ``UPPUMP_THREADS``."""
    raw = os.environ.get(THREADS_ENV, "").strip()
    if not raw:
        return default
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV}={raw!r} is not an integer") from None
    if n < 1:
        raise ConfigError(f"{THREADS_ENV} must be >= 1")
    return n


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="uppump",
        description="Shock-induced vibrational up-pumping: bath spectra, "
                    "doorway-mode rates and master-equation dynamics.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "spectra": "draw the phonon bath and write bath.csv",
        "rates": "sweep drive and dissipation rates over mode frequency",
        "evolve": "integrate the vibrational master equation",
    }
    shipped = ", ".join(shipped_configs())
    for name, text in helps.items():
        p = sub.add_parser(name, help=text, description=text)
        p.add_argument("-c", "--config", required=True,
                       help=f"config file, or the name of a shipped config ({shipped})")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--out-dir", help="output directory (default: the config's output_dir)")
        p.add_argument("--figures", action="store_true",
                       help="also render PNG figures next to the CSV output")
        p.add_argument("-v", "--verbose", action="store_true")
        if name == "evolve":
            p.add_argument("--tau-end", type=float, help="override the integration horizon")
    return parser


def _figures(command, result, out_dir):
    from . import plotting
    if command == "spectra":
        return [plotting.plot_bath(result.bath, out_dir)]
    if command == "rates":
        return plotting.plot_rates(result, out_dir)
    return [plotting.plot_observables(result.rows, result.header, out_dir)]


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load(args.config)
        if args.seed is not None:
            cfg = cfg.with_seed(args.seed)
        if getattr(args, "tau_end", None) is not None:
            if not args.tau_end > 0:
                raise ConfigError("--tau-end must be positive")
            cfg = replace(cfg, integrator=replace(cfg.integrator, tau_end=args.tau_end))
        workers = thread_count(cfg.rates.workers)
        out_dir = args.out_dir if args.out_dir is not None else cfg.output_dir

        if args.command == "spectra":
            result = run_spectra(cfg, out_dir)
            print(result.summary)
            paths = [result.path]
        elif args.command == "rates":
            result = run_rates(cfg, out_dir, workers=workers)
            paths = list(result.paths)
        else:
            progress = (lambda tau: log.info("tau = %.6g", tau)) if args.verbose else None
            result = run_evolve(cfg, out_dir, progress=progress)
            last = result.rows[-1]
            n = (len(result.header) - 4) // 2
            pops = " ".join(f"n{k + 1}={last[1 + k]:.6g}" for k in range(n))
            print(f"tau={last[0]:.6g} {pops}")
            paths = [result.path]
        if args.figures:
            paths += _figures(args.command, result, out_dir)
        for p in paths:
            print(f"wrote {p}")
    except ConfigError as exc:
        print(f"uppump: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalInvariantError as exc:
        print(f"uppump: numerical invariant violated: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"uppump: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        # physically invalid values that only surface once objects are built
        print(f"uppump: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
