"""Command-line front end: ``sweep``, ``verify`` and ``gap``.

A sweep config is flat ``key = value`` text, one entry per line, with
``#`` starting a comment::

    network = SINGLE_FD
    schemes = QMF_NOISE_LEVEL, QMF_CSIR, QMF_GLOBAL, DF, HYBRID, CUTSET
    ratios = 1, 1, 1          # mean link gains relative to the x-axis SNR
    r = 0.3                   # or: rate = 2.0 for a fixed target
    snr_db = 0, 40, 2         # start, stop (inclusive), step
    trials = 100000
    seed = 1
    output = fig.csv

Exit codes: 0 success, 1 failed verification, 2 bad usage or config,
3 I/O failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import os
import sys

import numpy as np

from . import diamond, verify
from .channel import RateSpec
from .errors import QmfoptError
from .outage import Network, Scheme, SchemeSpec, SweepRow, sweep

CSV_HEADER = "snr_db,scheme,rate_bits,outage,trials,ci95"
KEYS = ("network", "schemes", "n_relays", "ratios", "r", "rate", "snr_db", "trials", "seed",
        "output")


class ConfigError(ValueError):
    """A config entry is missing or malformed; ``key`` names it."""

    def __init__(self, key: str, message: str):
        super().__init__(f"config key '{key}': {message}")
        self.key = key


@dataclasses.dataclass(frozen=True)
class RunConfig:
    network: Network
    schemes: tuple[Scheme, ...]
    n_relays: int
    ratios: tuple[float, ...]
    rate: RateSpec
    snr_db: tuple[float, float, float]
    trials: int = 100_000
    seed: int = 0
    output: str | None = None

    @property
    def specs(self) -> list[SchemeSpec]:
        return [SchemeSpec(self.network, s, self.n_relays) for s in self.schemes]

    @property
    def snr_grid(self) -> np.ndarray:
        start, stop, step = self.snr_db
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return start + step * np.arange(max(count, 0))

    @classmethod
    def parse(cls, text: str) -> "RunConfig":
        raw: dict[str, str] = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            key = key.strip().lower()
            if not sep:
                raise ConfigError(key or f"line {lineno}", "expected key = value")
            if key not in KEYS:
                raise ConfigError(key, "unknown key")
            if key in raw:
                raise ConfigError(key, "given twice")
            raw[key] = value.strip()
        return cls._from_raw(raw)

    @classmethod
    def _from_raw(cls, raw: dict[str, str]) -> "RunConfig":
        def need(key):
            if key not in raw or not raw[key]:
                raise ConfigError(key, "missing")
            return raw[key]

        def num(key, conv, text):
            try:
                return conv(text)
            except ValueError:
                raise ConfigError(key, f"not a number: {text!r}") from None

        try:
            network = Network(need("network").upper())
        except ValueError:
            raise ConfigError("network", f"unknown network {raw['network']!r}") from None
        names = [s.strip().upper() for s in raw.get("schemes", "").split(",") if s.strip()]
        if not names:
            raise ConfigError("schemes", "empty scheme list")
        try:
            schemes = tuple(Scheme(s) for s in names)
        except ValueError as exc:
            raise ConfigError("schemes", str(exc)) from None
        n_relays = num("n_relays", int, raw.get("n_relays", "2" if network is Network.DIAMOND else "1"))
        n_links = 2 * n_relays if network is Network.DIAMOND else 3
        if "ratios" in raw:
            ratios = tuple(num("ratios", float, x) for x in raw["ratios"].split(","))
        else:
            ratios = (1.0,) * n_links
        if len(ratios) != n_links or not all(x > 0.0 and math.isfinite(x) for x in ratios):
            raise ConfigError("ratios", f"need {n_links} positive values")
        if ("r" in raw) == ("rate" in raw):
            raise ConfigError("r", "give exactly one of r and rate")
        try:
            rate = (RateSpec(r=num("r", float, raw["r"])) if "r" in raw
                    else RateSpec(fixed_rate=num("rate", float, raw["rate"])))
        except ValueError as exc:
            raise ConfigError("r" if "r" in raw else "rate", str(exc)) from None
        parts = [num("snr_db", float, x) for x in need("snr_db").split(",")]
        if len(parts) != 3 or not parts[2] > 0.0 or parts[1] < parts[0]:
            raise ConfigError("snr_db", "expected start, stop, step with step > 0 and stop >= start")
        trials = int(num("trials", float, raw.get("trials", "100000")))
        if trials < 1:
            raise ConfigError("trials", "must be positive")
        seed = num("seed", int, raw.get("seed", "0"))
        cfg = cls(network, schemes, n_relays, ratios, rate, tuple(parts), trials, seed,
                  raw.get("output") or None)
        try:
            cfg.specs
        except QmfoptError as exc:
            raise ConfigError("schemes", str(exc)) from None
        return cfg


def format_rows(rows: list[SweepRow]) -> str:
    lines = [CSV_HEADER]
    for row in rows:
        e = row.estimate
        lines.append(f"{row.snr_db:.6g},{row.scheme},{row.rate_bits:.6g},{e.p_hat:.6g},"
                     f"{e.trials:d},{e.ci95_halfwidth:.6g}")
    return "\n".join(lines) + "\n"


def run_sweep(cfg: RunConfig, out: str, threads: int | None = None) -> str:
    """Run the sweep and write its CSV to ``out``; returns the CSV text."""
    rows = sweep(cfg.specs, cfg.ratios, cfg.rate, cfg.snr_grid, cfg.trials, cfg.seed, threads)
    text = format_rows(rows)
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return text


def _cmd_sweep(args) -> int:
    try:
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 3
    try:
        cfg = RunConfig.parse(text)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.trials is not None:
        cfg = dataclasses.replace(cfg, trials=args.trials)
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    out = args.out or cfg.output
    if not out:
        print("error: config key 'output': missing (or pass --out)", file=sys.stderr)
        return 2
    parent = os.path.dirname(os.path.abspath(out))
    if not os.path.isdir(parent) or not os.access(parent, os.W_OK):
        print(f"error: cannot write {out}", file=sys.stderr)
        return 3
    try:
        run_sweep(cfg, out, args.threads)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    return 0


def _cmd_verify(args) -> int:
    if args.suite not in verify.SUITES:
        print(f"error: unknown suite {args.suite!r}; choose from {', '.join(verify.SUITES)}",
              file=sys.stderr)
        return 2
    checks = verify.run_suite(args.suite)
    for c in checks:
        print(c.line())
    failed = sum(not c.ok for c in checks)
    print(f"{args.suite}: {len(checks) - failed}/{len(checks)} passed")
    return 1 if failed else 0


def _cmd_gap(args) -> int:
    if args.n < 2:
        print("error: --n must be at least 2", file=sys.stderr)
        return 2
    print(f"delta_opt={diamond.universal_delta_opt(args.n):.10g}")
    print(f"gap_star={diamond.gap_star(args.n):.10g}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qmfopt", description="QMF relaying optimizers and outage sweeps")
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("sweep", help="Monte Carlo outage sweep to CSV")
    s.add_argument("--config", required=True)
    s.add_argument("--out")
    s.add_argument("--trials", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--threads", type=int, help="worker threads (default: QMFOPT_THREADS or CPUs)")
    s.set_defaults(func=_cmd_sweep)
    v = sub.add_parser("verify", help="run an oracle cross-check suite")
    v.add_argument("suite")
    v.set_defaults(func=_cmd_verify)
    g = sub.add_parser("gap", help="universal quantizer and its worst-case gap")
    g.add_argument("--n", type=int, required=True)
    g.set_defaults(func=_cmd_gap)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
