"""Command-line driver: ``infolag {analyze,sweep,synth,entropy}``.

Exit codes: 0 success, 1 pipeline or numerical error, 2 usage or input error.
"""

import argparse
import csv
import dataclasses
import hashlib
import json
import logging
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__, _backend
from .analysis import entropy_rate_comparison, write_comparison
from .exceptions import EmptyInputError, InfolagError, InsufficientDataError, ParseError
from .export import FORMATS, export_network
from .inference import (
    bonferroni_threshold,
    derive_seed,
    is_subnetwork,
    lag_sweep,
    n_tests_for,
    networks_for,
    score_pairs,
)
from .marketdata import build_lagged_pair, ingest_csv, log_returns
from .synth import gen_coupled, load_spec, write_prices_csv, write_truth_json

log = logging.getLogger("infolag")


class UsageError(InfolagError):
    pass


@dataclass
class RunConfig:
    input: str | None = None
    format: str = "wide"
    q: int = 4
    tau: int = 1
    lambdas: list = field(default_factory=lambda: list(range(11)))
    p: float = 0.01
    correction: str = "bonferroni"
    method: str = "gamma"
    statistic: str = "mi"
    shuffles: int = 1000
    seed: int = 0
    out: str = "out"
    export: list = field(default_factory=lambda: ["json"])
    include_self_tests: bool = True
    jobs: int = 1
    collapse_lag0: bool = False

    def validate(self):
        if self.format not in ("wide", "long"):
            raise UsageError(f"--format must be wide or long, got {self.format!r}")
        if self.q < 2:
            raise UsageError("--q must be at least 2")
        if self.tau < 1:
            raise UsageError("--tau must be positive")
        if not self.lambdas:
            raise UsageError("no lags given")
        if any(lam < 0 for lam in self.lambdas):
            raise UsageError("lags must be non-negative")
        if not 0 < self.p < 1:
            raise UsageError("--p must lie in (0, 1)")
        if self.correction not in ("bonferroni", "fdr"):
            raise UsageError("--correction must be bonferroni or fdr")
        if self.method not in ("gamma", "shuffle"):
            raise UsageError("--method must be gamma or shuffle")
        if self.statistic not in ("mi", "pearson"):
            raise UsageError("--statistic must be mi or pearson")
        if self.statistic == "pearson" and self.method != "shuffle":
            raise UsageError("Pearson scores are validated by shuffling only (use --method shuffle)")
        if self.shuffles < 1:
            raise UsageError("--shuffles must be positive")
        bad = [f for f in self.export if f not in FORMATS]
        if bad:
            raise UsageError(f"unknown export format(s): {', '.join(bad)}")
        return self

    def digest(self):
        blob = json.dumps(dataclasses.asdict(self), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


def parse_lambdas(text):
    """``"0..10"``, ``"1,3,5"`` or a mix such as ``"0..3,8"``."""
    if isinstance(text, list):
        return [int(v) for v in text]
    out = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        try:
            if ".." in part:
                lo, hi = part.split("..")
                out.extend(range(int(lo), int(hi) + 1))
            else:
                out.append(int(part))
        except ValueError:
            raise UsageError(f"cannot parse lag list {text!r}") from None
    return out


def _csv_list(text):
    return [t.strip() for t in str(text).split(",") if t.strip()]


_FLAG_KEYS = {
    "input": str, "format": str, "q": int, "tau": int, "lambdas": parse_lambdas, "p": float,
    "correction": str, "method": str, "statistic": str, "shuffles": int, "seed": int, "out": str,
    "export": _csv_list, "include_self_tests": bool, "jobs": int,
    "collapse_lag0": bool,
}


def build_config(args):
    """Defaults, then the JSON config file, then explicit flags."""
    values = {}
    if getattr(args, "config", None):
        path = Path(args.config)
        if not path.exists():
            raise UsageError(f"config file not found: {path}")
        try:
            values.update(json.loads(path.read_text()))
        except json.JSONDecodeError as exc:
            raise UsageError(f"invalid config file {path}: {exc}") from None
        unknown = set(values) - set(_FLAG_KEYS)
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
    for key in _FLAG_KEYS:
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    for key, conv in _FLAG_KEYS.items():
        if key in values and values[key] is not None:
            values[key] = conv(values[key])
    return RunConfig(**values).validate()


def _load_returns(cfg):
    if not cfg.input:
        raise UsageError("--input is required")
    path = Path(cfg.input)
    if not path.is_file():
        raise UsageError(f"input file not found: {path}")
    prices = ingest_csv(path, cfg.format)
    return prices, log_returns(prices, cfg.tau)


def _n_tests(cfg, n_assets):
    return n_tests_for(n_assets, cfg.include_self_tests)


def _report_base(cfg, prices):
    return {
        "tool": "infolag",
        "version": __version__,
        "backend": _backend.BACKEND,
        "seed": cfg.seed,
        "config": dataclasses.asdict(cfg),
        "config_hash": cfg.digest(),
        "n_assets": len(prices.symbols),
        "n_rows": prices.n_rows,
        "dropped_symbols": prices.dropped,
    }


def _write_json(path, doc):
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def cmd_analyze(cfg):
    started = time.perf_counter()
    prices, R = _load_returns(cfg)
    out = Path(cfg.out)
    (out / "networks").mkdir(parents=True, exist_ok=True)
    n_tests = _n_tests(cfg, len(R.symbols))
    per_lag = []
    with (out / "scores.csv").open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["lambda", "source", "target", "statistic", "p_value", "bonferroni", "fdr"])
        for lam in cfg.lambdas:
            try:
                pair = build_lagged_pair(R, lam)
                table = score_pairs(pair, cfg.q, cfg.method, cfg.statistic, cfg.shuffles,
                                    derive_seed(cfg.seed, lam), cfg.jobs)
            except InsufficientDataError as exc:
                log.warning("skipping lag %d: %s", lam, exc)
                continue
            nets = networks_for(table, cfg.p, ("bonferroni", "fdr"), n_tests)
            edges = {c: nets[c].edge_set() for c in nets}
            for s in table.pairs():
                key = (s.source, s.target)
                w.writerow([lam, s.source, s.target, repr(s.statistic), repr(s.p_value),
                            int(key in edges["bonferroni"]), int(key in edges["fdr"])])
            for fmt in cfg.export:
                path = out / "networks" / f"lag{lam:02d}_{cfg.correction}.{fmt}"
                export_network(nets[cfg.correction], path, fmt, collapse=cfg.collapse_lag0 and lam == 0)
            per_lag.append({
                "lambda": lam,
                "T": table.T,
                "bonferroni_threshold": bonferroni_threshold(cfg.p, n_tests),
                "count_bonferroni": len(nets["bonferroni"]),
                "count_fdr": len(nets["fdr"]),
                "bonferroni_subset_of_fdr": is_subnetwork(nets["bonferroni"], nets["fdr"]),
            })
    if not per_lag:
        raise InfolagError("no lag could be evaluated on this data")
    report = _report_base(cfg, prices)
    report.update({"n_tests": n_tests, "lags": per_lag,
                   "timing_seconds": round(time.perf_counter() - started, 3)})
    _write_json(out / "report.json", report)
    return report


def cmd_sweep(cfg):
    started = time.perf_counter()
    prices, R = _load_returns(cfg)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    n_tests = _n_tests(cfg, len(R.symbols))
    res = lag_sweep(R, cfg.lambdas, cfg.q, cfg.p, ("bonferroni", "fdr"), cfg.method, cfg.statistic,
                    cfg.shuffles, cfg.seed, n_tests, cfg.jobs)
    if not res.lambdas:
        raise InfolagError("no lag could be evaluated on this data")
    with (out / "sweep.csv").open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["lambda", "count_bonferroni", "count_fdr"])
        for lam, counts in res.rows():
            w.writerow([lam, counts["bonferroni"], counts["fdr"]])
    report = _report_base(cfg, prices)
    report.update({
        "n_tests": n_tests,
        "lambdas": res.lambdas,
        "link_counts": res.link_counts,
        "self_pair_counts": res.self_counts,
        "timing_seconds": round(time.perf_counter() - started, 3),
    })
    _write_json(out / "sweep_report.json", report)
    return res


def cmd_synth(spec_path, out, seed=None):
    path = Path(spec_path)
    if not path.is_file():
        raise UsageError(f"spec file not found: {path}")
    try:
        spec = load_spec(path)
    except (ValueError, TypeError, KeyError) as exc:
        raise UsageError(f"invalid synth spec {path}: {exc}") from None
    if seed is not None:
        spec.seed = seed
    prices, truth = gen_coupled(spec)
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    write_prices_csv(prices, out / "prices.csv")
    write_truth_json(truth, spec, out / "truth.json")
    return prices, truth


def cmd_entropy(cfg, n_permutations=9999):
    prices, R = _load_returns(cfg)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    summaries = {}
    for lam in cfg.lambdas:
        gc = entropy_rate_comparison(R, lam, cfg.q, cfg.p, cfg.correction, n_permutations,
                                     derive_seed(cfg.seed, lam))
        write_comparison(gc, out / f"entropy_lag{lam:02d}.csv", out / f"entropy_lag{lam:02d}.json")
        summaries[str(lam)] = gc.summary()
    report = _report_base(cfg, prices)
    report["comparisons"] = summaries
    _write_json(out / "entropy_report.json", report)
    return summaries


def _add_run_flags(p):
    p.add_argument("--config", help="JSON config file; flags override its keys")
    p.add_argument("--input", help="price CSV")
    p.add_argument("--format", choices=("wide", "long"))
    p.add_argument("--q", type=int, help="number of quantile bins (default 4)")
    p.add_argument("--tau", type=int, help="return horizon in data steps (default 1)")
    p.add_argument("--lambdas", help="lags, e.g. 0..10 or 1,3,5 (default 0..10)")
    p.add_argument("--p", type=float, help="nominal significance level (default 0.01)")
    p.add_argument("--correction", choices=("bonferroni", "fdr"))
    p.add_argument("--method", choices=("gamma", "shuffle"))
    p.add_argument("--statistic", choices=("mi", "pearson"))
    p.add_argument("--shuffles", type=int, help="surrogates for --method shuffle (default 1000)")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output directory")
    p.add_argument("--export", help="comma list of json,dot,graphml")
    p.add_argument("--exclude-self-tests", dest="include_self_tests", action="store_const", const=False,
                   help="count N(N-1) tests instead of N^2")
    p.add_argument("--jobs", type=int, help="threads for shuffle realizations")
    p.add_argument("--collapse-lag0", dest="collapse_lag0", action="store_const", const=True,
                   help="write mirrored lag-0 edge pairs once, as undirected edges")


def make_parser():
    parser = argparse.ArgumentParser(prog="infolag", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"infolag {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_run_flags(sub.add_parser("analyze", help="validated networks per lag"))
    _add_run_flags(sub.add_parser("sweep", help="validated-link counts vs lag"))
    ent = sub.add_parser("entropy", help="entropy rate of validated vs non-validated pairs")
    _add_run_flags(ent)
    ent.add_argument("--permutations", type=int, default=9999)
    syn = sub.add_parser("synth", help="generate a synthetic market")
    syn.add_argument("--spec", required=True, help="JSON synth spec")
    syn.add_argument("--out", required=True, help="output directory")
    syn.add_argument("--seed", type=int)
    return parser


def main(argv=None):
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "synth":
            cmd_synth(args.spec, args.out, args.seed)
            return 0
        cfg = build_config(args)
        if args.command == "analyze":
            cmd_analyze(cfg)
        elif args.command == "sweep":
            cmd_sweep(cfg)
        else:
            cmd_entropy(cfg, args.permutations)
        return 0
    except (UsageError, ParseError, EmptyInputError, FileNotFoundError) as exc:
        print(f"infolag: error: {exc}", file=sys.stderr)
        return 2
    except (InfolagError, ValueError, ArithmeticError, OSError) as exc:
        print(f"infolag: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
