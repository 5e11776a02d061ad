"""Command-line front end.

Subcommands::

    gen-data    synthetic dataset CSV
    fit-priors  bootstrap priors JSON and Q-Q CSVs
    sample      Gibbs chain CSV and posterior summary JSON
    curve       failure-probability curve CSV
    decide      fidelity decision JSON; exit status 0/2/3 by level

Every command accepts ``--config FILE`` (JSON).  Precedence is built-in
defaults < config file < command-line flags.  The resolved configuration is
printed to stderr before running and stored next to every output.
Errors exit with status 1.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import synth
from .dataset import load_csv, write_csv
from .decision import DecisionConfig, decide
from .failure import ESTIMATORS, FailureCurve, failure_curve
from .gibbs import SCANS, PosteriorChain, PosteriorSummary, run_chain, summarize
from .priors import PriorSpec, estimate_priors, prior_qq, write_qq_csv

DEFAULTS = {
    "gen-data": {"preset": "facility_like", "spec": None, "seed": None, "n": None, "out": None},
    "fit-priors": {
        "data": None, "n_boot": 1000, "sample_size": 500, "seed": 0,
        "out": None, "qq_dir": None, "workers": 1,
    },
    "sample": {
        "priors": None, "data": None, "iterations": 5000, "burn_in": 1000,
        "seed": 0, "scan": "block", "out": None, "summary": None,
    },
    "curve": {
        "summary": None, "chain": None, "data": None, "baseline": None,
        "demand": None, "estimator": "plug-in", "t_max": 100.0, "t_step": 1.0,
        "growth_rate": 0.01, "mc_draws": 100_000, "seed": 0, "out": None,
    },
    "decide": {
        "curve": None, "m_max": None, "demand": None, "shift_minutes": 420.0,
        "tactical_floor": 1.0, "growth": None, "out": None,
    },
}

REQUIRED = {
    "gen-data": ("out",),
    "fit-priors": ("data", "out"),
    "sample": ("priors", "data", "out"),
    "curve": ("demand", "out"),
    "decide": ("curve", "m_max", "demand", "growth"),
}


class UsageError(Exception):
    pass


class StageError(Exception):
    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"[{stage}] {cause}")


class _Parser(argparse.ArgumentParser):
    # statuses 2 and 3 are reserved for decision levels
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _stage(stage, fn, /, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except (UsageError, StageError):
        raise
    except Exception as exc:  # noqa: BLE001
        raise StageError(stage, exc) from exc


def _write_json(path, doc) -> None:
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def _sidecar(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".json")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_gen_data(cfg: dict) -> int:
    if cfg["spec"]:
        spec = _stage("load-spec", synth.GeneratorSpec.from_json, cfg["spec"])
        if cfg["seed"] is not None:
            spec = synth.GeneratorSpec(**{**spec.__dict__, "seed": int(cfg["seed"])})
    else:
        if cfg["preset"] not in synth.PRESETS:
            raise UsageError(f"unknown preset {cfg['preset']!r}; choose from {sorted(synth.PRESETS)}")
        kwargs = {"seed": int(cfg["seed"])}
        if cfg["n"] is not None:
            kwargs["n"] = int(cfg["n"])
        spec = synth.PRESETS[cfg["preset"]](**kwargs)
    data = _stage("generate", synth.generate, spec, name="synthetic" if cfg["spec"] else cfg["preset"])
    write_csv(data, cfg["out"])
    _write_json(_sidecar(cfg["out"]), {"config": cfg, "generator": spec.__dict__})
    return 0


def cmd_fit_priors(cfg: dict) -> int:
    data = _stage("load-data", load_csv, cfg["data"])
    spec = _stage(
        "priors", estimate_priors, data,
        n_boot=int(cfg["n_boot"]), sample_size=int(cfg["sample_size"]),
        seed=int(cfg["seed"]), workers=int(cfg["workers"]),
    )
    spec.to_json(cfg["out"], extra={"predictors": list(data.predictor_names), "config": cfg})
    if cfg["qq_dir"]:
        qq_dir = Path(cfg["qq_dir"])
        qq_dir.mkdir(parents=True, exist_ok=True)
        files = []
        for name, pts in prior_qq(spec).items():
            fname = f"qq_{name}.csv"
            write_qq_csv(pts, qq_dir / fname)
            files.append(fname)
        _write_json(qq_dir / "qq_manifest.json", {"files": files, "config": cfg})
    return 0


def cmd_sample(cfg: dict) -> int:
    priors = _stage("load-priors", PriorSpec.from_json, cfg["priors"])
    data = _stage("load-data", load_csv, cfg["data"])
    chain = _stage(
        "gibbs", run_chain, priors, data,
        iterations=int(cfg["iterations"]), burn_in=int(cfg["burn_in"]),
        seed=int(cfg["seed"]), scan=cfg["scan"],
    )
    chain.to_csv(cfg["out"], extra={"config": cfg})
    summary_path = cfg["summary"] or str(Path(cfg["out"]).with_suffix("")) + "_summary.json"
    summarize(chain).to_json(summary_path, extra={"config": cfg})
    return 0


def _parse_baseline(text: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in text.split(",")])
    except ValueError:
        raise UsageError(f"--baseline must be comma-separated numbers, got {text!r}") from None


def cmd_curve(cfg: dict) -> int:
    if bool(cfg["summary"]) == bool(cfg["chain"]):
        raise UsageError("give exactly one of --summary or --chain")
    if cfg["estimator"] not in ESTIMATORS:
        raise UsageError(f"--estimator must be one of {ESTIMATORS}")
    if cfg["summary"]:
        if cfg["estimator"] == "monte-carlo":
            raise UsageError("the monte-carlo estimator needs --chain")
        model = _stage("load-model", PosteriorSummary.from_json, cfg["summary"])
    else:
        model = _stage("load-model", PosteriorChain.from_csv, cfg["chain"])
    if cfg["baseline"] is not None:
        baseline = _parse_baseline(str(cfg["baseline"]))
    elif cfg["data"]:
        baseline = _stage("load-data", load_csv, cfg["data"]).predictor_means()
    else:
        raise UsageError("give --baseline or --data (baseline = column means)")
    t_max, t_step = float(cfg["t_max"]), float(cfg["t_step"])
    if not (t_max > 0 and t_step > 0):
        raise UsageError("--t-max and --t-step must be positive")
    grid = np.arange(0.0, t_max + 0.5 * t_step, t_step)
    curve = _stage(
        "failure", failure_curve, model, baseline, float(cfg["demand"]),
        t_grid=grid, estimator=cfg["estimator"], seed=int(cfg["seed"]),
        growth_rate=float(cfg["growth_rate"]), mc_draws=int(cfg["mc_draws"]),
    )
    curve.to_csv(cfg["out"])
    curve.to_json(_sidecar(cfg["out"]), extra={"config": cfg})
    return 0


def cmd_decide(cfg: dict) -> int:
    growth = float(cfg["growth"])
    if growth < 0:
        raise UsageError("--growth must be nonnegative")
    try:
        config = DecisionConfig(
            m_max=float(cfg["m_max"]), demand=float(cfg["demand"]),
            shift_minutes=float(cfg["shift_minutes"]), tactical_floor=float(cfg["tactical_floor"]),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    curve = _stage("load-curve", FailureCurve.from_csv, cfg["curve"], demand=config.demand)
    decision = _stage("decision", decide, config, curve, growth)
    doc = {**decision.to_dict(), "config": cfg}
    text = json.dumps(doc, indent=2) + "\n"
    if cfg["out"]:
        Path(cfg["out"]).write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return decision.level.exit_code


COMMANDS = {
    "gen-data": cmd_gen_data,
    "fit-priors": cmd_fit_priors,
    "sample": cmd_sample,
    "curve": cmd_curve,
    "decide": cmd_decide,
}


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mcmcfidelity", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    S = argparse.SUPPRESS

    def add(name, help_):
        p = sub.add_parser(name, help=help_, argument_default=S)
        p.add_argument("--config", help="JSON file with option values")
        return p

    p = add("gen-data", "generate a synthetic dataset")
    p.add_argument("--preset", choices=sorted(synth.PRESETS))
    p.add_argument("--spec", help="GeneratorSpec JSON (overrides --preset)")
    p.add_argument("--seed", type=int)
    p.add_argument("--n", type=int, help="row count")
    p.add_argument("--out", help="dataset CSV to write")

    p = add("fit-priors", "bootstrap prior estimation")
    p.add_argument("--data")
    p.add_argument("--n-boot", dest="n_boot", type=int)
    p.add_argument("--sample-size", dest="sample_size", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--out", help="priors JSON to write")
    p.add_argument("--qq-dir", dest="qq_dir", help="directory for Q-Q CSVs")

    p = add("sample", "Gibbs posterior sampling")
    p.add_argument("--priors")
    p.add_argument("--data")
    p.add_argument("--iterations", type=int)
    p.add_argument("--burn-in", dest="burn_in", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--scan", choices=SCANS)
    p.add_argument("--out", help="chain CSV to write")
    p.add_argument("--summary", help="summary JSON (default: <out>_summary.json)")

    p = add("curve", "failure probability versus growth")
    p.add_argument("--summary")
    p.add_argument("--chain")
    p.add_argument("--data", help="dataset whose column means are the baseline")
    p.add_argument("--baseline", help="comma-separated baseline minutes")
    p.add_argument("--demand", type=float)
    p.add_argument("--estimator", choices=ESTIMATORS)
    p.add_argument("--t-max", dest="t_max", type=float)
    p.add_argument("--t-step", dest="t_step", type=float)
    p.add_argument("--growth-rate", dest="growth_rate", type=float,
                   help="fractional growth per percent step (default 0.01)")
    p.add_argument("--mc-draws", dest="mc_draws", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="curve CSV to write")

    p = add("decide", "classify observed growth")
    p.add_argument("--curve")
    p.add_argument("--m-max", dest="m_max", type=float)
    p.add_argument("--demand", type=float)
    p.add_argument("--shift-minutes", dest="shift_minutes", type=float)
    p.add_argument("--tactical-floor", dest="tactical_floor", type=float)
    p.add_argument("--growth", type=float, help="observed growth, percent")
    p.add_argument("--out", help="decision JSON to write (also printed)")
    return parser


def resolve_config(command: str, given: dict, config_path: str | None) -> dict:
    cfg = dict(DEFAULTS[command])
    if config_path:
        try:
            from_file = json.loads(Path(config_path).read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read config {config_path}: {exc}") from None
        unknown = set(from_file) - set(cfg)
        if unknown:
            raise UsageError(f"unknown config keys for {command}: {sorted(unknown)}")
        cfg.update(from_file)
    cfg.update(given)
    if command == "gen-data" and cfg["seed"] is None and not cfg["spec"]:
        cfg["seed"] = 0
    missing = [k for k in REQUIRED[command] if cfg.get(k) is None]
    if missing:
        flags = ", ".join("--" + k.replace("_", "-") for k in missing)
        raise UsageError(f"{command}: missing required option(s) {flags}")
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    ns = vars(parser.parse_args(argv))
    command = ns.pop("command")
    config_path = ns.pop("config", None)
    try:
        cfg = resolve_config(command, ns, config_path)
        print(json.dumps({"command": command, "config": cfg}, sort_keys=True), file=sys.stderr)
        return COMMANDS[command](cfg)
    except UsageError as exc:
        print(f"mcmcfidelity {command}: usage error: {exc}", file=sys.stderr)
        return 1
    except StageError as exc:
        print(f"mcmcfidelity {command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
