"""Command-line entry point.

Subcommands:

    run        one experiment -> per-step CSV (plus a JSON metadata sidecar)
    sweep      p_max x seed grid -> per-cell CSVs, regret-curve CSVs and an SVG chart
    certify    bound and invariant suite -> pass/fail report
    reference  solve the hindsight program pi* only -> JSON

Settings can also come from a flat ``key = value`` file passed with
``--config``. Flags given on the command line take precedence over file values.
Exit codes: 0 on success, 1 on invalid configuration, 2 on failed certification.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Sequence

import numpy as np

from ..losses import LossKind, TargetBatch
from ..processor import gtp
from .certify import run_certificates
from .experiment import (
    PAPER_P_MAXES,
    ExperimentConfig,
    dephasing_targets,
    mean_curves,
    run_online,
    run_sweep,
    solve_reference,
)
from .output import emit_csv, write_sweep
from .schedule import ScheduleSpec, gen_schedule

EXIT_OK, EXIT_CONFIG, EXIT_CERT = 0, 1, 2

DEFAULTS = {
    "loss": "trace",
    "p_min": 0.2,
    "p_max": None,
    "horizon": 150,
    "eta": "0.01",
    "seed": 0,
    "d_const": 2.0,
    "ref_iters": 120,
    "ref_base": 0.01,
    "out": None,
    "t_stride": 1,
    "seeds": None,
    "jobs": 1,
}
INT_KEYS = {"horizon", "seed", "ref_iters", "t_stride", "seeds", "jobs"}
FLOAT_KEYS = {"p_min", "d_const", "ref_base"}


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(f"{self.prog}: error: {message}")


def load_config_file(path: str) -> dict[str, str]:
    """Read ``key = value`` lines; ``#`` starts a comment, dashes in keys become underscores."""
    values = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in DEFAULTS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = value
    return values


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value settings file")
    common.add_argument("--loss", choices=("trace", "fidelity"))
    common.add_argument("--p-max", help="upper end of the dephasing range (comma list for sweep)")
    common.add_argument("--p-min", help="lower end of the dephasing range (default 0.2)")
    common.add_argument("--horizon", help="number of time steps T (default 150)")
    common.add_argument("--eta", help="learning rate, a number or 'theoretical' (default 0.01)")
    common.add_argument("--seed", help="64-bit unsigned seed (master seed for sweep)")
    common.add_argument("--d-const", help="stabilizing constant d added to the exponent (default 2)")
    common.add_argument("--ref-iters", help="batch iterations for the reference program (default 120)")
    common.add_argument("--ref-base", help="reference rate numerator; the rate is base/T (default 0.01)")
    common.add_argument("--out", help="output file or directory")

    parser = _Parser(prog="qprogsim", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("run", parents=[common], help="single online experiment")
    sw = sub.add_parser("sweep", parents=[common], help="normalized-regret sweep over p_max and seeds")
    sw.add_argument("--seeds", help="replicates per p_max (default 5)")
    sw.add_argument("--t-stride", help="evaluate T = stride, 2*stride, ... (default 1)")
    sw.add_argument("--jobs", help="worker processes (default 1)")
    ce = sub.add_parser("certify", parents=[common], help="regret-bound and invariant certificates")
    ce.add_argument("--seeds", help="seeds 0..N-1 per cell (default 10)")
    sub.add_parser("reference", parents=[common], help="solve the hindsight reference program")
    return parser


def _settings(args: argparse.Namespace) -> dict:
    merged = dict(DEFAULTS)
    if getattr(args, "config", None):
        merged.update(load_config_file(args.config))
    for key in DEFAULTS:
        val = getattr(args, key, None)
        if val is not None:
            merged[key] = val
    try:
        for key in INT_KEYS:
            if merged[key] is not None:
                merged[key] = int(merged[key])
        for key in FLOAT_KEYS:
            merged[key] = float(merged[key])
        eta = str(merged["eta"]).strip()
        merged["eta"] = eta if eta == "theoretical" else float(eta)
        if merged["p_max"] is not None:
            merged["p_max"] = [float(v) for v in str(merged["p_max"]).split(",") if v.strip()]
        merged["loss"] = LossKind.parse(merged["loss"])
    except ValueError as exc:
        raise ConfigError(f"invalid setting: {exc}") from exc
    if merged["t_stride"] < 1:
        raise ConfigError("t_stride must be at least 1")
    if merged["jobs"] < 1:
        raise ConfigError("jobs must be at least 1")
    return merged


def _single_p_max(s: dict) -> float:
    pm = s["p_max"]
    if pm is None:
        return s["p_min"]
    if len(pm) != 1:
        raise ConfigError("this subcommand takes a single --p-max value")
    return pm[0]


def _config(s: dict, p_max: float) -> ExperimentConfig:
    spec = ScheduleSpec("uniform_iid", s["p_min"], p_max, s["horizon"], s["seed"])
    return ExperimentConfig(spec, s["loss"], s["eta"], s["d_const"], s["ref_iters"], s["ref_base"],
                            s["out"] or "")


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    return str(o)


def _cmd_run(s: dict) -> int:
    cfg = _config(s, _single_p_max(s))
    r = run_online(cfg)
    out = s["out"] or "run.csv"
    emit_csv(r, out)
    meta = dict(r.metadata, regret=r.regret, normalized_regret=r.normalized_regret)
    with open(os.path.splitext(out)[0] + ".meta.json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, default=_json_default)
    print(f"T={r.horizon} regret={r.regret:.6g} normalized={r.normalized_regret:.6g} -> {out}")
    return EXIT_OK


def _cmd_sweep(s: dict) -> int:
    p_maxes = s["p_max"] or list(PAPER_P_MAXES)
    base = _config(s, p_maxes[0])
    horizons = list(range(s["t_stride"], s["horizon"] + 1, s["t_stride"]))
    if horizons[-1] != s["horizon"]:
        horizons.append(s["horizon"])
    outcomes = run_sweep(base, p_maxes, s["seeds"] or 5, s["seed"], horizons, s["jobs"])
    means = mean_curves(outcomes)
    paths = write_sweep(outcomes, means, s["out"] or "sweep_out")
    for c in means:
        print(f"p_max={c.p_max:g}: normalized regret at T={c.horizons[-1]} is {c.normalized_regret[-1]:.6g}")
    print(f"wrote {len(paths)} files to {s['out'] or 'sweep_out'}")
    return EXIT_OK


def _cmd_certify(s: dict) -> int:
    kwargs = {"loss": s["loss"], "base": _config(s, s["p_min"]),
              "seeds": tuple(range(s["seeds"] or 10))}
    if s["p_max"] is not None:
        kwargs["p_maxes"] = tuple(s["p_max"])
    if s["horizon"] != DEFAULTS["horizon"]:
        kwargs["horizons"] = (s["horizon"],)
    checks = run_certificates(**kwargs)
    report = "\n".join(c.line() for c in checks)
    print(report)
    if s["out"]:
        with open(s["out"], "w", encoding="utf-8") as fh:
            fh.write(report + "\n")
    return EXIT_OK if all(c.passed for c in checks) else EXIT_CERT


def _cmd_reference(s: dict) -> int:
    cfg = _config(s, _single_p_max(s))
    probs = gen_schedule(cfg.schedule)
    targets = dephasing_targets(probs)
    pi = solve_reference(targets, cfg)
    summed = float(TargetBatch(targets, cfg.loss).losses(gtp(), pi).sum())
    payload = {
        "horizon": len(probs),
        "loss": cfg.loss.value,
        "summed_loss": summed,
        "mean_loss": summed / len(probs),
        "program_real": pi.real.tolist(),
        "program_imag": pi.imag.tolist(),
    }
    text = json.dumps(payload, indent=2)
    if s["out"]:
        with open(s["out"], "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return EXIT_OK


COMMANDS = {"run": _cmd_run, "sweep": _cmd_sweep, "certify": _cmd_certify, "reference": _cmd_reference}


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        settings = _settings(args)
        return COMMANDS[args.command](settings)
    except ConfigError as exc:
        print(exc, file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        # domain validation errors (ranges, rates, probabilities)
        print(f"qprogsim: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
