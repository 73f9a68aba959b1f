"""Command-line sweep driver.

    rfso --config exp.json [--override fso.cn2=5e-15 ...] [--out res.csv] [--seed 7]

Writes a CSV (provenance header in ``# key = value`` comment lines, then
snr_db, analytic, asymptotic, mc_value, mc_ci99) and a sibling plotting
script.  Failures print one ``rfso: error: <Type>: <message>`` line to
stderr and exit non-zero.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
import warnings
from pathlib import Path

from . import __version__
from .analysis import capacity_ceiling
from .config import (
    ExperimentConfig,
    apply_overrides,
    build_plan,
    build_template,
    flatten,
    load_config,
)
from .errors import ConfigError, IdealHardwareWarning, RfsoError
from .mcsim import SweepResult, sweep

COLUMNS = ("snr_db", "analytic", "asymptotic", "mc_value", "mc_ci99")
EXIT_CONFIG = 2
EXIT_FAILURE = 1


def _fmt(x) -> str:
    if isinstance(x, bool) or x is None:
        return json.dumps(x)
    if isinstance(x, float):
        return "" if math.isnan(x) else format(x, ".9g")
    if isinstance(x, (list, dict)):
        return json.dumps(x)
    return str(x)


def provenance(cfg: ExperimentConfig) -> list[tuple[str, object]]:
    """Resolved configuration followed by every derived model quantity."""
    template = build_template(cfg)
    base = template.base
    f, h = base.fso, base.hpa
    rows: list[tuple[str, object]] = [("rfso_version", __version__)]
    rows += [(f"config.{k}", v) for k, v in flatten(cfg.to_dict())]
    rows += [
        ("derived.rho", base.rf.rho),
        ("derived.sigma_R2", f.sigma_R2), ("derived.alpha", f.alpha), ("derived.beta", f.beta),
        ("derived.wL_m", f.wL), ("derived.wLeq_m", f.wLeq), ("derived.v", f.v),
        ("derived.A0", f.A0), ("derived.xi", f.xi), ("derived.h", f.h), ("derived.Il", f.Il),
        ("derived.gbar2_transmit_scale", (h.mu * f.h * f.A0 * f.Il) ** 2),
        ("derived.nu", h.nu), ("derived.mu", h.mu), ("derived.sigma_b2", h.sigma_b2),
    ]
    for snr_db in (cfg.snr_grid_db[0], cfg.snr_grid_db[-1]):
        rows.append((f"derived.kappa_at_{_fmt(float(snr_db))}dB", template.at(snr_db).kappa))
    if math.isfinite(h.ibo):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", IdealHardwareWarning)
            rows.append(("derived.capacity_ceiling", capacity_ceiling(h)))
    return rows


def render_csv(header: list[tuple[str, object]], results: list[SweepResult]) -> str:
    buf = io.StringIO(newline="")
    for key, value in header:
        buf.write(f"# {key} = {_fmt(value)}\r\n")
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(COLUMNS)
    for r in results:
        writer.writerow([_fmt(r.snr_db), _fmt(r.analytic), _fmt(r.asymptotic),
                         _fmt(r.mc_value), _fmt(r.mc_ci99)])
    return buf.getvalue()


_PLOT_TEMPLATE = '''"""Plot {csv_name}; generated alongside it."""
import sys
from pathlib import Path

import matplotlib.pyplot as plt
import numpy as np

CSV = Path(__file__).with_name({csv_path!r})
METRIC = {metric!r}
CEILING = {ceiling!r}

rows = [ln for ln in CSV.read_text(encoding="utf-8").splitlines() if not ln.startswith("#")]
data = np.genfromtxt(rows, delimiter=",", names=True, dtype=float)
fig, ax = plt.subplots(figsize=(6, 4.5))
if not np.all(np.isnan(data["analytic"])):
    ax.plot(data["snr_db"], data["analytic"], "-", label="closed form")
if not np.all(np.isnan(data["asymptotic"])):
    ax.plot(data["snr_db"], data["asymptotic"], "--", label="asymptotic")
if not np.all(np.isnan(data["mc_value"])):
    ax.errorbar(data["snr_db"], data["mc_value"], yerr=data["mc_ci99"], fmt="o",
                mfc="none", label="Monte Carlo (99% CI)")
if CEILING is not None:
    ax.axhline(CEILING, color="k", ls=":", label="ceiling")
if METRIC in ("outage", "bep"):
    ax.set_yscale("log")
ax.set_xlabel("average SNR (dB)")
ax.set_ylabel({{"outage": "outage probability", "bep": "bit error probability",
               "capacity": "ergodic capacity (bps/Hz)"}}[METRIC])
ax.grid(True, which="both", alpha=0.3)
ax.legend()
fig.tight_layout()
if len(sys.argv) > 1:
    fig.savefig(sys.argv[1])
else:
    plt.show()
'''


def render_plot_script(cfg: ExperimentConfig, csv_path: Path, ceiling: float | None) -> str:
    return _PLOT_TEMPLATE.format(csv_name=csv_path.name, csv_path=csv_path.name,
                                 metric=cfg.metric, ceiling=ceiling)


def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def plot_script_path(csv_path: Path) -> Path:
    return csv_path.with_name(csv_path.stem + "_plot.py")


def run(cfg: ExperimentConfig) -> tuple[Path, Path]:
    """Run the sweep described by ``cfg`` and write the CSV and plot script."""
    template = build_template(cfg)
    plan = build_plan(cfg)
    header = provenance(cfg)
    results = sweep(template, cfg.snr_grid_db, plan, methods=tuple(cfg.methods))
    csv_path = Path(cfg.output)
    ceiling = None
    hpa = template.base.hpa
    if cfg.metric == "capacity" and math.isfinite(hpa.ibo) and hpa.sigma_b2 >= 1e-15:
        ceiling = capacity_ceiling(hpa)
    write_atomic(csv_path, render_csv(header, results))
    plot_path = plot_script_path(csv_path)
    write_atomic(plot_path, render_plot_script(cfg, csv_path, ceiling))
    return csv_path, plot_path


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rfso", description=__doc__.split("\n\n")[0])
    p.add_argument("--config", required=True, metavar="PATH", help="JSON experiment file")
    p.add_argument("--override", action="append", default=[], metavar="KEY=VALUE",
                   help="dotted-path override, e.g. fso.cn2=5e-15 (repeatable)")
    p.add_argument("--out", metavar="PATH", help="output CSV path")
    p.add_argument("--seed", type=int, metavar="U64", help="Monte Carlo seed")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return p


def _error_line(exc: BaseException) -> str:
    msg = " ".join(str(exc).split()) or exc.__class__.__name__
    return f"rfso: error: {exc.__class__.__name__}: {msg}"


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        overrides = list(args.override)
        if args.out is not None:
            overrides.append(f"output={json.dumps(args.out)}")
        if args.seed is not None:
            overrides.append(f"mc.seed={args.seed}")
        if overrides:
            cfg = apply_overrides(cfg, overrides)
        csv_path, plot_path = run(cfg)
    except ConfigError as exc:
        print(_error_line(exc), file=sys.stderr)
        return EXIT_CONFIG
    except (RfsoError, ArithmeticError, ValueError, OSError) as exc:
        print(_error_line(exc), file=sys.stderr)
        return EXIT_FAILURE
    print(f"wrote {csv_path} and {plot_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
