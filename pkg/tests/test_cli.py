import csv
import json
import math
import os
import subprocess
import sys
from pathlib import Path

import pytest

from rfso import __version__
from rfso.cli import COLUMNS, _fmt, main, plot_script_path, run
from rfso.config import (
    apply_overrides,
    build_template,
    config_from_dict,
    load_config,
    parse_override,
)
from rfso.errors import ConfigError

QUOTED_CEILINGS = {0.0: 3.0, 3.0: 4.9, 5.0: 6.6, 7.0: 9.8}


def write_cfg(tmp_path, doc, name="exp.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc), encoding="utf-8")
    return p


def read_csv(path):
    text = Path(path).read_bytes().decode("utf-8")
    header = {}
    body = []
    for line in text.split("\r\n"):
        if line.startswith("# "):
            k, v = line[2:].split(" = ", 1)
            header[k] = v
        elif line:
            body.append(line)
    rows = list(csv.reader(body))
    return header, rows[0], rows[1:], text


def test_empty_document_gives_reference_defaults():
    cfg = config_from_dict({})
    assert cfg.metric == "outage" and cfg.modulation == "CBFSK" and cfg.gamma_th_db == -20.0
    assert (cfg.rf.N, cfg.rf.m, cfg.rf.rho) == (5, 5, 0.9)
    f = cfg.fso
    assert (f.L_km, f.lambda_nm, f.a_cm, f.w0_mm, f.F0_m) == (1.0, 1550.0, 5.0, 5.0, -10.0)
    assert f.weather == "clear" and f.cn2 == 5e-14 and f.sigma_s_cm == 3.75
    assert cfg.hpa.ibo_db == 30.0
    base = build_template(cfg).base
    assert base.fso.Il == pytest.approx(10 ** -0.043, rel=1e-14)


def test_rho_out_of_range_is_named():
    with pytest.raises(ConfigError, match=r"rho ∈ \[0,1\]"):
        config_from_dict({"rf": {"rho": 1.5}})


@pytest.mark.parametrize("doc,match", [
    ({"rf": {"rho": 0.9, "colour": 1}}, "unknown key 'rf.colour'"),
    ({"snr": [1]}, "unknown key 'snr'"),
    ({"fso": {"L_km": -1}}, r"fso.L_km: must be > 0 \(km\)"),
    ({"fso": {"weather": "fog"}}, "sigma_db_per_km"),
    ({"mc": {"trials": 100}}, "mc.trials"),
    ({"mc": {"trials": 20000, "batch": 3000}}, "mc.batch"),
    ({"metric": "snr"}, "metric"),
    ({"methods": []}, "methods"),
    ({"snr_grid_db": []}, "snr_grid_db"),
    ({"hpa": {"ibo_db": "3"}}, "expected a finite number"),
    ({"rf": {"N": 2.5}}, "expected an integer"),
    ({"rf": {"rho": 0.5, "fd_td": 0.1}}, "exactly one of rho, fd_td"),
])
def test_schema_errors(doc, match):
    with pytest.raises(ConfigError, match=match):
        config_from_dict(doc)


def test_outage_figure_config():
    cfg = config_from_dict({"hpa": {"ibo_db": 30}, "fso": {"sigma_db_per_km": 0.43, "sigma_s_cm": 3.75,
                                                            "cn2": 5e-14}, "rf": {"N": 5, "m": 5}})
    t = build_template(cfg)
    assert t.base.fso.sigma_s == pytest.approx(0.0375)
    assert t.base.fso.Il == pytest.approx(10 ** -0.043, rel=1e-14)
    assert t.base.rf.N == t.base.rf.m == 5 and t.base.hpa.ibo_db == pytest.approx(30.0)


def test_exclusive_pairs():
    assert config_from_dict({"rf": {"fd_td": 0.05}}).rf.rho is None
    assert build_template(config_from_dict({"rf": {"fd_td": 0.0}})).base.rf.rho == 1.0
    assert config_from_dict({"hpa": {"ideal": True}}).hpa.ibo_db is None
    cfg = apply_overrides(config_from_dict({}), ["fso.sigma_db_per_km=0"])
    assert cfg.fso.weather is None and build_template(cfg).base.fso.Il == 1.0


def test_overrides():
    cfg = apply_overrides(config_from_dict({}), ["fso.cn2=5e-15", "metric=bep", "snr_grid_db=[10, 20]",
                                                 "modulation=DBPSK"])
    assert cfg.fso.cn2 == 5e-15 and cfg.metric == "bep" and cfg.snr_grid_db == [10, 20]
    assert cfg.modulation == "DBPSK"
    assert parse_override("a.b=true") == (["a", "b"], True)
    assert parse_override("output=x.csv") == (["output"], "x.csv")
    with pytest.raises(ConfigError):
        apply_overrides(cfg, ["nokey"])
    with pytest.raises(ConfigError, match="unknown key"):
        apply_overrides(cfg, ["fso.cn2.x=1"])


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{nope", encoding="utf-8")
    with pytest.raises(ConfigError, match="not valid JSON"):
        load_config(bad)


def test_run_writes_csv_and_plot(tmp_path):
    out = tmp_path / "res" / "outage.csv"
    cfg = config_from_dict({"snr_grid_db": [0, 10, 20], "mc": {"trials": 20000, "seed": 5},
                            "output": str(out)})
    csv_path, plot_path = run(cfg)
    assert csv_path == out and plot_path == plot_script_path(out) == out.with_name("outage_plot.py")
    header, cols, rows, text = read_csv(out)
    assert tuple(cols) == COLUMNS
    assert len(rows) == 3 and all(len(r) == 5 for r in rows)
    assert "\r\n" in text and "\n\n" not in text
    for key in ("config.rf.N", "config.fso.cn2", "config.mc.seed", "config.output", "derived.alpha",
                "derived.beta", "derived.xi", "derived.A0", "derived.Il", "derived.nu", "derived.mu",
                "derived.gbar2_transmit_scale", "derived.kappa_at_0dB", "derived.kappa_at_20dB",
                "derived.capacity_ceiling", "rfso_version"):
        assert key in header, key
    assert header["rfso_version"] == __version__
    for r in rows:
        for cell in r:
            float(cell)
            digits = cell.lstrip("-").split("e")[0].replace(".", "").lstrip("0")
            assert len(digits) <= 9
    assert [f.name for f in out.parent.iterdir()] and not [
        f for f in out.parent.iterdir() if f.name.startswith(".")]


def test_analytic_only_leaves_mc_columns_empty(tmp_path, monkeypatch):
    import rfso.mcsim as mcsim
    def boom(*a, **k):
        raise AssertionError("no random draws expected")
    monkeypatch.setattr(mcsim, "run_point", boom)
    cfg = config_from_dict({"snr_grid_db": [10, 20], "methods": ["analytic"],
                            "output": str(tmp_path / "a.csv")})
    run(cfg)
    _, _, rows, _ = read_csv(tmp_path / "a.csv")
    assert all(r[3] == "" and r[4] == "" and r[2] == "" and r[1] != "" for r in rows)


def test_rerun_is_byte_identical(tmp_path):
    doc = {"metric": "bep", "snr_grid_db": [5, 15], "mc": {"trials": 30000, "seed": 9}}
    p = write_cfg(tmp_path, doc)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["--config", str(p), "--out", str(a)]) == 0
    assert main(["--config", str(p), "--out", str(b)]) == 0
    ta = a.read_bytes().decode("utf-8").replace(str(a), "")
    tb = b.read_bytes().decode("utf-8").replace(str(b), "")
    assert ta == tb
    assert main(["--config", str(p), "--out", str(a)]) == 0
    assert a.read_bytes().replace(str(a).encode(), b"") == ta.encode()


def test_flags_beat_file_values(tmp_path):
    p = write_cfg(tmp_path, {"snr_grid_db": [10], "methods": ["mc"], "mc": {"trials": 10000, "seed": 1},
                             "output": str(tmp_path / "file.csv")})
    out = tmp_path / "flag.csv"
    assert main(["--config", str(p), "--out", str(out), "--seed", "77",
                 "--override", "metric=capacity", "--override", "hpa.ibo_db=3"]) == 0
    header, _, rows, _ = read_csv(out)
    assert header["config.mc.seed"] == "77" and header["config.metric"] == "capacity"
    assert header["config.hpa.ibo_db"] == "3" and header["config.output"] == str(out)
    assert not (tmp_path / "file.csv").exists()


def test_errors_are_single_line(tmp_path, capsys):
    p = write_cfg(tmp_path, {"rf": {"rho": 1.5}})
    assert main(["--config", str(p)]) == 2
    err = capsys.readouterr().err
    assert err.count("\n") == 1 and err.startswith("rfso: error: ConfigError: ")
    assert "rho ∈ [0,1]" in err
    assert main(["--config", str(tmp_path / "none.json")]) == 2
    assert "cannot read config" in capsys.readouterr().err
    blocker = tmp_path / "blocker"
    blocker.write_text("", encoding="utf-8")
    p2 = write_cfg(tmp_path, {"snr_grid_db": [10], "methods": ["analytic"],
                              "output": str(blocker / "x.csv")}, "x.json")
    assert main(["--config", str(p2)]) == 1
    err = capsys.readouterr().err
    assert err.count("\n") == 1 and err.startswith("rfso: error: ")


def test_number_format():
    assert _fmt(1 / 3) == "0.333333333"
    assert _fmt(float("nan")) == ""
    assert _fmt(1e-7) == "1e-07"
    assert _fmt(True) == "true" and _fmt(None) == "null" and _fmt([1, 2]) == "[1, 2]"


def test_plot_script_renders(tmp_path):
    pytest.importorskip("matplotlib")
    out = tmp_path / "cap.csv"
    cfg = config_from_dict({"metric": "capacity", "hpa": {"ibo_db": 3}, "snr_grid_db": [10, 20],
                            "methods": ["analytic"], "output": str(out)})
    _, plot = run(cfg)
    src = plot.read_text(encoding="utf-8")
    assert "CEILING = 4.65" in src
    png = tmp_path / "cap.png"
    env = dict(os.environ, MPLBACKEND="Agg")
    subprocess.run([sys.executable, str(plot), str(png)], check=True, env=env, cwd=tmp_path)
    assert png.stat().st_size > 0


def test_plot_script_has_no_ceiling_for_ideal_or_outage(tmp_path):
    for doc in ({"metric": "capacity", "hpa": {"ideal": True}}, {"metric": "outage"}):
        out = tmp_path / f"{doc['metric']}.csv"
        cfg = config_from_dict(doc | {"snr_grid_db": [10], "methods": ["analytic"], "output": str(out)})
        _, plot = run(cfg)
        assert "CEILING = None" in plot.read_text(encoding="utf-8")


def test_module_entry_point(tmp_path):
    p = write_cfg(tmp_path, {"snr_grid_db": [10], "methods": ["analytic"]})
    out = tmp_path / "m.csv"
    r = subprocess.run([sys.executable, "-m", "rfso", "--config", str(p), "--out", str(out)],
                       capture_output=True, text=True)
    assert r.returncode == 0, r.stderr
    assert out.exists() and "wrote" in r.stdout
    v = subprocess.run([sys.executable, "-m", "rfso", "--version"], capture_output=True, text=True)
    assert __version__ in v.stdout


def test_amplifier_ceiling_sweeps(tmp_path):
    for ibo_db, quoted in QUOTED_CEILINGS.items():
        out = tmp_path / f"ibo{ibo_db:g}.csv"
        p = write_cfg(tmp_path, {"metric": "capacity", "rf": {"N": 3, "m": 3}, "hpa": {"ibo_db": ibo_db},
                                 "snr_grid_db": [30, 40, 50, 60], "methods": ["analytic"]},
                      f"ibo{ibo_db:g}.json")
        assert main(["--config", str(p), "--out", str(out)]) == 0
        header, _, rows, _ = read_csv(out)
        ceiling = float(header["derived.capacity_ceiling"])
        assert abs(ceiling - quoted) <= 0.3
        tail = [float(r[1]) for r in rows]
        steps = [b - a for a, b in zip(tail, tail[1:])]
        assert all(s > 0 for s in steps) and steps[-1] < steps[0]
        assert all(v < ceiling for v in tail)
        assert math.isfinite(tail[-1])
