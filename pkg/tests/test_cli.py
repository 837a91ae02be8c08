import csv
import math

import numpy as np
import pytest
import yaml

from metaimpedance.cli import EXIT_NUMERICAL, EXIT_OK, EXIT_VALIDATION, main
from metaimpedance.config import ConfigError, load_config, scenario_path
from metaimpedance.sweep import SWEEP_HEADER

SWEEP = {
    "schema_version": 1,
    "kind": "sweep",
    "name": "t",
    "n_nodes": 64,
    "wavelengths": {"start": 400, "stop": 900, "count": 41},
    "material": {"hbar_omega_p": 9.02, "hbar_gamma": 0.027, "eps_inf": 9.84},
    "geometries": [
        {"name": "a", "components": [{"kind": "disk", "center": [0, 0.5], "radius": 0.2}]},
        {"name": "b", "components": [{"kind": "star", "center": [0, 0.5], "base_radius": 0.15,
                                      "amplitude": 0.02, "lobes": 4}]},
    ],
}

OPTIMIZE = {
    "schema_version": 1,
    "kind": "optimize",
    "name": "o",
    "n_nodes": 64,
    "wavelength_nm": 500,
    "steps": 2,
    "n_modes": 6,
    "geometry": {"components": [{"kind": "disk", "center": [0, 0.5], "radius": 0.2}]},
    "random_starts": {"count": 2, "seed": 3, "amplitude": 0.01},
}


def write(tmp_path, d, name="cfg.yaml"):
    p = tmp_path / name
    p.write_text(yaml.safe_dump(d))
    return str(p)


def modified(base, **changes):
    d = yaml.safe_load(yaml.safe_dump(base))
    for k, v in changes.items():
        if v is None:
            d.pop(k)
        else:
            d[k] = v
    return d


def read_rows(path):
    lines = [ln for ln in path.read_text().splitlines() if not ln.startswith("#")]
    return list(csv.reader(lines))


def test_sweep_writes_csv_with_header(tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["sweep", write(tmp_path, SWEEP), "--out-dir", str(out), "--no-timestamp"]) == EXIT_OK
    rows = read_rows(out / "t_a.csv")
    assert rows[0] == SWEEP_HEADER
    assert len(rows) == 42
    data = np.array(rows[1:], dtype=float)
    np.testing.assert_allclose(data[:, 3], np.hypot(data[:, 1], data[:, 2]), rtol=1e-15)
    np.testing.assert_array_equal(data[:, 4], -data[:, 1])
    assert np.all(data[:, 2] > 0)
    for f in ("t_a.svg", "t_a_geometry.svg", "t_b.csv", "t_overlay.svg", "t_a_reflection.csv"):
        assert (out / f).exists()
    assert (out / "t_a.svg").read_text().startswith("<svg")
    assert "peak(s)" in capsys.readouterr().out


def test_sweep_peak_comments(tmp_path):
    out = tmp_path / "out"
    main(["sweep", write(tmp_path, SWEEP), "--out-dir", str(out), "--no-timestamp"])
    tail = [ln for ln in (out / "t_a.csv").read_text().splitlines() if ln.startswith("#")]
    assert tail[0] == "# peaks: 1"
    assert "dominant_mode_index=" in tail[1]


def test_outputs_byte_identical_serial_and_parallel(tmp_path):
    cfg = write(tmp_path, SWEEP)
    a, b, c = tmp_path / "a", tmp_path / "b", tmp_path / "c"
    for d, th in ((a, "1"), (b, "4"), (c, "1")):
        assert main(["sweep", cfg, "--out-dir", str(d), "--threads", th, "--no-timestamp", "--no-svg"]) == 0
    for f in sorted(p.name for p in a.iterdir()):
        assert (a / f).read_bytes() == (b / f).read_bytes() == (c / f).read_bytes()


def test_timestamp_line(tmp_path):
    cfg = write(tmp_path, SWEEP)
    main(["sweep", cfg, "--out-dir", str(tmp_path / "ts"), "--no-svg"])
    first = (tmp_path / "ts" / "t_a.csv").read_text().splitlines()[0]
    assert first.startswith("# generated ")
    main(["sweep", cfg, "--out-dir", str(tmp_path / "nts"), "--no-svg", "--no-timestamp"])
    assert (tmp_path / "nts" / "t_a.csv").read_text().splitlines()[0] == ",".join(SWEEP_HEADER)


def test_no_svg(tmp_path):
    out = tmp_path / "out"
    main(["sweep", write(tmp_path, SWEEP), "--out-dir", str(out), "--no-svg", "--no-timestamp"])
    assert not list(out.glob("*.svg"))


def test_dump_operators(tmp_path):
    out = tmp_path / "out"
    main(["sweep", write(tmp_path, SWEEP), "--out-dir", str(out), "--no-svg", "--dump-operators",
          "--no-timestamp"])
    S = np.array(read_rows(out / "t_a_S.csv")[1:], dtype=float)
    assert S.shape == (64, 64)
    ev = read_rows(out / "t_a_eigenvalues.csv")
    assert ev[0] == ["index", "lambda", "c_nu", "c_y"] and len(ev) == 64


@pytest.mark.parametrize("change, field", [
    (dict(schema_version=None), "schema_version"),
    (dict(schema_version=2), "schema_version"),
    (dict(wavelengths={"start": 900, "stop": 400, "count": 11}), "wavelengths.stop"),
    (dict(wavelengths={"start": 200, "stop": 400, "count": 11}), "wavelengths.start"),
    (dict(wavelengths={"start": 400, "stop": 900, "count": 1}), "wavelengths.count"),
    (dict(n_nodes=63), "n_nodes"),
    (dict(geometries=[{"name": "x", "components": [{"kind": "disk", "center": [0, 0.1],
                                                     "radius": 0.2}]}]), "geometries[x].components[0]"),
    (dict(geometries=[{"name": "x", "components": [{"kind": "blob", "center": [0, 0.5]}]}]),
     "geometries[0].components[0].kind"),
    (dict(material={"hbar_omega_p": "gold"}), "material.hbar_omega_p"),
])
def test_config_validation(tmp_path, capsys, change, field):
    p = write(tmp_path, modified(SWEEP, **change))
    with pytest.raises(ConfigError) as err:
        load_config(p)
    assert err.value.field == field
    assert main(["sweep", p, "--out-dir", str(tmp_path / "o")]) == EXIT_VALIDATION
    assert "config error" in capsys.readouterr().err


def test_duplicate_geometry_names_rejected(tmp_path):
    g = SWEEP["geometries"][0]
    assert main(["sweep", write(tmp_path, modified(SWEEP, geometries=[g, g]))]) == EXIT_VALIDATION


def test_missing_file_and_bad_yaml(tmp_path):
    assert main(["sweep", str(tmp_path / "nope.yaml")]) == EXIT_VALIDATION
    bad = tmp_path / "bad.yaml"
    bad.write_text("schema_version: [1\n")
    assert main(["sweep", str(bad)]) == EXIT_VALIDATION


def test_subcommand_kind_mismatch(tmp_path):
    assert main(["optimize", write(tmp_path, SWEEP)]) == EXIT_VALIDATION
    assert main(["sweep", write(tmp_path, OPTIMIZE)]) == EXIT_VALIDATION


def test_bad_thread_count(tmp_path):
    assert main(["sweep", write(tmp_path, SWEEP), "--threads", "0"]) == EXIT_VALIDATION


def test_numerical_failure_exit_code(tmp_path, monkeypatch):
    from metaimpedance import sweep

    orig = sweep._evaluate

    def broken(engine, wl):
        return (None, f"{wl} nm: singular") if wl > 800 else orig(engine, wl)

    monkeypatch.setattr(sweep, "_evaluate", broken)
    out = tmp_path / "out"
    assert main(["sweep", write(tmp_path, SWEEP), "--out-dir", str(out), "--no-svg",
                 "--no-timestamp"]) == EXIT_NUMERICAL
    rows = read_rows(out / "t_a.csv")[1:]
    assert rows[-1][1] == "nan" and rows[-1][6] == "-1"
    assert rows[0][1] != "nan"


def test_optimize_outputs_and_determinism(tmp_path):
    cfg = write(tmp_path, OPTIMIZE)
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["optimize", cfg, "--out-dir", str(a), "--no-timestamp"]) == EXIT_OK
    assert main(["optimize", cfg, "--out-dir", str(b), "--threads", "3", "--no-timestamp",
                 "--no-svg"]) == EXIT_OK
    names = ["o_start_trajectory.csv", "o_random0_trajectory.csv", "o_random1_trajectory.csv"]
    for n in names:
        assert (a / n).read_bytes() == (b / n).read_bytes()
    assert (a / "o_start_shapes.svg").exists() and not list(b.glob("*.svg"))
    rows = read_rows(a / "o_start_trajectory.csv")
    assert rows[0][:4] == ["iteration", "J", "grad_norm", "step_size"]
    assert rows[0][4:6] == ["c0_k-6_re", "c0_k-6_im"]
    J = [float(r[1]) for r in rows[1:]]
    assert len(J) == 3 and J == sorted(J)
    assert (a / names[0]).read_text().rstrip().splitlines()[-1] == "# status: max_steps"


def test_optimize_zero_steps(tmp_path):
    out = tmp_path / "out"
    cfg = write(tmp_path, modified(OPTIMIZE, steps=0, random_starts=None))
    assert main(["optimize", cfg, "--out-dir", str(out), "--no-timestamp", "--no-svg"]) == EXIT_OK
    rows = read_rows(out / "o_start_trajectory.csv")
    assert len(rows) == 2 and rows[1][0] == "0" and float(rows[1][3]) == 0.0


def test_optimize_requires_geometry(tmp_path):
    cfg = write(tmp_path, modified(OPTIMIZE, geometry=None))
    assert main(["optimize", cfg]) == EXIT_VALIDATION


def test_bundled_scenarios_parse():
    for name in ("fig2", "fig3", "fig4", "fig5", "default_sweep", "optimize_disk"):
        cfg = load_config(scenario_path(name))
        assert cfg.name
    with pytest.raises(FileNotFoundError):
        scenario_path("fig9")


def test_incidence_vector():
    cfg = load_config(scenario_path("fig4"))
    d = cfg.incidence()
    assert d[1] < 0 and math.isclose(np.hypot(*d), 1.0)


def test_verify_fast_passes(capsys):
    assert main(["verify", "--fast"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "[FAIL]" not in out and "0 failed" in out


def test_verify_rejects_odd_nodes():
    assert main(["verify", "--nodes", "33"]) == EXIT_VALIDATION
