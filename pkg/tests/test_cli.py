import json

import numpy as np

from motorprim import cli
from motorprim import dmp


def test_unknown_subcommand():
    assert cli.main(["make-coffee"]) == 64


def test_no_arguments_prints_usage():
    assert cli.main([]) == 64


def test_help_ok(capsys):
    assert cli.main(["--help"]) == 0
    assert "scan-singularity" in capsys.readouterr().out


def test_run_missing_config():
    assert cli.main(["run", "/definitely/not/here.json"]) == 2


def test_run_bad_dt(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"scenario": "planar_singularity", "dt": 1.0}))
    assert cli.main(["run", str(p)]) == 2


def test_run_planar_scenario(tmp_path, capsys):
    p = tmp_path / "cfg.json"
    out = tmp_path / "out"
    p.write_text(json.dumps({
        "scenario": "planar_singularity", "target": "right",
        "duration": 3.0, "dt": 2e-3, "output_dir": str(out)}))
    assert cli.main(["run", str(p)]) == 0
    assert (out / "trace.csv").exists()
    assert (out / "ledger.csv").exists()
    assert (out / "plot.svg").exists()
    assert "crossed_singularity" in capsys.readouterr().out


def test_run_determinism_byte_identical(tmp_path):
    cfgs = []
    for tag in ("a", "b"):
        p = tmp_path / f"cfg_{tag}.json"
        p.write_text(json.dumps({
            "scenario": "planar_singularity", "target": "left",
            "duration": 2.0, "dt": 2e-3,
            "output_dir": str(tmp_path / tag)}))
        assert cli.main(["run", str(p)]) == 0
        cfgs.append(tmp_path / tag)
    for name in ("trace.csv", "ledger.csv"):
        assert (cfgs[0] / name).read_bytes() == (cfgs[1] / name).read_bytes()


def test_scan_singularity(tmp_path, capsys):
    out = tmp_path / "cloud.csv"
    rc = cli.main(["scan-singularity", "planar_two_link", "0.02",
                   "--samples", "15", "--task-dims", "0,1",
                   "--out", str(out)])
    assert rc == 0
    assert "singular fraction" in capsys.readouterr().out
    assert out.read_text().startswith("x,y,z,sigma_min")


def test_learn_and_rollout_roundtrip(tmp_path):
    # synthetic reach demo -> CSV -> learn -> save -> reload bit-exact ->
    # rollout CSV
    t = np.linspace(0, 1.5, 300)
    s = t / 1.5
    val = (10 * s**3 - 15 * s**4 + 6 * s**5)[:, None] * np.array([0.8, -0.4])
    demo = dmp.Demonstration(t=t, value=val, space="joint")
    demo_path = tmp_path / "demo.csv"
    dmp.save_demo_csv(demo, demo_path)

    model_path = tmp_path / "model.json"
    assert cli.main(["learn", str(demo_path), "joint", str(model_path),
                     "--kind", "discrete", "--basis", "30"]) == 0

    again = tmp_path / "model2.json"
    dmp.save_dmp(dmp.load_dmp(model_path), again)
    assert model_path.read_bytes() == again.read_bytes()

    roll_path = tmp_path / "roll.csv"
    assert cli.main(["rollout", str(model_path), "--out", str(roll_path)]) == 0
    header = roll_path.read_text().splitlines()[0]
    assert header == "t,y1,y2,yd1,yd2"


def test_demo_csv_roundtrip_with_goal(tmp_path):
    from motorprim import geometry as geo
    t = np.linspace(0, 1.0, 120)
    Rs = np.stack([geo.exp_so3(a * np.array([0.4, 0.5, 0.76]))
                   for a in np.linspace(0, 1.0, 120)])
    demo = dmp.Demonstration.from_rotations(t, Rs, kind="discrete")
    path = tmp_path / "rot_demo.csv"
    dmp.save_demo_csv(demo, path)
    back = dmp.load_demo_csv(path)
    assert back.space == "so3"
    assert np.array_equal(back.value, demo.value)
    assert np.array_equal(back.goal, demo.goal)


def test_plot_from_trace(tmp_path):
    p = tmp_path / "cfg.json"
    out = tmp_path / "out"
    p.write_text(json.dumps({
        "scenario": "planar_singularity", "target": "right",
        "duration": 1.0, "dt": 2e-3, "output_dir": str(out)}))
    assert cli.main(["run", str(p)]) == 0
    svg = tmp_path / "myplot.svg"
    assert cli.main(["plot", str(out / "trace.csv"), "--out", str(svg)]) == 0
    text = svg.read_text()
    assert text.startswith("<svg") and text.rstrip().endswith("</svg>")


def test_numerical_abort_exit_code(tmp_path, monkeypatch):
    import motorprim.scenarios as sc
    from motorprim.dynamics import NumericalInstability

    def boom(cfg):
        raise NumericalInstability("test blow-up")

    monkeypatch.setitem(sc.RUNNERS, "planar_singularity", boom)
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps({"scenario": "planar_singularity",
                             "duration": 1.0}))
    assert cli.main(["run", str(p)]) == 3
