import csv
import io
import json

import numpy as np
import pytest

from bnnprior import cli
from bnnprior.errors import AccuracyError


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def read_csv(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


def header(text):
    return dict(ln[2:].split(": ", 1) for ln in text.splitlines() if ln.startswith("# "))


def test_density_csv(capsys):
    code, out, _ = run(capsys, "density", "--depth", "3", "--widths", "3,2", "--grid", "0.5:2:4", "--edgeworth")
    assert code == 0
    meta = header(out)
    assert meta["schema_version"] == "1"
    assert meta["widths"] == "1,3,2,1"
    rows = read_csv(out)
    assert list(rows[0]) == ["radius", "exact_density", "gaussian_limit", "edgeworth", "error"]
    assert len(rows) == 4
    # at least 12 significant digits
    assert len(rows[0]["exact_density"].split("e")[0].replace(".", "")) >= 13


def test_density_divergent_origin(capsys):
    code, out, _ = run(capsys, "density", "--depth", "3", "--widths", "1", "--grid", "0:1:2")
    assert code == 0
    first = read_csv(out)[0]
    assert first["exact_density"] == "" and first["error"] == "divergent"


def test_relu_density_header(capsys):
    code, out, _ = run(capsys, "density", "--activation", "relu", "--depth", "3", "--widths", "3",
                       "--grid", "0:2:3")
    meta = header(out)
    assert code == 0
    assert float(meta["atom_mass"]) == pytest.approx(1 - (7 / 8) ** 2)
    assert meta["truncation_mode"] == "product"
    assert read_csv(out)[0]["error"] == "atom"


def test_accuracy_failure_recorded_per_row(capsys, monkeypatch):
    real = cli.density_linear

    def flaky(spec, r, cfg=None):
        if np.any(r > 1.5):
            raise AccuracyError("forced")
        return real(spec, r, cfg)

    monkeypatch.setattr(cli, "density_linear", flaky)
    code, out, _ = run(capsys, "density", "--depth", "3", "--widths", "2", "--grid", "1:2:3")
    assert code == cli.EXIT_ACCURACY
    rows = read_csv(out)
    assert [r["error"] for r in rows] == ["", "", "AccuracyError"]
    assert rows[2]["exact_density"] == ""


@pytest.mark.parametrize(
    "argv",
    [
        ["density", "--grid", "1:0:5"],
        ["density", "--grid", "0:1:0"],
        ["density", "--depth", "3", "--widths", "2,3,4"],
        ["density", "--kappa-mode", "explicit"],
        ["density", "--sigma", "1"],
        ["density", "--widths", "0"],
        ["sample", "--samples", "0"],
        ["figure", "fig1", "--out", "x"],
        ["frobnicate"],
    ],
)
def test_configuration_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == cli.EXIT_CONFIG
    assert err


def test_config_file_and_override(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# fig-style settings\ndepth = 2\nwidths = 4\ngrid = 0.5:1:2\nkappa_mode = explicit\nsigma = 1\n")
    code, out, _ = run(capsys, "density", "--config", str(cfg))
    assert code == 0 and header(out)["widths"] == "1,4,1"
    code, out, _ = run(capsys, "density", "--config", str(cfg), "--widths", "6")
    assert code == 0 and header(out)["widths"] == "1,6,1"


def test_unknown_config_key(capsys, tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("depth = 2\ncolour = blue\n")
    code, _, err = run(capsys, "density", "--config", str(cfg))
    assert code == cli.EXIT_CONFIG and "colour" in err


def test_sample_is_reproducible(capsys, tmp_path):
    paths = []
    for i in range(2):
        out = tmp_path / f"hist{i}.csv"
        code, _, _ = run(capsys, "sample", "--depth", "2", "--widths", "3", "--samples", "100000",
                         "--seed", "42", "--out", str(out))
        assert code == 0
        paths.append(out)
    assert paths[0].read_bytes() == paths[1].read_bytes()
    s0 = json.loads(paths[0].with_suffix(".json").read_text())
    s1 = json.loads(paths[1].with_suffix(".json").read_text())
    s0.pop("elapsed_seconds"), s1.pop("elapsed_seconds")
    assert s0 == s1


def test_sample_relu_zero_fraction(capsys, tmp_path):
    out = tmp_path / "s.json"
    code, _, _ = run(capsys, "sample", "--activation", "relu", "--depth", "3", "--widths", "1",
                     "--samples", "200000", "--format", "json", "--out", str(out))
    summary = json.loads(out.read_text())
    assert code == 0
    assert abs(summary["zero_fraction"] - 0.75) < 3 * summary["zero_fraction_se"]


def test_sample_relu_variance_matches_linear(capsys, tmp_path):
    moments = {}
    for act in ("linear", "relu"):
        out = tmp_path / f"{act}.json"
        run(capsys, "sample", "--activation", act, "--depth", "3", "--widths", "4", "--samples", "200000",
            "--seed", "3", "--format", "json", "--out", str(out))
        moments[act] = json.loads(out.read_text())["moments"]["2"]
    diff = moments["linear"]["estimate"] - moments["relu"]["estimate"]
    se = np.hypot(moments["linear"]["standard_error"], moments["relu"]["standard_error"])
    assert abs(diff) < 4 * se


@pytest.mark.parametrize(
    "argv, theta",
    [
        (["--depth", "2", "--widths", "2"], 1.0),
        (["--depth", "1"], 0.5),
        (["--depth", "4", "--widths", "2", "--activation", "relu"], 2.0),
    ],
)
def test_tail(capsys, argv, theta):
    code, out, _ = run(capsys, "tail", *argv, "--format", "json")
    assert code == 0
    assert json.loads(out)["theta_hat"] == pytest.approx(theta, abs=0.05)


def test_tail_csv_with_summary(capsys, tmp_path):
    out = tmp_path / "tail.csv"
    code, _, _ = run(capsys, "tail", "--depth", "2", "--widths", "1", "--m-max", "50", "--out", str(out))
    assert code == 0
    assert len(read_csv(out.read_text())) == 50
    assert json.loads(out.with_suffix(".json").read_text())["fit_range"] == [25, 50]


def test_moments(capsys):
    code, out, _ = run(capsys, "moments", "--depth", "2", "--widths", "3", "--kappa-mode", "explicit",
                       "--sigma", "1", "--orders", "2,4", "--format", "json")
    assert code == 0
    values = [m["value"] for m in json.loads(out)["moments"]]
    assert values == [3.0, 3 * 5 * 3.0]


def test_charfun(capsys):
    code, out, _ = run(capsys, "charfun", "--depth", "2", "--widths", "2", "--kappa-mode", "explicit",
                       "--sigma", "1", "--grid", "0:1:2")
    rows = read_csv(out)
    assert code == 0
    assert float(rows[0]["charfun"]) == 1.0
    assert float(rows[1]["charfun"]) == pytest.approx(0.5)


@pytest.mark.parametrize("name, argv, files", [
    ("fig1", ["--widths", "2,5", "--depths", "2,3"], 4),
    ("fig2", ["--widths", "2,10"], 2),
    ("fig3", ["--widths", "2", "--depths", "2,3"], 2),
    ("fig4", ["--widths", "10", "--depths", "3"], 1),
])
def test_figures(capsys, tmp_path, name, argv, files):
    code, _, _ = run(capsys, "figure", name, *argv, "--points", "15", "--out", str(tmp_path))
    written = sorted(tmp_path.glob("*.csv"))
    assert code == 0 and len(written) == files
    rows = read_csv(written[0].read_text())
    assert len(rows) == 15
    assert all(float(r["exact_density"]) > 0 for r in rows)


def test_validate_fault_injection(capsys, tmp_path):
    out = tmp_path / "report.json"
    code, _, _ = run(capsys, "validate", "--inject-fault", "relu-variance", "--out", str(out))
    report = json.loads(out.read_text())
    assert code == cli.EXIT_VALIDATION
    failed = [c["name"] for c in report["checks"] if not c["passed"]]
    assert failed == ["variance_ratio"]
    assert report["fault"] == "relu-variance"
