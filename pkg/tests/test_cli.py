import io
import json
import sys

import numpy as np
import pytest

from gridfreq import ModelConfig, generate, ingest_csv
from gridfreq.cli import main, read_config


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main([str(a) for a in argv], stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture(scope="module")
def day_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "grid.csv"
    code, _, err = run("synth", "--kind", "ou", "--n", 20_000, "--seed", 2, "--start", 1_600_000_000, "--output", path.parent)
    assert code == 0, err
    (path.parent / "synth.csv").rename(path)
    return path


def test_synth_output_is_ingestible(day_csv):
    data = ingest_csv(day_csv)
    expected = generate(ModelConfig(kind="ou", n=20_000, seed=2)).values
    assert data.n_samples == 20_000 and len(data) == 1
    np.testing.assert_array_equal(data.segments[0].values, expected)
    assert data.segments[0].start_epoch == 1_600_000_000


def test_synth_to_stdout_and_mixture():
    code, out, _ = run("synth", "--kind", "bimodal_mixture", "--centers", "49.9,50.1", "--weights", "0.5,0.5",
                       "--widths", "0.01,0.01", "--n", 50)
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "timestamp,frequency" and len(lines) == 51


def test_stats_json_and_csv(day_csv):
    code, out, _ = run("stats", day_csv)
    assert code == 0
    doc = json.loads(out)
    assert doc["n"] == 20_000 and set(doc) == {"n", "mean", "variance", "skewness", "kurtosis"}
    code, out, _ = run("stats", day_csv, "--format", "csv")
    assert out.splitlines()[0] == "key,value"
    assert dict(line.split(",") for line in out.splitlines()[1:])["n"] == "20000"


@pytest.mark.parametrize(
    "verb, extra, keys",
    [
        ("ingest", [], {"n_samples", "n_segments", "dropped_samples", "span", "segments"}),
        ("dip", [], {"dip", "n", "modal_interval"}),
        ("increments", ["--tau", 2], {"tau", "moments", "bandwidth", "tail_exceedance"}),
        ("linearity", ["--surrogates", 3, "--max-lag", 20], {"rmse", "n_surrogates", "max_lag"}),
        ("acf", ["--max-lag", 3600, "--fit-window", 600], {"lambda", "fit_range", "r_squared", "max_lag"}),
        ("dfa", ["--min-scale", 8, "--max-scale", 1000, "--order", 2], {"slope", "hurst", "order", "fit_range"}),
    ],
)
def test_analysis_verbs(day_csv, tmp_path, verb, extra, keys):
    code, out, err = run(verb, day_csv, *extra)
    assert code == 0, err
    assert keys <= set(json.loads(out))
    code, _, _ = run(verb, day_csv, *extra, "--output", tmp_path)
    assert code == 0
    assert (tmp_path / f"{verb}.json").exists()


def test_side_tables(day_csv, tmp_path):
    run("acf", day_csv, "--max-lag", 100, "--fit-window", 100, "--output", tmp_path)
    rows = (tmp_path / "acf.csv").read_text().splitlines()
    assert rows[0] == "lag,acf" and len(rows) == 102
    run("dfa", day_csv, "--order", 2, "--output", tmp_path)
    assert (tmp_path / "dfa.csv").read_text().startswith("window,fluctuation\n5,")
    run("linearity", day_csv, "--surrogates", 2, "--output", tmp_path)
    assert (tmp_path / "lt_curves.csv").read_text().splitlines()[0] == "lag,lt_data,lt_surrogate_mean"
    run("increments", day_csv, "--output", tmp_path)
    assert (tmp_path / "increments_density.csv").exists()


def test_density_csv_default(day_csv):
    code, out, _ = run("density", day_csv, "--n-grid", 600)
    lines = out.splitlines()
    assert code == 0 and lines[0] == "frequency,density" and len(lines) == 601
    doc = json.loads(run("density", day_csv, "--format", "json")[1])
    assert len(doc["grid"]) == len(doc["density"])


def test_dip_pvalue_flag_and_seed(day_csv):
    a = json.loads(run("--seed", 1, "dip", day_csv, "--p-value", "--n-boot", 20)[1])
    b = json.loads(run("dip", day_csv, "--p-value", "--n-boot", 20, "--seed", 1)[1])
    assert a == b and "p_value" in a


def test_config_file_and_precedence(day_csv, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# shared settings\nmax-lag = 30\nsurrogates: 2\nseed = 9\ntau = 5\n")
    assert read_config(cfg) == {"max_lag": "30", "surrogates": "2", "seed": "9", "tau": "5"}
    doc = json.loads(run("linearity", day_csv, "--config", cfg)[1])
    assert doc["max_lag"] == 30 and doc["n_surrogates"] == 2
    doc = json.loads(run("linearity", day_csv, "--config", cfg, "--max-lag", 10)[1])
    assert doc["max_lag"] == 10
    cfg.write_text("colour = blue\n")
    code, _, err = run("stats", day_csv, "--config", cfg)
    assert code == 2 and "colour" in err


def test_characterize_exit_codes(day_csv, tmp_path):
    code, out, _ = run("characterize", day_csv, "--n-surrogates", 3)
    assert code == 0
    doc = json.loads(out)
    assert doc["region"] == "grid" and not doc["skipped"]

    short = tmp_path / "short.csv"
    short.write_text("".join(f"{t},{50 + 0.01 * (t % 3)}\n" for t in range(20)))
    code, out, _ = run("characterize", short)
    assert code == 1
    assert set(json.loads(out)["skipped"]) == {"linearity", "acf", "dfa"}

    code, _, err = run("characterize", tmp_path / "missing.csv")
    assert code == 2 and "missing.csv" in err
    bad = tmp_path / "bad.csv"
    bad.write_text("0,50\n1,abc\n2,def\n")
    assert run("stats", bad)[0] == 2
    assert run("nonsense")[0] == 2
    assert run("--version")[0] == 0


def test_characterize_and_compare_files(day_csv, tmp_path):
    other = tmp_path / "other.csv"
    other.write_text(day_csv.read_text().replace("\n50.", "\n50.").replace(",", ",", 1))
    code, _, err = run("characterize", day_csv, other, "--analyses", "moments,dip,dfa", "--output", tmp_path / "r")
    assert code == 0, err
    reports = sorted((tmp_path / "r").glob("*.report.json"))
    assert [p.name for p in reports] == ["grid.report.json", "other.report.json"]
    assert (tmp_path / "r" / "grid.density.csv").exists()
    assert (tmp_path / "r" / "grid.dfa.csv").exists()
    code, out, _ = run("compare", *reports)
    table = json.loads(out)
    assert code == 0 and [r["region"] for r in table["rankings"]["dip"]] == ["grid", "other"]
    code, out, _ = run("compare", *reports, "--format", "csv")
    assert out.splitlines()[0].startswith("region,dip")
    assert run("compare", reports[0], reports[0])[0] == 2


def test_stdin_input(day_csv, monkeypatch):
    monkeypatch.setattr(sys, "stdin", io.TextIOWrapper(io.BytesIO(day_csv.read_bytes())))
    code, out, _ = run("stats", "-")
    assert code == 0 and json.loads(out)["n"] == 20_000


def test_ingest_reports_gaps(tmp_path):
    path = tmp_path / "gappy.csv"
    path.write_text("timestamp,frequency\n0,50\n1,50.1\n2,50\n10,50\n11,49.9\n11,49.8\n")
    doc = json.loads(run("ingest", path)[1])
    assert doc["n_segments"] == 2 and doc["dropped_samples"] == 1
    assert doc["segments"] == [[0.0, 2.0, 3], [10.0, 11.0, 2]]
    doc = json.loads(run("ingest", path, "--max-gap", 10)[1])
    assert doc["n_segments"] == 1
