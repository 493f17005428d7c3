import csv
import json
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from robitda.cli import main
from robitda.datasets import lupus_shaped_csv, write_csv
from robitda.io import RunManifest

FAST_VERIFY = ["--omega-instances", "5", "--theta-samples", "50", "--grid-points", "50",
               "--outer-nodes", "64", "--inner-draws", "200"]


@pytest.fixture(scope="module")
def lupus(tmp_path_factory):
    return lupus_shaped_csv(tmp_path_factory.mktemp("data") / "lupus.csv")


def read_samples(path):
    with path.open() as fh:
        first = fh.readline()
        rows = list(csv.reader(fh))
    return first, rows[0], np.array(rows[1:], dtype=float)


def test_run_contract(tmp_path, lupus):
    out = tmp_path / "out"
    rc = main(["run", "--data", str(lupus), "--model", "robit,probit", "--nu", "3", "--prior", "gprior",
               "--g", "3.49", "--iters", "200", "--burnin", "50", "--max-lag", "10", "--out", str(out)])
    assert rc == 0
    labels = ["robit-3-da-g3.49", "robit-3-sandwich-g3.49", "probit-da-g3.49", "probit-sandwich-g3.49"]
    man = RunManifest.from_json((out / "manifest.json").read_text())
    assert [c["label"] for c in man.chains] == labels
    assert man.prior["g"] == 3.49 and man.dataset["n"] == 55 and man.dataset["p"] == 3
    assert [c["stream"] for c in man.chains] == [0, 1, 2, 3]
    for lab in labels:
        first, header, body = read_samples(out / f"samples_{lab}.csv")
        assert first.split()[2] == man.hash
        assert header == ["iteration", "beta_1", "beta_2", "beta_3", "lik", "lpd"]
        assert body.shape == (200, 6)
    summary = json.loads((out / "summary.json").read_text())
    assert set(summary["chains"]) == set(labels)
    assert summary["chains"][labels[0]]["coordinates"]["beta_1"]["acf_lag1"] is not None
    with (out / "acf.csv").open() as fh:
        fh.readline()
        head = next(csv.reader(fh))
    assert head[0] == "lag" and len(head) == 1 + 4 * 3
    figs = sorted(p.name for p in (out / "figures").iterdir())
    assert "acf_beta_1.svg" in figs and "runmean_beta_3.svg" in figs
    for f in (out / "figures").iterdir():
        ET.parse(f)


def test_rerun_identical(tmp_path, lupus):
    args = ["run", "--data", str(lupus), "--iters", "100", "--max-lag", "5", "--seed", "7"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    for name in ("samples_robit-3-da-identity.csv", "samples_robit-3-sandwich-identity.csv", "acf.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_likpd_trace(tmp_path, lupus):
    out = tmp_path / "o"
    assert main(["run", "--data", str(lupus), "--iters", "60", "--max-lag", "5", "--trace", "likpd",
                 "--chain", "da", "--out", str(out)]) == 0
    assert (out / "figures" / "acf_lpd.svg").exists()


def test_plot_regenerates(tmp_path, lupus):
    out = tmp_path / "o"
    main(["run", "--data", str(lupus), "--iters", "60", "--max-lag", "5", "--chain", "da", "--out", str(out)])
    for f in (out / "figures").iterdir():
        f.unlink()
    assert main(["plot", "--out", str(out)]) == 0
    assert (out / "figures" / "runmean_beta_2.svg").exists()


def test_gprior_wide_fails(tmp_path, capsys):
    gen = np.random.default_rng(0)
    path = write_csv(tmp_path / "w.csv", gen.standard_normal((4, 6)), [0, 1, 0, 1])
    assert main(["run", "--data", str(path), "--prior", "gprior", "--iters", "60", "--max-lag", "5",
                 "--out", str(tmp_path / "o")]) == 2
    assert "gprior" in capsys.readouterr().err


@pytest.mark.parametrize(
    "extra",
    [["--g", "-1", "--prior", "gprior"], ["--iters", "0"], ["--chain", "gibbs"], ["--nu", "2"],
     ["--init", "1,2"], ["--coords", "9"], ["--max-lag", "500"]],
)
def test_bad_config(tmp_path, lupus, extra):
    assert main(["run", "--data", str(lupus), "--iters", "60", "--max-lag", "5", "--out", str(tmp_path)] + extra) == 2


def test_missing_file(tmp_path):
    assert main(["run", "--data", str(tmp_path / "nope.csv"), "--out", str(tmp_path)]) == 2


def test_verify_default_passes(tmp_path):
    assert main(["verify", "--out", str(tmp_path)] + FAST_VERIFY) == 0
    rep = json.loads((tmp_path / "verification_report.json").read_text())
    assert rep["passed"] and rep["failures"] == []


def test_verify_falsified(tmp_path):
    assert main(["verify", "--falsify", "mills", "--out", str(tmp_path)] + FAST_VERIFY) == 1
    rep = json.loads((tmp_path / "verification_report.json").read_text())
    assert [f["name"] for f in rep["failures"]] == ["mills_bounds"]


def test_verify_trace_instance(tmp_path):
    rc = main(["verify", "--trace-instance", "n=2,p=1,nu=3", "--seeds", "2", "--out", str(tmp_path)] + FAST_VERIFY)
    rep = json.loads((tmp_path / "verification_report.json").read_text())
    trace = [t for t in rep["traces"] if t["name"] == "trace_n2_p1_nu3"][0]
    assert len(trace["estimates"]) == 2
    assert rc == (0 if rep["passed"] else 1)
