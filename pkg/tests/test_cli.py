import csv
import io
import json
import math

import numpy as np
import pytest

from depbounds.cli import FIGURES, figure_points, main
from depbounds.copulas import read_discrete_copula
from depbounds.optimizer import SearchProblem, brute_force


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


# -- report ----------------------------------------------------------------------


def test_report_d2(capsys):
    code, out, _ = run(capsys, "report", "--d", "2", "--beta", "1")
    assert code == 0
    values = {r["name"]: (float(r["value"]), r["sharp"]) for r in rows(out)}
    assert values["comonotone-distance"][0] == pytest.approx(0.471405, abs=1e-6)
    assert values["spherical"] == (pytest.approx(0.523599, abs=1e-6), "true")
    assert values["jensen"][0] == pytest.approx(0.577350, abs=1e-6)


def test_report_d3_d4_json(capsys):
    _, out, _ = run(capsys, "report", "--d", "3", "--format", "json")
    upper = {b["name"]: b for b in json.loads(out)["upper"]}
    assert upper["spherical"]["value"] == pytest.approx(2 / 3) and upper["spherical"]["sharp"]
    _, out, _ = run(capsys, "report", "--d", "4", "--format", "json")
    upper = {b["name"]: b for b in json.loads(out)["upper"]}
    assert round(upper["spherical"]["value"], 3) == 0.784 and not upper["spherical"]["sharp"]
    assert upper["jensen"]["value"] == pytest.approx(0.81650, abs=1e-5)


def test_report_with_copula_estimate(capsys):
    code, out, _ = run(capsys, "report", "--copula", "parallel")
    assert code == 0
    est = [r for r in rows(out) if r["kind"] == "estimate"][0]
    assert float(est["value"]) == pytest.approx(0.4985, abs=1e-3)


def test_report_marginals(capsys):
    code, out, _ = run(
        capsys, "report", "--f-marginal", "uniform:0,4", "--f-marginal", "uniform:0,1",
        "--g-marginal", "uniform:0,1", "--g-marginal", "uniform:0,4",
    )
    assert code == 0
    values = {r["name"]: float(r["value"]) for r in rows(out)}
    assert values["jensen"] == pytest.approx(math.sqrt(22 / 3))
    assert values["comonotone-distance"] <= 2.48


def test_report_bad_marginal(capsys):
    code, _, err = run(capsys, "report", "--f-marginal", "gamma:1,2")
    assert code == 2 and "gamma" in err


def test_report_marginal_count_mismatch(capsys):
    code, _, _ = run(capsys, "report", "--d", "3", "--f-marginal", "uniform:0,1", "--f-marginal", "uniform:0,2")
    assert code == 2


# -- estimate / score -----------------------------------------------------------------


def test_estimate_quadrature(capsys):
    code, out, _ = run(capsys, "estimate", "--f", "comonotone", "--g", "countermonotone", "--d", "2",
                       "--beta", "1", "--method", "quadrature")
    assert code == 0
    (r,) = rows(out)
    assert float(r["value"]) == pytest.approx((math.sqrt(2) + math.log(1 + math.sqrt(2))) / (3 * math.sqrt(2)), abs=1e-12)
    assert r["method"] == "quadrature" and float(r["se"]) == 0


def test_estimate_parallel(capsys):
    _, out, _ = run(capsys, "estimate", "--f", "parallel", "--g", "parallel", "--method", "quadrature")
    assert float(rows(out)[0]["value"]) == pytest.approx(0.4985, abs=5e-4)


def test_estimate_spherical_monte_carlo(capsys):
    _, out, _ = run(capsys, "estimate", "--f", "spherical", "--g", "spherical", "--d", "3", "--method", "mc",
                    "--samples", "200000", "--seed", "7")
    r = rows(out)[0]
    assert abs(float(r["value"]) - 2 / 3) <= 3 * float(r["se"])


def test_estimate_energy_distance(capsys):
    _, out, _ = run(capsys, "estimate", "--f", "countermonotone", "--g", "comonotone", "--quantity", "energy-distance",
                    "--format", "json")
    (r,) = json.loads(out)
    assert r["quantity"] == "energy-distance" and r["value"] > 0


def test_estimate_capability_error(capsys):
    code, _, err = run(capsys, "estimate", "--f", "spherical", "--g", "spherical", "--method", "quadrature")
    assert code == 3 and "monte-carlo" in err


def test_estimate_unknown_copula(capsys):
    code, _, _ = run(capsys, "estimate", "--f", "gumbel", "--g", "comonotone")
    assert code == 2


def test_estimate_beta_two_rejected(capsys):
    code, _, _ = run(capsys, "estimate", "--f", "comonotone", "--g", "comonotone", "--beta", "2")
    assert code == 2


def test_score(capsys):
    code, out, _ = run(capsys, "score", "--f", "comonotone", "--y", "0,0", "--method", "quadrature")
    assert code == 0
    assert float(rows(out)[0]["value"]) == pytest.approx(math.sqrt(2) / 3, abs=1e-12)


def test_score_bad_point(capsys):
    code, _, _ = run(capsys, "score", "--f", "comonotone", "--y", "0,0,0")
    assert code == 2


def test_usage_error_exit_code(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["estimate", "--f", "comonotone"])
    assert exc.value.code == 2


# -- optimize ------------------------------------------------------------------------


def test_optimize_matches_brute_force(capsys):
    _, out, _ = run(capsys, "optimize", "--objective", "max-scc", "--n", "6", "--restarts", "50", "--seed", "1")
    value = float(rows(out)[0]["value"])
    assert value == brute_force(SearchProblem("max-scc", n=6)).value


def test_optimize_min_scc_identity(capsys):
    _, out, _ = run(capsys, "optimize", "--objective", "min-scc", "--n", "32", "--restarts", "2")
    assert rows(out)[0]["permutations"] == " ".join(map(str, range(32)))


def test_optimize_writes_files(capsys, tmp_path):
    cop, trace = tmp_path / "best.txt", tmp_path / "trace.csv"
    code, out, _ = run(capsys, "optimize", "--objective", "min-es", "--y", "0.5,0.5", "--n", "32", "--beta", "1",
                       "--restarts", "2", "--copula-out", str(cop), "--trace", str(trace), "--format", "json")
    assert code == 0
    (r,) = json.loads(out)
    assert r["value"] >= r["floor"]
    best = read_discrete_copula(cop)
    assert best.is_permutation and best.n == 32
    assert trace.read_text().startswith("restart,iteration,objective")
    assert sorted(p.name for p in tmp_path.iterdir()) == ["best.txt", "trace.csv"]


def test_optimize_invalid(capsys, tmp_path):
    out = tmp_path / "r.csv"
    code, _, _ = run(capsys, "optimize", "--objective", "min-es", "--n", "8", "--out", str(out))
    assert code == 2 and not out.exists()
    code, _, _ = run(capsys, "optimize", "--objective", "max-scc", "--n", "8", "--out", str(tmp_path / "no" / "r.csv"))
    assert code == 2


# -- figure ---------------------------------------------------------------------------


def test_figure_parallel_support():
    pts = figure_points("parallel-support", 100, 0)
    assert all(abs(abs(p["v"] - p["u"]) - 0.5) < 1e-15 for p in pts)
    assert {p["segment"] for p in pts} == {0, 1}


def test_figure_spherical(capsys, tmp_path):
    out = tmp_path / "s.csv"
    code, _, _ = run(capsys, "figure", "--name", "spherical-scatter", "--points", "2000", "--seed", "3", "--out", str(out))
    assert code == 0
    data = rows(out.read_text())
    assert len(data) == 2000
    u = np.array([[float(r["u"]), float(r["v"])] for r in data])
    r2 = np.sum((2 * u - 1) ** 2, axis=1)
    assert np.all(r2 < 1)
    # boundary-dense: the outer ring of radius in [0.9, 1] has more than its area share (19%)
    assert np.mean(r2 > 0.81) > 0.3


@pytest.mark.parametrize("name", ["counterex-left", "counterex-right"])
def test_figure_counterexample(name):
    pts = figure_points(name, 5000, 0)
    z = np.array([[p["z1"], p["z2"]] for p in pts])
    assert len(pts) == 5000 and z.min() >= 0 and z.max() <= 4


def test_figure_correlation_ordering():
    left = np.array([[p["z1"], p["z2"]] for p in figure_points("counterex-left", 20000, 1)])
    right = np.array([[p["z1"], p["z2"]] for p in figure_points("counterex-right", 20000, 1)])
    assert np.corrcoef(right.T)[0, 1] > np.corrcoef(left.T)[0, 1]


def test_figure_unknown_name(capsys):
    code, _, err = run(capsys, "figure", "--name", "nope")
    assert code == 2
    assert all(name in err for name in FIGURES)


# -- determinism and atomic output ------------------------------------------------------


@pytest.mark.parametrize(
    "argv",
    [
        ["figure", "--name", "spherical-scatter", "--points", "500", "--seed", "3"],
        ["estimate", "--f", "spherical", "--g", "hat", "--method", "mc", "--samples", "5000", "--seed", "2"],
        ["optimize", "--objective", "max-scc", "--n", "10", "--restarts", "3", "--seed", "5"],
    ],
)
def test_byte_identical_output(tmp_path, argv):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(argv + ["--out", str(a)]) == 0
    assert main(argv + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_threads_from_environment(tmp_path, monkeypatch):
    argv = ["figure", "--name", "spherical-scatter", "--points", "500", "--seed", "3"]
    monkeypatch.setenv("DEPBOUNDS_THREADS", "3")
    main(argv + ["--out", str(tmp_path / "env")])
    main(argv + ["--threads", "3", "--out", str(tmp_path / "flag")])
    assert (tmp_path / "env").read_bytes() == (tmp_path / "flag").read_bytes()
    monkeypatch.setenv("DEPBOUNDS_THREADS", "many")
    assert main(argv) == 2


def test_no_partial_file_on_error(tmp_path, capsys):
    out = tmp_path / "x.csv"
    code, _, _ = run(capsys, "estimate", "--f", "spherical", "--g", "spherical", "--method", "exact", "--out", str(out))
    assert code == 3
    assert list(tmp_path.iterdir()) == []


def test_csv_precision(capsys):
    _, out, _ = run(capsys, "report", "--d", "2")
    value = rows(out)[0]["value"]
    assert float(value) == pytest.approx(math.sqrt(2) / 3, rel=1e-15)
    assert len(value.lstrip("0.")) >= 15
