import io

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lattice_cbc.cli import RunConfig, ConfigError, main
from lattice_cbc.tables import format_table_csv, relative_deviation, reproduce, round_sig
from lattice_cbc.vectorfile import format_vector, parse_vector
from lattice_cbc.wce import GeneratingVector
from lattice_cbc.weights import WeightScheme


def _run(argv):
    out = io.StringIO()
    code = main(argv, stdout=out)
    return code, out.getvalue()


@settings(max_examples=50)
@given(st.sampled_from([5, 53, 251, 32003]), st.integers(1, 12), st.integers(0, 2 ** 31), st.booleans())
def test_vector_round_trip(n, s, seed, pod):
    rng = np.random.default_rng(seed)
    z = tuple(int(v) for v in rng.integers(1, n, s))
    gv = GeneratingVector(n, z)
    gamma = rng.uniform(1e-9, 10, s)
    sch = WeightScheme.pod(gamma, rng.uniform(0.1, 100, s)) if pod else WeightScheme.product(gamma)
    gv2, sch2 = parse_vector(format_vector(gv, sch))
    assert gv2 == gv
    assert sch2.kind == sch.kind
    assert np.array_equal(sch2.gamma, sch.gamma)
    if pod:
        assert np.array_equal(sch2.Gamma_ratios, sch.Gamma_ratios)


def test_vector_format_layout():
    text = format_vector(GeneratingVector(5, (1, 2)), WeightScheme.product([1.0, 0.75]))
    assert text.splitlines() == ["5 2", "1", "2", "# gamma_1 = 1", "# gamma_2 = 0.75"]
    with pytest.raises(ValueError):
        parse_vector("5 3\n1\n2\n")


def test_config_validation_names_field():
    with pytest.raises(ConfigError, match="^Gamma"):
        RunConfig(algorithm="dcbc", n="251", b="poly 2", B="factorial").validate()
    with pytest.raises(ConfigError, match="^weights"):
        RunConfig(algorithm="cbc", n="251", b="poly 2").validate()
    with pytest.raises(ConfigError, match="^weights"):
        RunConfig(algorithm="icbc", n="251", b="poly 2", weights="lambda 0.7").validate()
    with pytest.raises(ConfigError, match="^n"):
        RunConfig(n="251 1").validate()
    with pytest.raises(ConfigError, match="^b"):
        RunConfig(b="cubic 2").validate()
    with pytest.raises(ConfigError, match="^lambda0"):
        RunConfig(algorithm="icbc", lambda0=0.3).validate()


def test_construct_cbc_example(tmp_path):
    vec = tmp_path / "v.txt"
    table = tmp_path / "t.csv"
    code, out = _run(["construct", "--algorithm", "cbc", "--n", "251", "--s", "100", "--b", "poly 2",
                      "--weights", "product-poly 2", "--vector", str(vec), "--table", str(table)])
    assert code == 0
    rows = table.read_text().splitlines()
    assert rows[0] == "n,E,e2,M,wall_time"
    assert round_sig(float(rows[1].split(",")[1])) == 7.5e-3
    assert parse_vector(vec.read_text())[0].s == 100


def test_construct_icbc_example():
    code, out = _run(["construct", "--algorithm", "icbc", "--n", "251", "--s", "100", "--b", "geo 0.5"])
    assert code == 0
    row = out.splitlines()[-1].split(",")
    assert abs(float(row[4]) - 0.616) <= 0.02


def test_construct_dcbc_example_and_rate(tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[run]\nalgorithm = dcbc\nn = 251, 499\ns = 100\n[bounds]\nb = poly 2\nB = one\n"
                   "[output]\ntable = %s\nhistory = %s\n" % (tmp_path / "t.csv", tmp_path / "h{n}.csv"))
    code, _ = _run(["construct", "--config", str(cfg)])
    assert code == 0
    rows = (tmp_path / "t.csv").read_text().splitlines()
    assert relative_deviation(float(rows[1].split(",")[1]), 6.8e-3) <= 0.25
    assert rows[-1].startswith("rate,")
    hist = (tmp_path / "h251.csv").read_text().splitlines()
    assert hist[0] == "dim,z,gamma,Gamma_ratio,e2,M,E" and len(hist) == 101


def test_exit_codes(tmp_path):
    assert _run(["construct", "--algorithm", "dcbc", "--n", "251", "--b", "poly 2", "--B", "factorial"])[0] == 1
    bad = tmp_path / "bad.ini"
    bad.write_text("[run]\nalgorithm = cbc\n[mystery]\nx = 1\n")
    assert _run(["construct", "--config", str(bad)])[0] == 1
    assert _run(["wce", str(tmp_path / "missing.txt")])[0] == 3
    blocked = tmp_path / "file"
    blocked.write_text("")
    code, _ = _run(["construct", "--algorithm", "cbc", "--n", "53", "97", "--s", "4", "--b", "poly 2",
                    "--weights", "product-poly 2", "--vector", str(tmp_path / "v{n}.txt"),
                    "--table", str(blocked / "t.csv")])
    assert code == 3
    assert not (tmp_path / "v53.txt").exists()  # partial outputs removed


def test_composite_n_warns(caplog):
    code, _ = _run(["construct", "--algorithm", "cbc", "--n", "100", "--s", "4", "--b", "poly 2",
                    "--weights", "product-geo 0.5"])
    assert code == 0
    assert "not an odd prime" in caplog.text


def test_wce_and_bound_subcommands(tmp_path):
    vec = tmp_path / "v.txt"
    assert _run(["construct", "--algorithm", "cbc", "--n", "251", "--s", "10", "--b", "poly 2",
                 "--weights", "product-poly 2", "--vector", str(vec)])[0] == 0
    code, out = _run(["wce", str(vec), "--b", "poly 2"])
    assert code == 0 and "E  =" in out
    code, out = _run(["bound", "--vector", str(vec)])
    assert code == 0
    rows = [r.split(",") for r in out.splitlines()[1:]]
    assert len(rows) == 10 and all(float(m) <= float(b) for _, b, m in rows)
    code, out = _run(["bound", "--n", "7", "--s", "1", "--weights", "product-poly 2", "--lam", "1.0"])
    assert code == 0 and float(out.splitlines()[1].split(",")[1]) == pytest.approx((1 / 36) ** 0.5, rel=1e-6)


def test_tables_small_grid_is_deterministic(tmp_path):
    a = reproduce((2,), grid=(251, 499))
    b = reproduce((2,), grid=(251, 499))
    assert format_table_csv(a, 2) == format_table_csv(b, 2)
    code, out = _run(["tables", "--which", "2", "--n", "251", "499", "--out-dir", str(tmp_path / "o")])
    assert code == 0
    assert (tmp_path / "o" / "table2.csv").read_text() == format_table_csv(a, 2)
    assert (tmp_path / "o" / "comparison.txt").exists()
    assert _run(["tables", "--which", "9", "--out-dir", str(tmp_path / "x")])[0] == 1
