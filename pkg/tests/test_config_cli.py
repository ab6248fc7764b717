import math

import numpy as np
import pytest

from trilevel import algebra, cli, config


def read_csv(path):
    lines = path.read_text().splitlines()
    header = lines[0].split(",")
    data = np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
    return header, data


def write_cfg(path, text):
    path.write_text(text)
    return str(path)


# --- config format ---------------------------------------------------------

def test_parse_flat_basics():
    text = "# comment\n\nA = 1.5\nname = fig1\n"
    assert config.parse_flat(text) == {"A": "1.5", "name": "fig1"}


def test_parse_flat_errors():
    with pytest.raises(config.ConfigError, match="key = value"):
        config.parse_flat("just a line\n")
    with pytest.raises(config.ConfigError, match="duplicate"):
        config.parse_flat("a = 1\na = 2\n")
    with pytest.raises(config.ConfigError, match="block header"):
        config.parse_flat("[block]\n")


def test_parse_blocks():
    text = "# table\n[one]\na = 1\n[two]\nb = 2\n"
    blocks = config.parse_blocks(text)
    assert blocks == {"one": {"a": "1"}, "two": {"b": "2"}}
    with pytest.raises(config.ConfigError, match="duplicate block"):
        config.parse_blocks("[x]\n[x]\n")
    with pytest.raises(config.ConfigError, match="before any"):
        config.parse_blocks("a = 1\n")


def test_float_serialization_round_trips():
    for value in (1 / math.sqrt(2), math.pi / 6, 0.1, 5 * math.sqrt(2)):
        assert float(config.format_value(value)) == value


def test_coercion_helpers_name_the_key():
    with pytest.raises(config.ConfigError, match="tol"):
        config.get_float({"tol": "abc"}, "tol")
    with pytest.raises(config.ConfigError, match="solver"):
        config.get_choice({"solver": "magic"}, "solver", ("product",))
    assert config.get_bool({"x": "true"}, "x") is True
    with pytest.raises(config.ConfigError, match="x"):
        config.get_bool({"x": "maybe"}, "x")


# --- run -------------------------------------------------------------------

FIG1_CONFIG = """
A = 0.05
Omega = 0.0
B = 0.5
omega = 1.0
delta = 0.0
Gamma = 0.02
initial = level1
t_end = 10.0
dt_out = 0.5
tol = 1e-9
csv = {csv}
"""


def test_run_writes_expected_csv(tmp_path):
    csv = tmp_path / "out.csv"
    cfg = write_cfg(tmp_path / "run.cfg", FIG1_CONFIG.format(csv=csv))
    assert cli.main(["run", cfg]) == 0
    header, data = read_csv(csv)
    assert header == ("t,pop1,pop2,pop3,re12,im12,re13,im13,re23,im23,"
                      "entropy,purity,eig1,eig2,eig3,eta_norm").split(",")
    assert data.shape == (math.ceil(10.0 / 0.5) + 1, 16)
    assert data[0, 1] == 1.0  # starts in level 1
    # scientific notation with 12 significant digits, no negative zero
    first_line = csv.read_text().splitlines()[1]
    token = first_line.split(",")[1]
    mantissa = token.split("e")[0].replace("-", "").replace(".", "")
    assert len(mantissa) == 12
    assert "-0.00000000000e" not in csv.read_text()


def test_run_is_deterministic(tmp_path):
    csv = tmp_path / "out.csv"
    cfg = write_cfg(tmp_path / "run.cfg", FIG1_CONFIG.format(csv=csv))
    assert cli.main(["run", cfg]) == 0
    first = csv.read_bytes()
    assert cli.main(["run", cfg]) == 0
    assert csv.read_bytes() == first


def test_run_supports_preset_reference_and_overrides(tmp_path):
    csv = tmp_path / "f9.csv"
    cfg = write_cfg(tmp_path / "f9.cfg", f"preset = fig9\ncsv = {csv}\n")
    assert cli.main(["run", cfg, "--t-end", "4", "--dt-out", "1", "--tol", "1e-8"]) == 0
    _, data = read_csv(csv)
    assert data.shape[0] == 5
    assert data[0, 2] == 1.0  # fig9 starts in level 2


def test_run_rejects_negative_gamma(tmp_path, capsys):
    cfg = write_cfg(tmp_path / "bad.cfg",
                    "A = 1\nOmega = 0\nB = 1\nomega = 1\nGamma = -1\n"
                    "t_end = 1\ndt_out = 0.5\ncsv = x.csv\n")
    assert cli.main(["run", cfg]) == 2
    assert "Gamma must be >= 0" in capsys.readouterr().err


def test_run_rejects_unknown_keys_and_bad_tol(tmp_path, capsys):
    cfg = write_cfg(tmp_path / "bad.cfg", "preset = fig1\ncsv = x.csv\nbogus = 1\n")
    assert cli.main(["run", cfg]) == 2
    assert "bogus" in capsys.readouterr().err
    cfg2 = write_cfg(tmp_path / "bad2.cfg", "preset = fig1\ncsv = x.csv\ntol = 0.01\n")
    assert cli.main(["run", cfg2]) == 2
    assert "tol" in capsys.readouterr().err


def test_run_requires_csv(tmp_path, capsys):
    cfg = write_cfg(tmp_path / "nocsv.cfg", "preset = fig1\nt_end = 1\ndt_out = 0.5\n")
    assert cli.main(["run", cfg]) == 2
    assert "csv" in capsys.readouterr().err


def test_hydrogen_analytic_requires_hydrogen_fields(tmp_path, capsys):
    cfg = write_cfg(tmp_path / "h.cfg",
                    "preset = fig1\nsolver = hydrogen_analytic\ncsv = x.csv\n")
    assert cli.main(["run", cfg]) == 2
    assert "hydrogen" in capsys.readouterr().err


def test_hydrogen_analytic_agrees_with_product_solver(tmp_path):
    csv_a = tmp_path / "a.csv"
    csv_b = tmp_path / "b.csv"
    base = "preset = hydrogen\nt_end = 6.0\ndt_out = 0.5\ntol = 1e-12\ncsv = {}\n"
    assert cli.main(["run", write_cfg(tmp_path / "a.cfg", base.format(csv_a)
                                      + "solver = hydrogen_analytic\n")]) == 0
    assert cli.main(["run", write_cfg(tmp_path / "b.cfg", base.format(csv_b)
                                      + "solver = product\n")]) == 0
    _, da = read_csv(csv_a)
    _, db = read_csv(csv_b)
    assert np.max(np.abs(da - db)) <= 1e-6


@pytest.mark.parametrize("solver", ["direct_eta", "direct_rho"])
def test_direct_solvers_run_from_cli(tmp_path, solver):
    csv = tmp_path / "d.csv"
    cfg = write_cfg(tmp_path / "d.cfg",
                    f"preset = fig1\nsolver = {solver}\nt_end = 2\ndt_out = 0.5\ncsv = {csv}\n")
    assert cli.main(["run", cfg]) == 0
    _, data = read_csv(csv)
    assert data.shape == (5, 16)


def test_run_with_svg_output(tmp_path):
    csv = tmp_path / "out.csv"
    svg = tmp_path / "out.svg"
    cfg = write_cfg(tmp_path / "run.cfg",
                    FIG1_CONFIG.format(csv=csv) + f"svg = {svg}\nquantities = all\n")
    assert cli.main(["run", cfg]) == 0
    panels = sorted(p.name for p in tmp_path.glob("out_*.svg"))
    assert panels == ["out_coherences_im.svg", "out_coherences_re.svg",
                      "out_entropy.svg", "out_populations.svg"]
    body = (tmp_path / "out_populations.svg").read_text()
    assert body.startswith("<svg") and "polyline" in body and "pop1" in body


# --- figure ----------------------------------------------------------------

def test_figure_unknown_name(tmp_path, capsys):
    assert cli.main(["figure", "fig99", "--out", str(tmp_path)]) == 2
    err = capsys.readouterr().err
    assert "fig1" in err and "hydrogen" in err


def test_figure_emits_csv_and_panels(tmp_path):
    assert cli.main(["figure", "fig16", "--out", str(tmp_path),
                     "--t-end", "10", "--tol", "1e-11"]) == 0
    header, data = read_csv(tmp_path / "fig16.csv")
    assert len(header) == 16
    # the Stark eigenstate is frozen: every tracked element is constant
    for col in range(1, 10):
        assert np.max(np.abs(data[:, col] - data[0, col])) <= 1e-8
    assert sorted(p.name for p in tmp_path.glob("*.svg")) == [
        "fig16_coherences_im.svg", "fig16_coherences_re.svg",
        "fig16_entropy.svg", "fig16_populations.svg"]


def test_figure_entropy_rises_monotonically(tmp_path):
    assert cli.main(["figure", "fig11", "--out", str(tmp_path),
                     "--t-end", "60", "--dt-out", "0.5"]) == 0
    _, data = read_csv(tmp_path / "fig11.csv")
    entropy = data[:, 10]
    assert entropy[0] <= 1e-12
    assert np.all(np.diff(entropy) >= -1e-10)
    assert entropy[-1] > 0.5


# --- sweep -----------------------------------------------------------------

def test_sweep_over_phase_produces_distinct_traces(tmp_path):
    csv = tmp_path / "sw.csv"
    cfg = write_cfg(tmp_path / "sw.cfg",
                    f"preset = fig5\ncsv = {csv}\nt_end = 10\ndt_out = 0.5\ntol = 1e-9\n")
    values = f"{-math.pi / 6},{math.pi / 6},{math.pi / 4},{math.pi / 2}"
    assert cli.main(["sweep", cfg, "--param", "delta", f"--values={values}"]) == 0
    outs = sorted(tmp_path.glob("sw__delta=*.csv"))
    assert len(outs) == 4
    # from a level population, rho12 stays pure imaginary; im12 carries the
    # phase dependence
    traces = [read_csv(p)[1][:, 5] for p in outs]
    for trace in traces:
        assert np.max(np.abs(trace)) > 1e-3
    for i in range(4):
        for j in range(i + 1, 4):
            assert np.max(np.abs(traces[i] - traces[j])) > 1e-3


def test_sweep_gamma_controls_the_entropy_rise(tmp_path):
    csv = tmp_path / "g.csv"
    cfg = write_cfg(tmp_path / "g.cfg",
                    f"preset = fig5\ncsv = {csv}\nt_end = 20\ndt_out = 1\ntol = 1e-10\n")
    assert cli.main(["sweep", cfg, "--param", "Gamma", "--values", "0.02,0.08"]) == 0
    _, low = read_csv(tmp_path / "g__Gamma=0.02.csv")
    _, high = read_csv(tmp_path / "g__Gamma=0.08.csv")
    # entropy follows the universal law for each Gamma
    for data, gamma in ((low, 0.02), (high, 0.08)):
        for t, s in zip(data[:, 0], data[:, 10]):
            x = math.exp(-gamma * t)
            lam = np.array([(1 + 2 * x) / 3, (1 - x) / 3, (1 - x) / 3])
            expected = float(-np.sum(lam[lam > 0] * np.log(lam[lam > 0])))
            assert abs(s - expected) <= 1e-7
    assert np.max(high[:, 10] - low[:, 10]) > 0.1


def test_sweep_rejects_empty_values_and_bad_param(tmp_path, capsys):
    cfg = write_cfg(tmp_path / "sw.cfg", "preset = fig5\ncsv = sw.csv\n")
    assert cli.main(["sweep", cfg, "--param", "delta", "--values", ""]) == 2
    assert cli.main(["sweep", cfg, "--param", "bogus", "--values", "1"]) == 2
    assert cli.main(["sweep", cfg, "--param", "delta", "--values", "1,up"]) == 2


def test_unwritable_csv_path_maps_to_io_exit_code(tmp_path, capsys):
    cfg = write_cfg(tmp_path / "io.cfg",
                    f"preset = fig1\nt_end = 1\ndt_out = 0.5\n"
                    f"csv = {tmp_path}/no/such/dir/out.csv\n")
    assert cli.main(["run", cfg]) == 4
    assert "i/o error" in capsys.readouterr().err


def test_solver_failure_maps_to_exit_code_3(tmp_path, monkeypatch, capsys):
    from trilevel import propagator

    def boom(*args, **kwargs):
        raise propagator.PropagationError("restart failed to advance")

    monkeypatch.setattr(cli, "solve", boom)
    cfg = write_cfg(tmp_path / "s.cfg", "preset = fig1\ncsv = out.csv\n")
    assert cli.main(["run", cfg]) == 3
    assert "solver error" in capsys.readouterr().err


# --- check -----------------------------------------------------------------

def test_check_passes_on_a_fresh_build(capsys):
    assert cli.main(["check"]) == 0
    out = capsys.readouterr().out
    assert "PASS" in out and "FAIL" not in out


def test_check_detects_tampered_generator(monkeypatch, capsys):
    tampered = -np.asarray(algebra.B_Z)
    tampered.setflags(write=False)
    monkeypatch.setattr(algebra, "B_Z", tampered)
    assert cli.main(["check"]) == 1
    assert "FAIL" in capsys.readouterr().out
