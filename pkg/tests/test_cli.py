import pytest

from gapload.cli import main
from gapload.config import load_config, parse_override
from gapload.errors import ConfigError
from gapload.scenario import SystemConfig


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_run_uncoded_dmt(capsys):
    code, out, _ = run(capsys, "run", "--config", "reference.cfg", "--set", "coding=off", "--set", "lc=1")
    assert code == 0
    variant, raw, useful = out.split()
    assert variant == "uncoded_dmt"
    assert abs(int(raw.split("=")[1]) - 4636) / 4636 < 0.03


def test_gap_table(capsys):
    code, out, _ = run(capsys, "gap-table", "--config", "reference.cfg")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "order_bits,gap_db_uncoded,gap_db_coded"
    assert len(lines) == 11
    for line in lines[1:]:
        _, unc, cod = line.split(",")
        assert float(unc) == pytest.approx(9.8, abs=0.1)
        assert float(cod) < float(unc)


def test_channel_csv_is_deterministic(capsys, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(capsys, "channel", "--model", "multipath15.chan", "--csv", str(a))[0] == 0
    assert run(capsys, "channel", "--model", "multipath15.chan", "--csv", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_text().splitlines()[0] == "subcarrier_index,freq_hz,gain_db"


def test_compare_writes_outputs(capsys, tmp_path):
    code, out, _ = run(capsys, "compare", "--out", str(tmp_path))
    assert code == 0
    assert (tmp_path / "energy.csv").exists() and (tmp_path / "summary.csv").exists()
    assert len(out.strip().splitlines()) == 5


def test_run_writes_allocation(capsys, tmp_path):
    assert run(capsys, "run", "--quiet", "--out", str(tmp_path))[0] == 0
    assert (tmp_path / "allocation.csv").exists()


def test_sweep(capsys, tmp_path):
    code, _, _ = run(capsys, "sweep", "--config", "profiles.cfg", "--quiet", "--out", str(tmp_path),
                     "--set", "profiles=100m", "--set", "distances=100,200")
    assert code == 0
    lines = (tmp_path / "throughput.csv").read_text().splitlines()
    assert len(lines) == 1 + 2 * 4


def test_unknown_key_rejected(capsys):
    code, _, err = run(capsys, "run", "--set", "nonsense=1")
    assert code == 2 and "unknown config key" in err


def test_bad_value_names_field(capsys):
    code, _, err = run(capsys, "run", "--set", "lc=abc")
    assert code == 2 and "system.lc" in err


def test_missing_config(capsys):
    code, _, err = run(capsys, "run", "--config", "/no/such.cfg")
    assert code == 2 and "not found" in err


def test_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code != 0


def test_numeric_error_names_operation(capsys):
    code, _, err = run(capsys, "gap-table", "--set", "c_factor=1e7")
    assert code == 1 and "gap-table failed" in err


def test_overrides_after_file():
    run_cfg = load_config("reference.cfg", ["lc=4", "coding.margin_db=3", "band_start=1MHz", "spacing=10kHz"])
    s = run_cfg.system
    assert s.lc == 4 and s.coding.margin_db == 3.0
    assert s.band_start == 1e6 and s.spacing == 1e4


def test_bundled_config_matches_defaults():
    assert load_config("reference.cfg").system == SystemConfig()


def test_parse_override():
    assert parse_override("lc=2") == ("system", "lc", "2")
    assert parse_override("sweep.distances=1,2") == ("sweep", "distances", "1,2")
    with pytest.raises(ConfigError):
        parse_override("system.rs_n=2")
    with pytest.raises(ConfigError):
        parse_override("lc")


def test_unknown_section(tmp_path):
    p = tmp_path / "x.cfg"
    p.write_text("[system]\nlc = 2\n[extras]\nfoo = 1\n")
    with pytest.raises(ConfigError, match="unknown section"):
        load_config(p)


def test_profile_channel_from_config(tmp_path):
    p = tmp_path / "x.cfg"
    p.write_text("[channel]\nprofile = 300m\ndistance = 250\n")
    model = load_config(p).channel.build()
    assert model.paths[0].length == 250
