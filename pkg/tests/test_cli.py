import csv

import pytest

from oride_attack.cli import main
from oride_attack.roadnet import load_network

from conftest import DATA


def _rows(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def test_gen_roads(tmp_path):
    out = tmp_path / "g.csv"
    assert main(["gen-roads", "--grid", "3x4", "--spacing", "100", "--out", str(out)]) == 0
    assert len(load_network(out).segments) == 3 * 5 + 4 * 4


def test_gen_roads_with_barriers(tmp_path):
    out = tmp_path / "b.csv"
    main(["gen-roads", "--grid", "40x40", "--spacing", "25", "--barrier", "500", "--crossing", "1500",
          "--axes", "x", "--out", str(out)])
    plain = 40 * 41 * 2
    assert 0 < len(load_network(out).segments) < plain
    with pytest.raises(SystemExit):
        main(["gen-roads", "--grid", "4x4", "--spacing", "25", "--barrier", "50"])


def test_ingest_geojson(tmp_path):
    out = tmp_path / "nyc.csv"
    main(["ingest", "--in", str(DATA / "nyc_uws.geojson"), "--pin-zone", "centroid", "--out", str(out)])
    rows = _rows(out)
    assert rows and set(rows[0]) >= {"road_id", "x1", "y1", "x2", "y2"}


def test_attack(tmp_path):
    out = tmp_path / "a.csv"
    main(["--seed", "5", "attack", "--roads", "grid:30x30:100", "--zone-side", "1000", "--trials", "4",
          "--drivers", "2", "--out", str(out)])
    rows = _rows(out)
    assert list(rows[0]) == ["trial", "driver", "candidates", "hit", "exact"]
    assert len(rows) == 8 and all(r["hit"] == "1" for r in rows)


def test_attack_pnorm(tmp_path):
    out = tmp_path / "p.csv"
    main(["--seed", "5", "attack", "--roads", "grid:30x30:100", "--zone-side", "600", "--trials", "3",
          "--pnorm", "4", "--out", str(out)])
    assert all(r["hit"] == "1" for r in _rows(out))


def test_mitigate(tmp_path):
    out = tmp_path / "m.csv"
    main(["--seed", "5", "mitigate", "--roads", "grid:30x30:100", "--zone-side", "1000", "--trials", "4",
          "--radius", "50", "--out", str(out)])
    rows = _rows(out)
    assert list(rows[0]) == ["trial", "candidates", "hit"] and len(rows) == 4


def test_accuracy(tmp_path, capsys):
    out = tmp_path / "acc.csv"
    main(["--seed", "5", "accuracy", "--roads", "grid:60x60:25", "--zone-side", "1000", "--trials", "3",
          "--drivers", "20", "--mode", "mitigated", "--radius", "50", "--out", str(out)])
    rows = _rows(out)
    assert list(rows[0]) == ["trial", "selected", "t_m", "t_t", "within"]
    assert all(float(r["t_t"]) <= float(r["t_m"]) for r in rows)
    assert "accuracy_pct=" in capsys.readouterr().err


def test_polyrecover(tmp_path, capsys):
    out = tmp_path / "poly.csv"
    main(["--seed", "1", "polyrecover", "--degree", "2", "--alpha", "4", "--beta", "6", "--trials", "5",
          "--out", str(out)])
    rows = _rows(out)
    assert len(rows) == 5 and all(r["found"] == "1" for r in rows)
    assert "found=5/5" in capsys.readouterr().err


def test_sweep_with_config_file(tmp_path):
    cfg = tmp_path / "s.cfg"
    cfg.write_text("road_source = grid:30x30:100\nzone_sides_m = 1000, 2000\ntrials_per_size = 3\n",
                   encoding="utf-8")
    out = tmp_path / "s.csv"
    main(["--config", str(cfg), "--seed", "9", "sweep", "--timings", str(tmp_path / "t.csv"),
          "--out", str(out)])
    rows = _rows(out)
    assert [r["zone_side"] for r in rows] == ["1000", "2000"]
    assert len(_rows(tmp_path / "s.trials.csv")) == 6
    assert (tmp_path / "t.csv").exists()
    first = out.read_bytes()
    main(["--config", str(cfg), "--seed", "9", "sweep", "--workers", "2", "--out", str(out)])
    assert out.read_bytes() == first


def test_bad_config_key(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("flavour = strange\n", encoding="utf-8")
    with pytest.raises(ValueError, match="unknown key"):
        main(["--config", str(cfg), "sweep"])
