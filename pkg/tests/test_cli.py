import json

import pytest

import importlib

from sprtree import app, formats

version = importlib.import_module("sprtree.version")

from . import lib

SMALL = ["--steps", "20", "--weight-grid", "4"]


def teardown_function(function):
    lib.clean()


def test_version(capsys):
    assert app.main(["--version"]) == 0
    assert version.version in capsys.readouterr().out


def test_usage_errors():
    """Missing subcommands, flags and bad choices exit with 2"""
    assert app.main([]) == 2
    assert app.main(["chain"]) == 2
    assert app.main(["dist", "--a", "x.json", "--b", "y.json",
                     "--mode", "hausdorff"]) == 2
    assert app.main(["sample-crt", "--method", "walk"]) == 2


def test_runtime_errors(tmp_path, capsys):
    """Unreadable or invalid inputs exit with 1 and a message"""
    missing = str(tmp_path / "missing.json")
    assert app.main(["dist", "--a", missing, "--b", missing]) == 1
    assert "sprtree dist" in capsys.readouterr().err

    broken = tmp_path / "broken.json"
    broken.write_text("{")
    assert app.main(["dist", "--a", str(broken), "--b", str(broken)]) == 1

    assert app.main(["verify", "--test", "estimate"]) == 1
    assert app.main(["chain", "--time", "-1", "--observables",
                     "mean-dist"] + SMALL) == 1
    assert app.main(["chain", "--time", "1", "--observables",
                     "volume"] + SMALL) == 1


def test_sample_crt(tmp_path):
    """Tree, excursion and Newick files, all stamped with the run"""
    out = tmp_path / "tree.json"
    csv = tmp_path / "e.csv"
    newick = tmp_path / "tree.nwk"
    assert app.main(["sample-crt", "--seed", "3", "--out", str(out),
                     "--excursion", str(csv), "--newick", str(newick)] +
                    SMALL) == 0

    doc = formats.loads(out.read_text(), "tree")
    assert doc["run"]["config"]["seed"] == 3
    assert doc["run"]["config"]["steps"] == 20
    assert "out" not in doc["run"]["config"]
    assert len(formats.parse_tree(doc).atoms) == 4

    lines = csv.read_text().splitlines()
    assert lines[0] == "# sprtree %s" % version.version
    assert formats.parse_excursion(csv.read_text()).length == 1.0
    assert newick.read_text().endswith(";\n")


def test_sample_crt_to_stdout(capsys):
    assert app.main(["sample-crt"] + SMALL) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["run"]["config"]["seed"] == 7


def test_reruns_are_byte_identical(tmp_path):
    """Same seed, same bytes, whatever the thread count"""
    outputs = []
    for threads in ("1", "2"):
        out = tmp_path / ("report_%s.json" % threads)
        assert app.main(["verify", "--test", "estimate",
                         "--id", "excursion_max_tail", "--x", "1",
                         "--samples", "100", "--threads", threads,
                         "--json", str(out)] + SMALL) == 0
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1]

    report = json.loads(outputs[0])
    assert report["kind"] == "estimate"
    assert "runtime" not in report["result"]
    assert "threads" not in report["run"]["config"]


def test_chain(tmp_path):
    """Trajectory CSV, snapshots and the final tree"""
    out = tmp_path / "trajectory.csv"
    final = tmp_path / "final.json"
    snapshots = tmp_path / "snapshots"
    snapshots.mkdir()

    assert app.main(["chain", "--time", "2", "--observables",
                     "mean-dist,total-length", "--snapshots", "1,2",
                     "--out", str(out), "--final", str(final),
                     "--snapshot-dir", str(snapshots)] + SMALL) == 0

    rows = [line for line in out.read_text().splitlines()
            if not line.startswith("#")]
    assert rows[0] == "jump_index,time,mean_dist,total_length"
    formats.loads(final.read_text(), "tree")
    for path in snapshots.iterdir():
        assert path.name in ("snapshot_1.json", "snapshot_2.json")
        formats.loads(path.read_text(), "tree")


def test_chain_from_a_file(tmp_path):
    tree = tmp_path / "y.json"
    tree.write_text(formats.dumps(formats.format_tree(lib.y_tree())))
    out = tmp_path / "trajectory.csv"
    assert app.main(["chain", "--init", str(tree), "--time", "1",
                     "--out", str(out)]) == 0
    assert "mean_dist" in out.read_text()


def test_dist_of_a_file_with_itself(tmp_path):
    tree = tmp_path / "tree.json"
    assert app.main(["sample-crt", "--out", str(tree)] + SMALL) == 0

    for mode in ("gh", "delta-ghwt", "d-ghwt"):
        out = tmp_path / ("%s.json" % mode)
        assert app.main(["dist", "--a", str(tree), "--b", str(tree),
                         "--mode", mode, "--epsilon", "1",
                         "--out", str(out)]) == 0
        bounds = formats.loads(out.read_text(), "bounds")
        assert bounds["lower"] == 0.0
        assert bounds["upper"] == 0.0


def test_path_actions(tmp_path, capsys):
    """Path surgery from the command line"""
    w = tmp_path / "w.csv"
    w.write_text("t,value\n0,0\n0.25,1\n0.5,0.5\n0.75,1\n1,0\n")

    assert app.main(["path", "straddle", "--e", str(w),
                     "--s", "0.25", "--a", "0.6"]) == 0
    straddle = json.loads(capsys.readouterr().out)["straddle"]
    assert straddle["s_lo"] == pytest.approx(0.15)

    hat, check = tmp_path / "hat.csv", tmp_path / "check.csv"
    assert app.main(["path", "excise", "--e", str(w), "--s", "0.25",
                     "--a", "0.6", "--hat", str(hat),
                     "--check", str(check)]) == 0
    assert formats.parse_excursion(hat.read_text()).length == \
        pytest.approx(0.3)
    assert formats.parse_excursion(check.read_text()).length == \
        pytest.approx(0.7)

    moved = tmp_path / "moved.csv"
    assert app.main(["path", "spr", "--e", str(w), "--s", "0.25",
                     "--a", "0.6", "--v", "0", "--out", str(moved)]) == 0
    assert formats.parse_excursion(moved.read_text()).touching

    assert app.main(["path", "excise", "--e", str(w), "--s", "0.25"]) == 1
