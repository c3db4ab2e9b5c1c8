import csv
import json

import pytest
from conftest import nn_interaction

from gibbslab.cli import main, parse_chain, parse_shape
from gibbslab.errors import InputError
from gibbslab.lattice import Shape
from gibbslab.serialize import dumps, interaction_to_dict


@pytest.fixture
def cocycle_file(tmp_path, hc):
    path = tmp_path / "phi.json"
    path.write_text(dumps(interaction_to_dict(nn_interaction(), hc)))
    return str(path)


class TestShapeLiterals:
    def test_cube(self):
        assert parse_shape("-1..1") == Shape.interval(-1, 1)
        assert len(parse_shape("0..2", 2)) == 9

    def test_braces(self):
        assert parse_shape("{0}") == Shape.of([(0,)])
        assert parse_shape("{(0,0);(1,2)}", 2) == Shape.of([(0, 0), (1, 2)])
        assert parse_shape("{-3..-2;5}") == Shape.of([(-3,), (-2,), (5,)])

    def test_chain(self):
        chain = parse_chain("{0};[-1..1];-3..3".replace("[", "{").replace("]", "}"))
        assert [len(c) for c in chain] == [1, 3, 7]

    @pytest.mark.parametrize("bad", ["", "{0", "a..b", "x", "(0,0)"])
    def test_errors(self, bad):
        with pytest.raises(InputError):
            parse_shape(bad)


class TestCommands:
    def test_heights_csv_with_sidecar(self, tmp_path):
        out = tmp_path / "h.csv"
        assert main(["zoo", "heights", "--i-max", "5", "--out", str(out)]) == 0
        rows = list(csv.DictReader(out.open()))
        assert [int(r["i"]) for r in rows] == [1, 2, 3, 4, 5]
        manifest = json.loads((tmp_path / "h.csv.manifest.json").read_text())
        assert manifest["seed"] == 0 and "wall_clock_seconds" not in manifest

    def test_verify_reports_identical_words(self, tmp_path):
        path = tmp_path / "m.json"
        path.write_text(json.dumps({"params": {"k": 2, "n": 20, "epsilon": "1/5"}, "u": "01" * 10, "v": "01" * 10}))
        out = tmp_path / "r.json"
        assert main(["markers", "verify", str(path), "--out", str(out)]) == 1
        assert "Ham(u,v)=0" in out.read_text()

    def test_search_then_verify(self, tmp_path):
        m = tmp_path / "marker.json"
        assert main(["markers", "search", "--k", "2", "--n", "120", "--seed", "3", "--workers", "1", "--out", str(m)]) == 0
        assert "manifest" in json.loads(m.read_text())
        assert main(["markers", "verify", str(m), "--out", str(tmp_path / "v.json")]) == 0

    def test_exhausted_search_is_usage_exit(self, tmp_path):
        argv = ["markers", "search", "--n", "40", "--epsilon", "1/100", "--attempts", "8", "--workers", "1",
                "--out", str(tmp_path / "x.json")]
        assert main(argv) == 2

    def test_window_too_small(self, tmp_path, cocycle_file):
        argv = ["kozlov", "--sft", "hardcore:1", "--cocycle", cocycle_file, "--window", "-2..2",
                "--chain", "{0};-2..2", "--out", str(tmp_path / "k.json")]
        assert main(argv) == 2

    def test_kozlov_negative_window_and_determinism(self, tmp_path, cocycle_file):
        outs = []
        out = tmp_path / "k.json"
        for _ in range(2):
            argv = ["kozlov", "--sft", "hardcore:1", "--cocycle", cocycle_file, "--window", "-5..5",
                    "--chain", "{0};-1..1", "--out", str(out)]
            assert main(argv) == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]
        certs = json.loads(outs[0])["result"]["certificates"]
        assert max(c["max_error"] for c in certs) <= 1e-10

    def test_sunny_tmp_is_falsified(self, tmp_path):
        out = tmp_path / "t.json"
        assert main(["space", "check-tmp", "--sft", "sunny:1", "--a", "{0}", "--b", "-1..1",
                     "--window", "-4..4", "--out", str(out)]) == 1
        assert json.loads(out.read_text())["result"]["witness"]

    def test_missing_file_is_usage_exit(self, tmp_path):
        assert main(["markers", "verify", str(tmp_path / "none.json")]) == 2

    def test_bad_flag_is_usage_exit(self):
        assert main(["zoo", "heights", "--i-max", "x"]) == 2

    def test_timing_is_opt_in(self, tmp_path):
        out = tmp_path / "r.json"
        assert main(["zoo", "rigid", "--q", "4", "--timing", "--out", str(out)]) == 0
        assert "wall_clock_seconds" in json.loads(out.read_text())["manifest"]
