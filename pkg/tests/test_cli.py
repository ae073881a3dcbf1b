import csv
import io
import json

import pytest

from invring.cli import EXIT_ERROR, EXIT_FLAGGED, EXIT_OK, run
from invring.constraints import raja3_bounds
from invring.gposet import PRINTED_E4_MATRIX, count_graphs
from invring.graph_core import cycle_graph, to_graph6


def call(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_poset_listing(capsys):
    code, out, _ = call(capsys, "poset", "--r", "3")
    assert code == EXIT_OK
    assert out.splitlines()[-1].endswith("01 02 12")
    code, out, _ = call(capsys, "poset", "--r", "4", "--format", "json")
    doc = json.loads(out)
    assert doc["size"] == len(doc["graphs"]) == 11


def test_etransform_aligned_rows(capsys):
    code, out, _ = call(capsys, "etransform", "--n", "4", "--align-printed")
    assert code == EXIT_OK
    rows = [[int(x) for x in line.split()] for line in out.splitlines()]
    assert rows == [list(r) for r in PRINTED_E4_MATRIX]


def test_check_graph_and_vector(capsys):
    code, out, _ = call(capsys, "check", "--r", "4", "--n", "5", "--graph", "01 12 23 34 40")
    assert code == EXIT_OK and json.loads(out)["pass"]
    code, out, _ = call(capsys, "check", "--r", "4", "--n", "6", "--vector", "1,1,5,0,0,0,0,0,0,0,0")
    rep = json.loads(out)
    assert code == EXIT_FLAGGED and not rep["pass"] and "products" in rep["violations"]


@pytest.mark.parametrize("argv", [
    ["check", "--r", "4", "--n", "6", "--vector", "1,2"],
    ["check", "--r", "4", "--n", "6", "--graph", "0x1"],
    ["check", "--r", "4", "--n", "3", "--graph", "01"],
    ["ramsey", "zeros", "--r", "3", "--n", "6", "--k", "4"],
    ["count", "--n", "-1"],
])
def test_errors_exit_one(capsys, argv):
    code, _, err = call(capsys, *argv)
    assert code == EXIT_ERROR and err


def test_unknown_subcommand_exits_one(capsys):
    with pytest.raises(SystemExit) as exc:
        run(["frobnicate"])
    assert exc.value.code == EXIT_ERROR


def test_enumerate_is_deterministic_across_workers(capsys):
    argv = ["enumerate", "--r", "4", "--n", "5", "--format", "ndjson"]
    _, serial, _ = call(capsys, *argv)
    _, parallel, _ = call(capsys, "--workers", "2", *argv)
    assert serial == parallel and serial.count("\n") > 10


def test_enumerate_csv_and_distribution(capsys):
    code, out, _ = call(capsys, "enumerate", "--r", "4", "--n", "5", "--z1", "5", "--format", "csv")
    rows = list(csv.reader(io.StringIO(out)))
    assert code == EXIT_OK and len(rows[0]) == 11
    assert ["1", "5", "5", "5", "0", "5", "0", "0", "0", "0", "0"] in rows[1:]
    code, out, _ = call(capsys, "enumerate", "--r", "4", "--n", "5", "--z1", "5",
                        "--distribution", "4", "--format", "json")
    assert code == EXIT_OK and json.loads(out)


def test_ramsey_zeros_exit_codes(capsys):
    code, out, _ = call(capsys, "ramsey", "zeros", "--r", "4", "--n", "6", "--k", "3")
    assert code == EXIT_OK and json.loads(out)["status"] == "bound_certified"
    code, out, _ = call(capsys, "ramsey", "zeros", "--r", "4", "--n", "5", "--k", "3")
    rep = json.loads(out)
    assert code == EXIT_FLAGGED and rep["status"] == "zero_found"
    assert [1, 5, 5, 5, 0, 5, 0, 0, 0, 0, 0] in rep["zeros"]


def test_ramsey_bound_csv(capsys):
    code, out, _ = call(capsys, "ramsey", "bound", "--r", "4", "--n", "6", "--k", "3")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == EXIT_OK and len(rows) == 16
    assert rows[0]["z1"] == "0" and rows[0]["lower_num"] == "20"


def test_curve_csv(capsys):
    code, out, _ = call(capsys, "curve", "--n", "5")
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["z1", "lower_num", "lower_den", "upper_num", "upper_den"]
    assert ["10", "30", "1", "30", "1"] in rows
    for z1, ln, ld, un, ud in rows[1:]:
        lo, hi = raja3_bounds(5, int(z1))
        assert (int(ln), int(ld)) == (lo.numerator, lo.denominator)
        assert (int(un), int(ud)) == (hi.numerator, hi.denominator)
    code, out, _ = call(capsys, "curve", "--n", "5", "--z1-min", "7", "--z1-max", "3")
    assert code == EXIT_OK and out.splitlines() == [",".join(rows[0])]


def test_count_and_charpoly(capsys):
    assert call(capsys, "count", "--n", "6")[1].strip() == str(count_graphs(6))
    code, out, _ = call(capsys, "charpoly", "--graph", "01 12 02")
    assert out.split() == ["2", "3", "0", "-1"]
    code, out, _ = call(capsys, "charpoly", "--graph", "01 12 02", "--n", "4", "--monic")
    assert out.split() == ["0", "-2", "-3", "0", "1"]


def test_newton_expand(capsys):
    code, out, _ = call(capsys, "newton", "expand", "--k", "3", "--n", "5", "--format", "json")
    assert code == EXIT_OK and json.loads(out)


def test_newton_syzygy_on_graph(capsys):
    code, out, _ = call(capsys, "newton", "syzygy", "--n", "5", "--graph", to_graph6(cycle_graph(5)))
    assert code == EXIT_OK


def test_local_commands(capsys, tmp_path):
    cube = "01 12 23 30 45 56 67 74 04 15 26 37"
    code, out, _ = call(capsys, "local", "reconstruct", "--graph", cube)
    assert code == EXIT_OK
    code, out, _ = call(capsys, "local", "check", "--degrees", "3,3,1,1")
    assert code == EXIT_FLAGGED and json.loads(out)["status"] == "fail"
    code, out, _ = call(capsys, "local", "check", "--degrees", "2,2,2")
    assert code == EXIT_OK
    code, out, _ = call(capsys, "local", "check", "--degrees", "3,3,3,3,3,3,3,3", "--budget", "2")
    assert code == EXIT_ERROR and json.loads(out)["status"] == "budget exhausted"
