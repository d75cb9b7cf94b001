import csv
import io
import json

import pytest

from hkcalc import cli
from hkcalc.exactnum import InternalError


def invoke(capsys, *argv):
    rc = cli.run(list(argv))
    return rc, capsys.readouterr()


def test_dp_eval(capsys):
    rc, out = invoke(capsys, "dp", "eval", "--p", "2", "--point", "1/3,1/3,1")
    assert rc == 0 and out.out.strip().endswith("1/9")


def test_dp_eval_json(capsys):
    rc, out = invoke(capsys, "--json", "dp", "eval", "--p", "2", "--point", "1/3,1/3,1")
    assert rc == 0 and json.loads(out.out)["value"] == "1/9"


def test_dinf_eval(capsys):
    rc, out = invoke(capsys, "--json", "dinf", "eval", "--point", "1/2,1/2,1/2")
    assert rc == 0 and json.loads(out.out)["value"] == "3/16"


def test_char2_cubic(capsys):
    rc, out = invoke(capsys, "fermat", "char2-cubic")
    assert rc == 0 and "e_hk = 9/4" in out.out


def test_fermat_series(capsys):
    rc, out = invoke(capsys, "fermat", "series", "--d", "2", "--order", "5")
    assert rc == 0 and "ehk=29/24" in out.out


@pytest.mark.parametrize("argv", [
    ["dp", "eval", "--p", "2", "--point", "1/0,1,1"],
    ["dp", "eval", "--p", "4", "--point", "1/2,1/2,1/2"],
    ["dp", "eval", "--bogus"],
    ["no-such-command"],
])
def test_user_errors_exit_1(capsys, argv):
    rc, _ = invoke(capsys, *argv)
    assert rc == 1


def test_internal_error_exits_2(capsys, monkeypatch):
    def boom(*a, **k):
        raise InternalError("invariant broken")
    monkeypatch.setattr(cli, "dp_eval", boom)
    rc, out = invoke(capsys, "dp", "eval", "--p", "2", "--point", "1/2,1/2,1/2")
    assert rc == 2


def test_plot_dump_csv(capsys):
    rc, out = invoke(capsys, "--csv", "plot", "dump", "--object", "pure:2", "--resolution", "4")
    rows = list(csv.DictReader(io.StringIO(out.out)))
    assert rc == 0 and rows[0] == {"t": "0", "value": "0"}
    assert rows[-1]["value"] == "1"


@pytest.mark.parametrize("obj", ["a:3", "e7", "d:4", "quadric:3", "fermat:3,2", "slice:1/2"])
def test_plot_dump_objects(capsys, obj):
    rc, out = invoke(capsys, "--json", "plot", "dump", "--object", obj, "--resolution", "6")
    assert rc == 0 and json.loads(out.out)


def test_out_file(capsys, tmp_path):
    target = tmp_path / "o.json"
    rc, out = invoke(capsys, "--json", "--out", str(target), "dp", "eval", "--p", "3",
                     "--point", "1/3,1/3,1/3")
    assert rc == 0 and json.loads(target.read_text())["p"] == 3


def test_cache_is_transparent(capsys, tmp_path, monkeypatch):
    argv = ["--json", "compose", "binomial", "--a", "2", "--b", "3", "--u", "1", "--v", "1",
            "--c", "1"]
    _, plain = invoke(capsys, *argv)
    monkeypatch.setenv("HK_CACHE_DIR", str(tmp_path))
    _, first = invoke(capsys, *argv)
    _, second = invoke(capsys, *argv)
    assert plain.out == first.out == second.out
    assert any(tmp_path.iterdir())


def test_verify_only(capsys):
    rc, out = invoke(capsys, "verify", "all", "--only", "1")
    assert rc == 0 and out.out.startswith("[PASS] criterion 1")
