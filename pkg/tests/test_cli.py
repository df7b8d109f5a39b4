import json
import subprocess
import sys

import pytest

from padic_dendro import cli
from padic_dendro.classifier import ClusterHierarchy
from padic_dendro.dendrogram import ProjectiveDendrogram


def run(args, text="", capsys=None):
    """Run ``main`` in-process with ``text`` on stdin."""
    import io

    old = sys.stdin
    sys.stdin = io.StringIO(text)
    try:
        status = cli.main(args)
    finally:
        sys.stdin = old
    out, err = capsys.readouterr()
    return status, out, err


def test_classify_then_invariants(data_dir, capsys):
    status, out, _ = run(["classify", "--input", str(data_dir / "golden8_numbers.txt")], capsys=capsys)
    assert status == 0
    tree = json.loads(out)
    assert "vertex_disc" in tree and all("coding" in leaf for leaf in tree["leaves"])
    status, out, _ = run(["invariants"], out, capsys)
    assert status == 0
    assert json.loads(out) == {"volume": 9, "weights": [8, 1],
                               "balance": {"re": 7.0, "im": 0.0}, "balanced": False}


def test_invariants_straight_from_numbers(data_dir, capsys):
    status, out, _ = run(["invariants", "-i", str(data_dir / "golden8_numbers.txt")], capsys=capsys)
    assert status == 0 and json.loads(out)["volume"] == 9


def test_classify_json_records(capsys):
    records = [{"label": "a", "number": "0"}, {"label": "b", "number": "1"},
               {"label": "c", "number": "2^3*(1) + O(2^10)"}]
    status, out, _ = run(["classify"], json.dumps(records), capsys)
    assert status == 0
    h = ClusterHierarchy.from_json(out)
    assert sorted(n for _, _, n in h.dendrogram.internal_edges()) == [3]


def test_encode_single_letter_warns(capsys):
    status, out, err = run(["encode", "--preset", "dna2-teich"], "A\n", capsys)
    assert status == 0
    assert json.loads(out)["codes"] == {"A": "0 + O(2^64)"}
    assert "degenerate" in err


def test_encode_then_classify(data_dir, capsys):
    status, out, _ = run(["encode", "--preset", "dna5", "-i", str(data_dir / "dna.txt")], capsys=capsys)
    assert status == 0
    status, tree, _ = run(["classify", "--format", "newick"], out, capsys)
    assert status == 0
    direct_status, direct, _ = run(["classify", "--preset", "dna5", "--format", "newick",
                                    "-i", str(data_dir / "dna.txt")], capsys=capsys)
    assert direct_status == 0 and tree == direct


def test_encode_dendrogram_paper_binary(golden8, capsys):
    status, out, _ = run(["encode", "--convention", "paper-binary"], json.dumps(golden8.to_json()), capsys)
    assert status == 0
    codes = json.loads(out)["codes"]
    assert codes["x8"] == "1 + O(2^64)" and codes["x1"] == "0 + O(2^64)"


def test_timeseries_drift(data_dir, capsys):
    status, out, _ = run(["timeseries", "-i", str(data_dir / "drift_series.json")], capsys=capsys)
    assert status == 0
    rep = json.loads(out)
    assert rep["balances"] == [2, 1, -1, -2]
    assert (rep["velocity"]["d"], rep["velocity"]["e"], rep["velocity"]["method"]) == (-3, 2, "periodic")
    assert rep["flow"] == "translation_at_root"
    curve = rep["curve"]
    assert curve["genus"] == 1 and curve["betti1"] == 1
    assert len(set(curve["orbits"].values())) == 2
    assert curve["generators"] == [[["-p^(-3/2)", "0"], ["1 - p^(-3/2)", "-1"]]]
    assert curve["quotient"]["lengths"] == ["1/2", "1/2", "1/2"]


def test_timeseries_genus2(data_dir, capsys):
    status, out, _ = run(["timeseries", "--genus2", "-i", str(data_dir / "genus2_series.json")],
                         capsys=capsys)
    assert status == 0
    curve = json.loads(out)["curve"]
    assert curve["kind"] == "mumford2" and curve["genus"] == 2 and curve["betti1"] == 2
    assert curve["status"] == "disjoint"


def test_export_formats(data_dir, capsys):
    status, tree, _ = run(["classify", "-i", str(data_dir / "golden8_numbers.txt")], capsys=capsys)
    status, newick, _ = run(["export", "--format", "newick"], tree, capsys)
    assert status == 0
    back = ProjectiveDendrogram.from_newick(newick.strip())
    original = ClusterHierarchy.from_json(tree)
    assert original.is_isometric_to(back)
    status, dot, _ = run(["export", "--format", "dot"], tree, capsys)
    assert dot.count("[len=") == 6
    status, again, _ = run(["export"], newick, capsys)
    assert ProjectiveDendrogram.from_json(again).canonical_form() == back.canonical_form()


def test_output_file(data_dir, tmp_path, capsys):
    target = tmp_path / "tree.json"
    status, out, _ = run(["classify", "-i", str(data_dir / "golden8_numbers.txt"), "-o", str(target)],
                         capsys=capsys)
    assert status == 0 and out == ""
    assert json.loads(target.read_text())["root"] == "v0"


def test_config_file_and_flag_precedence(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"prime": 3, "format": "newick"}))
    status, out, _ = run(["classify", "--config", str(cfg)], "a: 0\nb: 1\nc: 3\n", capsys)
    assert status == 0 and out.strip().endswith(";")
    status, out, _ = run(["classify", "--config", str(cfg), "--format", "json"], "a: 0\nb: 1\nc: 3\n", capsys)
    assert json.loads(out)["field"]["p"] == 3


def test_output_is_deterministic(data_dir, capsys):
    outs = {run(["classify", "-i", str(data_dir / "golden8_numbers.txt")], capsys=capsys)[1] for _ in range(3)}
    assert len(outs) == 1


@pytest.mark.parametrize("args,text,code,needle", [
    (["classify"], "a: 1\nb: 1 + + 2\n", cli.EXIT_INPUT, "line 2"),
    (["classify"], "a: 1 + O(2^1)\nb: 1 + O(2^1)\n", cli.EXIT_PRECISION, "'a'"),
    (["encode", "--preset", "dna5"], "ACGT\nACXT\n", cli.EXIT_INPUT, "ACXT"),
    (["classify", "--prime", "4"], "1\n", cli.EXIT_INPUT, "not prime"),
    (["classify", "--reps", "teich", "--prime", "3", "--normalize"], "a: 2\nb: 1\n",
     cli.EXIT_UNSUPPORTED, "Teichmueller"),
    (["timeseries"], '[{"a": "0", "b": "1", "c": "x"}]', cli.EXIT_INPUT, "frame 0, particle 'c'"),
    (["timeseries"], '{"a": 1}', cli.EXIT_INPUT, "array"),
    (["encode", "--format", "dot", "--preset", "dna5"], "AC\n", cli.EXIT_INPUT, "only available"),
])
def test_error_exit_codes(args, text, code, needle, capsys):
    status, out, err = run(args, text, capsys)
    assert status == code
    assert out == ""
    assert needle in err


def test_non_discrete_exit_code(tmp_path, capsys, monkeypatch):
    from padic_dendro import timeseries
    from padic_dendro.errors import NonDiscreteError

    def boom(*args, **kwargs):
        raise NonDiscreteError("axes share a segment")

    monkeypatch.setattr(cli, "series_report", boom)
    status, _, err = run(["timeseries"], '[{"a": "0", "b": "1", "c": "2"}]', capsys)
    assert status == cli.EXIT_NON_DISCRETE and "non-discrete" in err
    assert timeseries.series_report is not boom


def test_console_script_entry_point(data_dir):
    proc = subprocess.run(
        [sys.executable, "-m", "padic_dendro.cli", "invariants", "-i", str(data_dir / "golden8_numbers.txt")],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["weights"] == [8, 1]


def test_encode_cutoff_distances(capsys):
    status, out, _ = run(["encode", "--preset", "dna5", "--cutoff-k", "2"], "ACGT\nACTT\nTTTT\n", capsys)
    assert status == 0
    d = json.loads(out)["distances"]
    assert d["ACGT"]["ACTT"] == "1/25"
    assert d["ACGT"]["TTTT"] == "1"
    assert d["ACGT"]["ACGT"] == "1/25"
