import csv
import json
import xml.etree.ElementTree as ET

import pytest

from infolag import __version__
from infolag.cli import build_config, main, make_parser, parse_lambdas, UsageError
from infolag.export import export_network, network_to_dot, read_network_json
from infolag.inference import DirectedNetwork, Edge


def _net(edges, nodes=("A", "B", "C"), lam=1):
    return DirectedNetwork(list(nodes), [Edge(*e) for e in edges], "bonferroni", 0.01, lam, 9)


@pytest.mark.parametrize("fmt", ["json", "dot", "graphml"])
def test_empty_network_exports(tmp_path, fmt):
    path = export_network(_net([]), tmp_path / f"n.{fmt}", fmt)
    text = path.read_text()
    if fmt == "graphml":
        root = ET.fromstring(text.split("\n", 1)[1])
        ns = {"g": "http://graphml.graphdrawing.org/xmlns"}
        assert len(root.findall(".//g:node", ns)) == 3 and not root.findall(".//g:edge", ns)
    elif fmt == "json":
        doc = json.loads(text)
        assert doc["nodes"] == ["A", "B", "C"] and doc["edges"] == []
    else:
        assert "->" not in text and text.startswith("digraph")


def test_single_edge_graphml(tmp_path):
    path = export_network(_net([("A", "B", 0.02, 1e-8)]), tmp_path / "n.graphml", "graphml")
    root = ET.parse(path).getroot()
    ns = {"g": "http://graphml.graphdrawing.org/xmlns"}
    (edge,) = root.findall(".//g:edge", ns)
    assert edge.get("source") == "A" and edge.get("target") == "B"
    data = {d.get("key"): float(d.text) for d in edge}
    assert data == {"statistic": 0.02, "p_value": 1e-8}
    assert root.find("g:graph", ns).get("edgedefault") == "directed"


def test_json_round_trip_and_ordering(tmp_path):
    edges = [("C", "A", 0.1, 1e-9), ("A", "B", 0.3, 1e-12), ("B", "A", 0.125, 2.5e-7)]
    net = _net(edges, nodes=("C", "B", "A"))
    back = read_network_json(export_network(net, tmp_path / "n.json"))
    assert sorted(back.edges, key=str) == sorted(net.edges, key=str)
    assert back.nodes == ["A", "B", "C"]
    shuffled = _net(edges[::-1], nodes=("A", "C", "B"))
    for fmt in ("json", "dot", "graphml"):
        a = export_network(net, tmp_path / f"a.{fmt}", fmt).read_bytes()
        b = export_network(shuffled, tmp_path / f"b.{fmt}", fmt).read_bytes()
        assert a == b


def test_collapse_mirrored_pairs(tmp_path):
    net = _net([("A", "B", 0.2, 1e-9), ("B", "A", 0.2, 1e-9), ("A", "C", 0.1, 1e-8)], lam=0)
    doc = json.loads(export_network(net, tmp_path / "n.json", collapse=True).read_text())
    assert [(e["source"], e["target"], e.get("directed", True)) for e in doc["edges"]] == [
        ("A", "B", False), ("A", "C", True)]
    assert read_network_json(tmp_path / "n.json").edge_set() == net.edge_set()
    assert "dir=none" in network_to_dot(net, collapse=True)


def test_export_errors(tmp_path):
    with pytest.raises(ValueError):
        export_network(_net([]), tmp_path / "n.x", "yaml")
    with pytest.raises(OSError):
        export_network(_net([]), tmp_path / "missing" / "n.json")


def test_parse_lambdas():
    assert parse_lambdas("0..10") == list(range(11))
    assert parse_lambdas("1,3,5") == [1, 3, 5]
    assert parse_lambdas("0..2,8") == [0, 1, 2, 8]
    with pytest.raises(UsageError):
        parse_lambdas("a..b")


def test_config_precedence(tmp_path):
    cfg_file = tmp_path / "c.json"
    cfg_file.write_text(json.dumps({"q": 8, "p": 0.05, "lambdas": "1..2"}))
    args = make_parser().parse_args(["analyze", "--config", str(cfg_file), "--p", "0.02", "--input", "x"])
    cfg = build_config(args)
    assert (cfg.q, cfg.p, cfg.lambdas, cfg.correction, cfg.tau) == (8, 0.02, [1, 2], "bonferroni", 1)
    defaults = build_config(make_parser().parse_args(["analyze"]))
    assert (defaults.q, defaults.p, defaults.correction, defaults.method) == (4, 0.01, "bonferroni", "gamma")
    assert defaults.lambdas == list(range(11))


def _synth(tmp_path, spec, name="data"):
    spec_path = tmp_path / f"{name}.json"
    spec_path.write_text(json.dumps(spec))
    assert main(["synth", "--spec", str(spec_path), "--out", str(tmp_path / name)]) == 0
    return tmp_path / name


def test_synth_command(tmp_path):
    spec = {"n_assets": 2, "n_steps": 100, "seed": 3,
            "couplings": [{"source": "S00", "target": "S01", "lag": 2, "strength": 0.8, "kind": "quadratic"}]}
    a = _synth(tmp_path, spec, "a")
    b = _synth(tmp_path, spec, "b")
    header = (a / "prices.csv").read_text().splitlines()[0]
    assert header == "timestamp,day,S00,S01"
    assert (a / "prices.csv").read_bytes() == (b / "prices.csv").read_bytes()
    truth = json.loads((a / "truth.json").read_text())
    assert truth["edges"][0]["kind"] == "quadratic"


def test_analyze_lag3_spike_and_determinism(tmp_path):
    data = _synth(tmp_path, {"n_assets": 5, "n_steps": 3000, "seed": 1,
                             "couplings": [{"source": 0, "target": 3, "lag": 3, "strength": 0.8}]})
    runs = []
    for name in ("r1", "r2"):
        out = tmp_path / name
        rc = main(["analyze", "--input", str(data / "prices.csv"), "--lambdas", "0..5",
                   "--out", str(out), "--export", "json,dot,graphml"])
        assert rc == 0
        runs.append(out)
    report = json.loads((runs[0] / "report.json").read_text())
    assert report["version"] == __version__ and report["seed"] == 0 and len(report["config_hash"]) == 64
    counts = {lag["lambda"]: lag["count_bonferroni"] for lag in report["lags"]}
    assert counts[3] >= 1 and all(counts[k] == 0 for k in (1, 2, 4, 5))
    assert all(lag["bonferroni_subset_of_fdr"] for lag in report["lags"])
    for f in sorted((runs[0] / "networks").iterdir()):
        assert f.read_bytes() == (runs[1] / "networks" / f.name).read_bytes()
    with (runs[0] / "scores.csv").open() as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 6 * 20


def test_sweep_and_iid_zero(tmp_path):
    data = _synth(tmp_path, {"n_assets": 6, "n_steps": 1500, "seed": 2})
    out = tmp_path / "sweep"
    assert main(["sweep", "--input", str(data / "prices.csv"), "--out", str(out)]) == 0
    with (out / "sweep.csv").open() as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 11 and list(rows[0]) == ["lambda", "count_bonferroni", "count_fdr"]
    assert all(r["count_bonferroni"] == "0" for r in rows)


def test_sweep_common_factor(tmp_path):
    data = _synth(tmp_path, {"n_assets": 8, "n_steps": 1500, "seed": 2, "common_factor_loading": 0.5})
    out = tmp_path / "sweep"
    assert main(["sweep", "--input", str(data / "prices.csv"), "--lambdas", "0..4", "--out", str(out)]) == 0
    with (out / "sweep.csv").open() as fh:
        counts = [int(r["count_bonferroni"]) for r in csv.DictReader(fh)]
    assert counts[0] >= max(counts[1:])


def test_exit_codes(tmp_path, capsys):
    assert main(["analyze", "--input", str(tmp_path / "nope.csv")]) == 2
    assert "nope.csv" in capsys.readouterr().err
    assert main(["sweep", "--input", str(tmp_path / "nope.csv"), "--lambdas", ","]) == 2
    bad = tmp_path / "bad.csv"
    bad.write_text("timestamp,day,A\n1,0,10\n2,0,-1\n")
    assert main(["analyze", "--input", str(bad)]) == 2
    short = tmp_path / "short.csv"
    short.write_text("timestamp,day,A,B\n1,0,10,11\n2,0,11,12\n3,0,12,12\n")
    assert main(["analyze", "--input", str(short), "--lambdas", "5", "--out", str(tmp_path / "o")]) == 1
    with pytest.raises(SystemExit) as exc:
        main(["analyze", "--correction", "holm"])
    assert exc.value.code == 2


def test_entropy_command(tmp_path):
    data = _synth(tmp_path, {"n_assets": 5, "n_steps": 1500, "seed": 4,
                             "couplings": [{"source": 0, "target": 1, "lag": 1, "strength": 0.8}]})
    out = tmp_path / "ent"
    rc = main(["entropy", "--input", str(data / "prices.csv"), "--lambdas", "1", "--out", str(out),
               "--permutations", "199", "--correction", "fdr"])
    assert rc == 0
    assert (out / "entropy_lag01.csv").exists()
    assert "perm_p" in (out / "entropy_lag01.json").read_text()
