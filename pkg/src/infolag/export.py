"""Network serialization: JSON, Graphviz DOT and GraphML.

Nodes and edges are written in lexicographic order so that identical
networks produce byte-identical files.
"""

import json
import xml.etree.ElementTree as ET
from pathlib import Path

from .inference import DirectedNetwork, Edge

FORMATS = ("json", "dot", "graphml")


def _sorted(net, collapse=False):
    edges = sorted(net.edges, key=lambda e: (e.source, e.target))
    pairs = net.edge_set()
    both = {(a, b) for a, b in pairs if (b, a) in pairs} if collapse else set()
    # with collapse, a mirrored pair is kept once (source < target) and flagged undirected
    out = []
    for e in edges:
        key = (e.source, e.target)
        if key in both and e.source > e.target:
            continue
        out.append((e, key in both))
    return sorted(net.nodes), out


def network_to_dict(net, collapse=False):
    nodes, edges = _sorted(net, collapse)
    return {
        "directed": True,
        "lambda": net.lam,
        "correction": net.correction,
        "p_nominal": net.p_nominal,
        "n_tests": net.n_tests,
        "nodes": nodes,
        "edges": [
            {"source": e.source, "target": e.target, "statistic": e.statistic, "p_value": e.p_value,
             **({"directed": False} if undirected else {})}
            for e, undirected in edges
        ],
    }


def network_from_dict(d):
    edges = []
    for e in d["edges"]:
        edges.append(Edge(e["source"], e["target"], float(e["statistic"]), float(e["p_value"])))
        if e.get("directed", True) is False:
            edges.append(Edge(e["target"], e["source"], float(e["statistic"]), float(e["p_value"])))
    return DirectedNetwork(list(d["nodes"]), edges, d["correction"], d["p_nominal"], d.get("lambda"), d.get("n_tests"))


def read_network_json(path):
    return network_from_dict(json.loads(Path(path).read_text()))


def _dot_id(s):
    return '"' + str(s).replace("\\", "\\\\").replace('"', '\\"') + '"'


def network_to_dot(net, collapse=False):
    nodes, edges = _sorted(net, collapse)
    lines = [f"digraph {_dot_id(f'lag_{net.lam}_{net.correction}')} {{"]
    lines += [f"  {_dot_id(n)};" for n in nodes]
    for e, undirected in edges:
        extra = ", dir=none" if undirected else ""
        lines.append(
            f"  {_dot_id(e.source)} -> {_dot_id(e.target)} "
            f'[statistic="{e.statistic!r}", p_value="{e.p_value!r}"{extra}];'
        )
    lines.append("}")
    return "\n".join(lines) + "\n"


def network_to_graphml(net, collapse=False):
    nodes, edges = _sorted(net, collapse)
    ns = "http://graphml.graphdrawing.org/xmlns"
    root = ET.Element("graphml", {"xmlns": ns})
    for key, kind in (("statistic", "double"), ("p_value", "double")):
        ET.SubElement(root, "key", {"id": key, "for": "edge", "attr.name": key, "attr.type": kind})
    graph = ET.SubElement(root, "graph", {"id": f"lag_{net.lam}_{net.correction}", "edgedefault": "directed"})
    for n in nodes:
        ET.SubElement(graph, "node", {"id": n})
    for i, (e, undirected) in enumerate(edges):
        attrs = {"id": f"e{i}", "source": e.source, "target": e.target}
        if undirected:
            attrs["directed"] = "false"
        el = ET.SubElement(graph, "edge", attrs)
        ET.SubElement(el, "data", {"key": "statistic"}).text = repr(e.statistic)
        ET.SubElement(el, "data", {"key": "p_value"}).text = repr(e.p_value)
    ET.indent(root)
    return '<?xml version="1.0" encoding="UTF-8"?>\n' + ET.tostring(root, encoding="unicode") + "\n"


def export_network(net, path, format="json", collapse=False):
    """Write ``net`` to ``path`` in one of ``json``, ``dot`` or ``graphml``.

    ``collapse=True`` writes each mirrored pair (m->n and n->m, as at lag 0)
    once, marked undirected.
    """
    if format == "json":
        text = json.dumps(network_to_dict(net, collapse), indent=2) + "\n"
    elif format == "dot":
        text = network_to_dot(net, collapse)
    elif format == "graphml":
        text = network_to_graphml(net, collapse)
    else:
        raise ValueError(f"unknown export format {format!r}")
    path = Path(path)
    path.write_text(text)
    return path
