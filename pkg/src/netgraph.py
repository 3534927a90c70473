"""
Connectivity graphs and attack feasibility.

Nodes are network functions and every procedure message is a directed edge.
The puppeteer graph keeps only the edges the attacker can embed data in:
direct messages between two attacker nodes with enough room, plus usable
transient channels. Feasibility is plain reachability on that graph.
"""

from collections import deque
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import networkx as nx
import pydot

from src.core_model import Attack, Environment, Mode, NodeId, capacity_of
from utils.config import get_config


DIRECT = "direct"
TRANSIENT = "transient"

Path = List[NodeId]

FORWARD_COLOR = "red"
BACKWARD_COLOR = "blue"
BOTH_COLOR = "purple"
IDLE_COLOR = "grey"
ENDPOINT_COLOR = "orange"


def default_threshold(mode: Mode) -> int:
    """Minimum message capacity an edge needs to count in the given mode"""
    if Mode(mode) == Mode.PB3C:
        return int(get_config().get("thresholds", "pb3c", default=21))
    return int(get_config().get("thresholds", "im3c", default=1))


def build_full_graph(env: Environment) -> nx.MultiDiGraph:
    """Every message of every procedure as an edge, compromise ignored"""
    g = nx.MultiDiGraph()
    for procedure in env.procedures:
        for index, msg in enumerate(procedure.messages):
            g.add_edge(msg.source, msg.target, procedure=procedure.name, index=index,
                       capacity=msg.available_space, kind=DIRECT, label=msg.label)
    return g


def build_puppeteer_graph(env: Environment, mode: Mode = Mode.PB3C, threshold: Optional[int] = None,
                          capacity_override: Optional[int] = None) -> nx.MultiDiGraph:
    """Edges usable for hidden data between attacker nodes"""
    if threshold is None:
        threshold = default_threshold(mode)
    attacker = env.effective

    g = nx.MultiDiGraph()
    g.add_nodes_from(sorted(attacker))
    for procedure in env.procedures:
        for index, msg in enumerate(procedure.messages):
            if msg.source not in attacker or msg.target not in attacker:
                continue
            capacity = capacity_of(msg, capacity_override)
            if capacity < threshold:
                continue
            g.add_edge(msg.source, msg.target, procedure=procedure.name, index=index,
                       capacity=capacity, kind=DIRECT, label=msg.label)

    for channel in env.transient_channels:
        if env.usable(channel) and channel.capacity >= threshold:
            g.add_edge(channel.first, channel.last, procedure=channel.procedure,
                       index=channel.anchor_message_index, capacity=channel.capacity,
                       kind=TRANSIENT, label=channel.carrier)
    return g


@dataclass
class FeasibilityReport:
    attack: Attack
    forward_reachable: bool
    backward_reachable: bool
    forward_path: Optional[Path] = None
    backward_path: Optional[Path] = None
    missing_nodes: List[NodeId] = field(default_factory=list)

    @property
    def feasible(self) -> bool:
        return self.forward_reachable and self.backward_reachable

    def to_dict(self) -> Dict:
        def names(path):
            return [str(node) for node in path] if path is not None else None

        return {
            "attack": self.attack.name,
            "feasible": self.feasible,
            "forward_reachable": self.forward_reachable,
            "backward_reachable": self.backward_reachable,
            "forward_path": names(self.forward_path),
            "backward_path": names(self.backward_path),
            "missing_nodes": [str(node) for node in self.missing_nodes],
        }


def shortest_witness(g: nx.MultiDiGraph, source: NodeId, target: NodeId) -> Optional[Path]:
    """Minimum-hop path; among equal lengths the lexicographically smallest"""
    if source not in g or target not in g:
        return None
    if source == target:
        return [source]
    parent = {source: None}
    queue = deque([source])
    while queue:
        node = queue.popleft()
        for succ in sorted(set(g.successors(node))):
            if succ in parent:
                continue
            parent[succ] = node
            if succ == target:
                path = [succ]
                while parent[path[-1]] is not None:
                    path.append(parent[path[-1]])
                return path[::-1]
            queue.append(succ)
    return None


def feasible(attack: Attack, g: nx.MultiDiGraph) -> FeasibilityReport:
    """Check forward (entry -> execution) and backward (execution -> exit) reachability"""
    endpoints = [attack.entry, attack.execution] + ([attack.exit] if attack.exit is not None else [])
    missing = sorted({node for node in endpoints if node not in g})

    forward = shortest_witness(g, attack.entry, attack.execution)
    if attack.exit is None:
        backward, backward_ok = [], True
    else:
        backward = shortest_witness(g, attack.execution, attack.exit)
        backward_ok = backward is not None
    return FeasibilityReport(attack, forward is not None, backward_ok, forward, backward if backward_ok else None,
                             missing)


def enumerate_paths(g: nx.MultiDiGraph, source: NodeId, target: NodeId, max_len: int) -> List[Path]:
    """All simple paths of at most max_len hops, sorted by node sequence"""
    if max_len < 1:
        raise ValueError(f"max_len must be at least 1, got {max_len}")
    if source not in g or target not in g:
        return []
    if source == target:
        return [[source]]
    # all_simple_paths yields one copy per parallel edge on a multigraph
    unique = {tuple(path) for path in nx.all_simple_paths(nx.DiGraph(g), source, target, cutoff=max_len)}
    return [list(path) for path in sorted(unique, key=lambda p: [str(n) for n in p])]


def path_bottleneck(g: nx.MultiDiGraph, path: Path) -> int:
    """Largest single-message capacity available on every hop of the path"""
    if len(path) < 2:
        return 0
    return min(max(data["capacity"] for data in g.get_edge_data(u, v).values())
               for u, v in zip(path, path[1:]))


def _hops(path: Optional[Path]):
    return list(zip(path, path[1:])) if path else []


def restrict_to_report(g: nx.MultiDiGraph, report: FeasibilityReport) -> nx.MultiDiGraph:
    """Attack view: only the edges on the witness paths"""
    used = set(_hops(report.forward_path)) | set(_hops(report.backward_path))
    view = nx.MultiDiGraph()
    for path in (report.forward_path, report.backward_path):
        view.add_nodes_from(path or [])
    for u, v, key, data in g.edges(keys=True, data=True):
        if (u, v) in used:
            view.add_edge(u, v, key=key, **data)
    return view


def _link_colors(report: Optional[FeasibilityReport]) -> Dict[frozenset, str]:
    if report is None:
        return {}
    forward = {frozenset(hop) for hop in _hops(report.forward_path)}
    backward = {frozenset(hop) for hop in _hops(report.backward_path)}
    colors = {}
    for link in forward | backward:
        if link in forward and link in backward:
            colors[link] = BOTH_COLOR
        else:
            colors[link] = FORWARD_COLOR if link in forward else BACKWARD_COLOR
    return colors


def to_pydot(g: nx.MultiDiGraph, attack_paths: Optional[FeasibilityReport] = None,
             name: str = "puppeteer") -> pydot.Dot:
    dot = pydot.Dot(name, graph_type="digraph")
    endpoints = set()
    if attack_paths is not None:
        attack = attack_paths.attack
        endpoints = {attack.entry} | ({attack.exit} if attack.exit is not None else set())

    for node in sorted(g.nodes, key=str):
        attrs = {"shape": "box"}
        if node in endpoints:
            attrs.update(style="filled", fillcolor=ENDPOINT_COLOR)
        dot.add_node(pydot.Node(str(node), **attrs))

    colors = _link_colors(attack_paths)
    edges = sorted(g.edges(data=True), key=lambda e: (str(e[0]), str(e[1]), e[2]["procedure"], e[2]["index"]))
    for u, v, data in edges:
        attrs = {
            "label": f'"{data["procedure"]}[{data["index"]}] {data["capacity"]}b"',
            "color": colors.get(frozenset((u, v)), IDLE_COLOR),
        }
        if data["kind"] == TRANSIENT:
            attrs["style"] = "dashed"
        dot.add_edge(pydot.Edge(str(u), str(v), **attrs))
    return dot


def export_dot(g: nx.MultiDiGraph, attack_paths: Optional[FeasibilityReport] = None) -> str:
    """DOT text; red forward, blue backward, purple both, entry and exit filled orange"""
    return to_pydot(g, attack_paths).to_string()


def edge_pairs(g: nx.MultiDiGraph) -> List[Tuple[NodeId, NodeId]]:
    """Distinct (source, target) pairs, sorted"""
    return sorted({(u, v) for u, v in g.edges()}, key=lambda e: (str(e[0]), str(e[1])))
