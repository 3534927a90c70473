import random

import pydot
import pytest

from auxiliar.auxiliar import generate_environment
from src.catalog import attacks_by_name, builtin_environment, registration_procedure
from src.core_model import Attack, AttackType, Environment, Mode, NodeId, Procedure, ProcedureMessage
from src.netgraph import (
    DIRECT,
    TRANSIENT,
    build_full_graph,
    build_puppeteer_graph,
    default_threshold,
    edge_pairs,
    enumerate_paths,
    export_dot,
    feasible,
    path_bottleneck,
    restrict_to_report,
)
from tests.oracles import oracle_feasible


UE, GNB, AMF, SMF, UPF, AUSF, UDM = (NodeId.UE, NodeId.GNB, NodeId.AMF, NodeId.SMF, NodeId.UPF,
                                     NodeId.AUSF, NodeId.UDM)


def _parse(dot_text):
    graphs = pydot.graph_from_dot_data(dot_text)
    assert graphs and len(graphs) == 1
    return graphs[0]


def _edge_colors(graph, source, target):
    return {edge.get_attributes()["color"] for edge in graph.get_edges()
            if edge.get_source() == str(source) and edge.get_destination() == str(target)}


class TestFullGraph:
    def test_registration_has_eight_nodes(self):
        g = build_full_graph(builtin_environment("registration"))
        assert g.number_of_nodes() == 8
        assert g.number_of_edges() == len(registration_procedure().messages)

    def test_empty(self):
        assert build_full_graph(Environment()).number_of_nodes() == 0


class TestPuppeteerGraph:
    def test_fig3_edges(self, fig3_env):
        g = build_puppeteer_graph(fig3_env, Mode.PB3C)
        assert set(edge_pairs(g)) == {
            (UE, AMF), (AMF, UE), (AMF, AUSF), (AUSF, AMF), (AMF, UDM), (UDM, AMF),
            (AMF, SMF), (SMF, AMF), (AUSF, UDM), (UDM, AUSF),
        }
        assert all(data["kind"] == DIRECT for _, _, data in g.edges(data=True))

    def test_nothing_compromised(self):
        g = build_puppeteer_graph(builtin_environment("registration"), Mode.PB3C)
        assert g.number_of_edges() == 0

    def test_aka_transient_edges(self, aka_env):
        g = build_puppeteer_graph(aka_env, Mode.PB3C)
        assert edge_pairs(g) == [(UDM, UE), (UE, UDM)]
        capacities = {(u, v): d["capacity"] for u, v, d in g.edges(data=True)}
        assert capacities == {(UE, UDM): 64, (UDM, UE): 256}
        assert all(data["kind"] == TRANSIENT for _, _, data in g.edges(data=True))

    def test_threshold(self, fig3_env):
        assert default_threshold(Mode.PB3C) == 21
        assert default_threshold(Mode.IM3C) == 1
        assert build_puppeteer_graph(fig3_env, Mode.PB3C, threshold=65).number_of_edges() == 0
        assert build_puppeteer_graph(fig3_env, Mode.PB3C, capacity_override=20).number_of_edges() == 0
        assert build_puppeteer_graph(fig3_env, Mode.IM3C, capacity_override=20).number_of_edges() > 0

    def test_more_compromise_never_removes_edges(self):
        for seed in range(30):
            env = generate_environment(nodes=list(NodeId), seed=seed, compromise_rate=0.3)
            extra = random.Random(seed).choice(sorted(env.nodes))
            larger = Environment(env.procedures, env.compromised | {extra}, controlled=env.controlled)
            before = set(edge_pairs(build_puppeteer_graph(env)))
            after = set(edge_pairs(build_puppeteer_graph(larger)))
            assert before <= after


class TestFeasibility:
    def test_a1_on_fig3(self, fig3_env):
        report = feasible(attacks_by_name()["A1"], build_puppeteer_graph(fig3_env))
        assert report.feasible
        assert report.forward_path == [UE, AMF, UDM]
        assert report.backward_path == [UDM, AMF, UE]

    def test_a3_needs_no_backward_path(self, fig4_env):
        report = feasible(attacks_by_name()["A3"], build_puppeteer_graph(fig4_env))
        assert report.feasible
        assert report.forward_path == [UE, GNB]
        assert report.backward_path == []

    def test_a2_with_only_gnb(self):
        env = Environment((registration_procedure(),), frozenset({GNB}), controlled=frozenset({UE}))
        report = feasible(attacks_by_name()["A2"], build_puppeteer_graph(env))
        assert not report.feasible
        assert not report.forward_reachable
        assert UPF in report.missing_nodes

    def test_a2_on_fig3_and_fig4(self, fig3_env, fig4_env):
        a2 = attacks_by_name()["A2"]
        assert not feasible(a2, build_puppeteer_graph(fig3_env)).feasible
        assert feasible(a2, build_puppeteer_graph(fig4_env)).feasible

    def test_report_dict(self, fig3_env):
        data = feasible(attacks_by_name()["A1"], build_puppeteer_graph(fig3_env)).to_dict()
        assert data["feasible"] is True
        assert data["forward_path"] == ["UE", "AMF", "UDM"]

    def test_agrees_with_transitive_closure(self):
        for seed in range(50):
            env = generate_environment(num_procedures=2, messages_per_procedure=(2, 5), nodes=list(NodeId),
                                       seed=seed)
            for execution in sorted(env.compromised):
                for exit_point in (UE, None):
                    attack = Attack(UE, execution, exit_point, 8, 8 if exit_point else 0,
                                    AttackType.UDM_KEY_EXTRACTION)
                    assert feasible(attack, build_puppeteer_graph(env)).feasible == \
                        oracle_feasible(env, UE, execution, exit_point), (seed, execution, exit_point)

    def test_raising_threshold_never_helps(self):
        for seed in range(30):
            env = generate_environment(capacities=(16, 32, 64), seed=seed)
            for execution in sorted(env.compromised):
                attack = Attack(UE, execution, UE, 8, 8, AttackType.UDM_KEY_EXTRACTION)
                results = [feasible(attack, build_puppeteer_graph(env, threshold=t)).feasible for t in (1, 21, 40, 65)]
                assert results == sorted(results, reverse=True)


class TestPaths:
    def test_fig3_ue_to_udm(self, fig3_env):
        g = build_puppeteer_graph(fig3_env)
        assert enumerate_paths(g, UE, UDM, 3) == [[UE, AMF, AUSF, UDM], [UE, AMF, UDM]]
        assert enumerate_paths(g, UE, UDM, 2) == [[UE, AMF, UDM]]

    def test_same_node(self, fig3_env):
        assert enumerate_paths(build_puppeteer_graph(fig3_env), AMF, AMF, 3) == [[AMF]]

    def test_disconnected(self, fig3_env):
        assert enumerate_paths(build_puppeteer_graph(fig3_env), UE, UPF, 5) == []

    def test_max_len(self, fig3_env):
        with pytest.raises(ValueError):
            enumerate_paths(build_puppeteer_graph(fig3_env), UE, UDM, 0)

    def test_bottleneck(self):
        env = Environment((Procedure("p", (ProcedureMessage(UE, AMF, 64), ProcedureMessage(AMF, UDM, 30),
                                            ProcedureMessage(AMF, UDM, 40))),),
                          frozenset({AMF, UDM}), controlled=frozenset({UE}))
        assert path_bottleneck(build_puppeteer_graph(env), [UE, AMF, UDM]) == 40


class TestDot:
    def test_a1_links_are_purple(self, fig3_env):
        g = build_puppeteer_graph(fig3_env)
        report = feasible(attacks_by_name()["A1"], g)
        parsed = _parse(export_dot(g, report))
        assert _edge_colors(parsed, UE, AMF) == {"purple"}
        assert _edge_colors(parsed, UDM, AMF) == {"purple"}
        assert _edge_colors(parsed, AMF, SMF) == {"grey"}
        ue = parsed.get_node("UE")[0]
        assert ue.get_attributes()["fillcolor"] == "orange"

    def test_forward_only_is_red(self, fig4_env):
        g = build_puppeteer_graph(fig4_env)
        parsed = _parse(export_dot(g, feasible(attacks_by_name()["A3"], g)))
        assert _edge_colors(parsed, UE, GNB) == {"red"}

    def test_isolated_nodes(self):
        env = Environment((Procedure("p", (ProcedureMessage(UE, AMF, 8),)),), frozenset({AMF}),
                          controlled=frozenset({UE}))
        parsed = _parse(export_dot(build_puppeteer_graph(env)))
        assert parsed.get_edges() == []
        assert {node.get_name() for node in parsed.get_nodes()} >= {"UE", "AMF"}

    def test_transient_edges_are_dashed(self, aka_env):
        parsed = _parse(export_dot(build_puppeteer_graph(aka_env)))
        assert {edge.get_attributes()["style"] for edge in parsed.get_edges()} == {"dashed"}

    def test_stable_output(self, fig3_env):
        g = build_puppeteer_graph(fig3_env)
        report = feasible(attacks_by_name()["A1"], g)
        assert export_dot(g, report) == export_dot(build_puppeteer_graph(fig3_env), report)

    def test_attack_view(self, fig3_env):
        g = build_puppeteer_graph(fig3_env)
        view = restrict_to_report(g, feasible(attacks_by_name()["A1"], g))
        assert set(edge_pairs(view)) == {(UE, AMF), (AMF, UDM), (UDM, AMF), (AMF, UE)}
