import pytest

from src.catalog import builtin_environment, registration_procedure
from src.core_model import (
    Attack,
    AttackType,
    Environment,
    NodeId,
    Procedure,
    ProcedureMessage,
    RoutingOption,
    TransientChannel,
    Direction,
    capacity_of,
    interface_between,
    parameters_for_label,
    validate_environment,
)
from src.errors import ScenarioError


UE, GNB, AMF, UDM = NodeId.UE, NodeId.GNB, NodeId.AMF, NodeId.UDM


def _env(*messages, compromised=frozenset(), **kwargs):
    return Environment(procedures=(Procedure("p", tuple(messages)),), compromised=frozenset(compromised), **kwargs)


class TestNodeId:
    def test_parse_is_case_insensitive(self):
        assert NodeId.parse("amf") == AMF
        assert NodeId.parse(" gNB ") == GNB

    def test_unknown_name_is_rejected(self):
        with pytest.raises(ScenarioError, match="unknown node"):
            NodeId.parse("LMF")


class TestValidateEnvironment:
    @pytest.mark.parametrize("name", ["registration", "fig3", "fig4", "aka"])
    def test_builtin_environments_are_valid(self, name):
        assert validate_environment(builtin_environment(name)) == []

    def test_self_message(self):
        violations = validate_environment(_env(ProcedureMessage(UE, UE, 64)))
        assert len(violations) == 1
        assert violations[0].problem == "source equals target"

    def test_compromised_node_absent_from_procedures(self):
        violations = validate_environment(_env(ProcedureMessage(UE, GNB, 64), compromised={AMF}))
        assert len(violations) == 1
        assert "AMF" in str(violations[0])

    def test_negative_space(self):
        violations = validate_environment(_env(ProcedureMessage(UE, GNB, -1)))
        assert [v.problem for v in violations] == ["negative available space (-1 bit)"]

    def test_transient_anchor_must_exist(self):
        channel = TransientChannel(UE, UDM, (AMF,), 64, Direction.FORWARD, "tag", "missing", 0)
        violations = validate_environment(_env(ProcedureMessage(UE, AMF, 64), transient_channels=(channel,)))
        assert any("does not exist" in v.problem for v in violations)

    def test_transient_anchor_index_in_range(self):
        channel = TransientChannel(UE, UDM, (AMF,), 64, Direction.FORWARD, "tag", "p", 5)
        violations = validate_environment(_env(ProcedureMessage(UE, AMF, 64), transient_channels=(channel,)))
        assert any("anchor index 5" in v.problem for v in violations)

    def test_violation_names_the_entity(self):
        violations = validate_environment(_env(ProcedureMessage(UE, UE, 64, label="Loop")))
        assert str(violations[0]) == "p[0] Loop: source equals target"


class TestCapacity:
    def test_own_space(self):
        assert capacity_of(ProcedureMessage(UE, GNB, 64)) == 64

    def test_override(self):
        assert capacity_of(ProcedureMessage(UE, GNB, 64), 21) == 21

    def test_zero_space(self):
        assert capacity_of(ProcedureMessage(UE, GNB, 0)) == 0

    def test_negative_override(self):
        with pytest.raises(ValueError):
            capacity_of(ProcedureMessage(UE, GNB, 64), -1)


class TestAttack:
    def test_exit_absent_iff_no_backward_bits(self):
        Attack(UE, GNB, None, 32, 0, AttackType.PWS_ABUSE)
        with pytest.raises(ValueError):
            Attack(UE, GNB, None, 32, 8, AttackType.PWS_ABUSE)
        with pytest.raises(ValueError):
            Attack(UE, UDM, UE, 128, 0, AttackType.UDM_KEY_EXTRACTION)

    def test_negative_bits(self):
        with pytest.raises(ValueError):
            Attack(UE, UDM, UE, -1, 8, AttackType.UDM_KEY_EXTRACTION)


class TestEnums:
    def test_routing_codes(self):
        assert [r.value for r in RoutingOption] == [1, 2, 3]
        assert RoutingOption.parse("EE-RR") == RoutingOption.EERR
        with pytest.raises(ValueError):
            RoutingOption.parse("flood")

    def test_attack_type_aliases(self):
        assert AttackType.parse("key-ext") == AttackType.UDM_KEY_EXTRACTION
        assert AttackType.parse("localization") == AttackType.UE_LOCALIZATION
        assert AttackType.parse("PWS") == AttackType.PWS_ABUSE


class TestMetadata:
    def test_interfaces(self):
        assert interface_between(UE, GNB) == "Uu"
        assert interface_between(AMF, UE) == "N1"
        assert interface_between(GNB, AMF) == "N2"
        assert interface_between(NodeId.SMF, NodeId.UPF) == "N4"
        assert interface_between(AMF, UDM) == "SBI"

    def test_parameters_from_label(self):
        params = parameters_for_label("Nsmf_PDUSession_Create Request")
        assert (params.request_required, params.request_optional) == (12, 6)
        assert parameters_for_label("RegistrationRequest") is None
        assert parameters_for_label("") is None

    def test_registration_messages_carry_sbi_parameters(self):
        labelled = {m.label: m for m in registration_procedure().messages}
        assert labelled["Nudm_UECM_Registration Request"].parameters.request_required == 7
