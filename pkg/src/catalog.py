"""
Built-in scenario data: the registration procedure, the attack catalog, the
authentication transient channels and the named environments built from them.

The message order below is catalog version 1. Other orderings can be loaded
from scenario files; procedure-count regressions are pinned to this one.
"""

from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from src.core_model import (
    Attack,
    AttackType,
    Direction,
    Environment,
    NodeId,
    Procedure,
    ProcedureMessage,
    RoutingOption,
    TransientChannel,
    parameters_for_label,
)
from src.errors import ScenarioError
from src.fivegpp import GppHeader, header_for


CATALOG_VERSION = 1
REGISTRATION = "registration"

UE, GNB, AMF, SMF, UPF, AUSF, UDM, PCF = (
    NodeId.UE, NodeId.GNB, NodeId.AMF, NodeId.SMF, NodeId.UPF, NodeId.AUSF, NodeId.UDM, NodeId.PCF,
)

# (source, target, label) in the order the messages are sent
_REGISTRATION_MESSAGES: Tuple[Tuple[NodeId, NodeId, str], ...] = (
    (UE, GNB, "RegistrationRequest"),
    (GNB, AMF, "NGAP InitialUEMessage (RegistrationRequest)"),
    (AMF, UE, "IdentityRequest"),
    (UE, AMF, "IdentityResponse"),
    # authentication
    (AMF, AUSF, "Nausf_UEAuthentication_Authenticate Request"),
    (AUSF, UDM, "Nudm_UEAuthentication_Get Request"),
    (UDM, AUSF, "Nudm_UEAuthentication_Get Response"),
    (AUSF, AMF, "Nausf_UEAuthentication_Authenticate Response"),
    (AMF, UE, "AuthenticationRequest"),
    (UE, AMF, "AuthenticationResponse"),
    (AMF, AUSF, "Nausf_UEAuthentication_Authenticate Confirmation"),
    (AUSF, AMF, "Nausf_UEAuthentication_Authenticate Confirmation Response"),
    # security mode
    (AMF, UE, "SecurityModeCommand"),
    (UE, AMF, "SecurityModeComplete"),
    (AMF, UDM, "Nudm_UECM_Registration Request"),
    (UDM, AMF, "Nudm_UECM_Registration Response"),
    (AMF, PCF, "Npcf_AMPolicyControl_Create Request"),
    (PCF, AMF, "Npcf_AMPolicyControl_Create Response"),
    (AMF, SMF, "Nsmf_PDUSession_Create Request"),
    (SMF, UPF, "PFCP Session Establishment Request"),
    (UPF, SMF, "PFCP Session Establishment Response"),
    (SMF, AMF, "Nsmf_PDUSession_Create Response"),
    (AMF, UDM, "Nudm_SDM_Get Request"),
    (UDM, AMF, "Nudm_SDM_Get Response"),
    (AMF, UDM, "Nudm_SDM_Subscribe Request"),
    (UDM, AMF, "Nudm_SDM_Subscribe Response"),
    (AMF, UE, "RegistrationAccept"),
    (AMF, PCF, "Npcf_AMPolicyControl_Update Request"),
    (PCF, AMF, "Npcf_AMPolicyControl_Update Response"),
    (UE, AMF, "RegistrationComplete"),
    (AMF, UDM, "Nudm_SDM_Info Request"),
    (UDM, AMF, "Nudm_SDM_Info Response"),
)

# Indices into the registration procedure
AUSF_TO_UDM_INDEX = 5
AUTHENTICATION_REQUEST_INDEX = 8

MAC_TAG_BITS = 64
RAND_AUTN_BITS = 256

SUPI_BITS = 64
LONG_TERM_KEY_BITS = 128
IPV4_BITS = 32
IPV6_BITS = 128
CELL_ID_BITS = (32, 22)


@dataclass(frozen=True)
class AttackCatalogEntry:
    attack: Attack
    header_template: GppHeader
    notes: str = ""
    # Alternative forward payload sizes the overhead report tabulates
    forward_variants: Tuple[int, ...] = ()
    framing: str = "5gpp"


def registration_procedure(capacity: int = 64) -> Procedure:
    """The registration procedure as sent by a UE attaching to the network"""
    messages = tuple(
        ProcedureMessage(source, target, capacity, label, parameters_for_label(label))
        for source, target, label in _REGISTRATION_MESSAGES
    )
    return Procedure(REGISTRATION, messages)


def aka_transient_channels() -> List[TransientChannel]:
    """Authentication parameters relayed unmodified between UE and UDM"""
    return [
        TransientChannel(
            first=UE, last=UDM, via=(GNB, AMF, AUSF), capacity=MAC_TAG_BITS,
            direction=Direction.FORWARD, carrier="SUCI MAC tag",
            procedure=REGISTRATION, anchor_message_index=AUSF_TO_UDM_INDEX,
        ),
        TransientChannel(
            first=UDM, last=UE, via=(AUSF, AMF, GNB), capacity=RAND_AUTN_BITS,
            direction=Direction.BACKWARD, carrier="RAND+AUTN",
            procedure=REGISTRATION, anchor_message_index=AUTHENTICATION_REQUEST_INDEX,
        ),
    ]


def _entry(name, entry, execution, exit_point, forward, backward, attack_type, notes="", variants=(),
           framing="5gpp"):
    attack = Attack(entry, execution, exit_point, forward, backward, attack_type, name)
    template = header_for(1, RoutingOption.PF, 8, execution, 1, attack_type, exit_point)
    return AttackCatalogEntry(attack, template, notes, tuple(variants), framing)


def attack_catalog() -> List[AttackCatalogEntry]:
    """Example attacks with their payload sizes in bits"""
    key_ext, pws, localization = AttackType.UDM_KEY_EXTRACTION, AttackType.PWS_ABUSE, AttackType.UE_LOCALIZATION
    return [
        _entry("A1", UE, UDM, UE, 2 * SUPI_BITS, LONG_TERM_KEY_BITS + SUPI_BITS, key_ext,
               "target SUPI plus the SUPI of the exit UE; returns the 128-bit key and that SUPI"),
        _entry("A1-IPv4", UE, UDM, UPF, SUPI_BITS + IPV4_BITS, LONG_TERM_KEY_BITS + IPV4_BITS, key_ext,
               "exfiltration to an IPv4 host behind the UPF"),
        _entry("A1-IPv6", UE, UDM, UPF, SUPI_BITS + IPV6_BITS, LONG_TERM_KEY_BITS + IPV6_BITS, key_ext,
               "exfiltration to an IPv6 host behind the UPF"),
        _entry("A2", UPF, AMF, UE, 96, 112, localization,
               "location query answered by the AMF; the LMF is not modeled"),
        _entry("A3", UE, GNB, None, CELL_ID_BITS[0], 0, pws,
               "broadcast of a warning message in a cell; no response", CELL_ID_BITS),
        _entry("A1-AKA", UE, UDM, UE, SUPI_BITS, LONG_TERM_KEY_BITS, key_ext,
               "encrypted SUPI in the MAC tag, key returned in RAND+AUTN", framing="raw"),
    ]


def attacks_by_name() -> Dict[str, Attack]:
    return {entry.attack.name: entry.attack for entry in attack_catalog()}


def find_attack(name: str, attacks: Optional[Dict[str, Attack]] = None) -> Attack:
    attacks = attacks if attacks is not None else attacks_by_name()
    for key, attack in attacks.items():
        if key.lower() == name.lower():
            return attack
    raise ScenarioError(f"unknown attack '{name}' (available: {', '.join(attacks)})")


BUILTIN_COMPROMISED: Dict[str, frozenset] = {
    "registration": frozenset(),
    "fig3": frozenset({AMF, AUSF, UDM, SMF}),
    "fig4": frozenset({AMF, UDM, SMF, GNB, AUSF, UPF}),
    "aka": frozenset({UDM}),
}


def builtin_environment(name: str) -> Environment:
    """Registration environment with one of the built-in compromise sets"""
    try:
        compromised = BUILTIN_COMPROMISED[name]
    except KeyError:
        raise ScenarioError(
            f"unknown builtin scenario '{name}' (available: {', '.join(BUILTIN_COMPROMISED)})"
        ) from None
    transient = tuple(aka_transient_channels()) if name == "aka" else ()
    return Environment(
        procedures=(registration_procedure(),),
        compromised=compromised,
        transient_channels=transient,
        controlled=frozenset({UE}),
    )
