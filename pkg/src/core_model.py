"""
Environment, message and attack model shared by every other module.

An environment is an ordered list of procedures plus the set of compromised
network functions; each procedure is an ordered list of messages with a
per-message embedding capacity in bits. Everything here is immutable once
built so simulation runs can share it freely.
"""

from dataclasses import dataclass
from enum import Enum
from typing import FrozenSet, List, NamedTuple, Optional, Tuple

from src.errors import ScenarioError


DEFAULT_CAPACITY = 64


class NodeId(str, Enum):
    """Closed set of network functions a scenario may reference"""
    UE = "UE"
    GNB = "GNB"
    AMF = "AMF"
    SMF = "SMF"
    UPF = "UPF"
    AUSF = "AUSF"
    UDM = "UDM"
    PCF = "PCF"
    SEPP = "SEPP"
    NEF = "NEF"

    def __str__(self):
        return self.value

    @classmethod
    def parse(cls, name) -> "NodeId":
        if isinstance(name, NodeId):
            return name
        try:
            return cls(str(name).strip().upper())
        except ValueError:
            raise ScenarioError(f"unknown node '{name}'") from None


class Mode(str, Enum):
    IM3C = "im3c"
    PB3C = "pb3c"

    def __str__(self):
        return self.value


class Direction(str, Enum):
    FORWARD = "forward"
    BACKWARD = "backward"

    def __str__(self):
        return self.value


class RoutingOption(Enum):
    """Routing options with their 5GPP header code points"""
    PF = 1
    RR = 2
    EERR = 3

    @property
    def cli_name(self):
        return self.name.lower()

    @classmethod
    def parse(cls, name) -> "RoutingOption":
        if isinstance(name, RoutingOption):
            return name
        key = str(name).strip().upper().replace("-", "")
        if key in cls.__members__:
            return cls[key]
        raise ValueError(f"unknown routing option '{name}' (expected pf, rr or eerr)")


class AttackType(Enum):
    """Attack types with their 5GPP header code points"""
    UDM_KEY_EXTRACTION = 1
    PWS_ABUSE = 2
    UE_LOCALIZATION = 3

    @property
    def cli_name(self):
        return _ATTACK_TYPE_NAMES[self]

    @classmethod
    def parse(cls, name) -> "AttackType":
        if isinstance(name, AttackType):
            return name
        key = str(name).strip().lower()
        for member, alias in _ATTACK_TYPE_NAMES.items():
            if key in (alias, member.name.lower()):
                return member
        raise ValueError(f"unknown attack type '{name}' (expected key-ext, localization or pws)")


_ATTACK_TYPE_NAMES = {
    AttackType.UDM_KEY_EXTRACTION: "key-ext",
    AttackType.PWS_ABUSE: "pws",
    AttackType.UE_LOCALIZATION: "localization",
}


class ServiceParameters(NamedTuple):
    """Parameter counts of an SBI service operation (capacity metadata only)"""
    request_required: int
    request_optional: int
    response_required: int
    response_optional: int


# Parameter counts of the SBI operations used during registration
SBI_PARAMETERS = {
    "Nudm_UECM_Registration": ServiceParameters(7, 2, 1, 0),
    "Nudm_SDM_Get": ServiceParameters(3, 1, 1, 0),
    "Nudm_SDM_Subscribe": ServiceParameters(2, 1, 0, 0),
    "Npcf_AMPolicyControl_Create": ServiceParameters(11, 0, 2, 5),
    "Nsmf_PDUSession_Create": ServiceParameters(12, 6, 10, 6),
    "Nudm_SDM_Info": ServiceParameters(3, 1, 1, 0),
}


def parameters_for_label(label: str) -> Optional[ServiceParameters]:
    """Parameter counts for a message whose label starts with an SBI operation name"""
    words = label.split()
    return SBI_PARAMETERS.get(words[0]) if words else None


_CORE_FUNCTIONS = {NodeId.AMF, NodeId.SMF, NodeId.UPF, NodeId.AUSF, NodeId.UDM,
                   NodeId.PCF, NodeId.SEPP, NodeId.NEF}


def interface_between(a: NodeId, b: NodeId) -> str:
    """Name of the reference point a message between a and b travels on"""
    pair = {a, b}
    if pair == {NodeId.UE, NodeId.GNB}:
        return "Uu"
    if pair == {NodeId.UE, NodeId.AMF}:
        return "N1"
    if pair == {NodeId.GNB, NodeId.AMF}:
        return "N2"
    if pair == {NodeId.SMF, NodeId.UPF}:
        return "N4"
    if pair <= _CORE_FUNCTIONS:
        return "SBI"
    return "other"


@dataclass(frozen=True)
class ProcedureMessage:
    source: NodeId
    target: NodeId
    available_space: int = DEFAULT_CAPACITY
    label: str = ""
    parameters: Optional[ServiceParameters] = None

    @property
    def interface(self) -> str:
        return interface_between(self.source, self.target)


@dataclass(frozen=True)
class Procedure:
    name: str
    messages: Tuple[ProcedureMessage, ...] = ()

    def __len__(self):
        return len(self.messages)


@dataclass(frozen=True)
class TransientChannel:
    """
    A parameter forwarded unmodified from `first` to `last` by the nodes in
    `via` as part of a genuine procedure. It behaves as a single edge that
    fires when message `anchor_message_index` of `procedure` is sent.
    """
    first: NodeId
    last: NodeId
    via: Tuple[NodeId, ...]
    capacity: int
    direction: Direction
    carrier: str
    procedure: str
    anchor_message_index: int


@dataclass(frozen=True)
class Environment:
    procedures: Tuple[Procedure, ...] = ()
    compromised: FrozenSet[NodeId] = frozenset()
    transient_channels: Tuple[TransientChannel, ...] = ()
    controlled: FrozenSet[NodeId] = frozenset()

    @property
    def nodes(self) -> FrozenSet[NodeId]:
        """Every node appearing in a procedure message or transient channel"""
        found = set()
        for procedure in self.procedures:
            for msg in procedure.messages:
                found.update((msg.source, msg.target))
        for channel in self.transient_channels:
            found.update((channel.first, channel.last, *channel.via))
        return frozenset(found)

    @property
    def effective(self) -> FrozenSet[NodeId]:
        """Nodes able to store and forward hidden data"""
        return self.compromised | self.controlled

    def usable(self, channel: TransientChannel) -> bool:
        # Via nodes may be uncompromised; only the two ends matter
        return channel.first in self.effective and channel.last in self.effective

    def procedure(self, name) -> Optional[Procedure]:
        for procedure in self.procedures:
            if procedure.name == name:
                return procedure
        return None


@dataclass(frozen=True)
class Attack:
    entry: NodeId
    execution: NodeId
    exit: Optional[NodeId]
    forward_bits: int
    backward_bits: int
    attack_type: AttackType
    name: str = ""

    def __post_init__(self):
        if self.forward_bits < 0 or self.backward_bits < 0:
            raise ValueError(f"attack {self.name or '?'}: bit counts must be non-negative")
        if (self.exit is None) != (self.backward_bits == 0):
            raise ValueError(f"attack {self.name or '?'}: exit must be absent exactly when backward_bits is 0")

    def describe(self) -> str:
        exit_name = self.exit.value if self.exit else "-"
        return (f"{self.name or self.attack_type.cli_name} ({self.entry} -> {self.execution} -> {exit_name}, "
                f"forward {self.forward_bits} bit, backward {self.backward_bits} bit)")


@dataclass(frozen=True)
class Violation:
    entity: str
    problem: str

    def __str__(self):
        return f"{self.entity}: {self.problem}"


def validate_environment(env: Environment) -> List[Violation]:
    """Check the structural invariants of an environment; [] means valid"""
    violations: List[Violation] = []

    for procedure in env.procedures:
        for index, msg in enumerate(procedure.messages):
            entity = f"{procedure.name}[{index}] {msg.label or f'{msg.source}->{msg.target}'}"
            if msg.source == msg.target:
                violations.append(Violation(entity, "source equals target"))
            if msg.available_space < 0:
                violations.append(Violation(entity, f"negative available space ({msg.available_space} bit)"))

    for channel in env.transient_channels:
        entity = f"transient {channel.carrier} {channel.first}->{channel.last}"
        if channel.capacity <= 0:
            violations.append(Violation(entity, "capacity must be positive"))
        if channel.first == channel.last:
            violations.append(Violation(entity, "first equals last"))
        owner = env.procedure(channel.procedure)
        if owner is None:
            violations.append(Violation(entity, f"anchor procedure '{channel.procedure}' does not exist"))
        elif not 0 <= channel.anchor_message_index < len(owner):
            violations.append(Violation(entity, f"anchor index {channel.anchor_message_index} outside '{owner.name}'"))

    present = env.nodes
    for node in sorted(env.compromised - present):
        violations.append(Violation(f"compromised {node}", "node does not appear in any procedure or transient channel"))
    for node in sorted(env.controlled - present):
        violations.append(Violation(f"controlled {node}", "node does not appear in any procedure or transient channel"))

    return violations


def capacity_of(msg: ProcedureMessage, override: Optional[int] = None) -> int:
    """Embedding capacity of a message, optionally replaced by a sweep value"""
    if override is not None:
        if override < 0:
            raise ValueError(f"capacity override must be non-negative, got {override}")
        return override
    return msg.available_space
