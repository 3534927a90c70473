"""
Scenario files: a JSON document holding an environment, its attacks and
routing settings. `builtin:<name>` loads one of the catalog environments.

The loader is strict: unknown keys, unknown nodes and environments that fail
validation are rejected with ScenarioError.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Union

from src.catalog import BUILTIN_COMPROMISED, CATALOG_VERSION, attacks_by_name, builtin_environment
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
    validate_environment,
)
from src.errors import ScenarioError
from src.routing import RoutingConfig
from utils.config import get_config


BUILTIN_PREFIX = "builtin:"

TOP_LEVEL_KEYS = {"version", "name", "nodes", "compromised", "controlled", "procedures",
                  "transient_channels", "attacks", "routing", "keyrings"}
PROCEDURE_KEYS = {"name", "messages"}
MESSAGE_KEYS = {"src", "dst", "bits", "label"}
TRANSIENT_KEYS = {"first", "last", "via", "bits", "direction", "carrier", "procedure", "anchor"}
ATTACK_KEYS = {"name", "type", "entry", "execution", "exit", "forward_bits", "backward_bits"}
ROUTING_KEYS = {"option", "weights"}


@dataclass
class Scenario:
    env: Environment
    attacks: Dict[str, Attack] = field(default_factory=dict)
    # None defers to the command line and config.yaml
    routing: Optional[RoutingConfig] = None
    keyrings: Optional[Dict[NodeId, List[int]]] = None
    name: str = ""
    version: int = CATALOG_VERSION


def _check_keys(obj: Any, allowed: set, where: str, required: Iterable[str] = ()):
    if not isinstance(obj, dict):
        raise ScenarioError(f"{where}: expected an object, got {type(obj).__name__}")
    unknown = sorted(set(obj) - allowed)
    if unknown:
        raise ScenarioError(f"{where}: unknown key(s) {', '.join(unknown)}")
    missing = [key for key in required if key not in obj]
    if missing:
        raise ScenarioError(f"{where}: missing key(s) {', '.join(missing)}")


def _int(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ScenarioError(f"{where}: expected an integer, got {value!r}")
    return value


def _nodes(values, where: str) -> frozenset:
    if not isinstance(values, list):
        raise ScenarioError(f"{where}: expected a list of node names")
    return frozenset(NodeId.parse(value) for value in values)


def _parse_procedure(data, position: int, default_bits: int) -> Procedure:
    where = f"procedures[{position}]"
    _check_keys(data, PROCEDURE_KEYS, where, required=("name", "messages"))
    if not isinstance(data["messages"], list):
        raise ScenarioError(f"{where}.messages: expected a list")
    messages = []
    for index, msg in enumerate(data["messages"]):
        msg_where = f"{where}.messages[{index}]"
        _check_keys(msg, MESSAGE_KEYS, msg_where, required=("src", "dst"))
        label = str(msg.get("label", ""))
        messages.append(ProcedureMessage(
            source=NodeId.parse(msg["src"]),
            target=NodeId.parse(msg["dst"]),
            available_space=_int(msg.get("bits", default_bits), f"{msg_where}.bits"),
            label=label,
            parameters=parameters_for_label(label),
        ))
    return Procedure(str(data["name"]), tuple(messages))


def _parse_transient(data, position: int) -> TransientChannel:
    where = f"transient_channels[{position}]"
    _check_keys(data, TRANSIENT_KEYS, where, required=("first", "last", "bits", "direction", "procedure", "anchor"))
    try:
        direction = Direction(str(data["direction"]).lower())
    except ValueError:
        raise ScenarioError(f"{where}: direction must be forward or backward") from None
    return TransientChannel(
        first=NodeId.parse(data["first"]),
        last=NodeId.parse(data["last"]),
        via=tuple(NodeId.parse(node) for node in data.get("via", [])),
        capacity=_int(data["bits"], f"{where}.bits"),
        direction=direction,
        carrier=str(data.get("carrier", "")),
        procedure=str(data["procedure"]),
        anchor_message_index=_int(data["anchor"], f"{where}.anchor"),
    )


def _parse_attack(data, position: int) -> Attack:
    where = f"attacks[{position}]"
    _check_keys(data, ATTACK_KEYS, where, required=("name", "type", "entry", "execution", "forward_bits"))
    exit_point = data.get("exit")
    try:
        return Attack(
            entry=NodeId.parse(data["entry"]),
            execution=NodeId.parse(data["execution"]),
            exit=NodeId.parse(exit_point) if exit_point is not None else None,
            forward_bits=_int(data["forward_bits"], f"{where}.forward_bits"),
            backward_bits=_int(data.get("backward_bits", 0), f"{where}.backward_bits"),
            attack_type=AttackType.parse(data["type"]),
            name=str(data["name"]),
        )
    except ValueError as exc:
        raise ScenarioError(f"{where}: {exc}") from None


def _parse_routing(data) -> RoutingConfig:
    _check_keys(data, ROUTING_KEYS, "routing")
    try:
        option = RoutingOption.parse(data.get("option", "pf"))
    except ValueError as exc:
        raise ScenarioError(f"routing: {exc}") from None
    weights = data.get("weights", [])
    if not isinstance(weights, list) or any(isinstance(w, bool) or not isinstance(w, (int, float)) for w in weights):
        raise ScenarioError("routing.weights: expected a list of numbers")
    return RoutingConfig(option, tuple(float(w) for w in weights))


def _parse_keyrings(data) -> Dict[NodeId, List[int]]:
    if not isinstance(data, dict):
        raise ScenarioError("keyrings: expected an object mapping node names to key id lists")
    keyrings = {}
    for node, ids in data.items():
        if not isinstance(ids, list):
            raise ScenarioError(f"keyrings.{node}: expected a list of key ids")
        keyrings[NodeId.parse(node)] = [_int(key_id, f"keyrings.{node}") for key_id in ids]
    return keyrings


def scenario_from_dict(data: Dict, name: str = "") -> Scenario:
    _check_keys(data, TOP_LEVEL_KEYS, "scenario", required=("procedures",))
    if not isinstance(data["procedures"], list):
        raise ScenarioError("procedures: expected a list")
    default_bits = int(get_config().get("simulation", "default_capacity", default=64))

    procedures = tuple(_parse_procedure(p, i, default_bits) for i, p in enumerate(data["procedures"]))
    transient = tuple(_parse_transient(t, i) for i, t in enumerate(data.get("transient_channels", [])))
    env = Environment(
        procedures=procedures,
        compromised=_nodes(data.get("compromised", []), "compromised"),
        transient_channels=transient,
        controlled=_nodes(data.get("controlled", []), "controlled"),
    )

    if "nodes" in data:
        declared = _nodes(data["nodes"], "nodes")
        undeclared = sorted(env.nodes - declared)
        if undeclared:
            raise ScenarioError(f"nodes: {', '.join(map(str, undeclared))} used but not declared")

    violations = validate_environment(env)
    if violations:
        raise ScenarioError("invalid environment: " + "; ".join(str(v) for v in violations))

    attacks = {}
    for position, entry in enumerate(data.get("attacks", [])):
        attack = _parse_attack(entry, position)
        attacks[attack.name] = attack

    return Scenario(
        env=env,
        attacks=attacks,
        routing=_parse_routing(data["routing"]) if "routing" in data else None,
        keyrings=_parse_keyrings(data["keyrings"]) if "keyrings" in data else None,
        name=str(data.get("name", name)),
        version=_int(data.get("version", CATALOG_VERSION), "version"),
    )


def builtin_scenario(name: str) -> Scenario:
    return Scenario(env=builtin_environment(name), attacks=attacks_by_name(), name=name)


def load_scenario(source: Union[str, Path]) -> Scenario:
    """Load `builtin:<name>` or a JSON scenario file"""
    text = str(source)
    if text.startswith(BUILTIN_PREFIX):
        return builtin_scenario(text[len(BUILTIN_PREFIX):])
    path = Path(source)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ScenarioError(f"scenario file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: invalid JSON ({exc})") from None
    return scenario_from_dict(data, name=path.stem)


def builtin_names() -> List[str]:
    return list(BUILTIN_COMPROMISED)


def scenario_to_dict(scenario: Scenario) -> Dict:
    env = scenario.env
    data = {
        "version": scenario.version,
        "name": scenario.name,
        "nodes": sorted(str(node) for node in env.nodes),
        "compromised": sorted(str(node) for node in env.compromised),
        "controlled": sorted(str(node) for node in env.controlled),
        "procedures": [
            {
                "name": procedure.name,
                "messages": [
                    {"src": str(m.source), "dst": str(m.target), "bits": m.available_space, "label": m.label}
                    for m in procedure.messages
                ],
            }
            for procedure in env.procedures
        ],
        "transient_channels": [
            {
                "first": str(c.first), "last": str(c.last), "via": [str(n) for n in c.via], "bits": c.capacity,
                "direction": str(c.direction), "carrier": c.carrier, "procedure": c.procedure,
                "anchor": c.anchor_message_index,
            }
            for c in env.transient_channels
        ],
        "attacks": [
            {
                "name": attack.name, "type": attack.attack_type.cli_name, "entry": str(attack.entry),
                "execution": str(attack.execution), "exit": str(attack.exit) if attack.exit is not None else None,
                "forward_bits": attack.forward_bits, "backward_bits": attack.backward_bits,
            }
            for attack in scenario.attacks.values()
        ],
    }
    if scenario.routing is not None:
        data["routing"] = {"option": scenario.routing.option.cli_name, "weights": list(scenario.routing.weights)}
    if scenario.keyrings is not None:
        data["keyrings"] = {str(node): list(ids) for node, ids in scenario.keyrings.items()}
    return data


def dump_scenario(scenario: Scenario) -> str:
    return json.dumps(scenario_to_dict(scenario), indent=2)


def save_scenario(scenario: Scenario, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.write_text(dump_scenario(scenario) + "\n", encoding="utf-8")
    return path
