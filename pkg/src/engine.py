"""
Discrete simulator for hidden command-and-control transfers.

PB3C runs procedures back to back in catalog order and lets fragments ride
the genuine messages: a fragment can leave a node on message i only if it
arrived there before message i was sent. IM3C sends induced messages along
one minimum-hop path and finishes within a single procedure.

Several attacks may run at once. Each gets its own attack id, and relays
keep their fragments apart by (attack id, direction).

Each run is single-threaded and fully determined by its SimConfig.
"""

from collections import defaultdict
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.core_model import (
    Attack,
    AttackType,
    Direction,
    Environment,
    Mode,
    NodeId,
    RoutingOption,
    capacity_of,
    validate_environment,
)
from src.errors import CapacityTooSmall, ScenarioError
from src.fivegpp import (
    HEADER_BITS,
    Fragment,
    Keyring,
    cipher_transform,
    encode_header,
    fragment_payload,
    get_cipher,
    header_for,
    reassemble,
)
from src.netgraph import (
    FeasibilityReport,
    build_puppeteer_graph,
    default_threshold,
    enumerate_paths,
    feasible,
    path_bottleneck,
)
from src.routing import (
    Consume,
    Drop,
    DropReason,
    Forward,
    RoutingConfig,
    RoutingState,
    drop_counts,
    next_hops,
    on_receive,
    select_paths,
)
from utils.config import get_config
from utils.logger import Logger


logger = Logger("engine")

FRAMINGS = ("5gpp", "raw")
MAX_ATTACK_ID = 8

# Stamp (procedure, message index); a fragment may leave once the current stamp is later
Stamp = Tuple[int, int]
BEFORE_FIRST_PROCEDURE: Stamp = (1, -1)

EFFECT_DESCRIPTIONS = {
    AttackType.UDM_KEY_EXTRACTION: "long-term key of the target subscriber read from the key store",
    AttackType.UE_LOCALIZATION: "location of the target UE requested",
    AttackType.PWS_ABUSE: "warning message broadcast in the target cell",
}


@dataclass
class SimConfig:
    env: Environment
    attack: Attack
    mode: Mode = Mode.PB3C
    routing: RoutingConfig = field(default_factory=RoutingConfig)
    capacity_override: Optional[int] = None
    max_procedures: int = 1000
    seed: int = 42
    ttl: int = 8
    key_id: int = 1
    attack_id: int = 1
    threshold: Optional[int] = None
    framing: str = "5gpp"
    backward_same_procedure: bool = True
    # node -> key ids it holds; None gives the key to every entry, execution and exit
    keyrings: Optional[Dict[NodeId, Sequence[int]]] = None
    cipher: str = "shake"
    # attacks launched alongside `attack`, numbered attack_id + 1, attack_id + 2, ...
    concurrent: Tuple[Attack, ...] = ()

    def __post_init__(self):
        if self.max_procedures < 1:
            raise ValueError(f"max_procedures must be at least 1, got {self.max_procedures}")
        if self.framing not in FRAMINGS:
            raise ValueError(f"unknown framing '{self.framing}' (expected 5gpp or raw)")
        if self.capacity_override is not None and self.capacity_override < 0:
            raise ValueError(f"capacity override must be non-negative, got {self.capacity_override}")
        self.concurrent = tuple(self.concurrent)
        last_id = self.attack_id + len(self.concurrent)
        if last_id > MAX_ATTACK_ID:
            raise ValueError(f"attack ids {self.attack_id}..{last_id} exceed the 3-bit header field")

    @classmethod
    def from_config(cls, env: Environment, attack: Attack, **overrides) -> "SimConfig":
        """Fill every field not given in `overrides` from config.yaml"""
        config = get_config()
        defaults = {
            "max_procedures": config.get("simulation", "max_procedures", default=1000),
            "seed": config.get("simulation", "seed", default=42),
            "ttl": config.get("simulation", "ttl", default=8),
            "key_id": config.get("simulation", "key_id", default=1),
            "attack_id": config.get("simulation", "attack_id", default=1),
            "framing": config.get("simulation", "framing", default="5gpp"),
            "backward_same_procedure": config.get("simulation", "backward_same_procedure", default=True),
            "cipher": config.get("cipher", "default", default="shake"),
            "routing": RoutingConfig(RoutingOption.parse(config.get("routing", "option", default="pf"))),
        }
        defaults.update({key: value for key, value in overrides.items() if value is not None})
        return cls(env=env, attack=attack, **defaults)

    @property
    def header_bits(self) -> int:
        return HEADER_BITS if self.framing == "5gpp" else 0

    @property
    def numbered_attacks(self) -> List[Tuple[int, Attack]]:
        return [(self.attack_id + offset, attack) for offset, attack in enumerate((self.attack, *self.concurrent))]


@dataclass(frozen=True)
class TraceHop:
    procedure: int
    index: int
    source: NodeId
    target: NodeId
    fragment_index: int
    attack_id: int = 1


@dataclass(frozen=True)
class ExecutionEffect:
    node: NodeId
    attack_type: AttackType
    procedure: int
    description: str
    payload_bits: int


@dataclass(frozen=True)
class AttackOutcome:
    """How one of the attacks of a run ended"""
    name: str
    attack_id: int
    completed: bool
    # procedure in which the attack finished, None if it never did
    completed_at: Optional[int]
    attack_executed_at: Optional[int]
    forward_bits_delivered: int
    backward_bits_delivered: int

    def to_dict(self) -> Dict:
        return {
            "name": self.name,
            "attack_id": self.attack_id,
            "completed": self.completed,
            "completed_at": self.completed_at,
            "attack_executed_at": self.attack_executed_at,
            "forward_bits_delivered": self.forward_bits_delivered,
            "backward_bits_delivered": self.backward_bits_delivered,
        }


@dataclass
class SimResult:
    completed: bool
    procedures_used: int
    messages_carrying_payload: int = 0
    forward_path_trace: List[TraceHop] = field(default_factory=list)
    backward_path_trace: List[TraceHop] = field(default_factory=list)
    attack_executed_at: Optional[int] = None
    reason: str = "completed"
    effects: List[ExecutionEffect] = field(default_factory=list)
    forward_bits_delivered: int = 0
    backward_bits_delivered: int = 0
    drops: Dict[str, int] = field(default_factory=dict)
    attacks: List[AttackOutcome] = field(default_factory=list)

    def summary(self) -> str:
        if self.completed:
            return f"completed: procedures={self.procedures_used}"
        return f"not completed ({self.reason}): procedures={self.procedures_used}"

    def to_dict(self) -> Dict:
        def hops(trace):
            return [[h.procedure, h.index, str(h.source), str(h.target), h.fragment_index, h.attack_id]
                    for h in trace]

        return {
            "completed": self.completed,
            "procedures_used": self.procedures_used,
            "messages_carrying_payload": self.messages_carrying_payload,
            "attack_executed_at": self.attack_executed_at,
            "reason": self.reason,
            "forward_bits_delivered": self.forward_bits_delivered,
            "backward_bits_delivered": self.backward_bits_delivered,
            "drops": dict(self.drops),
            "effects": [
                {"node": str(e.node), "attack_type": e.attack_type.cli_name, "procedure": e.procedure,
                 "description": e.description, "payload_bits": e.payload_bits}
                for e in self.effects
            ],
            "attacks": [outcome.to_dict() for outcome in self.attacks],
            "forward_path_trace": hops(self.forward_path_trace),
            "backward_path_trace": hops(self.backward_path_trace),
        }


@dataclass
class Pending:
    fragment: Fragment
    direction: Direction
    next_hop: NodeId
    word: int
    ready_after: Stamp

    @property
    def wire_bits(self) -> int:
        return self.fragment.wire_bits

    @property
    def attack_id(self) -> int:
        return self.fragment.header.attack_id


# (attack id, direction)
FlowKey = Tuple[int, Direction]


@dataclass
class NodeBuffer:
    # next hop -> fragments waiting for a message towards it, in arrival order
    pending_out: Dict[NodeId, List[Pending]] = field(default_factory=lambda: defaultdict(list))
    partial_in: Dict[FlowKey, Dict[int, Fragment]] = field(default_factory=lambda: defaultdict(dict))


@dataclass
class _Transfer:
    direction: Direction
    origin: NodeId
    terminal: NodeId
    payload: str
    fragments: List[Fragment]
    routes: Dict[int, List[List[NodeId]]] = field(default_factory=dict)
    words: Dict[int, int] = field(default_factory=dict)
    delivered: Optional[str] = None


@dataclass
class _AttackRun:
    attack: Attack
    attack_id: int
    report: Optional[FeasibilityReport] = None
    transfers: Dict[Direction, _Transfer] = field(default_factory=dict)
    executed_at: Optional[int] = None
    completed_at: Optional[int] = None

    @property
    def completed(self) -> bool:
        return self.completed_at is not None

    def delivered_bits(self, direction: Direction) -> int:
        transfer = self.transfers.get(direction)
        return len(transfer.delivered) if transfer is not None and transfer.delivered is not None else 0

    def outcome(self) -> AttackOutcome:
        return AttackOutcome(self.attack.name, self.attack_id, self.completed, self.completed_at, self.executed_at,
                             self.delivered_bits(Direction.FORWARD), self.delivered_bits(Direction.BACKWARD))


def _payload_salt(attack_id: int, fragment_index: int) -> str:
    return format(attack_id - 1, "03b") + format(fragment_index, "b")


class Simulation:
    """One simulation run; use run(config) rather than driving this directly"""

    def __init__(self, config: SimConfig):
        self.config = config
        self.env = config.env
        self.runs: Dict[int, _AttackRun] = {
            attack_id: _AttackRun(attack, attack_id) for attack_id, attack in config.numbered_attacks
        }
        self.primary = self.runs[config.attack_id]
        self.rng = np.random.default_rng(config.seed)
        self.cipher = get_cipher(config.cipher)
        self.threshold = config.threshold if config.threshold is not None else default_threshold(config.mode)
        self.graph = build_puppeteer_graph(self.env, config.mode, self.threshold, config.capacity_override)
        self.state = RoutingState.from_config(config.routing)
        self.keyrings = self._build_keyrings()
        self.buffers: Dict[NodeId, NodeBuffer] = defaultdict(NodeBuffer)
        self.drops: Dict[DropReason, int] = defaultdict(int)
        self.traces: Dict[Direction, List[TraceHop]] = {Direction.FORWARD: [], Direction.BACKWARD: []}
        self.effects: List[ExecutionEffect] = []
        self.messages = 0
        self.completed = False
        self.moved = False

    def _build_keyrings(self) -> Dict[NodeId, Keyring]:
        config = self.config
        if config.keyrings is None:
            holders = set()
            for run in self.runs.values():
                holders.update({run.attack.entry, run.attack.execution})
                if run.attack.exit is not None:
                    holders.add(run.attack.exit)
            assignment = {node: [config.key_id] for node in holders}
        else:
            assignment = config.keyrings
        return {NodeId.parse(node): Keyring.derived(ids, config.seed, self.cipher) for node, ids in assignment.items()}

    def keyring(self, node: NodeId) -> Keyring:
        return self.keyrings.get(node) or Keyring(cipher=self.cipher)

    def _header(self, run: _AttackRun):
        return header_for(self.config.key_id, self.config.routing.option, self.config.ttl, run.attack.execution,
                          run.attack_id, run.attack.attack_type, run.attack.exit)

    def _random_bits(self, count: int) -> str:
        return "".join(map(str, self.rng.integers(0, 2, size=count))) if count else ""

    def _plan_fragments(self, run: _AttackRun, origin: NodeId, payload: str, paths) -> List[Tuple[Fragment, list]]:
        """
        Cut the payload and pick the routes of every fragment.

        PF floods every fragment on all paths, so one copy on the widest path
        is enough and fragments are sized to it. RR and EERR send a fragment
        on a single path: the path is chosen first and the fragment is cut to
        that path's own bottleneck.
        """
        header = self._header(run)
        header_bits = self.config.header_bits
        if self.state.option == RoutingOption.PF:
            capacity = max(path_bottleneck(self.graph, path) for path in paths)
            fragments = fragment_payload(payload, capacity, header, header_bits)
            return [(frag, list(paths)) for frag in fragments]

        chunks, routes = [], []
        position = 0
        while position < len(payload):
            chosen = select_paths(self.state, paths, self.rng, node=origin, attack_id=run.attack_id)
            capacity = min(path_bottleneck(self.graph, path) for path in chosen)
            if capacity < header_bits + 1:
                raise CapacityTooSmall(capacity, header_bits + 1)
            room = capacity - header_bits
            chunks.append(payload[position:position + room])
            routes.append(chosen)
            position += room
        stamped = replace(header, split=len(chunks) > 1)
        return [(Fragment(stamped, chunk, index, len(chunks), header_bits), route)
                for index, (chunk, route) in enumerate(zip(chunks, routes))]

    def _start_transfer(self, run: _AttackRun, direction: Direction, origin: NodeId, terminal: NodeId, bits: int,
                        ready_after: Stamp, paths, enqueue: bool = True) -> _Transfer:
        payload = self._random_bits(bits)
        if origin == terminal or not payload:
            transfer = _Transfer(direction, origin, terminal, payload, [], delivered=payload)
            run.transfers[direction] = transfer
            return transfer

        planned = self._plan_fragments(run, origin, payload, paths)
        origin_ring = self.keyring(origin)
        key = origin_ring.key(self.config.key_id)
        sealed = [(replace(f, payload_bits=cipher_transform(f.payload_bits, key,
                                                              _payload_salt(run.attack_id, f.fragment_index),
                                                              self.cipher)), routes)
                  for f, routes in planned]
        transfer = _Transfer(direction, origin, terminal, payload, [f for f, _ in sealed])
        run.transfers[direction] = transfer

        for frag, routes in sealed:
            word = encode_header(frag.header, origin_ring, frag.fragment_index)
            transfer.routes[frag.fragment_index] = routes
            transfer.words[frag.fragment_index] = word
            self.state.mark_seen(origin, run.attack_id, direction, frag.fragment_index)
            if not enqueue:
                continue
            for hop in next_hops(origin, routes):
                self.buffers[origin].pending_out[hop].append(Pending(frag, direction, hop, word, ready_after))
        logger.debug(f"{run.attack.name or 'attack'} {direction} transfer {origin} -> {terminal}: "
                     f"{bits} bit in {len(sealed)} fragment(s)")
        return transfer

    def _candidate_paths(self, origin: NodeId, terminal: NodeId):
        if origin == terminal:
            return [[origin]]
        return enumerate_paths(self.graph, origin, terminal, self.config.ttl)

    # PB3C

    def _carry(self, source: NodeId, target: NodeId, capacity: int, stamp: Stamp) -> bool:
        queue = self.buffers[source].pending_out.get(target)
        if not queue:
            return False
        room = capacity
        smallest = self.config.header_bits + 1
        taken = []
        for position, pending in enumerate(queue):
            if room < smallest:
                break
            if pending.ready_after >= stamp or pending.wire_bits > room:
                continue
            room -= pending.wire_bits
            taken.append(position)
        if not taken:
            return False

        carried = [queue[position] for position in taken]
        for position in reversed(taken):
            del queue[position]
        self.messages += 1
        self.moved = True
        for pending in carried:
            self.traces[pending.direction].append(
                TraceHop(stamp[0], stamp[1], source, target, pending.fragment.fragment_index, pending.attack_id))
            self._deliver(target, pending, stamp)
            if self.completed:
                break
        return True

    def _deliver(self, node: NodeId, pending: Pending, stamp: Stamp):
        frag = pending.fragment
        direction = pending.direction
        run = self.runs[pending.attack_id]
        transfer = run.transfers[direction]
        outcome = on_receive(self.state, node, frag, direction, self.keyring(node), pending.word)

        if isinstance(outcome, Drop):
            self.drops[outcome.reason] += 1
        elif isinstance(outcome, Consume):
            if transfer.delivered is None:
                self._open(run, node, frag, direction, outcome)
                if transfer.delivered is not None:
                    self._transfer_done(run, direction, stamp)
        elif isinstance(outcome, Forward):
            for hop in next_hops(node, transfer.routes[frag.fragment_index]):
                self.buffers[node].pending_out[hop].append(Pending(frag, direction, hop, outcome.word, stamp))

    def _finish(self, run: _AttackRun, procedure: int):
        run.completed_at = procedure
        self.completed = all(r.completed for r in self.runs.values())

    def _transfer_done(self, run: _AttackRun, direction: Direction, stamp: Stamp):
        if direction == Direction.BACKWARD:
            self._finish(run, stamp[0])
            return
        attack = run.attack
        self._execute(run, stamp[0])
        if attack.exit is None or attack.backward_bits == 0:
            self._finish(run, stamp[0])
            return
        ready_after = stamp if self.config.backward_same_procedure else (stamp[0] + 1, -1)
        backward = self._start_transfer(run, Direction.BACKWARD, attack.execution, attack.exit,
                                        attack.backward_bits, ready_after,
                                        self._candidate_paths(attack.execution, attack.exit))
        if backward.delivered is not None:
            self._finish(run, stamp[0])

    def _execute(self, run: _AttackRun, procedure: int):
        run.executed_at = procedure
        self.moved = True
        self.effects.append(ExecutionEffect(
            node=run.attack.execution,
            attack_type=run.attack.attack_type,
            procedure=procedure,
            description=EFFECT_DESCRIPTIONS[run.attack.attack_type],
            payload_bits=len(run.transfers[Direction.FORWARD].delivered or ""),
        ))
        logger.debug(f"{run.attack.name or 'attack'} executed at {run.attack.execution} in procedure {procedure}")

    def _transient_by_anchor(self):
        anchored = defaultdict(list)
        for channel in self.env.transient_channels:
            if self.env.usable(channel) and channel.capacity >= self.threshold:
                anchored[(channel.procedure, channel.anchor_message_index)].append(channel)
        return anchored

    def _run_pb3c(self) -> SimResult:
        for run in self.runs.values():
            attack = run.attack
            forward = self._start_transfer(run, Direction.FORWARD, attack.entry, attack.execution,
                                           attack.forward_bits, BEFORE_FIRST_PROCEDURE,
                                           self._candidate_paths(attack.entry, attack.execution))
            if forward.delivered is not None:
                self._transfer_done(run, Direction.FORWARD, (1, -1))
        if self.completed:
            return self._result(1)
        if not self.env.procedures:
            return self._result(0, reason="stalled")

        anchored = self._transient_by_anchor()
        cycle = len(self.env.procedures)
        idle = 0
        for number in range(1, self.config.max_procedures + 1):
            procedure = self.env.procedures[(number - 1) % cycle]
            self.moved = False
            for index, msg in enumerate(procedure.messages):
                stamp = (number, index)
                if self.graph.has_edge(msg.source, msg.target):
                    capacity = capacity_of(msg, self.config.capacity_override)
                    if capacity >= self.threshold:
                        self._carry(msg.source, msg.target, capacity, stamp)
                for channel in anchored.get((procedure.name, index), ()):
                    if not self.completed:
                        self._carry(channel.first, channel.last, channel.capacity, stamp)
                if self.completed:
                    return self._result(number)
            idle = 0 if self.moved else idle + 1
            if idle >= cycle:
                logger.debug(f"no fragment moved for a full cycle, stopping after procedure {number}")
                return self._result(number, reason="stalled")
        return self._result(self.config.max_procedures, reason="timeout")

    # IM3C

    def _induce(self, run: _AttackRun, direction: Direction, path, bits: int, counter: List[int]):
        """Send every fragment hop by hop along `path` on induced messages"""
        transfer = self._start_transfer(run, direction, path[0], path[-1], bits, BEFORE_FIRST_PROCEDURE, [path],
                                        enqueue=False)
        for frag in transfer.fragments:
            word = transfer.words[frag.fragment_index]
            for here, there in zip(path, path[1:]):
                self.traces[direction].append(TraceHop(1, counter[0], here, there, frag.fragment_index,
                                                       run.attack_id))
                counter[0] += 1
                self.messages += 1
                outcome = on_receive(self.state, there, frag, direction, self.keyring(there), word)
                if isinstance(outcome, Drop):
                    self.drops[outcome.reason] += 1
                    break
                if isinstance(outcome, Consume):
                    self._open(run, there, frag, direction, outcome)
                    break
                word = outcome.word
        return transfer

    def _open(self, run: _AttackRun, node: NodeId, frag: Fragment, direction: Direction, outcome: Consume) -> None:
        """Decrypt a consumed fragment and record the payload once it is whole"""
        key = self.keyring(node).key(outcome.header.key_id)
        opened = cipher_transform(frag.payload_bits, key, _payload_salt(run.attack_id, frag.fragment_index),
                                  self.cipher)
        partial = self.buffers[node].partial_in[(run.attack_id, direction)]
        partial[frag.fragment_index] = replace(frag, payload_bits=opened)
        payload = reassemble(list(partial.values()))
        transfer = run.transfers[direction]
        if isinstance(payload, str) and transfer.delivered is None:
            transfer.delivered = payload

    def _run_im3c(self) -> SimResult:
        counter = [0]
        for run in self.runs.values():
            attack, report = run.attack, run.report
            forward = self._induce(run, Direction.FORWARD, report.forward_path, attack.forward_bits, counter)
            if forward.delivered is None:
                return self._result(1, reason="stalled")
            self._execute(run, 1)
            if attack.exit is not None and attack.backward_bits > 0:
                backward = self._induce(run, Direction.BACKWARD, report.backward_path, attack.backward_bits,
                                        counter)
                if backward.delivered is None:
                    return self._result(1, reason="stalled")
            self._finish(run, 1)
        return self._result(1)

    def _result(self, procedures: int, reason: str = "completed") -> SimResult:
        runs = list(self.runs.values())
        return SimResult(
            completed=self.completed,
            procedures_used=procedures,
            messages_carrying_payload=self.messages,
            forward_path_trace=self.traces[Direction.FORWARD],
            backward_path_trace=self.traces[Direction.BACKWARD],
            attack_executed_at=self.primary.executed_at,
            reason=reason if not self.completed else "completed",
            effects=self.effects,
            forward_bits_delivered=sum(r.delivered_bits(Direction.FORWARD) for r in runs),
            backward_bits_delivered=sum(r.delivered_bits(Direction.BACKWARD) for r in runs),
            drops=drop_counts(self.drops),
            attacks=[r.outcome() for r in runs],
        )

    def _refuse(self, reason: str) -> SimResult:
        return SimResult(completed=False, procedures_used=0, reason=reason,
                         attacks=[r.outcome() for r in self.runs.values()])

    def run(self) -> SimResult:
        for run in self.runs.values():
            report = feasible(run.attack, self.graph)
            if not report.feasible:
                side = "forward" if not report.forward_reachable else "backward"
                logger.debug(f"{run.attack.name or 'attack'} infeasible: no {side} path")
                return self._refuse(f"infeasible ({side})")
            longest = max(len(report.forward_path), len(report.backward_path or [])) - 1
            if longest > self.config.ttl:
                logger.debug(f"shortest path needs {longest} hops, TTL allows {self.config.ttl}")
                return self._refuse("unroutable (ttl)")
            run.report = report
        if self.config.mode == Mode.IM3C:
            return self._run_im3c()
        return self._run_pb3c()


def run(config: SimConfig) -> SimResult:
    """Simulate one attack, or several at once, on one environment"""
    violations = validate_environment(config.env)
    if violations:
        raise ScenarioError("invalid environment: " + "; ".join(str(v) for v in violations))
    result = Simulation(config).run()
    logger.debug(f"{config.attack.name or 'attack'} [{config.mode}]: {result.summary()}")
    return result
