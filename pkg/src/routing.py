"""
Routing options for hidden fragments, plus TTL and duplicate suppression.

PF sends a fragment on every candidate path, RR takes the paths in turn and
EERR samples one path per fragment by weight. Whatever the option, every
receiving node drops copies it has already seen and decrements the clear TTL
before passing a fragment on.
"""

from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from typing import DefaultDict, Dict, List, Optional, Sequence, Set, Tuple, Union

import numpy as np

from src.core_model import Direction, NodeId, RoutingOption
from src.errors import NoPath
from src.fivegpp import Fragment, GppHeader, Keyring, decode_header, ttl_of, with_ttl
from utils.logger import Logger


logger = Logger("routing")

Path = List[NodeId]
SeenKey = Tuple[int, Direction, int]


@dataclass(frozen=True)
class RoutingConfig:
    option: RoutingOption = RoutingOption.PF
    weights: Tuple[float, ...] = ()


@dataclass
class RoutingState:
    option: RoutingOption = RoutingOption.PF
    weights: Tuple[float, ...] = ()
    rr_cursor: DefaultDict[Tuple[NodeId, int], int] = field(default_factory=lambda: defaultdict(int))
    seen: DefaultDict[NodeId, Set[SeenKey]] = field(default_factory=lambda: defaultdict(set))
    weights_warned: bool = False

    def __post_init__(self):
        if self.weights:
            weights = np.asarray(self.weights, dtype=float)
            if (weights < 0).any():
                raise ValueError("EERR weights must be non-negative")
            if abs(weights.sum() - 1.0) > 1e-9:
                raise ValueError(f"EERR weights must sum to 1, got {weights.sum():.6f}")

    @classmethod
    def from_config(cls, config: RoutingConfig) -> "RoutingState":
        return cls(option=config.option, weights=tuple(config.weights))

    def mark_seen(self, node: NodeId, attack_id: int, direction: Direction, fragment_index: int):
        self.seen[node].add((attack_id, Direction(direction), fragment_index))


class DropReason(str, Enum):
    TTL_EXPIRED = "ttl_expired"
    DUPLICATE = "duplicate"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class Consume:
    header: GppHeader


@dataclass(frozen=True)
class Forward:
    word: int
    ttl: int


@dataclass(frozen=True)
class Drop:
    reason: DropReason


Outcome = Union[Consume, Forward, Drop]


def _eerr_weights(state: RoutingState, count: int) -> np.ndarray:
    """Configured weights, or uniform ones when none are set or their count does not match"""
    if len(state.weights) == count:
        return np.asarray(state.weights, dtype=float)
    if state.weights and not state.weights_warned:
        state.weights_warned = True
        logger.warning(f"EERR has {len(state.weights)} weights for {count} paths, falling back to uniform weights")
    return np.full(count, 1.0 / count)


def select_paths(state: RoutingState, candidate_paths: Sequence[Path], rng: np.random.Generator,
                 node: Optional[NodeId] = None, attack_id: int = 1) -> List[Path]:
    """Paths a fragment leaving `node` is sent on"""
    if not candidate_paths:
        raise NoPath(f"no candidate path from {node if node is not None else 'origin'}")
    paths = list(candidate_paths)

    if state.option == RoutingOption.PF:
        return paths
    if state.option == RoutingOption.RR:
        key = (node, attack_id)
        cursor = state.rr_cursor[key] % len(paths)
        state.rr_cursor[key] = (cursor + 1) % len(paths)
        return [paths[cursor]]
    choice = rng.choice(len(paths), p=_eerr_weights(state, len(paths)))
    return [paths[int(choice)]]


def next_hops(node: NodeId, routes: Sequence[Path]) -> List[NodeId]:
    """Successors of `node` on any of the routes"""
    hops = set()
    for path in routes:
        for here, there in zip(path, path[1:]):
            if here == node:
                hops.add(there)
    return sorted(hops)


def on_receive(state: RoutingState, node: NodeId, frag: Fragment, direction: Direction,
               keyring: Keyring, word: int) -> Outcome:
    """
    Decide what `node` does with an arriving fragment whose header is `word`.

    Duplicates are dropped first. A node that can decrypt the header and is
    the terminal for the direction consumes the fragment; any other node
    decrements the clear TTL and forwards, dropping the fragment at zero.
    """
    direction = Direction(direction)
    key = (frag.header.attack_id, direction, frag.fragment_index)
    if key in state.seen[node]:
        return Drop(DropReason.DUPLICATE)
    state.seen[node].add(key)

    header = decode_header(word, keyring, frag.fragment_index)
    if isinstance(header, GppHeader):
        terminal = header.execution_point if direction == Direction.FORWARD else header.exit_point
        if node == terminal:
            return Consume(header)

    ttl = ttl_of(word) - 1
    if ttl == 0:
        return Drop(DropReason.TTL_EXPIRED)
    return Forward(with_ttl(word, ttl), ttl)


def drop_counts(drops: Dict[DropReason, int]) -> Dict[str, int]:
    return {str(reason): count for reason, count in sorted(drops.items(), key=lambda kv: kv[0].value)}
