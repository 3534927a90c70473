"""
5G Puppeteer - command-line interface

Commands:
    feasibility   check forward/backward reachability of an attack (exit 2 if infeasible)
    simulate      run one attack and report the procedures it needed
    sweep         procedures needed per message capacity, as CSV
    graph         DOT export of the full, puppeteer or attack view
    header        encode / decode a 20-bit 5GPP header
    overhead      header overhead of the example attacks
    catalog dump  write a scenario (builtin by default) as a JSON scenario file

Results go to stdout; logs and errors go to stderr.
"""

import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional

import pandas as pd

from src.catalog import attacks_by_name, find_attack
from src.core_model import AttackType, Mode, NodeId, RoutingOption
from src.engine import FRAMINGS, SimConfig, run
from src.errors import PuppeteerError
from src.fivegpp import (
    CIPHERS,
    EXECUTION_CODES,
    EXIT_CODES,
    MAX_KEYS,
    GppHeader,
    Keyring,
    Undecryptable,
    decode_header,
    encode_header,
    get_cipher,
)
from src.netgraph import (
    build_full_graph,
    build_puppeteer_graph,
    default_threshold,
    edge_pairs,
    export_dot,
    feasible,
    restrict_to_report,
)
from src.report import max_packet_bits, overhead_frame, overhead_table
from src.routing import RoutingConfig
from src.scenario_io import dump_scenario, load_scenario, scenario_to_dict
from src.sweep import csv_frame, plot_sweep, sweep_capacity, sweep_frame
from utils.config import get_config, reset_config
from utils.logger import Logger


logger = Logger("cli")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INFEASIBLE = 2


class ArgumentParser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit code 1"""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_ERROR)


def _int_list(text: str) -> List[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got '{text}'") from None


def _name_list(text: str) -> List[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def _word(text: str) -> int:
    try:
        return int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a hex or decimal word, got '{text}'") from None


def _path_text(path) -> str:
    return " -> ".join(str(node) for node in path) if path else "-"


def _emit_json(payload):
    print(json.dumps(payload, indent=2))


# Shared option groups

def _scenario_options(parser, attack=True, attack_help="attack name from the scenario or catalog"):
    parser.add_argument("--scenario", default="builtin:fig3",
                        help="scenario file or builtin:<name> (default: builtin:fig3)")
    if attack:
        parser.add_argument("--attack", default="A1", help=f"{attack_help} (default: A1)")


def _mode_options(parser):
    parser.add_argument("--mode", choices=[m.value for m in Mode], default=Mode.PB3C.value,
                        help="embedding mode (default: pb3c)")
    parser.add_argument("--threshold", type=int, help="minimum usable message capacity in bits")


def _sim_options(parser):
    _mode_options(parser)
    parser.add_argument("--routing", choices=[r.cli_name for r in RoutingOption],
                        help="routing option (default: scenario, then config.yaml)")
    parser.add_argument("--seed", type=int, help="random seed (default: config.yaml)")
    parser.add_argument("--max-procedures", type=int, help="procedure limit (default: config.yaml)")
    parser.add_argument("--ttl", type=int, help="5GPP time-to-live, 1..8 (default: config.yaml)")
    parser.add_argument("--key-id", type=int, help="attack key id, 1..16 (default: config.yaml)")
    parser.add_argument("--framing", choices=FRAMINGS, help="5gpp adds the 20-bit header, raw sends payload only")
    parser.add_argument("--cipher", choices=sorted(CIPHERS), help="keystream cipher (default: config.yaml)")
    parser.add_argument("--backward-next-procedure", action="store_true",
                        help="hold the backward payload until the procedure after execution")


def _build_config(args, scenario, attack, capacity=None, concurrent=()) -> SimConfig:
    routing = scenario.routing
    if args.routing is not None:
        weights = routing.weights if routing is not None else ()
        routing = RoutingConfig(RoutingOption.parse(args.routing), weights)
    return SimConfig.from_config(
        scenario.env, attack,
        mode=Mode(args.mode),
        routing=routing,
        capacity_override=capacity,
        max_procedures=args.max_procedures,
        seed=args.seed,
        ttl=args.ttl,
        key_id=args.key_id,
        threshold=args.threshold,
        framing=args.framing,
        cipher=args.cipher,
        backward_same_procedure=False if args.backward_next_procedure else None,
        keyrings=scenario.keyrings,
        concurrent=tuple(concurrent),
    )


def _scenario_attack(args):
    scenario = load_scenario(args.scenario)
    attack = find_attack(args.attack, scenario.attacks or attacks_by_name())
    return scenario, attack


# Commands

def cmd_feasibility(args) -> int:
    scenario, attack = _scenario_attack(args)
    threshold = args.threshold if args.threshold is not None else default_threshold(Mode(args.mode))
    graph = build_puppeteer_graph(scenario.env, Mode(args.mode), threshold)
    report = feasible(attack, graph)

    if args.json:
        _emit_json(report.to_dict())
    else:
        print(f"attack: {attack.describe()}")
        print(f"scenario: {scenario.name}  mode: {args.mode}  threshold: {threshold} bit")
        print(f"forward:  {'reachable' if report.forward_reachable else 'unreachable'}  "
              f"{_path_text(report.forward_path)}")
        if attack.exit is None:
            print("backward: not required (no exit point)")
        else:
            print(f"backward: {'reachable' if report.backward_reachable else 'unreachable'}  "
                  f"{_path_text(report.backward_path)}")
        print(f"feasible: {'yes' if report.feasible else 'no'}")
    return EXIT_OK if report.feasible else EXIT_INFEASIBLE


def cmd_simulate(args) -> int:
    scenario, attack = _scenario_attack(args)
    catalog = scenario.attacks or attacks_by_name()
    concurrent = [find_attack(name, catalog) for name in args.concurrent]
    config = _build_config(args, scenario, attack, capacity=args.capacity, concurrent=concurrent)
    result = run(config)

    if args.json:
        payload = result.to_dict()
        payload.update(attack=attack.name, scenario=scenario.name, mode=str(config.mode),
                       routing=config.routing.option.cli_name, summary=result.summary())
        _emit_json(payload)
        return EXIT_OK

    print(f"attack: {attack.describe()}")
    capacity = f"{config.capacity_override} bit" if config.capacity_override is not None else "scenario"
    print(f"scenario: {scenario.name}  mode: {config.mode}  routing: {config.routing.option.cli_name}  "
          f"capacity: {capacity}  seed: {config.seed}")
    print(f"messages carrying payload: {result.messages_carrying_payload}")
    if result.attack_executed_at is not None:
        print(f"attack executed in procedure {result.attack_executed_at}")
    for effect in result.effects:
        print(f"effect at {effect.node}: {effect.description}")
    print(f"bits delivered: forward {result.forward_bits_delivered}, backward {result.backward_bits_delivered}")
    if result.drops:
        print("dropped copies: " + ", ".join(f"{reason} {count}" for reason, count in result.drops.items()))
    if len(result.attacks) > 1:
        for outcome in result.attacks:
            state = f"completed in procedure {outcome.completed_at}" if outcome.completed else "not completed"
            print(f"attack {outcome.attack_id} ({outcome.name}): {state}")
    print(result.summary())
    return EXIT_OK


def cmd_sweep(args) -> int:
    scenario = load_scenario(args.scenario)
    catalog = scenario.attacks or attacks_by_name()
    names = list(catalog) if args.attack.lower() == "all" else [find_attack(args.attack, catalog).name]
    bits = args.bits or list(get_config().get("sweep", "bits", default=[21, 32, 48, 64, 96, 128]))
    jobs = args.jobs if args.jobs is not None else int(get_config().get("sweep", "jobs", default=1))

    frames = []
    if len(names) > 1:
        logger.section(f"Sweeping {len(names)} attacks in {scenario.name}")
    for number, name in enumerate(names, start=1):
        attack = catalog[name]
        logger.step(number, len(names), f"sweeping {name} over {len(bits)} capacities")
        rows = sweep_capacity(_build_config(args, scenario, attack), bits, jobs=jobs)
        if rows:
            logger.metric(f"{name} at {rows[-1].bits} bit", rows[-1].procedures, "procedures")
        frames.append(sweep_frame(rows, attack=name if len(names) > 1 else None))
    frame = pd.concat(frames, ignore_index=True)

    if args.plot:
        plot_sweep(frame if "attack" in frame.columns else frame.assign(attack=names[0]), args.plot)
        logger.success(f"plot written to {args.plot}")
    if args.output:
        csv_frame(frame).to_csv(args.output, index=False)
        logger.success(f"CSV written to {args.output}")

    if args.json:
        _emit_json(json.loads(frame.to_json(orient="records")))
    elif not args.output:
        sys.stdout.write(csv_frame(frame).to_csv(index=False))
    return EXIT_OK


def cmd_graph(args) -> int:
    scenario = load_scenario(args.scenario)
    mode = Mode(args.mode)
    threshold = args.threshold if args.threshold is not None else default_threshold(mode)
    report = None

    if args.view == "full":
        graph = build_full_graph(scenario.env)
    else:
        graph = build_puppeteer_graph(scenario.env, mode, threshold)
        if args.attack is not None or args.view == "attack":
            attack = find_attack(args.attack or "A1", scenario.attacks or attacks_by_name())
            report = feasible(attack, graph)
            if args.view == "attack":
                graph = restrict_to_report(graph, report)

    dot = export_dot(graph, report)
    if args.dot:
        Path(args.dot).write_text(dot, encoding="utf-8")
        logger.success(f"DOT written to {args.dot}")

    if args.json:
        _emit_json({
            "view": args.view,
            "nodes": sorted(str(node) for node in graph.nodes),
            "edges": [[str(u), str(v)] for u, v in edge_pairs(graph)],
            "dot": dot,
        })
    elif not args.dot:
        sys.stdout.write(dot)
    return EXIT_OK


def _header_keyring(args, key_ids) -> Keyring:
    cipher = args.cipher or get_config().get("cipher", "default", default="shake")
    return Keyring.derived(key_ids, seed=args.key_seed, cipher=get_cipher(cipher))


def _header_fields(header) -> dict:
    if isinstance(header, Undecryptable):
        return {"key_id": header.key_id, "routing_option": header.routing_option.cli_name, "ttl": header.ttl,
                "decrypted": False}
    return {
        "key_id": header.key_id,
        "routing_option": header.routing_option.cli_name,
        "ttl": header.ttl,
        "split": header.split,
        "execution_point": str(header.execution_point),
        "attack_id": header.attack_id,
        "attack_type": header.attack_type.cli_name,
        "exit_point": str(header.exit_point),
        "decrypted": True,
    }


def cmd_header_encode(args) -> int:
    header = GppHeader(
        key_id=args.key_id,
        routing_option=RoutingOption.parse(args.routing),
        ttl=args.ttl,
        split=args.split,
        execution_point=NodeId.parse(args.exec),
        attack_id=args.attack_id,
        attack_type=AttackType.parse(args.type),
        exit_point=NodeId.parse(args.exit),
    )
    word = encode_header(header, _header_keyring(args, [args.key_id]), args.fragment_index)
    if args.json:
        _emit_json({"word": f"{word:#07x}", "bits": format(word, "020b"), **_header_fields(header)})
    else:
        print(f"{word:#07x}")
    return EXIT_OK


def cmd_header_decode(args) -> int:
    holds = args.holds if args.holds is not None else list(range(1, MAX_KEYS + 1))
    header = decode_header(args.word, _header_keyring(args, holds), args.fragment_index)
    fields = _header_fields(header)
    if args.json:
        _emit_json({"word": f"{args.word:#07x}", **fields})
    else:
        for name, value in fields.items():
            print(f"{name:<16} {value}")
    return EXIT_OK


def cmd_overhead(args) -> int:
    rows = overhead_table()
    frame = overhead_frame(rows)
    if args.json:
        _emit_json({"rows": json.loads(frame.to_json(orient="records")), "max_packet_bits": max_packet_bits(rows)})
    elif args.csv:
        sys.stdout.write(frame.to_csv(index=False))
    else:
        print(frame.to_string(index=False))
        print(f"\nlargest packet: {max_packet_bits(rows)} bit")
    return EXIT_OK


def cmd_catalog_dump(args) -> int:
    scenario = load_scenario(args.scenario)
    if not scenario.attacks:
        scenario.attacks = attacks_by_name()
    if args.output:
        Path(args.output).write_text(dump_scenario(scenario) + "\n", encoding="utf-8")
        logger.success(f"scenario written to {args.output}")
        if args.json:
            _emit_json({"output": str(args.output)})
    elif args.json:
        _emit_json(scenario_to_dict(scenario))
    else:
        print(dump_scenario(scenario))
    return EXIT_OK


def build_parser() -> ArgumentParser:
    common = ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS,
                        help="print results as one JSON document")

    parser = ArgumentParser(
        prog="puppeteer",
        description="5G Puppeteer: covert command and control over 5G core signaling",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=__doc__.split("\n\n")[1],
    )
    parser.add_argument("--json", action="store_true", default=False, help="print results as one JSON document")
    parser.add_argument("--config", help="configuration file (default: config.yaml or $PUPPETEER_CONFIG)")
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=ArgumentParser)

    p = sub.add_parser("feasibility", parents=[common], help="check whether an attack can reach its nodes")
    _scenario_options(p)
    _mode_options(p)
    p.set_defaults(handler=cmd_feasibility)

    p = sub.add_parser("simulate", parents=[common], help="simulate one attack")
    _scenario_options(p)
    _sim_options(p)
    p.add_argument("--capacity", type=int, help="override the capacity of every direct message, in bits")
    p.add_argument("--concurrent", type=_name_list, default=[],
                   help="comma-separated attacks launched alongside --attack, with the next attack ids")
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("sweep", parents=[common], help="procedures needed per message capacity")
    _scenario_options(p, attack_help="attack name, or 'all'")
    _sim_options(p)
    p.add_argument("--bits", type=_int_list, help="comma-separated capacities (default: config.yaml)")
    p.add_argument("--jobs", type=int, help="parallel runs (default: config.yaml)")
    p.add_argument("--output", help="write the CSV to this file instead of stdout")
    p.add_argument("--plot", help="write a procedures-vs-capacity chart to this file")
    p.set_defaults(handler=cmd_sweep)

    p = sub.add_parser("graph", parents=[common], help="export a graph view as DOT")
    _scenario_options(p, attack=False)
    p.add_argument("--attack", help="attack whose paths are colored (required for the attack view, default A1)")
    p.add_argument("--view", choices=["full", "puppeteer", "attack"], default="puppeteer")
    _mode_options(p)
    p.add_argument("--dot", help="write DOT to this file instead of stdout")
    p.set_defaults(handler=cmd_graph)

    header = sub.add_parser("header", help="5GPP header codec")
    header_sub = header.add_subparsers(dest="header_command", metavar="action", parser_class=ArgumentParser)
    header_sub.required = True
    for name, handler in (("encode", cmd_header_encode), ("decode", cmd_header_decode)):
        p = header_sub.add_parser(name, parents=[common])
        p.add_argument("--cipher", choices=sorted(CIPHERS), help="keystream cipher (default: config.yaml)")
        p.add_argument("--key-seed", type=int, default=0, help="seed the attack keys are derived from")
        p.add_argument("--fragment-index", type=int, default=0)
        p.set_defaults(handler=handler)
        if name == "encode":
            p.add_argument("--key-id", type=int, default=1)
            p.add_argument("--routing", choices=[r.cli_name for r in RoutingOption], default="pf")
            p.add_argument("--ttl", type=int, default=8)
            p.add_argument("--split", action="store_true")
            p.add_argument("--exec", default="udm", help=f"one of {', '.join(n.value.lower() for n in EXECUTION_CODES)}")
            p.add_argument("--attack-id", type=int, default=1)
            p.add_argument("--type", default="key-ext", help="key-ext, pws or localization")
            p.add_argument("--exit", default="ue", help=f"one of {', '.join(n.value.lower() for n in EXIT_CODES)}")
        else:
            p.add_argument("word", type=_word, help="20-bit word, e.g. 0x00000")
            p.add_argument("--holds", type=_int_list, help="key ids the decoding node holds (default: all)")

    p = sub.add_parser("overhead", parents=[common], help="header overhead of the example attacks")
    p.add_argument("--csv", action="store_true", help="print CSV instead of a table")
    p.set_defaults(handler=cmd_overhead)

    catalog = sub.add_parser("catalog", help="built-in catalog data")
    catalog_sub = catalog.add_subparsers(dest="catalog_command", metavar="action", parser_class=ArgumentParser)
    catalog_sub.required = True
    for target in (catalog_sub.add_parser("dump", parents=[common], help="write a scenario as JSON"),
                   sub.add_parser("catalog-dump", parents=[common], help="same as 'catalog dump'")):
        target.add_argument("--scenario", default="builtin:registration",
                            help="scenario to dump (default: builtin:registration)")
        target.add_argument("--output", help="write to this file instead of stdout")
        target.set_defaults(handler=cmd_catalog_dump)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    if args.config:
        reset_config(args.config)
    if getattr(args, "handler", None) is None:
        parser.print_help(sys.stderr)
        return EXIT_ERROR

    try:
        return args.handler(args)
    except (PuppeteerError, ValueError) as exc:
        if args.json:
            print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        else:
            logger.error(str(exc))
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
