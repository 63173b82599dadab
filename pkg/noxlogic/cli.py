"""Command line interface.

Every command reads and writes flat files: rule files, facts files, JSON network files,
dataset CSVs and DOT graphs. Results go to standard output and log records to standard
error.
"""

import argparse
import logging
import sys
from pathlib import Path

from typing import Callable, List, Optional

from noxlogic import __version__
from noxlogic.builder import build, remove_rule
from noxlogic.datasets import (
    DEFAULT_SEED,
    format_report,
    load_mushroom,
    load_spect,
    memorize,
    report_csv,
)
from noxlogic.export import dump, load, to_dot
from noxlogic.gates import (
    Gate,
    format_crosstalk,
    format_truth_table,
    truth_table_check,
)
from noxlogic.inference import (
    explain,
    format_states,
    format_trace,
    infer,
    parse_facts,
    stratification_check,
)
from noxlogic.library import R7_RULES
from noxlogic.neurule import (
    R7,
    adjustment_experiment,
    format_adjustment_report,
    parse_neurules,
)
from noxlogic.readout import readout
from noxlogic.rules import (
    DEFAULT_POLICY,
    EncodingPolicy,
    format_rules,
    parse_rule,
    parse_rules,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_STRICT = 2


def _policy(args: argparse.Namespace) -> EncodingPolicy:
    return EncodingPolicy(args.policy)


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text(encoding="utf-8")


def cmd_build(args: argparse.Namespace) -> int:
    rules = parse_rules(_read_text(args.rules))
    dump(build(rules, _policy(args)), args.out)
    return EXIT_OK


def cmd_infer(args: argparse.Namespace) -> int:
    net = load(args.net)
    facts = parse_facts(_read_text(args.facts))
    result = infer(net, facts, auto_create=args.auto_create)

    out = [format_states(result)]
    contradictions = ", ".join(sorted(result.contradictions)) or "none"
    unstable = ", ".join(f"e{i}" for i in sorted(result.unstable)) or "none"
    out.append(f"contradictions: {contradictions}\n")
    out.append(f"unstable: {unstable}\n")
    if args.trace:
        out.append("trace:\n")
        out.append(format_trace(result))
    for thing in args.explain or []:
        out.append(explain(result, thing))
    sys.stdout.write("".join(out))

    if args.strict and (result.contradictions or result.unstable):
        return EXIT_STRICT
    return EXIT_OK


def cmd_readout(args: argparse.Namespace) -> int:
    sys.stdout.write(format_rules(readout(load(args.net), _policy(args))))
    return EXIT_OK


def cmd_remove_rule(args: argparse.Namespace) -> int:
    net = load(args.net)
    remove_rule(net, parse_rule(args.rule), _policy(args))
    dump(net, args.out)
    return EXIT_OK


def cmd_memorize(args: argparse.Namespace) -> int:
    if args.dataset == "mushroom":
        records = load_mushroom(
            args.file, n_attrs=args.attrs, n_records=args.records, seed=args.seed
        )
    else:
        data = load_spect(args.file, drop_indecisive=not args.keep_indecisive)
        records = data.records
        if args.records is not None:
            records = records[: args.records]
        sys.stdout.write(f"indecisive records dropped: {data.dropped}\n")

    report = memorize(records, _policy(args))
    sys.stdout.write(format_report(report))
    if args.report:
        report_csv(report, args.report)
    return EXIT_OK


def cmd_gates(args: argparse.Namespace) -> int:
    kinds = [Gate(args.gate)] if args.gate else list(Gate)
    reports = [truth_table_check(kind) for kind in kinds]
    sys.stdout.write("\n".join(format_truth_table(report) for report in reports))
    if args.crosstalk:
        sys.stdout.write("\n" + format_crosstalk())
    return EXIT_OK if all(report.passed for report in reports) else EXIT_ERROR


def cmd_neurule_demo(args: argparse.Namespace) -> int:
    neurule = R7
    if args.neurules:
        neurules = parse_neurules(_read_text(args.neurules))
        if args.label not in neurules:
            raise KeyError(f"No neurule labelled {args.label!r} in {args.neurules}")
        neurule = neurules[args.label]
    report = adjustment_experiment(neurule, R7_RULES)
    sys.stdout.write(format_adjustment_report(report))
    return EXIT_OK


def cmd_export_dot(args: argparse.Namespace) -> int:
    net = load(args.net)
    Path(args.out).write_text(to_dot(net, Path(args.net).stem), encoding="utf-8")
    return EXIT_OK


def cmd_check(args: argparse.Namespace) -> int:
    net = load(args.net)
    problems = net.audit()
    stratification = stratification_check(net)
    for problem in problems:
        sys.stdout.write(f"audit: {problem}\n")
    if not problems:
        sys.stdout.write("audit: ok\n")
    for line in str(stratification).splitlines():
        sys.stdout.write(f"stratification: {line}\n")
    return EXIT_OK if not problems and stratification else EXIT_ERROR


def _add_policy(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--policy",
        choices=[p.value for p in EncodingPolicy],
        default=DEFAULT_POLICY.value,
        help="encoding of negative body literals (default: %(default)s)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="noxlogic",
        description="Build, query and read out logical neural networks.",
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    parser.add_argument(
        "--log-level",
        default="WARNING",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="log level of messages written to standard error (default: %(default)s)",
    )
    commands = parser.add_subparsers(dest="command", metavar="COMMAND")
    commands.required = True

    def command(
        name: str, handler: Callable[[argparse.Namespace], int], help: str
    ) -> argparse.ArgumentParser:
        sub = commands.add_parser(name, help=help, description=help)
        sub.set_defaults(handler=handler)
        return sub

    sub = command("build", cmd_build, "compile a rule file into a network file")
    sub.add_argument("--rules", required=True, help="rule file, '-' for stdin")
    sub.add_argument("--out", required=True, help="network file to write")
    _add_policy(sub)

    sub = command("infer", cmd_infer, "run inference from a facts file")
    sub.add_argument("--net", required=True, help="network file")
    sub.add_argument("--facts", required=True, help="facts file, '-' for stdin")
    sub.add_argument("--trace", action="store_true", help="print the firing trace")
    sub.add_argument(
        "--explain", action="append", metavar="THING", help="explain a conclusion"
    )
    sub.add_argument(
        "--auto-create",
        action="store_true",
        help="accept facts about things the network does not represent",
    )
    sub.add_argument(
        "--strict",
        action="store_true",
        help="exit with status 2 on contradictions or unstable firings",
    )

    sub = command("readout", cmd_readout, "print the rules stored in a network")
    sub.add_argument("--net", required=True, help="network file")
    _add_policy(sub)

    sub = command("remove-rule", cmd_remove_rule, "remove one rule from a network")
    sub.add_argument("--net", required=True, help="network file")
    sub.add_argument("--rule", required=True, help='rule text, "if ... then ..."')
    sub.add_argument("--out", required=True, help="network file to write")
    _add_policy(sub)

    sub = command("memorize", cmd_memorize, "memorize a UCI dataset record by record")
    sub.add_argument("--dataset", required=True, choices=["mushroom", "spect"])
    sub.add_argument("--file", required=True, help="dataset CSV file")
    sub.add_argument("--attrs", type=int, default=22, help="mushroom attributes kept")
    sub.add_argument("--records", type=int, default=None, help="records kept")
    sub.add_argument(
        "--seed",
        type=int,
        default=DEFAULT_SEED,
        help="mushroom shuffle seed (default: %(default)s)",
    )
    sub.add_argument(
        "--keep-indecisive",
        action="store_true",
        help="keep SPECT records whose features appear with both classes",
    )
    sub.add_argument("--report", help="CSV file for the per-step table")
    _add_policy(sub)

    sub = command("gates", cmd_gates, "check the truth tables of the logic gates")
    sub.add_argument("--gate", choices=[g.value for g in Gate], help="one gate only")
    sub.add_argument(
        "--crosstalk", action="store_true", help="show the cross-talk construction"
    )

    sub = command(
        "neurule-demo", cmd_neurule_demo, "compare neurule adjustment with link removal"
    )
    sub.add_argument("--neurules", help="neurule definition file (default: R7)")
    sub.add_argument("--label", default="R7", help="neurule to use from the file")

    sub = command("export-dot", cmd_export_dot, "export a network as a Graphviz graph")
    sub.add_argument("--net", required=True, help="network file")
    sub.add_argument("--out", required=True, help="DOT file to write")

    sub = command("check", cmd_check, "audit a network and check stratification")
    sub.add_argument("--net", required=True, help="network file")

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=args.log_level,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )

    try:
        return args.handler(args)
    except KeyError as e:
        message = e.args[0] if e.args else str(e)
        logger.debug("Command %s failed", args.command, exc_info=True)
        print(f"error: {message}", file=sys.stderr)
    except (ValueError, OSError) as e:
        logger.debug("Command %s failed", args.command, exc_info=True)
        print(f"error: {e}", file=sys.stderr)
    return EXIT_ERROR
