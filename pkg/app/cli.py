# cli.py
"""
dilat3r - dilations of row contractions from the command line.

Results go to stdout (or -o) as JSON, graphs optionally as DOT. Errors are
reported as one JSON object per line on stderr and mapped to exit codes:
1 input, 2 validation, 3 resource cap.
"""

import argparse
import io
import json
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

from .codec import (
    dagger_report_to_json, dilation_to_json, dumps, family_from_json, family_report_to_json,
    family_to_json, graph_from_json, graph_to_json, load_json, matrix_to_json, poset_to_json,
    row_contraction_from_json, tuple_from_json, wold_to_json,
)
from .config import DEFAULT_CONFIG_FILE, Dilat3rConfig, load_config, save_config, with_overrides
from .dilation import dilate, predict_properties
from .errors import Dilat3rError, InputError
from .exporter import (
    RENDER_FORMATS, export_graph_dot, export_hasse_dot, export_json, export_text, hasse_to_dot, render_dot,
)
from .families import (
    enumerate_poset, essential_subspace, family_graph, finest_family, restrict,
)
from .graph import is_type_one, to_dot
from .tuples import check_dagger, extract_graph, wold_decompose

logger = logging.getLogger("app")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--eps-rank", type=float, help="Rank and equality tolerance")
    common.add_argument("--eps-rel", type=float, help="Relative tolerance for Hermitian and projection checks")
    common.add_argument("--config", default=None, help="Configuration file path (default dilat3r.toml)")
    common.add_argument("--verbose", action="store_true", help="Debug logging on stderr")
    common.add_argument("--pretty", action="store_true", help="Summary table instead of JSON where available")
    common.add_argument("-o", "--output", help="Write the result to this file instead of stdout")

    dot = argparse.ArgumentParser(add_help=False)
    dot.add_argument("--dot", action="store_true", help="Emit Graphviz DOT instead of JSON")
    dot.add_argument("--render", choices=RENDER_FORMATS, help="Also render the DOT output (needs -o)")

    parser = argparse.ArgumentParser(prog="dilat3r", description="Minimal partially isometric dilations of row contractions")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate-tuple", parents=[common], help="Check the partial-isometry relations")
    p.add_argument("tuple", help="Tuple JSON file")

    p = sub.add_parser("extract-graph", parents=[common, dot], help="Directed graph of a tuple")
    p.add_argument("tuple", help="Tuple JSON file")

    p = sub.add_parser("wold", parents=[common], help="Wold decomposition of a tuple")
    p.add_argument("tuple", help="Tuple JSON file")

    p = sub.add_parser("validate-family", parents=[common], help="Check a stabilizing projection family")
    p.add_argument("-T", dest="contraction", required=True, help="Row contraction JSON file")
    p.add_argument("-P", dest="family", required=True, help="Projection family JSON file")

    p = sub.add_parser("finest", parents=[common], help="Finest stabilizing family")
    p.add_argument("-T", dest="contraction", required=True, help="Row contraction JSON file")
    p.add_argument("--restrict", action="store_true", help="Compress to the essential subspace first")

    p = sub.add_parser("poset", parents=[common, dot], help="All stabilizing families and their Hasse diagram")
    p.add_argument("-T", dest="contraction", required=True, help="Row contraction JSON file")
    p.add_argument("--restrict", action="store_true", help="Compress to the essential subspace first")

    p = sub.add_parser("dilate", parents=[common], help="Build the truncated minimal dilation")
    p.add_argument("-T", dest="contraction", required=True, help="Row contraction JSON file")
    p.add_argument("-P", dest="family", required=True, help="Projection family JSON file")
    p.add_argument("--depth", type=int, help="Fock truncation depth (>= 1)")

    p = sub.add_parser("predict", parents=[common], help="Purity, coisometry and multiplicities of the dilation")
    p.add_argument("-T", dest="contraction", required=True, help="Row contraction JSON file")
    p.add_argument("-P", dest="family", required=True, help="Projection family JSON file")

    p = sub.add_parser("type1", parents=[common], help="Type I verdict for a graph C*-algebra")
    p.add_argument("graph", help="Graph JSON file")

    p = sub.add_parser("init-config", parents=[common], help="Write the effective configuration as TOML")
    p.add_argument("--force", action="store_true", help="Overwrite an existing file")
    return parser


def setup_logging(verbose: bool):
    if verbose:
        handler: logging.Handler = RichHandler(console=Console(stderr=True), show_path=False)
        level = logging.DEBUG
    else:
        handler = logging.StreamHandler(sys.stderr)
        level = logging.WARNING
    logging.basicConfig(level=level, format="%(message)s", handlers=[handler], force=True)


def emit_json(args, data: Any):
    if args.output:
        export_json(data, args.output)
    else:
        sys.stdout.write(dumps(data))


def emit_dot(args, text: str, write: Callable[[str], Path]):
    """DOT text to stdout, or to -o through `write` and then optionally rendered"""
    if args.render and not args.output:
        raise InputError("--render needs -o to name the DOT file")
    if not args.output:
        sys.stdout.write(text)
        return
    path = write(args.output)
    if args.render:
        render_dot(path, args.render)


def print_table(args, title: str, rows: List[tuple]):
    table = Table(title=title)
    table.add_column("Item", style="cyan")
    table.add_column("Value", style="white")
    for key, value in rows:
        table.add_row(str(key), str(value))
    if args.output:
        console = Console(file=io.StringIO(), record=True, width=100)
        console.print(table)
        export_text(console.export_text(), args.output)
    else:
        Console().print(table)


def diagnostic(payload: Dict[str, Any]):
    sys.stderr.write(json.dumps(payload, default=str) + "\n")


def load_contraction(args, config: Dilat3rConfig):
    T = row_contraction_from_json(load_json(args.contraction))
    if getattr(args, "restrict", False):
        basis = essential_subspace(T, config.tolerance)
        if basis.shape[1] < T.dim:
            logger.info("restricting to the essential subspace of dimension %d", basis.shape[1])
            return restrict(T, basis), basis
        return T, basis
    return T, None


def cmd_validate_tuple(args, config: Dilat3rConfig) -> int:
    S = tuple_from_json(load_json(args.tuple))
    report = check_dagger(S, config.tolerance)
    emit_json(args, dagger_report_to_json(report))
    if not report.verdict:
        diagnostic({"error": "ValidationError", "message": "tuple fails relations",
                    "failed": report.failed, "exit_code": 2})
        return 2
    return 0


def cmd_extract_graph(args, config: Dilat3rConfig) -> int:
    S = tuple_from_json(load_json(args.tuple))
    graph, labels = extract_graph(S, config.tolerance)
    if args.dot:
        emit_dot(args, to_dot(graph), lambda out: export_graph_dot(graph, out))
    else:
        emit_json(args, {"graph": graph_to_json(graph), "labels": [list(l) for l in labels]})
    return 0


def cmd_wold(args, config: Dilat3rConfig) -> int:
    S = tuple_from_json(load_json(args.tuple))
    decomposition = wold_decompose(S, config.tolerance)
    if args.pretty:
        print_table(args, "Wold decomposition", [
            ("vertices", decomposition.graph.vertex_count),
            ("wandering dim", decomposition.wandering_basis.shape[1]),
            ("pure dim", decomposition.pure_dim),
            ("coisometric dim", decomposition.coisometric_dim),
            *((f"alpha[{k}]", v) for k, v in decomposition.alpha.items()),
        ])
        return 0
    emit_json(args, wold_to_json(decomposition))
    return 0


def cmd_validate_family(args, config: Dilat3rConfig) -> int:
    T, _ = load_contraction(args, config)
    P = family_from_json(load_json(args.family))
    graph, report = family_graph(T, P, config.tolerance)
    if args.pretty:
        print_table(args, "Stabilizing family",
                    [(f"T_{i}", f"s={s}, r={r}") for i, (s, r) in enumerate(report.edges)])
        return 0
    emit_json(args, family_report_to_json(report, graph))
    return 0


def cmd_finest(args, config: Dilat3rConfig) -> int:
    T, basis = load_contraction(args, config)
    family = finest_family(T, config.tolerance)
    data = family_to_json(family)
    if basis is not None:
        data["essential_basis"] = matrix_to_json(basis)
    emit_json(args, data)
    return 0


def cmd_poset(args, config: Dilat3rConfig) -> int:
    T, _ = load_contraction(args, config)
    poset = enumerate_poset(T, config.tolerance, config.max_blocks)
    if args.dot:
        emit_dot(args, hasse_to_dot(poset), lambda out: export_hasse_dot(poset, out))
    else:
        emit_json(args, poset_to_json(poset))
    return 0


def cmd_dilate(args, config: Dilat3rConfig) -> int:
    T, _ = load_contraction(args, config)
    P = family_from_json(load_json(args.family))
    result = dilate(T, P, config.depth, config.tolerance, cap=config.path_cap)
    emit_json(args, dilation_to_json(result))
    return 0


def cmd_predict(args, config: Dilat3rConfig) -> int:
    T, _ = load_contraction(args, config)
    P = family_from_json(load_json(args.family))
    prediction = predict_properties(T, P, config.tolerance, config.purity_depth)
    if args.pretty:
        print_table(args, "Predicted properties", [
            ("pure", prediction.is_pure),
            ("r bound", f"{prediction.purity.r_bound:.6g}"),
            ("transfer radius", f"{prediction.purity.transfer_radius:.6g}"),
            ("fully coisometric", prediction.fully_coisometric),
            ("type", prediction.type_one.verdict.value),
            *((f"alpha[{k}]", v) for k, v in prediction.predicted_alpha.items()),
        ])
        return 0
    emit_json(args, prediction.to_dict())
    return 0


def cmd_type1(args, config: Dilat3rConfig) -> int:
    graph = graph_from_json(load_json(args.graph))
    result = is_type_one(graph)
    if args.pretty:
        print_table(args, "Type I", [("verdict", result.verdict.value), ("reason", result.reason),
                               ("witness", result.witness)])
        return 0
    emit_json(args, result.to_dict())
    return 0


def cmd_init_config(args, config: Dilat3rConfig) -> int:
    path = Path(args.output or DEFAULT_CONFIG_FILE)
    if path.exists() and not args.force:
        raise InputError(f"{path} exists; pass --force to overwrite it", path=str(path))
    save_config(config, path)
    logger.info("wrote %s", path)
    return 0


COMMANDS = {
    "validate-tuple": cmd_validate_tuple,
    "extract-graph": cmd_extract_graph,
    "wold": cmd_wold,
    "validate-family": cmd_validate_family,
    "finest": cmd_finest,
    "poset": cmd_poset,
    "dilate": cmd_dilate,
    "predict": cmd_predict,
    "type1": cmd_type1,
    "init-config": cmd_init_config,
}


def run(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code == 0 else 1
    setup_logging(args.verbose)

    try:
        config = load_config(args.config)
        config = with_overrides(config, args.eps_rank, args.eps_rel, getattr(args, "depth", None))
        return COMMANDS[args.command](args, config)
    except Dilat3rError as e:
        logger.debug("%s failed: %s", args.command, e)
        diagnostic(e.to_dict())
        return e.exit_code
    except (TypeError, ValueError, KeyError) as e:
        logger.debug("%s failed on malformed input", args.command, exc_info=True)
        diagnostic({"error": "InputError", "message": f"malformed input: {e}", "exit_code": InputError.exit_code})
        return InputError.exit_code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
