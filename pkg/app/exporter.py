# exporter.py

import logging
from pathlib import Path
from typing import Any, Union

import graphviz

from .codec import dumps
from .errors import InputError
from .families import Poset
from .graph import DirectedGraph, to_dot

logger = logging.getLogger(__name__)

RENDER_FORMATS = ("svg", "png")


def export_text(text: str, output_path: Union[str, Path]) -> Path:
    path = Path(output_path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            f.write(text)
    except OSError as e:
        raise InputError(f"could not write {path}: {e}", path=str(path)) from e
    logger.debug("wrote %s", path)
    return path


def export_json(data: Any, output_path: Union[str, Path]) -> Path:
    return export_text(dumps(data), output_path)


def export_graph_dot(graph: DirectedGraph, output_path: Union[str, Path], name: str = "G") -> Path:
    return export_text(to_dot(graph, name), output_path)


def _partition_label(partition) -> str:
    return " | ".join("{" + ",".join(str(v) for v in block) + "}" for block in partition)


def hasse_to_dot(poset: Poset, name: str = "Families") -> str:
    """Hasse diagram, coarser families at the bottom"""
    lines = [f"digraph {name} {{",
             "  rankdir=BT;",
             "  node [shape=box, style=rounded, fontname=Courier, fontsize=10];"]
    for idx, partition in enumerate(poset.partitions):
        lines.append(f'  f{idx} [label="{_partition_label(partition)}"];')
    for lower, upper in poset.hasse_edges:
        lines.append(f"  f{lower} -> f{upper};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_hasse_dot(poset: Poset, output_path: Union[str, Path]) -> Path:
    return export_text(hasse_to_dot(poset), output_path)


def render_dot(dot_path: Union[str, Path], fmt: str = "svg") -> Path:
    """Render a DOT file with the Graphviz binaries; the image is written to <dot_path>.<fmt>"""
    if fmt not in RENDER_FORMATS:
        raise InputError(f"unsupported render format {fmt!r}; use one of {', '.join(RENDER_FORMATS)}")
    path = Path(dot_path)
    if not path.is_file():
        raise InputError(f"no DOT file at {path}", path=str(path))
    try:
        rendered = graphviz.render("dot", fmt, str(path))
    except graphviz.ExecutableNotFound as e:
        raise InputError(f"Graphviz is not installed: {e}") from e
    except (OSError, graphviz.CalledProcessError) as e:
        raise InputError(f"could not render {path}: {e}", path=str(path)) from e
    logger.debug("rendered %s", rendered)
    return Path(rendered)
