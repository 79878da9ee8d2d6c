# codec.py
"""
JSON formats for matrices, graphs, tuples, row contractions, projection
families and analysis results. Every `*_to_json` output re-parses with the
matching `*_from_json` to an equal value.
"""

import json
from pathlib import Path
from typing import Any, Dict, List, Union

import numpy as np

from .errors import InputError
from .dilation import DilationResult
from .families import FamilyReport, Poset, ProjectionFamily, RowContraction
from .graph import DirectedGraph
from .numerics import Matrix, as_matrix
from .tuples import DaggerReport, Mode, OperatorTuple, WoldDecomposition


def load_json(path: Union[str, Path]) -> Any:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except OSError as e:
        raise InputError(f"could not read {path}: {e}", path=str(path)) from e
    except json.JSONDecodeError as e:
        raise InputError(f"{path} is not valid JSON: {e}", path=str(path)) from e


def dumps(data: Any) -> str:
    return json.dumps(data, indent=2) + "\n"


def _require(obj: Any, key: str, what: str) -> Any:
    if not isinstance(obj, dict) or key not in obj:
        raise InputError(f"{what} JSON is missing '{key}'")
    return obj[key]


def _count(value: Any, what: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool) or value < 0:
        raise InputError(f"{what} must be a non-negative integer, got {value!r}")
    return value


def _number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def matrix_to_json(A: Matrix) -> Dict[str, Any]:
    return {
        "rows": int(A.shape[0]),
        "cols": int(A.shape[1]),
        "entries": [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(A)],
    }


def _entry(value: Any) -> complex:
    if _number(value):
        return complex(value, 0.0)
    if isinstance(value, list) and len(value) == 2 and all(_number(v) for v in value):
        return complex(value[0], value[1])
    raise InputError(f"matrix entry {value!r} is neither a number nor a [re, im] pair")


def matrix_from_json(obj: Any) -> Matrix:
    rows = _count(_require(obj, "rows", "matrix"), "matrix 'rows'")
    cols = _count(_require(obj, "cols", "matrix"), "matrix 'cols'")
    entries = _require(obj, "entries", "matrix")
    if not isinstance(entries, list) or len(entries) != rows or any(
            not isinstance(row, list) or len(row) != cols for row in entries):
        raise InputError(f"matrix entries do not form a {rows}x{cols} grid")
    data = np.array([[_entry(v) for v in row] for row in entries], dtype=np.complex128).reshape(rows, cols)
    return as_matrix(data)


def graph_to_json(graph: DirectedGraph) -> Dict[str, Any]:
    return {"vertices": graph.vertex_count, "edges": [[s, r] for s, r in graph.edges]}


def graph_from_json(obj: Any) -> DirectedGraph:
    vertices = _count(_require(obj, "vertices", "graph"), "graph 'vertices'")
    edges = _require(obj, "edges", "graph")
    if not isinstance(edges, list):
        raise InputError("graph 'edges' must be a list of [s, r] pairs")
    pairs = []
    for e, pair in enumerate(edges):
        if not isinstance(pair, list) or len(pair) != 2:
            raise InputError(f"graph edge {e} must be an [s, r] pair, got {pair!r}", edge=e)
        s, r = (_count(v, f"graph edge {e} endpoint") for v in pair)
        if s >= vertices or r >= vertices:
            raise InputError(f"graph edge {e} = ({s}, {r}) references a missing vertex", edge=e)
        pairs.append((s, r))
    return DirectedGraph(vertices, tuple(pairs))


def tuple_to_json(S: OperatorTuple) -> Dict[str, Any]:
    mode: Union[str, Dict[str, Any]] = Mode.EXACT.value
    if S.is_truncated:
        mode = {"truncated": {"depth": S.depth, "levels": list(S.levels)}}
    return {"dim": S.space_dim, "mode": mode, "ops": [matrix_to_json(op) for op in S.ops]}


def _square_ops(obj: Any, what: str) -> List[Matrix]:
    dim = _count(_require(obj, "dim", what), f"{what} 'dim'")
    ops = _require(obj, "ops", what)
    if not isinstance(ops, list):
        raise InputError(f"{what} 'ops' must be a list of matrices")
    parsed = [matrix_from_json(m) for m in ops]
    if any(op.shape != (dim, dim) for op in parsed):
        raise InputError(f"every operator must be {dim}x{dim}")
    return parsed


def tuple_from_json(obj: Any) -> OperatorTuple:
    ops = _square_ops(obj, "tuple")
    mode = obj.get("mode", Mode.EXACT.value)
    if mode == Mode.EXACT.value:
        return OperatorTuple(tuple(ops))
    truncated = _require(mode, "truncated", "tuple mode")
    depth = _count(_require(truncated, "depth", "truncated mode"), "truncated 'depth'")
    levels = _require(truncated, "levels", "truncated mode")
    if not isinstance(levels, list) or any(
            not isinstance(level, int) or isinstance(level, bool) for level in levels):
        raise InputError("truncated 'levels' must be a list of integers")
    return OperatorTuple(tuple(ops), Mode.TRUNCATED, depth, tuple(levels))


def row_contraction_to_json(T: RowContraction) -> Dict[str, Any]:
    return {"dim": T.dim, "ops": [matrix_to_json(op) for op in T.ops]}


def row_contraction_from_json(obj: Any) -> RowContraction:
    return RowContraction(tuple(_square_ops(obj, "row contraction")))


def family_to_json(P: ProjectionFamily) -> Dict[str, Any]:
    return {"projections": [matrix_to_json(p) for p in P]}


def family_from_json(obj: Any) -> ProjectionFamily:
    projections = _require(obj, "projections", "family")
    if not isinstance(projections, list):
        raise InputError("family 'projections' must be a list of matrices")
    return ProjectionFamily(tuple(matrix_from_json(m) for m in projections))


def dagger_report_to_json(report: DaggerReport) -> Dict[str, Any]:
    data = report.to_dict()
    data["projections"] = [matrix_to_json(Q) for Q in report.projections]
    return data


def family_report_to_json(report: FamilyReport, graph: DirectedGraph) -> Dict[str, Any]:
    data = report.to_dict()
    data["graph"] = graph_to_json(graph)
    return data


def wold_to_json(decomposition: WoldDecomposition) -> Dict[str, Any]:
    return {
        "graph": graph_to_json(decomposition.graph),
        "alpha": {str(k): v for k, v in decomposition.alpha.items()},
        "wandering_dim": decomposition.wandering_basis.shape[1],
        "pure_dim": decomposition.pure_dim,
        "coisometric_dim": decomposition.coisometric_dim,
        "reducing_residual": decomposition.reducing_residual,
        "wandering_basis": matrix_to_json(decomposition.wandering_basis),
        "pure_basis": matrix_to_json(decomposition.pure_basis),
        "coisometric_basis": matrix_to_json(decomposition.coisometric_basis),
    }


def poset_to_json(poset: Poset) -> Dict[str, Any]:
    return {
        "count": len(poset),
        "finest": family_to_json(poset.finest),
        "families": [
            {
                "partition": [list(block) for block in partition],
                "family": family_to_json(family),
                "graph": graph_to_json(graph),
            }
            for partition, family, graph in zip(poset.partitions, poset.families, poset.graphs)
        ],
        "hasse": [[lower, upper] for lower, upper in poset.hasse_edges],
        "minimum": poset.minimum(),
        "maximum": poset.maximum(),
        "maximal": poset.maximal(),
    }


def dilation_to_json(result: DilationResult) -> Dict[str, Any]:
    data = tuple_to_json(result.S)
    data.update({
        "embedding": list(result.embedding),
        "depth": result.depth,
        "graph": graph_to_json(result.graph),
        "basis_index": result.basis_index(),
        "report": dict(result.report),
    })
    return data
