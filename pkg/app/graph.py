# graph.py

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, List, Optional, Tuple

import networkx as nx

from .errors import DepthOverflow, InvalidPartition, ValidationError

logger = logging.getLogger(__name__)

DEFAULT_PATH_CAP = 10 ** 6


@dataclass(frozen=True)
class DirectedGraph:
    """Directed multigraph; edge e runs from edges[e][0] = s(e) to edges[e][1] = r(e)"""
    vertex_count: int
    edges: Tuple[Tuple[int, int], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple((int(s), int(r)) for s, r in self.edges))
        if self.vertex_count < 0:
            raise ValidationError(f"vertex count must be >= 0, got {self.vertex_count}")
        for e, (s, r) in enumerate(self.edges):
            if not (0 <= s < self.vertex_count and 0 <= r < self.vertex_count):
                raise ValidationError(f"edge {e} = ({s}, {r}) references a missing vertex")

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def source(self, e: int) -> int:
        return self.edges[e][0]

    def target(self, e: int) -> int:
        return self.edges[e][1]

    def out_edges(self, v: int) -> List[int]:
        return [e for e, (s, _) in enumerate(self.edges) if s == v]

    def sinks(self) -> List[int]:
        """Vertices that are the initial vertex of no edge"""
        starts = {s for s, _ in self.edges}
        return [v for v in range(self.vertex_count) if v not in starts]

    def check_no_sinks(self):
        missing = self.sinks()
        if missing:
            raise ValidationError(f"vertices without outgoing edges: {missing}", vertices=missing)

    def to_networkx(self) -> nx.MultiDiGraph:
        g = nx.MultiDiGraph()
        g.add_nodes_from(range(self.vertex_count))
        for e, (s, r) in enumerate(self.edges):
            g.add_edge(s, r, key=e)
        return g


@dataclass(frozen=True, order=True)
class Path:
    """Element of the path semigroupoid.

    `edges` reads left to right as later to earlier: w = e1 e2 ... em means
    e_m is traversed first. Length-0 paths are the vertices themselves.
    """
    edges: Tuple[int, ...]
    source: int
    target: int

    @property
    def length(self) -> int:
        return len(self.edges)

    def sort_key(self):
        return (len(self.edges), self.edges, self.source)

    @classmethod
    def vertex(cls, v: int) -> "Path":
        return cls((), v, v)

    def prepend(self, graph: DirectedGraph, e: int) -> Optional["Path"]:
        """The path e·w, or None when s(e) is not the final vertex of w"""
        if graph.source(e) != self.target:
            return None
        return Path((e,) + self.edges, self.source, graph.target(e))


def count_paths_up_to(graph: DirectedGraph, depth: int, stop_above: Optional[int] = None) -> int:
    """Number of paths of length <= depth, counted without enumerating them"""
    if depth < 0:
        raise ValidationError(f"depth must be >= 0, got {depth}")
    per_vertex = [1] * graph.vertex_count
    total = graph.vertex_count
    for _ in range(depth):
        nxt = [0] * graph.vertex_count
        for s, r in graph.edges:
            nxt[r] += per_vertex[s]
        per_vertex = nxt
        total += sum(per_vertex)
        if stop_above is not None and total > stop_above:
            break
    return total


def paths_up_to(graph: DirectedGraph, depth: int, cap: int = DEFAULT_PATH_CAP) -> List[Path]:
    """All paths of length <= depth, ordered by length then edge ids"""
    count = count_paths_up_to(graph, depth, stop_above=cap)
    if count > cap:
        raise DepthOverflow(f"more than {cap} paths up to depth {depth}", depth=depth, cap=cap)

    level = [Path.vertex(v) for v in range(graph.vertex_count)]
    paths = list(level)
    for _ in range(depth):
        nxt = []
        for w in level:
            for e in range(graph.edge_count):
                ew = w.prepend(graph, e)
                if ew is not None:
                    nxt.append(ew)
        nxt.sort(key=Path.sort_key)
        paths.extend(nxt)
        level = nxt
    return paths


def sccs(graph: DirectedGraph) -> List[Tuple[int, ...]]:
    """Strongly connected components, each sorted, ordered by least vertex"""
    components = nx.strongly_connected_components(nx.DiGraph(graph.to_networkx()))
    return sorted((tuple(sorted(c)) for c in components), key=lambda c: c[0])


@dataclass(frozen=True)
class DoubleCycle:
    found: bool
    witness: Optional[int] = None
    component: Tuple[int, ...] = ()

    def __bool__(self):
        return self.found


def has_double_cycle(graph: DirectedGraph) -> DoubleCycle:
    """Look for a vertex admitting two distinct cycles.

    A strongly connected component is a single simple cycle exactly when it
    has as many internal edges as vertices; with more edges some vertex has
    two internal out-edges, and each of them closes into a different cycle.
    """
    for comp in sccs(graph):
        members = set(comp)
        internal = [(s, r) for s, r in graph.edges if s in members and r in members]
        if len(internal) > len(comp):
            out_degree: Dict[int, int] = {}
            for s, _ in internal:
                out_degree[s] = out_degree.get(s, 0) + 1
            witness = min(v for v, d in out_degree.items() if d >= 2)
            logger.debug("component %s has %d internal edges; witness %d", comp, len(internal), witness)
            return DoubleCycle(True, witness, comp)
    return DoubleCycle(False)


class TypeVerdict(str, Enum):
    TYPE_I = "TypeI"
    NOT_TYPE_I = "NotTypeI"


@dataclass(frozen=True)
class TypeOneResult:
    verdict: TypeVerdict
    reason: str
    witness: Optional[int] = None

    @property
    def is_type_one(self) -> bool:
        return self.verdict is TypeVerdict.TYPE_I

    def to_dict(self):
        return {"verdict": self.verdict.value, "reason": self.reason, "witness": self.witness}


def is_type_one(graph: DirectedGraph) -> TypeOneResult:
    """Type I classification of the graph C*-algebra of a finite graph.

    The exit-and-return condition on infinite non-overlapping paths is
    vacuous for finite graphs, so the verdict rests on double cycles alone.
    """
    double = has_double_cycle(graph)
    if double:
        return TypeOneResult(
            TypeVerdict.NOT_TYPE_I,
            f"vertex {double.witness} lies on two distinct cycles inside component {list(double.component)}",
            double.witness,
        )
    return TypeOneResult(TypeVerdict.TYPE_I, "no vertex lies on two distinct cycles")


def normalize_partition(vertex_count: int, partition: Iterable[Iterable[int]]) -> List[Tuple[int, ...]]:
    blocks = [tuple(sorted(set(int(v) for v in block))) for block in partition]
    if any(not b for b in blocks):
        raise InvalidPartition("partition contains an empty block")
    seen: List[int] = sorted(v for b in blocks for v in b)
    if seen != list(range(vertex_count)):
        raise InvalidPartition(
            f"blocks must cover vertices 0..{vertex_count - 1} exactly once",
            blocks=[list(b) for b in blocks],
        )
    return sorted(blocks, key=lambda b: b[0])


def deform(graph: DirectedGraph, partition: Iterable[Iterable[int]]) -> DirectedGraph:
    """Quotient graph obtained by identifying the vertices inside each block.

    Blocks become vertices in order of their least member; every edge keeps
    its id, so parallel edges and new loops survive.
    """
    blocks = normalize_partition(graph.vertex_count, partition)
    image = {v: idx for idx, block in enumerate(blocks) for v in block}
    return DirectedGraph(len(blocks), tuple((image[s], image[r]) for s, r in graph.edges))


def to_dot(graph: DirectedGraph, name: str = "G") -> str:
    lines = [f"digraph {name} {{",
             "  rankdir=LR;",
             "  node [shape=circle, fontname=Courier, fontsize=10];"]
    for v in range(graph.vertex_count):
        lines.append(f"  v{v};")
    for e, (s, r) in enumerate(graph.edges):
        lines.append(f'  v{s} -> v{r} [label="e{e}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
