# families.py
"""
Stabilizing projection families of a row contraction and the partially
ordered set they form: validation, the finest family, joins, the refinement
order and enumeration of every family with its Hasse diagram.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from .config import DEFAULT_TOLERANCE, ToleranceConfig
from .errors import (
    AnnihilatedBlock, DimensionMismatch, NonCommutingFamilies, NormalizationFailed,
    NotAPartition, NotRowContraction, NotStabilizing, TooManyBlocks, ZeroOperator,
)
from .graph import DirectedGraph
from .numerics import (
    Matrix, adjoint, as_matrix, frozen, join_bases, max_abs, min_eigenvalue,
    op_norm, projection_onto, projection_residual, range_basis, subspaces_orthogonal,
)

logger = logging.getLogger(__name__)

DEFAULT_MAX_BLOCKS = 8


@dataclass(frozen=True)
class RowContraction:
    """n operators T_i on a common space H with sum T_i T_i* <= I"""
    ops: Tuple[Matrix, ...]

    def __post_init__(self):
        ops = tuple(as_matrix(op) for op in self.ops)
        if not ops:
            raise DimensionMismatch("a row contraction needs at least one operator")
        dim = ops[0].shape[0]
        for i, op in enumerate(ops):
            if op.shape != (dim, dim):
                raise DimensionMismatch(f"T_{i} has shape {op.shape}, expected ({dim}, {dim})", op=i)
            if not np.any(op):
                raise ZeroOperator(f"T_{i} is zero", op=i)
        object.__setattr__(self, "ops", ops)

    @property
    def dim(self) -> int:
        return self.ops[0].shape[0]

    @property
    def n(self) -> int:
        return len(self.ops)

    def row_sum(self) -> Matrix:
        """sum T_i T_i*"""
        return sum(T @ adjoint(T) for T in self.ops)

    def defect(self) -> Matrix:
        return np.eye(self.dim) - self.row_sum()


def check_row_contraction(T: RowContraction, tol: ToleranceConfig = DEFAULT_TOLERANCE):
    lowest = min_eigenvalue(T.defect(), tol)
    if lowest < -tol.eps_rank:
        raise NotRowContraction(f"sum T_i T_i* exceeds I (eigenvalue {lowest:.3e} of I - TT*)",
                                min_eigenvalue=lowest)


def essential_subspace(T: RowContraction, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> Matrix:
    """Orthonormal basis of the span of all Ran(T_i) and Ran(T_i*)"""
    pieces = [range_basis(op, tol) for op in T.ops] + [range_basis(adjoint(op), tol) for op in T.ops]
    return join_bases(pieces, T.dim, tol)


def is_normalized(T: RowContraction, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> bool:
    return essential_subspace(T, tol).shape[1] == T.dim


def restrict(T: RowContraction, basis: Matrix) -> RowContraction:
    """Compression of T to a reducing subspace given by orthonormal columns"""
    return RowContraction(tuple(adjoint(basis) @ op @ basis for op in T.ops))


@dataclass(frozen=True)
class ProjectionFamily:
    projections: Tuple[Matrix, ...]

    def __post_init__(self):
        projs = tuple(as_matrix(p) for p in self.projections)
        if not projs:
            raise NotAPartition("a projection family needs at least one projection")
        dim = projs[0].shape[0]
        for k, p in enumerate(projs):
            if p.shape != (dim, dim):
                raise DimensionMismatch(f"P_{k} has shape {p.shape}, expected ({dim}, {dim})", block=k)
        object.__setattr__(self, "projections", projs)

    @property
    def dim(self) -> int:
        return self.projections[0].shape[0]

    def __len__(self):
        return len(self.projections)

    def __iter__(self):
        return iter(self.projections)

    def __getitem__(self, k):
        return self.projections[k]


def leading_index(P: Matrix, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> int:
    """Least basis index not orthogonal to the range of P"""
    diag = np.real(np.diag(P))
    hits = np.nonzero(diag > tol.eps_rank)[0]
    return int(hits[0]) if hits.size else P.shape[0]


def canonical(projections: Sequence[Matrix], tol: ToleranceConfig = DEFAULT_TOLERANCE) -> ProjectionFamily:
    """Family with blocks sorted by least basis index in range"""
    return ProjectionFamily(tuple(sorted(projections, key=lambda P: leading_index(P, tol))))


def trivial_family(dim: int) -> ProjectionFamily:
    return ProjectionFamily((frozen(np.eye(dim, dtype=np.complex128)),))


@dataclass
class FamilyReport:
    valid: bool
    sources: List[int]
    ranges: List[int]

    @property
    def edges(self) -> List[Tuple[int, int]]:
        return list(zip(self.sources, self.ranges))

    def to_dict(self):
        return {
            "valid": self.valid,
            "edges": [{"op": i, "s": s, "r": r} for i, (s, r) in enumerate(self.edges)],
        }


def _classify(product: Matrix, T: Matrix, tol: ToleranceConfig) -> Optional[bool]:
    """True when product == T, False when product == 0, None otherwise"""
    if op_norm(product - T) <= tol.eps_rank * (1 + op_norm(T)):
        return True
    if op_norm(product) <= tol.eps_rank:
        return False
    return None


def check_partition(P: ProjectionFamily, tol: ToleranceConfig = DEFAULT_TOLERANCE):
    for k, proj in enumerate(P):
        residual = projection_residual(proj)
        if residual > tol.eps_rel:
            raise NotAPartition(f"P_{k} is not a projection (residual {residual:.3e})", block=k)
    for a in range(len(P)):
        for b in range(a + 1, len(P)):
            if op_norm(P[a] @ P[b]) > tol.eps_rank:
                raise NotAPartition(f"P_{a} and P_{b} are not orthogonal", blocks=[a, b])
    total = op_norm(sum(P.projections) - np.eye(P.dim))
    if total > tol.eps_rank:
        raise NotAPartition(f"projections do not sum to the identity (residual {total:.3e})")


def validate_family(T: RowContraction, P: ProjectionFamily,
                    tol: ToleranceConfig = DEFAULT_TOLERANCE) -> FamilyReport:
    """Check that P stabilizes T and find s(T_i), r(T_i) for each operator"""
    if P.dim != T.dim:
        raise DimensionMismatch(f"family acts on dimension {P.dim}, operators on {T.dim}")
    check_partition(P, tol)

    sources: List[int] = [-1] * T.n
    ranges: List[int] = [-1] * T.n
    for i, op in enumerate(T.ops):
        for k, proj in enumerate(P):
            left = _classify(proj @ op, op, tol)
            right = _classify(op @ proj, op, tol)
            if left is None or right is None:
                side = "P_k T_i" if left is None else "T_i P_k"
                raise NotStabilizing(f"{side} is neither T_i nor 0 for i={i}, k={k}", op=i, block=k)
            if left:
                ranges[i] = k
            if right:
                sources[i] = k

    for k in range(len(P)):
        if k not in sources:
            raise AnnihilatedBlock(f"every T_i vanishes on P_{k}", block=k)
    logger.debug("family of %d blocks validated; edges %s", len(P), list(zip(sources, ranges)))
    return FamilyReport(True, sources, ranges)


def family_graph(T: RowContraction, P: ProjectionFamily,
                 tol: ToleranceConfig = DEFAULT_TOLERANCE) -> Tuple[DirectedGraph, FamilyReport]:
    report = validate_family(T, P, tol)
    return DirectedGraph(len(P), tuple(report.edges)), report


class _UnionFind:
    def __init__(self, size: int):
        self.parent = list(range(size))

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: int, b: int):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def finest_family(T: RowContraction, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> ProjectionFamily:
    """Family of connected components of the range subspaces.

    Subspaces Ran(T_i) (index i) and Ran(T_i*) (index n + i) are joined when
    they are not orthogonal. Every stabilizing family of T is a coarsening of
    this one. A component holding only ranges is a block every T_i
    annihilates, so the result itself fails validate_family in that case.
    """
    check_row_contraction(T, tol)
    n = T.n
    subspaces = [range_basis(op, tol) for op in T.ops] + [range_basis(adjoint(op), tol) for op in T.ops]

    uf = _UnionFind(2 * n)
    for a in range(2 * n):
        for b in range(a + 1, 2 * n):
            if not subspaces_orthogonal(subspaces[a], subspaces[b], tol):
                uf.union(a, b)

    def components() -> Dict[int, List[int]]:
        comps: Dict[int, List[int]] = {}
        for idx in range(2 * n):
            comps.setdefault(uf.find(idx), []).append(idx)
        return comps

    blocks = []
    for members in components().values():
        if all(idx < n for idx in members):
            logger.info("component of ranges %s carries no co-range", members)
        span = join_bases([subspaces[idx] for idx in members], T.dim, tol)
        blocks.append(span)

    covered = sum(b.shape[1] for b in blocks)
    if covered != T.dim:
        raise NormalizationFailed(
            f"ranges and co-ranges span dimension {covered} of {T.dim}; restrict to the essential subspace first",
            spanned=covered, dim=T.dim,
        )
    family = canonical([projection_onto(b, tol) for b in blocks], tol)
    logger.debug("finest family has %d blocks", len(family))
    return family


def require_normalized(T: RowContraction, tol: ToleranceConfig = DEFAULT_TOLERANCE):
    spanned = essential_subspace(T, tol).shape[1]
    if spanned != T.dim:
        raise NormalizationFailed(
            f"ranges and co-ranges span dimension {spanned} of {T.dim}",
            spanned=spanned, dim=T.dim,
        )


def commute_check(P1: ProjectionFamily, P2: ProjectionFamily) -> float:
    """Largest commutator norm between members of two families"""
    worst = 0.0
    for a in P1:
        for b in P2:
            worst = max(worst, op_norm(a @ b - b @ a))
    return worst


def join(P1: ProjectionFamily, P2: ProjectionFamily,
         tol: ToleranceConfig = DEFAULT_TOLERANCE) -> ProjectionFamily:
    """Common refinement: every non-zero product of a member of P1 with one of P2"""
    worst = commute_check(P1, P2)
    if worst > tol.eps_rank:
        raise NonCommutingFamilies(f"families do not commute (commutator norm {worst:.3e})", residual=worst)
    products = []
    for a in P1:
        for b in P2:
            prod = a @ b
            if op_norm(prod) > tol.eps_rank:
                products.append(projection_onto(prod, tol))
    return canonical(products, tol)


def merge_partition(P1: ProjectionFamily, P2: ProjectionFamily,
                    tol: ToleranceConfig = DEFAULT_TOLERANCE) -> Optional[List[Tuple[int, ...]]]:
    """Blocks of P2 whose sums give the members of P1, or None when P1 is not coarser"""
    groups: List[Tuple[int, ...]] = []
    for proj in P1:
        group = tuple(b for b, finer in enumerate(P2) if max_abs(proj @ finer - finer) <= tol.eps_rank)
        if not group:
            return None
        if op_norm(proj - sum(P2[b] for b in group)) > tol.eps_rank:
            return None
        groups.append(group)
    return groups


def leq(P1: ProjectionFamily, P2: ProjectionFamily, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> bool:
    """True iff every member of P1 is a sum of members of P2"""
    return merge_partition(P1, P2, tol) is not None


def coarsen(P: ProjectionFamily, partition: Sequence[Sequence[int]]) -> ProjectionFamily:
    """Blockwise sums of P over a partition of its indices, in the order of the blocks"""
    return ProjectionFamily(tuple(frozen(sum(P[k] for k in block)) for block in partition))


def set_partitions(k: int) -> Iterator[List[Tuple[int, ...]]]:
    """All set partitions of range(k), by restricted growth strings"""
    if k == 0:
        yield []
        return

    def grow(prefix: List[int], used: int):
        if len(prefix) == k:
            blocks: Dict[int, List[int]] = {}
            for item, label in enumerate(prefix):
                blocks.setdefault(label, []).append(item)
            yield [tuple(blocks[label]) for label in range(used)]
            return
        for label in range(used + 1):
            yield from grow(prefix + [label], max(used, label + 1))

    yield from grow([0], 1)


def bell_number(k: int) -> int:
    row = [1]
    for _ in range(k):
        nxt = [row[-1]]
        for value in row:
            nxt.append(nxt[-1] + value)
        row = nxt
    return row[0]


def _partition_key(partition: Sequence[Sequence[int]]) -> Tuple[Tuple[int, ...], ...]:
    return tuple(sorted(tuple(sorted(b)) for b in partition))


@dataclass
class Poset:
    finest: ProjectionFamily
    partitions: List[Tuple[Tuple[int, ...], ...]]
    families: List[ProjectionFamily]
    graphs: List[DirectedGraph]
    hasse: nx.DiGraph = field(repr=False)

    @property
    def hasse_edges(self) -> List[Tuple[int, int]]:
        """(coarser, finer) covering pairs"""
        return sorted(self.hasse.edges())

    def maximal(self) -> List[int]:
        return sorted(v for v in self.hasse.nodes if self.hasse.out_degree(v) == 0)

    def maximum(self) -> Optional[int]:
        """Index of the largest family, or None when several families are maximal"""
        tops = self.maximal()
        return tops[0] if len(tops) == 1 else None

    def minimum(self) -> int:
        bottoms = [v for v in self.hasse.nodes if self.hasse.in_degree(v) == 0]
        return bottoms[0]

    def __len__(self):
        return len(self.families)


def _refines(finer: Sequence[Sequence[int]], coarser: Sequence[Sequence[int]]) -> bool:
    return all(any(set(block) <= set(big) for big in coarser) for block in finer)


def enumerate_poset(T: RowContraction, tol: ToleranceConfig = DEFAULT_TOLERANCE,
                    max_blocks: int = DEFAULT_MAX_BLOCKS) -> Poset:
    """Every stabilizing family of T, as the valid coarsenings of the finest one"""
    require_normalized(T, tol)
    finest = finest_family(T, tol)
    k = len(finest)
    if k > max_blocks:
        raise TooManyBlocks(f"finest family has {k} blocks (Bell({k}) = {bell_number(k)} families); cap is {max_blocks}",
                            blocks=k, cap=max_blocks)

    partitions: List[Tuple[Tuple[int, ...], ...]] = []
    families: List[ProjectionFamily] = []
    graphs: List[DirectedGraph] = []
    for p in sorted((_partition_key(p) for p in set_partitions(k)), key=lambda p: (len(p), p)):
        family = coarsen(finest, p)
        try:
            graph, _ = family_graph(T, family, tol)
        except AnnihilatedBlock:
            continue
        partitions.append(p)
        families.append(family)
        graphs.append(graph)

    order = nx.DiGraph()
    order.add_nodes_from(range(len(partitions)))
    for lower, q in enumerate(partitions):
        for upper, p in enumerate(partitions):
            if lower != upper and _refines(p, q):
                order.add_edge(lower, upper)
    hasse = nx.transitive_reduction(order)
    logger.debug("poset: %d of %d coarsenings stabilize, %d covering pairs",
                 len(families), bell_number(k), hasse.number_of_edges())
    return Poset(finest, partitions, families, graphs, hasse)
