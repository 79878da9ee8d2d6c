# tuples.py
"""
Analysis of operator tuples satisfying (or failing) the partial-isometry
relations: the five checks, the associated directed graph, the wandering
subspace, the Wold decomposition and the purity tests.

Truncated tuples (Fock models cut at depth d) are checked on the compression
to basis vectors of level <= d - 1; the ambient block sits at level -1.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .config import DEFAULT_TOLERANCE, ToleranceConfig
from .errors import AmbiguousSupport, DepthOverflow, DimensionMismatch, ValidationError, ZeroOperator
from .graph import DEFAULT_PATH_CAP, DirectedGraph, count_paths_up_to
from .numerics import (
    Matrix, adjoint, as_matrix, complement_basis, frozen, join_bases,
    min_eigenvalue, op_norm, range_basis, rank_tol,
)

logger = logging.getLogger(__name__)

AMBIENT_LEVEL = -1

RELATIONS = (
    "initial_idempotent",
    "row_contraction",
    "initial_equal_or_orthogonal",
    "final_supported",
    "initial_partition",
)


class Mode(str, Enum):
    EXACT = "exact"
    TRUNCATED = "truncated"


@dataclass(frozen=True)
class OperatorTuple:
    """n square matrices on a common space, exact or cut at a Fock depth"""
    ops: Tuple[Matrix, ...]
    mode: Mode = Mode.EXACT
    depth: Optional[int] = None
    levels: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        ops = tuple(as_matrix(op) for op in self.ops)
        if not ops:
            raise DimensionMismatch("an operator tuple needs at least one operator")
        dim = ops[0].shape[0]
        for i, op in enumerate(ops):
            if op.shape != (dim, dim):
                raise DimensionMismatch(f"operator {i} has shape {op.shape}, expected ({dim}, {dim})", op=i)
            if not np.any(op):
                raise ZeroOperator(f"operator {i} is zero", op=i)
        object.__setattr__(self, "ops", ops)

        if self.mode is Mode.TRUNCATED:
            if self.depth is None or self.depth < 1 or self.levels is None:
                raise DimensionMismatch("truncated tuples need depth >= 1 and a level for every basis index")
            levels = tuple(int(l) for l in self.levels)
            if len(levels) != dim:
                raise DimensionMismatch(f"{len(levels)} levels given for a space of dimension {dim}")
            if any(l < AMBIENT_LEVEL or l > self.depth for l in levels):
                raise DimensionMismatch(f"levels must lie in [{AMBIENT_LEVEL}, {self.depth}]")
            object.__setattr__(self, "levels", levels)
        else:
            object.__setattr__(self, "depth", None)
            object.__setattr__(self, "levels", None)

    @property
    def space_dim(self) -> int:
        return self.ops[0].shape[0]

    @property
    def n(self) -> int:
        return len(self.ops)

    @property
    def is_truncated(self) -> bool:
        return self.mode is Mode.TRUNCATED

    def kept_indices(self) -> np.ndarray:
        """Basis indices on which relations are checked"""
        if not self.is_truncated:
            return np.arange(self.space_dim)
        return np.array([i for i, l in enumerate(self.levels) if l <= self.depth - 1], dtype=int)

    def compress(self, X: Matrix) -> Matrix:
        kept = self.kept_indices()
        return X[np.ix_(kept, kept)]

    def restrict_to_kept(self, X: Matrix) -> Matrix:
        """X with rows and columns outside the checked levels zeroed, same shape"""
        if not self.is_truncated:
            return X
        mask = np.zeros(self.space_dim, dtype=bool)
        mask[self.kept_indices()] = True
        out = np.array(X)
        out[~mask, :] = 0
        out[:, ~mask] = 0
        return frozen(out)

    def initial_projections(self) -> List[Matrix]:
        return [adjoint(S) @ S for S in self.ops]

    def final_projections(self) -> List[Matrix]:
        return [S @ adjoint(S) for S in self.ops]

    def range_sum(self) -> Matrix:
        return sum(self.final_projections())

    def defect(self) -> Matrix:
        """I - sum S_e S_e*"""
        return np.eye(self.space_dim) - self.range_sum()


@dataclass
class DaggerReport:
    residuals: Dict[str, float]
    verdict: bool
    projections: List[Matrix]
    edge_map: List[Tuple[int, Optional[int]]]
    failed: List[str] = field(default_factory=list)

    def to_dict(self):
        return {
            "verdict": self.verdict,
            "residuals": dict(self.residuals),
            "failed": list(self.failed),
            "vertex_count": len(self.projections),
            "edges": [[s, r] for s, r in self.edge_map],
        }


def check_dagger(S: OperatorTuple, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> DaggerReport:
    """Residuals of the five relations, compressed to levels <= d-1 when truncated"""
    C = S.compress
    eye = np.eye(S.space_dim)
    initial = S.initial_projections()
    final = S.final_projections()

    r1 = max(op_norm(C(Q @ Q - Q)) for Q in initial)
    r2 = max(0.0, -min_eigenvalue(C(eye - sum(final)), tol))

    # group equal initial projections in edge order
    groups: List[int] = []
    representatives: List[Matrix] = []
    r3 = 0.0
    for i, Qi in enumerate(initial):
        assigned = None
        for k, Qk in enumerate(representatives):
            if op_norm(C(Qi - Qk)) <= tol.eps_rank:
                assigned = k
                break
        if assigned is None:
            representatives.append(Qi)
            assigned = len(representatives) - 1
        groups.append(assigned)
        for j in range(i):
            same = op_norm(C(Qi - initial[j]))
            product = op_norm(C(Qi @ initial[j]))
            r3 = max(r3, min(same, product))

    edge_map: List[Tuple[int, Optional[int]]] = []
    r4 = 0.0
    for i, R in enumerate(final):
        scores = [op_norm(C((eye - Q) @ R)) for Q in representatives]
        best = int(np.argmin(scores))
        r4 = max(r4, scores[best])
        edge_map.append((groups[i], best if scores[best] <= tol.eps_rank else None))

    r5 = op_norm(C(sum(representatives) - eye))

    residuals = dict(zip(RELATIONS, (r1, r2, r3, r4, r5)))
    failed = [name for name, value in residuals.items() if value > tol.eps_rank]
    logger.debug("relation residuals %s", residuals)
    return DaggerReport(residuals, not failed, [frozen(Q) for Q in representatives], edge_map, failed)


def require_dagger(S: OperatorTuple, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> DaggerReport:
    report = check_dagger(S, tol)
    if not report.verdict:
        raise ValidationError(
            f"tuple fails relations: {', '.join(report.failed)}",
            failed=report.failed, residuals=report.residuals,
        )
    return report


def extract_graph(S: OperatorTuple, tol: ToleranceConfig = DEFAULT_TOLERANCE,
                  report: Optional[DaggerReport] = None) -> Tuple[DirectedGraph, List[Tuple[int, int]]]:
    """Directed graph of a tuple: vertices are the distinct initial projections"""
    report = report or require_dagger(S, tol)
    labels = []
    for e, (s, r) in enumerate(report.edge_map):
        if r is None:
            raise AmbiguousSupport(f"final projection of operator {e} is not dominated by a single initial projection", op=e)
        labels.append((s, r))
    graph = DirectedGraph(len(report.projections), tuple(labels))
    graph.check_no_sinks()
    return graph, labels


def wandering_subspace(S: OperatorTuple, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> Matrix:
    """Orthonormal basis of Ran(I - sum S_e S_e*)"""
    return range_basis(S.restrict_to_kept(S.defect()), tol)


def is_fully_coisometric(S: OperatorTuple, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> bool:
    return op_norm(S.compress(S.defect())) <= tol.eps_rank


def is_isometric(S: OperatorTuple, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> bool:
    eye = np.eye(S.space_dim)
    return all(op_norm(S.compress(Q - eye)) <= tol.eps_rank for Q in S.initial_projections())


@dataclass
class WoldDecomposition:
    graph: DirectedGraph
    Q: List[Matrix]
    wandering_basis: Matrix
    pure_basis: Matrix
    coisometric_basis: Matrix
    alpha: Dict[int, int]
    reducing_residual: float = 0.0

    @property
    def pure_dim(self) -> int:
        return self.pure_basis.shape[1]

    @property
    def coisometric_dim(self) -> int:
        return self.coisometric_basis.shape[1]


def saturate(seed: Matrix, ops: Sequence[Matrix], tol: ToleranceConfig = DEFAULT_TOLERANCE) -> Matrix:
    """Smallest subspace containing span(seed) and invariant under every op"""
    dim = seed.shape[0]
    basis = range_basis(seed, tol)
    for _ in range(dim + 1):
        grown = join_bases([basis] + [op @ basis for op in ops], dim, tol)
        if grown.shape[1] == basis.shape[1]:
            return grown
        basis = grown
    return basis


def wold_decompose(S: OperatorTuple, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> WoldDecomposition:
    """Split the space into the pure part generated by the wandering subspace and its complement"""
    report = require_dagger(S, tol)
    graph, _ = extract_graph(S, tol, report)

    W = wandering_subspace(S, tol)
    pure = saturate(W, S.ops, tol)
    coisometric = complement_basis(pure, tol)

    alpha = {k: rank_tol(Q @ W, tol) for k, Q in enumerate(report.projections)}

    P = pure @ adjoint(pure)
    outside = np.eye(S.space_dim) - P
    residual = 0.0
    for op in S.ops:
        residual = max(residual,
                       op_norm(S.compress(outside @ op @ P)),
                       op_norm(S.compress(outside @ adjoint(op) @ P)))
    logger.debug("wold: dim W=%d, pure=%d, coisometric=%d, alpha=%s",
                 W.shape[1], pure.shape[1], coisometric.shape[1], alpha)
    return WoldDecomposition(graph, report.projections, W, pure, coisometric, alpha, residual)


def coisometric_part(S: OperatorTuple, decomposition: WoldDecomposition) -> OperatorTuple:
    """Compression of S to the coisometric subspace, in its basis"""
    C = decomposition.coisometric_basis
    if C.shape[1] == 0:
        raise ValidationError("the coisometric part is zero")
    return OperatorTuple(tuple(adjoint(C) @ op @ C for op in S.ops))


def level_sums(ops: Sequence[Matrix], depths: Sequence[int],
               graph: Optional[DirectedGraph] = None,
               cap: int = DEFAULT_PATH_CAP) -> List[float]:
    """trace of sum_{|w| = d} w w* for each requested d.

    With a graph only composable words are summed; for tuples satisfying the
    relations, or stabilized by a projection family, the other words vanish
    and the plain recursion X -> sum op X op* gives the same numbers.
    """
    if not depths:
        return []
    deepest = max(depths)
    if graph is not None and count_paths_up_to(graph, deepest, stop_above=cap) > cap:
        raise DepthOverflow(f"more than {cap} paths up to depth {deepest}", depth=deepest, cap=cap)

    dim = ops[0].shape[0]
    wanted = set(depths)
    found: Dict[int, float] = {0: float(dim)}
    if graph is None:
        current = np.eye(dim, dtype=np.complex128)
        for d in range(1, deepest + 1):
            current = sum(op @ current @ adjoint(op) for op in ops)
            if d in wanted:
                found[d] = float(np.real(np.trace(current)))
    else:
        per_vertex: Dict[int, Matrix] = {}
        for d in range(1, deepest + 1):
            nxt: Dict[int, Matrix] = {}
            for e, op in enumerate(ops):
                s, r = graph.edges[e]
                inner = np.eye(dim) if d == 1 else per_vertex.get(s)
                if inner is None:
                    continue
                term = op @ inner @ adjoint(op)
                nxt[r] = nxt[r] + term if r in nxt else term
            per_vertex = nxt
            if d in wanted:
                found[d] = float(np.real(sum(np.trace(m) for m in per_vertex.values()))) if per_vertex else 0.0
    return [found[d] for d in depths]


def purity_margin(S: OperatorTuple, depths: Sequence[int],
                  graph: Optional[DirectedGraph] = None,
                  cap: int = DEFAULT_PATH_CAP) -> List[float]:
    return level_sums(S.ops, depths, graph, cap)


def transfer_radius(ops: Sequence[Matrix]) -> float:
    """Spectral radius of X -> sum op X op*.

    The level sums tend to zero exactly when this radius is below one.
    """
    transfer = sum(np.kron(op, op.conj()) for op in ops)
    return float(np.max(np.abs(np.linalg.eigvals(transfer))))


class Purity(str, Enum):
    PURE = "pure"
    NOT_PURE = "not_pure"


@dataclass
class PurityVerdict:
    verdict: Purity
    tails: List[float]
    r_bound: float
    transfer_radius: float

    @property
    def is_pure(self) -> bool:
        return self.verdict is Purity.PURE

    def to_dict(self):
        return {
            "verdict": self.verdict.value,
            "tails": list(self.tails),
            "r_bound": self.r_bound,
            "transfer_radius": self.transfer_radius,
        }


def purity_verdict(ops: Sequence[Matrix], depth: int,
                   tol: ToleranceConfig = DEFAULT_TOLERANCE,
                   graph: Optional[DirectedGraph] = None,
                   cap: int = DEFAULT_PATH_CAP) -> PurityVerdict:
    tails = level_sums(ops, list(range(1, depth + 1)), graph, cap)
    r_bound = op_norm(sum(op @ adjoint(op) for op in ops))
    radius = transfer_radius(ops)
    # r_bound == 1 up to roundoff decides nothing
    pure = r_bound < 1.0 - tol.eps_rank or radius < 1.0 - tol.eps_rank or tails[-1] <= tol.eps_rank
    return PurityVerdict(Purity.PURE if pure else Purity.NOT_PURE, tails, r_bound, radius)
