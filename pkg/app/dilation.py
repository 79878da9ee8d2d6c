# dilation.py
"""
Minimal partially isometric dilation of a row contraction relative to a
stabilizing projection family, built on H plus a Fock space over the family
graph cut at a finite depth.

Coordinates: H first (level -1), then one block per path w of length <= d in
path order, of the dimension of the defect block at the initial vertex of w
(level |w|).
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from .config import DEFAULT_TOLERANCE, ToleranceConfig
from .errors import (
    DimensionMismatch, LemmaViolation, SpanMismatch, ValidationError, VerificationFailed,
)
from .families import ProjectionFamily, RowContraction, family_graph
from .graph import DEFAULT_PATH_CAP, DirectedGraph, Path, TypeOneResult, is_type_one, paths_up_to
from .numerics import (
    Matrix, adjoint, block_diag, contains_subspace, frozen, gram_schmidt,
    op_norm, overlap, psd_sqrt, range_basis, rank_tol,
)
from .tuples import (
    AMBIENT_LEVEL, Mode, OperatorTuple, PurityVerdict, WoldDecomposition, check_dagger, purity_verdict,
)

logger = logging.getLogger(__name__)

DEFAULT_DEPTH = 4


@dataclass
class DefectData:
    D: Matrix
    D_e: List[Matrix]
    defect_blocks: Dict[int, Matrix]
    graph: DirectedGraph
    identity_residual: float
    lemma_overlap: float

    def block_dim(self, k: int) -> int:
        return self.defect_blocks[k].shape[1]

    @property
    def total_dim(self) -> int:
        return sum(b.shape[1] for b in self.defect_blocks.values())


def defect(T: RowContraction, P: ProjectionFamily, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> DefectData:
    """Defect operator (I_P - T*T)^(1/2) on H^(n) and its blocks grouped by range vertex"""
    graph, report = family_graph(T, P, tol)
    m, n = T.dim, T.n

    row = np.hstack(T.ops)
    I_P = block_diag([P[s] for s in report.sources])
    D = psd_sqrt(I_P - adjoint(row) @ row, tol)
    D_e = [frozen(D[:, e * m:(e + 1) * m]) for e in range(n)]

    blocks: Dict[int, Matrix] = {}
    for k in range(len(P)):
        columns = [D_e[e] for e in range(n) if report.ranges[e] == k]
        blocks[k] = range_basis(np.hstack(columns), tol) if columns else frozen(np.zeros((n * m, 0)))

    worst = 0.0
    for a in range(len(P)):
        for b in range(a + 1, len(P)):
            worst = max(worst, overlap(blocks[a], blocks[b]))
    if worst > tol.eps_rank:
        raise LemmaViolation(f"defect blocks overlap by {worst:.3e}", overlap=worst)
    spanned = sum(b.shape[1] for b in blocks.values())
    if spanned != rank_tol(D, tol):
        raise LemmaViolation(f"defect blocks span {spanned} dimensions, defect has rank {rank_tol(D, tol)}")

    residual = 0.0
    for e in range(n):
        for f in range(n):
            target = P[report.sources[e]] if e == f else 0.0
            residual = max(residual, op_norm(adjoint(T.ops[e]) @ T.ops[f] + adjoint(D_e[e]) @ D_e[f] - target))
    logger.debug("defect blocks %s, identity residual %.3e",
                 {k: b.shape[1] for k, b in blocks.items()}, residual)
    return DefectData(D, D_e, blocks, graph, residual, worst)


@dataclass
class FockLayout:
    """Coordinate layout of the truncated Fock space over a graph"""
    graph: DirectedGraph
    depth: int
    offset: int
    paths: List[Path]
    starts: List[int]
    dims: List[int]
    lookup: Dict[Tuple[Tuple[int, ...], int], int]

    @classmethod
    def build(cls, graph: DirectedGraph, block_dims: Mapping[int, int], depth: int,
              offset: int = 0, cap: int = DEFAULT_PATH_CAP) -> "FockLayout":
        paths = paths_up_to(graph, depth, cap)
        starts, dims, lookup = [], [], {}
        cursor = offset
        for idx, w in enumerate(paths):
            size = int(block_dims.get(w.source, 0))
            starts.append(cursor)
            dims.append(size)
            lookup[(w.edges, w.source)] = idx
            cursor += size
        return cls(graph, depth, offset, paths, starts, dims, lookup)

    @property
    def size(self) -> int:
        return sum(self.dims)

    def levels(self) -> List[int]:
        out: List[int] = []
        for w, size in zip(self.paths, self.dims):
            out.extend([w.length] * size)
        return out

    def vertex_block(self, v: int) -> slice:
        idx = self.lookup[((), v)]
        return slice(self.starts[idx], self.starts[idx] + self.dims[idx])

    def place_shift(self, S: np.ndarray, e: int):
        """Write L_e: identity from block w to block ew when composable and |w| < depth"""
        for idx, w in enumerate(self.paths):
            if w.length >= self.depth or self.dims[idx] == 0:
                continue
            ew = w.prepend(self.graph, e)
            if ew is None:
                continue
            tgt = self.lookup[(ew.edges, ew.source)]
            a, b, size = self.starts[tgt], self.starts[idx], self.dims[idx]
            S[a:a + size, b:b + size] = np.eye(size)

    def basis_index(self) -> List[Dict]:
        return [
            {"path": list(w.edges), "source": w.source, "j": j, "coord": start + j}
            for w, start, size in zip(self.paths, self.starts, self.dims)
            for j in range(size)
        ]


def canonical_shift(graph: DirectedGraph, block_dims: Mapping[int, int], depth: int,
                    cap: int = DEFAULT_PATH_CAP) -> OperatorTuple:
    """Left creation operators on the Fock space of `graph`, cut at `depth`"""
    if depth < 1:
        raise ValidationError(f"depth must be >= 1, got {depth}")
    if any(d < 0 for d in block_dims.values()) or not any(d > 0 for d in block_dims.values()):
        raise ValidationError("block dimensions must be >= 0 with at least one positive")
    layout = FockLayout.build(graph, block_dims, depth, cap=cap)
    ops = []
    for e in range(graph.edge_count):
        L = np.zeros((layout.size, layout.size), dtype=np.complex128)
        layout.place_shift(L, e)
        ops.append(L)
    return OperatorTuple(tuple(ops), Mode.TRUNCATED, depth, tuple(layout.levels()))


def pure_model(decomposition: WoldDecomposition, depth: int, cap: int = DEFAULT_PATH_CAP) -> OperatorTuple:
    """Canonical shift with multiplicities alpha, the model of the pure part"""
    return canonical_shift(decomposition.graph, decomposition.alpha, depth, cap)


@dataclass
class DilationResult:
    S: OperatorTuple
    embedding: Tuple[int, int]
    depth: int
    graph: DirectedGraph
    family: ProjectionFamily
    defect: DefectData = field(repr=False)
    layout: FockLayout = field(repr=False)
    report: Dict[str, float] = field(default_factory=dict)

    @property
    def ambient_dim(self) -> int:
        return self.embedding[1] - self.embedding[0]

    def basis_index(self) -> List[Dict]:
        return self.layout.basis_index()


def _check_bases(defect_data: DefectData, defect_bases: Mapping[int, Matrix], tol: ToleranceConfig):
    for k, basis in defect_bases.items():
        current = defect_data.defect_blocks[k]
        if basis.shape != current.shape:
            raise DimensionMismatch(f"defect basis for vertex {k} has shape {basis.shape}, expected {current.shape}")
        if not contains_subspace(current @ adjoint(current), basis, tol):
            raise DimensionMismatch(f"defect basis for vertex {k} leaves the defect block")
        if op_norm(adjoint(basis) @ basis - np.eye(basis.shape[1])) > tol.eps_rank:
            raise DimensionMismatch(f"defect basis for vertex {k} is not orthonormal")


def word_images(ops: Sequence[Matrix], graph: DirectedGraph, depth: int, ambient: int,
                cap: int = DEFAULT_PATH_CAP) -> List[Matrix]:
    """H itself, then w(S)H for every path w of length 1..depth, in path order"""
    dim = ops[0].shape[0]
    E_H = np.zeros((dim, ambient), dtype=np.complex128)
    E_H[:ambient, :ambient] = np.eye(ambient)
    images: Dict[Tuple[Tuple[int, ...], int], Matrix] = {}
    out = [E_H]
    for w in paths_up_to(graph, depth, cap):
        if w.length == 0:
            images[(w.edges, w.source)] = E_H
            continue
        tail = images[(w.edges[1:], w.source)]
        image = ops[w.edges[0]] @ tail
        images[(w.edges, w.source)] = image
        out.append(image)
    return out


def dilate(T: RowContraction, P: ProjectionFamily, depth: int = DEFAULT_DEPTH,
           tol: ToleranceConfig = DEFAULT_TOLERANCE,
           defect_bases: Optional[Mapping[int, Matrix]] = None,
           cap: int = DEFAULT_PATH_CAP) -> DilationResult:
    """S_e = (T_e + D_e) on H plus the shift L_e on the Fock part, cut at `depth`.

    `defect_bases` replaces the orthonormal basis of any defect block; the
    result is then unitarily equivalent to the default one.
    """
    if depth < 1:
        raise ValidationError(f"depth must be >= 1, got {depth}")
    data = defect(T, P, tol)
    bases = dict(data.defect_blocks)
    if defect_bases:
        _check_bases(data, defect_bases, tol)
        bases.update({k: frozen(b) for k, b in defect_bases.items()})

    graph = data.graph
    m = T.dim
    layout = FockLayout.build(graph, {k: b.shape[1] for k, b in bases.items()}, depth, offset=m, cap=cap)
    N = m + layout.size

    ops = []
    for e in range(T.n):
        S = np.zeros((N, N), dtype=np.complex128)
        S[:m, :m] = T.ops[e]
        r = graph.target(e)
        S[layout.vertex_block(r), :m] = adjoint(bases[r]) @ data.D_e[e]
        layout.place_shift(S, e)
        ops.append(S)
    levels = [AMBIENT_LEVEL] * m + layout.levels()
    S_tuple = OperatorTuple(tuple(ops), Mode.TRUNCATED, depth, tuple(levels))

    report = _verify(T, P, S_tuple, graph, data, layout, depth, tol, cap)
    logger.debug("dilation on %d coordinates (H = %d, depth %d): %s", N, m, depth, report)
    return DilationResult(S_tuple, (0, m), depth, graph, P, data, layout, report)


def _verify(T: RowContraction, P: ProjectionFamily, S: OperatorTuple, graph: DirectedGraph,
            data: DefectData, layout: FockLayout, depth: int, tol: ToleranceConfig, cap: int) -> Dict[str, float]:
    m = T.dim
    scale = 1.0 + op_norm(np.hstack(T.ops)) ** 2

    compression = max(op_norm(op[:m, :m] - T_op) for op, T_op in zip(S.ops, T.ops))
    co_invariance = max(op_norm(op[:m, m:]) for op in S.ops)
    initial = max(op_norm((adjoint(op) @ op)[:m, :m] - P[graph.source(e)]) for e, op in enumerate(S.ops))

    dagger = check_dagger(S, tol)

    spanned = range_basis(np.hstack(word_images(S.ops, graph, depth, m, cap)), tol)
    kept = S.kept_indices()
    unit = np.eye(S.space_dim, dtype=np.complex128)[:, kept]
    gap = op_norm(spanned @ adjoint(spanned) @ unit - unit)

    report = {
        "identity_residual": data.identity_residual,
        "lemma_overlap": data.lemma_overlap,
        "compression": compression,
        "co_invariance": co_invariance,
        "initial_projection": initial,
        "minimality_gap": gap,
        **{f"dagger_{name}": value for name, value in dagger.residuals.items()},
    }

    checks = [
        ("identity_residual", data.identity_residual, tol.eps_rank * scale),
        ("compression", compression, tol.eps_rank),
        ("co_invariance", co_invariance, tol.eps_rank),
        ("initial_projection", initial, tol.eps_rank * scale),
        ("minimality_gap", gap, tol.eps_rank),
    ]
    for name, value, bound in checks:
        if value > bound:
            raise VerificationFailed(f"dilation check {name} failed ({value:.3e} > {bound:.3e})",
                                     check=name, residual=value)
    if not dagger.verdict:
        raise VerificationFailed(f"dilation fails relations: {', '.join(dagger.failed)}",
                                 check="dagger", failed=dagger.failed)
    return report


@dataclass
class UniquenessReport:
    rank: int
    isometry_defect: float
    intertwining: float
    ambient_residual: float

    def consistent(self, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> bool:
        return max(self.isometry_defect, self.intertwining, self.ambient_residual) <= tol.eps_rank

    def to_dict(self):
        return {
            "rank": self.rank,
            "isometry_defect": self.isometry_defect,
            "intertwining": self.intertwining,
            "ambient_residual": self.ambient_residual,
        }


def verify_uniqueness(T: RowContraction, P: ProjectionFamily, depth: int,
                      res_a: DilationResult, res_b: DilationResult,
                      tol: ToleranceConfig = DEFAULT_TOLERANCE,
                      cap: int = DEFAULT_PATH_CAP) -> UniquenessReport:
    """Build U: w(S_a)h -> w(S_b)h and measure how far it is from a unitary intertwiner"""
    m = T.dim
    if res_a.ambient_dim != m or res_b.ambient_dim != m:
        raise DimensionMismatch("both dilations must embed the same space H")
    if res_a.depth != depth or res_b.depth != depth:
        raise DimensionMismatch(f"both dilations must be cut at depth {depth}")
    graph = res_a.graph

    X_a = np.hstack(word_images(res_a.S.ops, graph, depth, m, cap))
    X_b = np.hstack(word_images(res_b.S.ops, graph, depth, m, cap))
    Q_a, R, kept = gram_schmidt(X_a, tol)
    rank_b = rank_tol(X_b, tol)
    if len(kept) != rank_b:
        raise SpanMismatch(f"spanning sets have ranks {len(kept)} and {rank_b}",
                           rank_a=len(kept), rank_b=rank_b)

    # Q_b R = X_b[:, kept]
    Q_b = scipy.linalg.solve_triangular(R, X_b[:, kept].T, trans="T").T
    U = Q_b @ adjoint(Q_a)
    isometry = op_norm(adjoint(Q_b) @ Q_b - np.eye(Q_b.shape[1]))

    Y_a = range_basis(np.hstack(word_images(res_a.S.ops, graph, depth - 1, m, cap)), tol)
    intertwining = max(op_norm((U @ A - B @ U) @ Y_a) for A, B in zip(res_a.S.ops, res_b.S.ops))

    E_a = np.eye(res_a.S.space_dim)[:, :m]
    E_b = np.eye(res_b.S.space_dim)[:, :m]
    ambient = op_norm(U @ E_a - E_b)
    logger.debug("uniqueness: rank %d, isometry %.3e, intertwining %.3e, ambient %.3e",
                 len(kept), isometry, intertwining, ambient)
    return UniquenessReport(len(kept), isometry, intertwining, ambient)


@dataclass
class PredictionReport:
    purity: PurityVerdict
    fully_coisometric: bool
    coisometry_residual: float
    predicted_alpha: Dict[int, int]
    graph: DirectedGraph
    type_one: TypeOneResult

    @property
    def is_pure(self) -> bool:
        return self.purity.is_pure

    def to_dict(self):
        return {
            "pure": self.purity.is_pure,
            "purity": self.purity.to_dict(),
            "fully_coisometric": self.fully_coisometric,
            "coisometry_residual": self.coisometry_residual,
            "predicted_alpha": {str(k): v for k, v in self.predicted_alpha.items()},
            "graph": {"vertices": self.graph.vertex_count, "edges": [list(e) for e in self.graph.edges]},
            "type_one": self.type_one.to_dict(),
        }


def predict_properties(T: RowContraction, P: ProjectionFamily,
                       tol: ToleranceConfig = DEFAULT_TOLERANCE,
                       depth: int = 16) -> PredictionReport:
    """Purity, coisometry and vertex multiplicities of the dilation, read off T"""
    graph, _ = family_graph(T, P, tol)
    # non-composable words vanish on stabilized tuples
    purity = purity_verdict(T.ops, depth, tol)
    gap = T.defect()
    residual = op_norm(gap)
    alpha = {k: rank_tol(P[k] @ gap, tol) for k in range(len(P))}
    return PredictionReport(purity, residual <= tol.eps_rank, residual, alpha, graph, is_type_one(graph))
