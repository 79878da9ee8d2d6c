import numpy as np
import pytest
from numpy.testing import assert_allclose

from app.errors import (
    AnnihilatedBlock, NonCommutingFamilies, NormalizationFailed, NotAPartition,
    NotRowContraction, NotStabilizing, TooManyBlocks,
)
from app.families import (
    ProjectionFamily, RowContraction, bell_number, check_row_contraction, coarsen,
    commute_check, enumerate_poset, essential_subspace, family_graph, finest_family,
    is_normalized, join, leq, merge_partition, restrict, set_partitions, trivial_family,
    validate_family,
)
from app.graph import deform

from generators import mixed_contraction, stabilized_contraction, unit


def same_family(P1, P2):
    return leq(P1, P2) and leq(P2, P1)


def test_row_contraction_bound():
    with pytest.raises(NotRowContraction):
        check_row_contraction(RowContraction((np.eye(1), np.eye(1))))
    check_row_contraction(RowContraction((np.array([[0.5]]), np.array([[0.5]]))))


def test_validate_example_v(example_v, example_v_family):
    report = validate_family(example_v, example_v_family)
    assert report.valid
    assert report.edges == [(0, 0), (1, 1), (0, 1)]


def test_validate_identity_family(half, identity_family):
    report = validate_family(half, identity_family(1))
    assert report.edges == [(0, 0)]


def test_validate_rejects_non_partition(example_v):
    with pytest.raises(NotAPartition):
        validate_family(example_v, ProjectionFamily((np.diag([1, 0]), np.diag([1, 1]))))
    with pytest.raises(NotAPartition):
        validate_family(example_v, ProjectionFamily((np.diag([1, 0]),)))
    with pytest.raises(NotAPartition):
        validate_family(example_v, ProjectionFamily((np.array([[1, 1], [0, 0]]), np.diag([0, 1]))))


def test_validate_rejects_non_stabilizing(example_v):
    r = 1 / np.sqrt(2)
    rotated = np.array([[r, r], [r, -r]])
    P = rotated @ np.diag([1, 0]) @ rotated.T
    family = ProjectionFamily((P, np.eye(2) - P))
    with pytest.raises(NotStabilizing) as info:
        validate_family(example_v, family)
    assert info.value.op == 0


def test_validate_rejects_annihilated_block():
    # T = e2 e1*: T P = 0 for P onto e2
    T = RowContraction((unit(2, 1, 0),))
    family = ProjectionFamily((np.diag([1, 0]), np.diag([0, 1])))
    with pytest.raises(AnnihilatedBlock) as info:
        validate_family(T, family)
    assert info.value.block == 1


def test_finest_example_v(example_v, example_v_family):
    finest = finest_family(example_v)
    assert len(finest) == 2
    assert_allclose(finest[0], example_v_family[0], atol=1e-12)
    assert_allclose(finest[1], example_v_family[1], atol=1e-12)
    graph, _ = family_graph(example_v, finest)
    assert graph.edges == ((0, 0), (1, 1), (0, 1))


def test_finest_keeps_range_only_component():
    # T = e2 e1*: no operator acts on Ran(T)
    T = RowContraction((unit(2, 1, 0),))
    finest = finest_family(T)
    assert len(finest) == 2
    with pytest.raises(AnnihilatedBlock):
        validate_family(T, finest)
    poset = enumerate_poset(T)
    assert len(poset) == 1
    assert poset.maximal() == [0]
    assert poset.maximum() == poset.minimum() == 0


def test_range_only_block_has_two_maximal_families():
    T = RowContraction((unit(3, 2, 0), unit(3, 1, 1)))
    finest = finest_family(T)
    assert len(finest) == 3
    with pytest.raises(AnnihilatedBlock) as info:
        validate_family(T, finest)
    assert info.value.block == 2

    other = ProjectionFamily((np.diag([1, 0, 0]), np.diag([0, 1, 1])))
    assert validate_family(T, other).edges == [(0, 1), (1, 1)]
    assert leq(other, finest)

    poset = enumerate_poset(T)
    assert len(poset) == 3
    assert poset.partitions == [((0, 1, 2),), ((0,), (1, 2)), ((0, 2), (1,))]
    assert poset.hasse_edges == [(0, 1), (0, 2)]
    assert poset.minimum() == 0
    assert poset.maximal() == [1, 2]
    assert poset.maximum() is None
    assert any(same_family(P, other) for P in poset.families)
    for P, graph in zip(poset.families, poset.graphs):
        assert family_graph(T, P)[0] == graph


def test_finest_with_adjoint_of_connector(example_v):
    c = np.sqrt(2 / 3)
    r = 1 / np.sqrt(2)
    T = RowContraction(tuple(c * op for op in example_v.ops) + (c * r * unit(2, 0, 1),))
    check_row_contraction(T)
    finest = finest_family(T)
    assert len(finest) == 2
    graph, _ = family_graph(T, finest)
    assert graph.edges == ((0, 0), (1, 1), (0, 1), (1, 0))


def test_finest_merges_across_axes(example_v):
    diagonal = np.full((2, 2), 0.5)
    T = RowContraction(tuple(0.5 * op for op in example_v.ops) + (0.5 * diagonal,))
    check_row_contraction(T)
    assert len(finest_family(T)) == 1


def test_finest_needs_normalization():
    T = RowContraction((np.diag([0.5, 0.0]),))
    assert not is_normalized(T)
    with pytest.raises(NormalizationFailed):
        finest_family(T)


def test_restrict_to_essential_subspace():
    T = RowContraction((0.5 * unit(3, 0, 0), 0.25 * unit(3, 2, 2)))
    basis = essential_subspace(T)
    assert basis.shape == (3, 2)
    restricted = restrict(T, basis)
    assert restricted.dim == 2
    assert is_normalized(restricted)
    assert len(finest_family(restricted)) == 2


@pytest.mark.parametrize("seed", range(40))
def test_finest_recovers_designed_blocks(seed):
    rng = np.random.default_rng(seed)
    T, family, _ = stabilized_contraction(rng)
    finest = finest_family(T)
    assert same_family(finest, family)
    validate_family(T, finest)


@pytest.mark.parametrize("seed", range(40))
def test_finest_recovers_mixed_blocks(seed):
    rng = np.random.default_rng(500 + seed)
    T, family, graph, _ = mixed_contraction(rng)
    finest = finest_family(T)
    assert same_family(finest, family)
    assert len(family_graph(T, finest)[0].edges) == graph.edge_count


def test_trivial_family_is_minimum(example_v):
    assert leq(trivial_family(2), finest_family(example_v))
    assert not leq(finest_family(example_v), trivial_family(2))


def test_join_and_commute(example_v_family):
    coarse = trivial_family(2)
    assert commute_check(coarse, example_v_family) == 0.0
    assert same_family(join(coarse, example_v_family), example_v_family)


def test_join_rejects_non_commuting():
    r = 1 / np.sqrt(2)
    P = np.array([[0.5, 0.5], [0.5, 0.5]])
    a = ProjectionFamily((np.diag([1, 0]), np.diag([0, 1])))
    b = ProjectionFamily((P, np.eye(2) - P))
    assert commute_check(a, b) > r / 2
    with pytest.raises(NonCommutingFamilies):
        join(a, b)


def test_merge_partition(example_v_family):
    assert merge_partition(trivial_family(2), example_v_family) == [(0, 1)]
    assert merge_partition(example_v_family, trivial_family(2)) is None


def test_set_partitions_match_bell():
    for k in range(7):
        partitions = list(set_partitions(k))
        assert len(partitions) == bell_number(k)
        assert len({tuple(p) for p in partitions}) == len(partitions)
    assert [bell_number(k) for k in range(6)] == [1, 1, 2, 5, 15, 52]


def test_poset_example_v(example_v):
    poset = enumerate_poset(example_v)
    assert len(poset) == 2
    assert poset.hasse_edges == [(0, 1)]
    assert len(poset.families[poset.minimum()]) == 1
    assert len(poset.families[poset.maximum()]) == 2


def test_poset_block_cap():
    T = RowContraction(tuple(0.4 * unit(3, k, k) for k in range(3)))
    with pytest.raises(TooManyBlocks):
        enumerate_poset(T, max_blocks=2)


def test_coarsen(example_v, example_v_family):
    merged = coarsen(example_v_family, [(0, 1)])
    assert_allclose(merged[0], np.eye(2), atol=1e-14)
    validate_family(example_v, merged)


@pytest.mark.parametrize("seed", range(12))
def test_poset_laws(seed):
    rng = np.random.default_rng(100 + seed)
    if seed % 2:
        T, _, _ = stabilized_contraction(rng, max_blocks=3)
    else:
        T, _, _, _ = mixed_contraction(rng, max_blocks=3)
    poset = enumerate_poset(T)
    k = len(poset.finest)
    assert len(poset) == bell_number(k)
    bottom, top = poset.minimum(), poset.maximum()
    assert len(poset.families[bottom]) == 1
    assert same_family(poset.families[top], poset.finest)
    for i, P1 in enumerate(poset.families):
        validate_family(T, P1)
        assert leq(poset.families[bottom], P1)
        assert leq(P1, poset.finest)
        for P2 in poset.families:
            joined = join(P1, P2)
            assert leq(P1, joined) and leq(P2, joined)
            for upper in poset.families:
                if leq(P1, upper) and leq(P2, upper):
                    assert leq(joined, upper)
            merge = merge_partition(P1, P2)
            if merge is not None:
                g1, _ = family_graph(T, P1)
                g2, _ = family_graph(T, P2)
                assert deform(g2, merge) == g1
        assert family_graph(T, P1)[0] == poset.graphs[i]
