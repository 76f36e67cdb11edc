"""Generators, validation, flat assembly, growth accounting, and disk format."""

import numpy as np
import pytest

from skelgraph.graphs import Graph, path_graph
from skelgraph.lineage import (
    GradedGraph,
    assemble_flat,
    codec_of,
    complete_lineage,
    grid2d_lineage,
    growth_profile,
    levelwise_oplus,
    levelwise_product,
    path_lineage,
    read_lineage,
    truncate,
    unit_lineage,
    validate,
    write_lineage,
)
from skelgraph.sparse import SparseMatrix, block_assemble


def test_unit_lineage_shape():
    gg = unit_lineage(3)
    assert gg.level_sizes() == [1, 1, 1, 1]
    assert all(s == SparseMatrix(1, 1, [0], [0], [1.0]) for s in gg.inter)
    assert validate(gg).ok


def test_path_lineage_examples():
    assert path_lineage(0).level_sizes() == [1]
    gg = path_lineage(3)
    assert gg.level_sizes() == [1, 2, 4, 8]
    # one self-loop at the root
    assert gg.levels[0].adj == SparseMatrix(1, 1, [0], [0], [1.0])
    for l, s in enumerate(gg.inter):
        dense = s.to_dense()
        for p in range(2 ** l):
            assert dense[2 * p, p] == 1.0 and dense[2 * p + 1, p] == 1.0
        assert dense.sum() == 2 ** (l + 1)
    for p in gg.prolong:
        gram = (p.T @ p).to_dense()
        assert np.max(np.abs(gram - np.eye(p.ncols))) <= 1e-15


def test_complete_lineage_examples():
    gg = complete_lineage(3)
    assert gg.level_sizes() == [1, 2, 4, 8]
    assert gg.levels[2].edge_count() == 6
    for p in gg.prolong:
        gram = (p.T @ p).to_dense()
        assert np.max(np.abs(gram - np.eye(p.ncols))) <= 1e-15


def test_grid2d_lineage_examples():
    gg = grid2d_lineage(2)
    assert gg.level_sizes() == [1, 4, 16]
    assert gg.levels[2].edge_count() == 24  # 2 * 4 * 3 per direction
    assert gg.levels[0].adj == SparseMatrix(1, 1, [0], [0], [1.0])
    for p in gg.prolong:
        gram = (p.T @ p).to_dense()
        assert np.max(np.abs(gram - np.eye(p.ncols))) <= 1e-14
    assert validate(gg).ok


def test_root_flag_drops_self_loop():
    gg = path_lineage(1, root_self_loop=False)
    assert gg.levels[0].adj.nnz == 0


def test_validate_reports_orthonormality_deviation():
    gg = path_lineage(1)
    # both pattern entries set to sqrt(2) give a column of norm 2, Gram entry 4
    bad = GradedGraph(gg.levels, gg.inter, (gg.inter[0].scale(2.0 ** 0.5),))
    diag = validate(bad)
    assert any("not orthonormal" in msg and "3.000e+00" in msg for msg in diag.issues)


def test_validate_reports_bad_dimensions():
    gg = path_lineage(2)
    wrong = (gg.inter[0], SparseMatrix(3, 3))
    diag = validate(GradedGraph(gg.levels, wrong))
    assert any("inter map 1->2" in msg for msg in diag.issues)


def test_validate_reports_pattern_escape():
    gg = path_lineage(1)
    p = SparseMatrix.from_entries(2, 1, [(0, 0, 1.0)])
    loose = GradedGraph(gg.levels, (SparseMatrix.from_entries(2, 1, [(1, 0, 1.0)]),), (p,))
    assert any("outside the sparsity pattern" in m for m in validate(loose).issues)


def test_assemble_flat_single_level_is_identity_case():
    gg = GradedGraph([path_graph(3)], [])
    assert assemble_flat(gg).adj == path_graph(3).adj


def test_assemble_flat_unit_lineage_is_path_with_loops():
    flat = assemble_flat(unit_lineage(2))
    expected = SparseMatrix.from_entries(
        3, 3,
        [(0, 0, 1.0), (1, 1, 1.0), (2, 2, 1.0),
         (0, 1, 1.0), (1, 0, 1.0), (1, 2, 1.0), (2, 1, 1.0)],
    )
    assert flat.adj == expected


def test_assemble_flat_matches_block_assembly_oracle():
    gg = path_lineage(2)
    sizes = gg.level_sizes()
    blocks = {
        (0, 0): gg.levels[0].adj,
        (1, 1): gg.levels[1].adj,
        (2, 2): gg.levels[2].adj,
        (1, 0): gg.inter[0],
        (0, 1): gg.inter[0].T,
        (2, 1): gg.inter[1],
        (1, 2): gg.inter[1].T,
    }
    assert assemble_flat(gg).adj == block_assemble(blocks, sizes, sizes)
    assert assemble_flat(gg).n == 7


def test_codec_round_trip():
    codec = codec_of(path_lineage(3))
    assert codec.total == 15
    for v in range(codec.total):
        level, j = codec.unflat(v)
        assert codec.flat(level, j) == v


def test_truncate():
    gg = truncate(path_lineage(4), 2)
    assert gg.level_sizes() == [1, 2, 4]
    assert len(gg.inter) == 2 and len(gg.prolong) == 2


def test_growth_profile_path():
    prof = growth_profile(path_lineage(6), bound=(2.0, 0.01, 1.0))
    assert prof.base == pytest.approx(2.0)
    assert prof.ok


def test_growth_profile_flags_naive_product():
    p = path_lineage(4)
    naive = levelwise_product(p, p, "box")
    prof = growth_profile(naive, bound=(2.0, 0.01, 2.0))
    assert 4 in prof.violations  # 256 vertices versus 2 * 2**(4**1.01)


def test_levelwise_oplus_shapes():
    a = path_lineage(2)
    b = complete_lineage(2)
    s = levelwise_oplus(a, b)
    assert s.level_sizes() == [2, 4, 8]
    assert validate(s).ok


def test_generators_validate_clean():
    for gg in (path_lineage(3), complete_lineage(3), grid2d_lineage(2), unit_lineage(4)):
        diag = validate(gg)
        assert diag.ok, diag.report()


def test_lineage_round_trip(tmp_path):
    gg = grid2d_lineage(2)
    write_lineage(tmp_path / "g", gg)
    back = read_lineage(tmp_path / "g")
    assert back == gg
    # rewriting produces identical bytes
    write_lineage(tmp_path / "h", back)
    for f in sorted((tmp_path / "g").iterdir()):
        assert f.read_bytes() == (tmp_path / "h" / f.name).read_bytes()
