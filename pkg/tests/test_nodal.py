"""
Nodal point tests.

Numeric zeros of eigenfunctions and their pairing with the closed-form
predictions.
"""

import math

import pytest

from retspec.core.nodal import compare_nodes, node_stability, numeric_nodes
from retspec.core.problem import Side
from retspec.exceptions import IndexOutOfRangeError
from retspec.utils.slopes import convergence_slope


@pytest.mark.nodal
def test_symmetric_nodes_match_cosine_zeros(symmetric, symmetric_spectrum):
    """cos(6x) has zeros at (j - 1/2) * pi / 6, three on each side."""
    table = compare_nodes(symmetric, 6, symmetric_spectrum)
    assert table.count_deviation == 0
    assert not table.split_mismatch
    assert table.unmatched_predictions == []
    for row in table.rows:
        assert row.j is not None
        assert row.x_numeric == pytest.approx((row.j - 0.5) * math.pi / 6, abs=1e-9)
        assert row.abs_error <= 1e-9
    assert [row.side for row in table.rows] == [Side.LEFT] * 3 + [Side.RIGHT] * 3


@pytest.mark.nodal
def test_nodes_exclude_endpoints(symmetric):
    nodes = numeric_nodes(symmetric, 4.0)
    assert len(nodes) == 4
    assert all(0.0 < x < math.pi for x in nodes)
    assert all(b > a for a, b in zip(nodes, nodes[1:]))


@pytest.mark.nodal
def test_small_index_rejected(symmetric, symmetric_spectrum):
    with pytest.raises(IndexOutOfRangeError):
        compare_nodes(symmetric, 3, symmetric_spectrum)


@pytest.mark.nodal
def test_node_positions_stable_under_refinement(smooth, smooth_spectrum):
    lam = smooth_spectrum.entry(8).root
    assert node_stability(smooth, lam) <= 1e-9


@pytest.mark.nodal
def test_smooth_instance_node_count(smooth, smooth_spectrum):
    """Mild potential and retardation keep n zeros for the n-th eigenfunction."""
    table = compare_nodes(smooth, 8, smooth_spectrum)
    assert table.count_deviation == 0
    assert table.max_abs_error is not None
    assert table.max_abs_error < 0.5 * math.pi / 8


@pytest.mark.nodal
@pytest.mark.slow
def test_node_count_never_drops(smooth, smooth_spectrum_64):
    counts = [len(numeric_nodes(smooth, smooth_spectrum_64.entry(n).root)) for n in range(4, 41)]
    assert all(b >= a for a, b in zip(counts, counts[1:])), counts


@pytest.mark.nodal
@pytest.mark.slow
@pytest.mark.parametrize("n", [12, 16, 24, 32])
def test_every_prediction_pairs_with_one_node(smooth, smooth_spectrum_64, n):
    table = compare_nodes(smooth, n, smooth_spectrum_64)
    assert table.unmatched_predictions == []
    matched = [row.j for row in table.rows if row.j is not None]
    assert sorted(matched) == list(range(1, n + 1))


@pytest.mark.nodal
@pytest.mark.slow
def test_nodal_error_slope(smooth, smooth_spectrum_64):
    """Fitted slope of the worst node error over n = 8, 16, 32 is at most -2."""
    errors = [(n, compare_nodes(smooth, n, smooth_spectrum_64).max_abs_error) for n in (8, 16, 32)]
    assert convergence_slope(errors) <= -2.0, errors
