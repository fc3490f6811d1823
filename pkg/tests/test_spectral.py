import math

import numpy as np
import pytest

from cmspectra.degrees import make_family, new_degree_sequence
from cmspectra.ensembles import (
    RngStream,
    SimpleGraph,
    rank_one_direction,
    sample_cm_simple,
)
from cmspectra.errors import (
    DegreeMismatchError,
    DimensionMismatchError,
    DimensionTooLargeError,
)
from cmspectra.spectral import (
    SymmetricOperator,
    adjacency_operator,
    centered_operator,
    dense_spectrum,
    esd_histogram,
    expected_adjacency_operator,
    extreme_eigenvalues,
    operator_norm,
    quadratic_form,
)

TRIANGLE = SimpleGraph(3, [(0, 1), (0, 2), (1, 2)])
PATH3 = SimpleGraph(3, [(0, 1), (1, 2)])
K4 = SimpleGraph(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)])
C4 = SimpleGraph(4, [(0, 1), (1, 2), (2, 3), (0, 3)])
STAR = SimpleGraph(4, [(0, 1), (0, 2), (0, 3)])
EMPTY5 = SimpleGraph(5, np.empty((0, 2)))


def test_known_extreme_spectra():
    s = extreme_eigenvalues(adjacency_operator(TRIANGLE))
    assert (s.lambda1, s.lambda2, s.lambda_n) == pytest.approx((2, -1, -1), abs=1e-9)
    s = extreme_eigenvalues(adjacency_operator(PATH3))
    assert (s.lambda1, s.lambda2, s.lambda_n) == pytest.approx(
        (math.sqrt(2), 0, -math.sqrt(2)), abs=1e-9
    )
    s = extreme_eigenvalues(adjacency_operator(STAR))
    assert s.lambda1 == pytest.approx(math.sqrt(3), abs=1e-9)


def test_residual_contract():
    s = extreme_eigenvalues(adjacency_operator(K4), tol=1e-9)
    assert s.lambda1 >= s.lambda2 >= s.lambda_n - 1e-12
    for r in s.residuals.values():
        assert r <= 1e-8


def test_dense_spectrum_examples():
    assert dense_spectrum(K4) == pytest.approx([-1, -1, -1, 3], abs=1e-12)
    assert dense_spectrum(C4) == pytest.approx([-2, 0, 0, 2], abs=1e-12)
    assert dense_spectrum(EMPTY5) == pytest.approx([0] * 5, abs=1e-15)


def test_dense_spectrum_caps_dimension():
    with pytest.raises(DimensionTooLargeError):
        dense_spectrum(SimpleGraph(4001, [(0, 1)]))


def test_centered_operator_triangle():
    seq = new_degree_sequence((2, 2, 2))
    h = centered_operator(TRIANGLE, seq, "full")
    want = np.full((3, 3), 0.2) - np.diag([0.6, 0.6, 0.6])
    assert np.max(np.abs(h.dense() - want)) <= 1e-12
    assert operator_norm(h) == pytest.approx(0.6, abs=1e-9)
    assert dense_spectrum(h.dense()) == pytest.approx([-0.6, -0.6, 0.0], abs=1e-12)


def test_centered_operator_k4():
    seq = new_degree_sequence((3, 3, 3, 3))
    h = centered_operator(K4, seq, "full")
    assert operator_norm(h) == pytest.approx(8 / 11, abs=1e-9)
    h1 = centered_operator(K4, seq, "rank1")
    assert operator_norm(h1) == pytest.approx(1.0, abs=1e-9)


def test_centered_operator_degree_mismatch():
    with pytest.raises(DegreeMismatchError):
        centered_operator(PATH3, new_degree_sequence((2, 2, 2)), "full")


def test_matrix_free_equals_assembled():
    seq = make_family("band", 40, {"lo": 1, "hi": 6}, seed=9)
    g = sample_cm_simple(seq, 3).graph
    for mode in ("full", "rank1"):
        h = centered_operator(g, seq, mode)
        a = g.adjacency().toarray()
        e = rank_one_direction(seq)
        dense = a - np.outer(e, e)
        if mode == "full":
            dense = dense + np.diag(seq.degrees / (seq.m1 - 1))
        rng = np.random.default_rng(4)
        for _ in range(5):
            x = rng.standard_normal(seq.n)
            assert np.max(np.abs(h(x) - dense @ x)) <= 1e-10 * max(1, np.max(np.abs(dense @ x)))


def test_symmetry_probe():
    seq = make_family("band", 60, {"lo": 2, "hi": 7}, seed=11)
    g = sample_cm_simple(seq, 5).graph
    assert adjacency_operator(g).symmetry_defect() <= 1e-10
    assert centered_operator(g, seq, "full").symmetry_defect() <= 1e-10
    assert expected_adjacency_operator(seq).symmetry_defect() <= 1e-10


def test_operator_norm_zero():
    zero = SymmetricOperator(6, lambda x: np.zeros_like(x))
    assert operator_norm(zero) == 0.0


def test_quadratic_form_examples():
    seq = new_degree_sequence((2, 2, 2))
    e = rank_one_direction(seq)
    h = centered_operator(TRIANGLE, seq, "rank1")
    assert quadratic_form(h, e, 1) == pytest.approx(-24 / 25, abs=1e-12)

    seqp = new_degree_sequence((1, 2, 1))
    ep = rank_one_direction(seqp)
    hp = centered_operator(PATH3, seqp, "rank1")
    assert quadratic_form(hp, ep, 1) == pytest.approx(-4 / 3, abs=1e-12)

    assert quadratic_form(h, np.zeros(3), 2) == 0.0
    with pytest.raises(DimensionMismatchError):
        quadratic_form(h, np.zeros(5), 1)
    with pytest.raises(ValueError):
        quadratic_form(h, e, 3)


def test_lanczos_agrees_with_dense_on_random_graphs():
    rng = np.random.default_rng(33)
    for trial in range(100):
        n = int(rng.integers(5, 501))
        degs = rng.integers(1, min(8, n - 1) + 1, size=n)
        if degs.sum() % 2:
            degs[0] += 1
        seq = new_degree_sequence(degs)
        from cmspectra.degrees import is_graphical

        if not is_graphical(seq):
            continue
        g = sample_cm_simple(seq, RngStream(1000 + trial)).graph
        s = extreme_eigenvalues(adjacency_operator(g))
        eigs = dense_spectrum(g)
        assert s.lambda1 == pytest.approx(eigs[-1], abs=1e-8)
        assert s.lambda_n == pytest.approx(eigs[0], abs=1e-8)
        assert s.lambda2 == pytest.approx(eigs[-2], abs=1e-8)


def test_lambda2_with_degenerate_lambda1():
    # disconnected union of two 4-regular components: lambda1 = lambda2 = 4
    comp = sample_cm_simple(make_family("regular", 30, {"d": 4}), RngStream(5)).graph
    edges = np.vstack([comp.edges, comp.edges + 30])
    g = SimpleGraph(60, edges)
    s = extreme_eigenvalues(adjacency_operator(g))
    assert s.lambda1 == pytest.approx(4.0, abs=1e-8)
    assert s.lambda2 == pytest.approx(4.0, abs=1e-8)


def test_residuals_meet_contract_at_scale():
    seq = make_family("band", 800, {"lo": 10, "hi": 20}, seed=40)
    g = sample_cm_simple(seq, RngStream(41)).graph
    s = extreme_eigenvalues(adjacency_operator(g), tol=1e-9)
    for name, lam in [("lambda1", s.lambda1), ("lambda2", s.lambda2),
                      ("lambda_n", s.lambda_n)]:
        assert s.residuals[name] <= 1e-9 * max(1.0, abs(lam))


def test_regular_lambda1_equals_degree():
    seq = make_family("regular", 200, {"d": 6})
    for i in range(5):
        g = sample_cm_simple(seq, RngStream(2, i)).graph
        s = extreme_eigenvalues(adjacency_operator(g), compute_lambda2=False)
        assert abs(s.lambda1 - 6) <= 1e-8


def test_weyl_consistency():
    # |lambda1(A) - lambda1(E[A])| <= ||A - E[A]||
    seq = make_family("band", 150, {"lo": 3, "hi": 8}, seed=21)
    for i in range(5):
        g = sample_cm_simple(seq, RngStream(3, i)).graph
        lam_a = extreme_eigenvalues(adjacency_operator(g), compute_lambda2=False).lambda1
        lam_e = extreme_eigenvalues(expected_adjacency_operator(seq),
                                    compute_lambda2=False).lambda1
        h_norm = operator_norm(centered_operator(g, seq, "full"))
        assert abs(lam_a - lam_e) <= h_norm + 1e-8


def test_esd_histogram_triangle_masses():
    seq = new_degree_sequence((2, 2, 2))
    hist = esd_histogram(TRIANGLE, seq, bins=3, rescale=False,
                         value_range=(-1.5, 2.5))
    assert hist.counts.tolist() == [2, 0, 1]
    masses = hist.density * hist.widths
    assert masses == pytest.approx([2 / 3, 0, 1 / 3], abs=1e-12)


def test_esd_histogram_counts_and_area():
    seq = make_family("band", 100, {"lo": 2, "hi": 6}, seed=14)
    g = sample_cm_simple(seq, 6).graph
    hist = esd_histogram(g, seq, bins=13)
    assert hist.counts.sum() == seq.n
    assert hist.area() == pytest.approx(1.0, abs=1e-9)
    assert hist.outside_mass == 0.0


def test_esd_histogram_rescale_and_first_moment():
    # trace of a simple-graph adjacency is 0, so the rescaled mean is ~0
    seq = make_family("regular", 300, {"d": 8})
    g = sample_cm_simple(seq, 8).graph
    hist = esd_histogram(g, seq, bins=40, rescale=True)
    assert hist.omega == pytest.approx(8.0)
    eigs = dense_spectrum(g) / np.sqrt(8.0)
    assert np.mean(eigs) == pytest.approx(0.0, abs=1e-12)


def test_esd_histogram_empty_graph():
    seq_dummy = new_degree_sequence((1, 1, 1, 1, 2))  # only omega is used
    hist = esd_histogram(EMPTY5, seq_dummy, bins=1)
    assert hist.counts.tolist() == [5]
    assert hist.area() == pytest.approx(1.0)


def test_esd_csv():
    seq = new_degree_sequence((2, 2, 2))
    hist = esd_histogram(TRIANGLE, seq, bins=3)
    text = hist.to_csv()
    assert text.splitlines()[0] == "bin_left,bin_right,density"
    assert len(text.strip().splitlines()) == 4
