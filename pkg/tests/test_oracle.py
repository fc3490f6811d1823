from fractions import Fraction

import numpy as np
import pytest

from cmspectra.degrees import new_degree_sequence
from cmspectra.ensembles import (
    matching_to_multigraph,
    sample_cm_simple_mcmc,
    sample_cm_simple_rejection,
)
from cmspectra.errors import DegenerateSupportError, TooLargeError
from cmspectra.oracle import (
    double_factorial_odd,
    enumerate_matchings,
    enumerate_simple_graphs,
    exact_cm_law,
    expected_adjacency_exact,
    pairing_marginal_counts,
    uniformity_check,
)


def test_double_factorial():
    assert [double_factorial_odd(m) for m in (-1, 1, 3, 5, 7)] == [1, 1, 3, 15, 105]


def test_matching_counts():
    assert sum(1 for _ in enumerate_matchings(new_degree_sequence((2, 2, 2)))) == 15
    assert sum(1 for _ in enumerate_matchings(new_degree_sequence((1, 2, 1)))) == 3
    assert sum(1 for _ in enumerate_matchings(new_degree_sequence((1, 1)))) == 1


def test_matchings_are_distinct_valid_involutions():
    seq = new_degree_sequence((2, 2, 2, 2))
    seen = set()
    for m in enumerate_matchings(seq):
        assert m.is_valid()
        seen.add(m.pairing.tobytes())
    assert len(seen) == 105


def test_enumeration_cap():
    with pytest.raises(TooLargeError):
        list(enumerate_matchings(new_degree_sequence([3] * 6)))  # m1 = 18


def test_exact_law_222():
    law = exact_cm_law(new_degree_sequence((2, 2, 2)))
    assert law.total_matchings == 15
    assert law.p_simple == Fraction(8, 15)
    assert law.conditional["lambda1"] == pytest.approx(2.0, abs=1e-12)
    assert not law.no_simple_realization


def test_exact_law_2222():
    law = exact_cm_law(new_degree_sequence((2, 2, 2, 2)))
    assert law.p_simple == Fraction(16, 35)


def test_exact_law_no_simple_realization():
    law = exact_cm_law(new_degree_sequence((2, 2)))
    assert law.p_simple == 0
    assert law.no_simple_realization
    assert law.conditional["lambda1"] is None


def test_expected_adjacency_exact_values():
    ea = expected_adjacency_exact(new_degree_sequence((2, 2, 2)))
    assert ea[0, 1] == Fraction(4, 5)
    assert ea[0, 0] == Fraction(2, 5)
    ea = expected_adjacency_exact(new_degree_sequence((1, 2, 1)))
    assert ea[0, 1] == Fraction(2, 3)
    assert ea[1, 1] == Fraction(2, 3)


def test_pairing_marginals_uniform():
    seq = new_degree_sequence((1, 2, 3))
    counts = pairing_marginal_counts(seq)
    off = ~np.eye(seq.m1, dtype=bool)
    assert np.all(counts[off] == double_factorial_odd(seq.m1 - 3))
    assert np.all(np.diag(counts) == 0)


def test_simple_graph_enumeration():
    assert len(enumerate_simple_graphs(new_degree_sequence((2, 2, 2)))) == 1
    cycles = enumerate_simple_graphs(new_degree_sequence((2, 2, 2, 2)))
    assert len(cycles) == 3
    assert len({g.canonical_key() for g in cycles}) == 3
    assert len(enumerate_simple_graphs(new_degree_sequence((3, 3, 1, 1)))) == 0
    for g in cycles:
        assert np.array_equal(g.degrees(), [2, 2, 2, 2])


def test_simple_enumeration_caps():
    with pytest.raises(TooLargeError):
        enumerate_simple_graphs(new_degree_sequence([1] * 10))
    with pytest.raises(TooLargeError):
        enumerate_simple_graphs(new_degree_sequence((5, 5, 5, 5, 5, 1)))


def test_cross_enumeration_identity():
    # without repeated edges, each simple graph arises from prod(d_i!) matchings
    for degs in [(2, 2, 2), (2, 2, 2, 2), (1, 2, 3), (3, 3, 3, 3)]:
        seq = new_degree_sequence(degs)
        law = exact_cm_law(seq)
        n_simple = len(enumerate_simple_graphs(seq))
        per_graph = 1
        for d in seq.degrees:
            fact = 1
            for k in range(2, int(d) + 1):
                fact *= k
            per_graph *= fact
        assert law.simple_count == n_simple * per_graph


def test_conditional_law_is_uniform_over_realizations():
    # E[a_01 | simple] from enumeration equals the average over the support
    seq = new_degree_sequence((2, 2, 2, 2))
    support = enumerate_simple_graphs(seq)
    present = sum(1 for g in support if [0, 1] in g.edges.tolist())
    from cmspectra.oracle import adjacency_entry

    law = exact_cm_law(seq, [adjacency_entry(0, 1)])
    assert law.conditional["a_01"] == Fraction(present, len(support))
    assert law.conditional["a_01"] == Fraction(2, 3)


def test_uniformity_check_rejection_and_mcmc():
    seq = new_degree_sequence((2, 2, 2, 2))
    rep = uniformity_check(
        lambda s, gen: sample_cm_simple_rejection(s, gen, 10_000)[0],
        seq, samples=1500, rng=5,
    )
    assert rep.support_size == 3
    assert rep.p_value > 0.01
    rep = uniformity_check(
        lambda s, gen: sample_cm_simple_mcmc(s, gen),
        seq, samples=1500, rng=6,
    )
    assert rep.p_value > 0.01


def test_uniformity_check_degenerate_support():
    with pytest.raises(DegenerateSupportError):
        uniformity_check(
            lambda s, gen: sample_cm_simple_rejection(s, gen)[0],
            new_degree_sequence((2, 2, 2)), samples=10, rng=1,
        )


def test_exact_law_json_round_trip():
    import json

    law = exact_cm_law(new_degree_sequence((1, 2, 1)))
    blob = json.dumps(law.to_json_dict())
    back = json.loads(blob)
    assert back["p_simple"]["num"] == 2 and back["p_simple"]["den"] == 3
    assert back["expectations"]["h_quadratic_k1_rank1"]["num"] == -10
