import itertools
import json

import numpy as np
import pytest

from cmspectra.degrees import (
    DegreeSequence,
    assumption_diagnostics,
    is_graphical,
    make_family,
    moments,
    new_degree_sequence,
)
from cmspectra.errors import (
    InfeasibleParamsError,
    NonPositiveDegreeError,
    OddSumError,
)
from cmspectra.oracle import enumerate_simple_graphs


def test_valid_sequences():
    seq = new_degree_sequence((3, 3, 3, 3))
    assert seq.m1 == 12
    assert seq.n == 4
    seq = new_degree_sequence((1, 2, 3))
    assert seq.m1 == 6


def test_rejects_bad_input():
    with pytest.raises(OddSumError):
        new_degree_sequence((1, 1, 1))
    with pytest.raises(NonPositiveDegreeError):
        new_degree_sequence((0, 2))
    with pytest.raises(NonPositiveDegreeError):
        new_degree_sequence(())


def test_moment_examples():
    assert moments(new_degree_sequence((1, 2, 3)), 2) == 14
    assert moments(new_degree_sequence((1, 2, 3)), 3) == 36
    assert moments(new_degree_sequence((2, 2, 2)), 4) == 48
    assert moments(new_degree_sequence((1, 2, 3)), 0) == 3  # count, not min


def test_min_max_and_high_moments():
    seq = new_degree_sequence((1, 2, 3, 4))
    assert seq.m0 == 1 and seq.m_inf == 4
    assert seq.moment(7) == sum(d ** 7 for d in (1, 2, 3, 4))


def test_moments_exact_beyond_int64():
    # n * m_inf^5 overflows int64; python-int fallback must stay exact
    seq = new_degree_sequence([1000] * 10_000)
    assert seq.m5 == 10_000 * 1000 ** 5


def test_moment_inequalities_on_random_sequences():
    rng = np.random.default_rng(7)
    for _ in range(50):
        n = int(rng.integers(2, 40))
        degs = rng.integers(1, 12, size=n)
        if degs.sum() % 2:
            degs[0] += 1
        seq = new_degree_sequence(degs)
        assert seq.m0 <= seq.m1 / seq.n <= seq.m_inf
        for k in range(4):
            assert seq.moment(k) * seq.moment(k + 2) >= seq.moment(k + 1) ** 2


def test_assumption_diagnostics_examples():
    rep = assumption_diagnostics(make_family("regular", 100, {"d": 3}))
    assert rep.ratio_inhomogeneity == 1.0
    assert rep.sparsity_index == pytest.approx(0.3)
    assert rep.ok

    rep = assumption_diagnostics(make_family("band", 4000, {"lo": 25, "hi": 50}, seed=3))
    assert rep.ratio_inhomogeneity == pytest.approx(2.0)
    assert rep.sparsity_index == pytest.approx(50 / np.sqrt(4000), rel=0.05)
    assert rep.flags["connectivity_sparsity"] == "pass"
    assert rep.notes  # near-boundary margin note

    rep = assumption_diagnostics(make_family("regular", 400, {"d": 80}))
    assert rep.sparsity_index == pytest.approx(4.0)
    assert rep.flags["connectivity_sparsity"] == "warn"
    assert not rep.ok


def test_is_graphical_examples():
    assert is_graphical(new_degree_sequence((2, 2, 2)))
    assert is_graphical(new_degree_sequence((3, 3, 3, 3)))
    assert not is_graphical(new_degree_sequence((3, 3, 1, 1)))
    assert not is_graphical(new_degree_sequence((2, 2)))


def test_is_graphical_matches_enumeration():
    # every valid sequence with n <= 6, degrees <= 4
    for n in range(2, 7):
        for degs in itertools.combinations_with_replacement(range(1, 5), n):
            if sum(degs) % 2:
                continue
            seq = new_degree_sequence(degs)
            realizable = len(enumerate_simple_graphs(seq)) > 0
            assert is_graphical(seq) == realizable, degs


def test_make_family_examples():
    assert list(make_family("regular", 6, {"d": 3}).degrees) == [3] * 6
    assert list(make_family("two_block", 4, {"d1": 4, "d2": 6}).degrees) == [4, 4, 6, 6]
    assert list(make_family("band", 5, {"lo": 2, "hi": 2}).degrees) == [2] * 5


def test_make_family_parity_repair():
    seq = make_family("regular", 5, {"d": 3})
    assert seq.m1 % 2 == 0
    assert list(seq.degrees) == [3, 3, 3, 3, 4]


def test_make_family_deterministic():
    a = make_family("band", 500, {"lo": 5, "hi": 15}, seed=42)
    b = make_family("band", 500, {"lo": 5, "hi": 15}, seed=42)
    c = make_family("band", 500, {"lo": 5, "hi": 15}, seed=43)
    assert a == b
    assert a != c


def test_make_family_infeasible():
    with pytest.raises(InfeasibleParamsError):
        make_family("regular", 1, {"d": 1})
    with pytest.raises(InfeasibleParamsError):
        make_family("band", 10, {"lo": 5, "hi": 3})
    with pytest.raises(InfeasibleParamsError):
        make_family("regular", 4, {"d": 0})
    with pytest.raises(InfeasibleParamsError):
        make_family("lattice", 4, {})


def test_serialization_round_trip():
    seq = make_family("band", 50, {"lo": 2, "hi": 9}, seed=5)
    assert DegreeSequence.from_lines(seq.to_lines()) == seq
    assert DegreeSequence.from_json(seq.to_json()) == seq
    assert json.loads(seq.to_json()) == [int(d) for d in seq.degrees]
