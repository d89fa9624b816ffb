import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hecke_density.dirichlet import (
    ALL,
    NONPOSITIVE,
    POSITIVE,
    GridCouplingError,
    SGrid,
    above,
    custom,
    default_grid,
    effective_size,
    grid_for,
    moment_profile,
    ratio_profile,
    subset_power_sum,
    theorem_check,
    upper_density_estimate,
)
from hecke_density.sources import EigenvalueSequence, sample_sato_tate, sieve_primes, tau_sequence


def seq_of(pairs, source="csv"):
    return EigenvalueSequence([p for p, _ in pairs], [a for _, a in pairs], source)


def all_primes(limit, value=1.0):
    p = sieve_primes(limit).primes
    return EigenvalueSequence(p, np.full(len(p), value), "csv")


@st.composite
def sequences(draw):
    primes = sieve_primes(3000).primes.tolist()
    n = draw(st.integers(1, 60))
    chosen = sorted(draw(st.lists(st.sampled_from(primes), min_size=n, max_size=n, unique=True)))
    vals = draw(st.lists(st.floats(-2, 2), min_size=n, max_size=n))
    return seq_of(list(zip(chosen, vals)))


s_values = st.floats(1.01, 3.0)


# -- subset_power_sum ---------------------------------------------------------


def test_two_prime_example():
    seq = seq_of([(2, 1.0), (3, 1.0)])
    assert subset_power_sum(seq, ALL, 2, s=2.0) == pytest.approx(0.361111, abs=1e-6)
    assert subset_power_sum(seq, ALL, 2, s=2.0) == 1 / 4 + 1 / 9


def test_empty_positive_subset():
    seq = seq_of([(2, -1.0), (3, 0.0), (5, -0.3)])
    assert subset_power_sum(seq, POSITIVE, 4, s=1.5) == 0.0


def test_tau_signed_cubic_against_loop():
    seq = tau_sequence(10**4)
    total = 0.0
    comp = 0.0
    for p, a in seq.entries():  # Kahan loop, independent of fsum
        y = a**3 / p**1.1 - comp
        t = total + y
        comp = (t - total) - y
        total = t
    got = subset_power_sum(seq, ALL, 3, signed=True, s=1.1)
    assert got == pytest.approx(total, rel=1e-12)


def test_k_zero_counts_weights_only():
    seq = seq_of([(2, 0.0), (3, -5.0)])
    assert subset_power_sum(seq, ALL, 0, s=2.0) == 1 / 4 + 1 / 9


def test_preconditions():
    seq = seq_of([(2, 1.0)])
    with pytest.raises(ValueError):
        subset_power_sum(seq, ALL, 9, s=2.0)
    with pytest.raises(ValueError):
        subset_power_sum(seq, ALL, 2, s=1.0)


def test_custom_set():
    seq = seq_of([(2, 1.0), (3, 1.0), (5, 1.0)])
    odd = custom(lambda p, a: p % 2 == 1)
    assert subset_power_sum(seq, odd, 1, s=1.0 + 1.0) == 1 / 9 + 1 / 25


@pytest.mark.parametrize("workers", [2, 3, 8])
def test_parallel_matches_sequential(sato_tate_1e6, workers):
    for k, signed in [(0, False), (3, True), (8, False)]:
        seq_val = subset_power_sum(sato_tate_1e6, ALL, k, signed, 1.2)
        par_val = subset_power_sum(sato_tate_1e6, ALL, k, signed, 1.2, workers=workers)
        assert par_val == seq_val


@given(sequences(), st.integers(0, 8), s_values)
def test_additivity(seq, k, s):
    a = subset_power_sum(seq, POSITIVE, k, s=s)
    b = subset_power_sum(seq, NONPOSITIVE, k, s=s)
    total = subset_power_sum(seq, ALL, k, s=s)
    assert math.isclose(a + b, total, rel_tol=1e-12, abs_tol=1e-300)


@given(sequences(), st.integers(0, 8), s_values, st.floats(0.001, 1.0))
def test_strictly_decreasing_in_s(seq, k, s, ds):
    if k > 0 and not np.any(np.abs(seq.values) > 1e-3):
        return
    assert subset_power_sum(seq, ALL, k, s=s + ds) < subset_power_sum(seq, ALL, k, s=s)


@given(sequences(), s_values)
def test_cubic_splitting_identity(seq, s):
    lhs = subset_power_sum(seq, POSITIVE, 3, s=s) - subset_power_sum(seq, ALL, 3, True, s)
    rhs = subset_power_sum(seq, NONPOSITIVE, 3, s=s)
    assert math.isclose(lhs, rhs, rel_tol=1e-10, abs_tol=1e-12 * max(1.0, abs(rhs)))


@settings(max_examples=200)
@given(sequences(), s_values, st.sampled_from([ALL, POSITIVE, NONPOSITIVE, above(0.5)]))
def test_cauchy_schwarz_and_holder(seq, s, tset):
    s0 = subset_power_sum(seq, tset, 0, s=s)
    s3 = subset_power_sum(seq, tset, 3, s=s)
    s4 = subset_power_sum(seq, tset, 4, s=s)
    s8 = subset_power_sum(seq, tset, 8, s=s)
    slack = 1 + 1e-12
    assert s4 * s4 <= s8 * s0 * slack + 1e-300
    assert s3 <= s4**0.75 * s0**0.25 * slack + 1e-300
    # |a|^4 = (|a|^8)^{1/5} (|a|^3)^{4/5}
    assert s4 <= s8**0.2 * s3**0.8 * slack + 1e-300


# -- grids -------------------------------------------------------------------------


def test_default_grid_drops_s2_and_applies_coupling():
    grid = default_grid(10**6)
    assert grid.points == (1 + 10**-0.5,)
    big = default_grid(10**8, coupling=1.5)
    assert big.points == (1 + 10**-0.5, 1.1)


def test_grid_rejections():
    with pytest.raises(GridCouplingError):
        SGrid((1.2, 1.3), 10**6, 0.0)  # not descending
    with pytest.raises(GridCouplingError):
        SGrid((2.5,), 10**6, 0.0)
    with pytest.raises(GridCouplingError):
        SGrid((1.2,), 10**6, 3.0)  # 0.2 ln 1e6 = 2.76 < 3
    with pytest.raises(GridCouplingError):
        default_grid(100)


def test_grid_checked_against_data():
    small = all_primes(1000)
    grid = SGrid((1.2,), 10**8, 3.0)
    with pytest.raises(GridCouplingError):
        ratio_profile(small, ALL, 0, False, grid)


# -- ratio profiles and moments ---------------------------------------------------


def test_all_primes_ratio_near_one():
    seq = all_primes(10**6)
    grid = grid_for(seq, [1.2], coupling=2.5)
    ((s, r),) = ratio_profile(seq, ALL, 0, False, grid)
    assert s == 1.2
    assert abs(r - 1) <= 0.25


def test_sato_tate_quartic_ratio(sato_tate_1e6):
    grid = grid_for(sato_tate_1e6)
    ((_, r4),) = ratio_profile(sato_tate_1e6, ALL, 4, False, grid)
    ((_, r0),) = ratio_profile(sato_tate_1e6, ALL, 0, False, grid)
    assert r4 / r0 == pytest.approx(2, rel=0.05)


def test_sato_tate_signed_cubic_ratio(sato_tate_1e6):
    grid = grid_for(sato_tate_1e6)
    ((_, r3),) = ratio_profile(sato_tate_1e6, ALL, 3, True, grid)
    ((_, r0),) = ratio_profile(sato_tate_1e6, ALL, 0, False, grid)
    assert abs(r3 / r0) <= 0.02


def test_zero_sequence_moments():
    seq = all_primes(10**5, 0.0)
    prof = moment_profile(seq, grid_for(seq, [1.3]))
    assert [r.ratio for r in prof.rows] == [0.0] * 5
    assert [r.k for r in prof.rows] == [2, 3, 4, 6, 8]


def test_moment_targets():
    seq = all_primes(10**5, 1.0)
    rows = moment_profile(seq, grid_for(seq, [1.3])).closest_to_one()
    assert rows[2].ok and rows[2].target == "equal"
    assert not rows[4].ok  # a == 1 gives 1, not 2
    assert rows[6].ok and rows[6].target == "upper"
    assert not rows[3].ok


@pytest.mark.parametrize("k, expected", [(2, 1.0), (3, 0.0), (4, 2.0)])
def test_weighted_ratio_unbiased_across_seeds(k, expected):
    # The self-normalized ratio is a p^{-s}-weighted mean, so across seeds it
    # averages to the semicircle moment even though one draw is noisy.
    seeds = 300
    s = 1.2
    vals = []
    for seed in range(seeds):
        seq = sample_sato_tate(2000, 1000 + seed)
        vals.append(
            subset_power_sum(seq, ALL, k, True, s) / subset_power_sum(seq, ALL, 0, False, s)
        )
    vals = np.array(vals)
    se = vals.std(ddof=1) / math.sqrt(seeds)
    assert abs(vals.mean() - expected) < 4 * se


def test_effective_size_small_at_s_near_one(sato_tate_1e6):
    n_eff = effective_size(sato_tate_1e6, 1.2)
    assert 5 < n_eff < 10
    equal = seq_of([(2, 0.0)])
    assert effective_size(equal, 1.5) == 1.0


# -- densities ------------------------------------------------------------------------


def test_density_all_near_one(tau30k):
    est = upper_density_estimate(tau30k, ALL, grid_for(tau30k))
    assert abs(est.value - 1) <= 0.25
    assert est.value == max(pt.ratio for pt in est.per_point)


def test_density_empty_is_zero(tau30k):
    est = upper_density_estimate(tau30k, above(5.0), grid_for(tau30k))
    assert est.value == 0.0
    assert est.subset_size == 0


def test_density_sato_tate_tail(sato_tate_1e6):
    est = upper_density_estimate(sato_tate_1e6, above(0.7784), grid_for(sato_tate_1e6))
    assert est.value == pytest.approx(0.2586, abs=0.03)


def test_density_antitone_in_threshold(sato_tate_1e6):
    grid = grid_for(sato_tate_1e6)
    cs = np.linspace(-2.1, 2.1, 43)
    vals = [upper_density_estimate(sato_tate_1e6, above(c), grid).value for c in cs]
    assert all(x >= y for x, y in zip(vals, vals[1:]))


def test_monotone_diagnostics():
    seq = all_primes(10**7)
    est = upper_density_estimate(seq, ALL, grid_for(seq, [1.5, 1.316227766016838]))
    assert len(est.per_point) == 2
    assert est.per_point[0].increased is False
    assert est.monotone == est.per_point[1].increased


def test_theorem_examples(tau30k, sato_tate_1e6):
    assert theorem_check(tau30k, 0.7784, 0.01, grid_for(tau30k)).passed
    assert not theorem_check(sato_tate_1e6, 1.99, 0.5, grid_for(sato_tate_1e6)).passed
    assert theorem_check(tau30k, -3.0, 0.5, grid_for(tau30k)).passed


def test_theorem_delta_range(tau30k):
    with pytest.raises(ValueError):
        theorem_check(tau30k, 0.7, 0.0, grid_for(tau30k))
    with pytest.raises(ValueError):
        theorem_check(tau30k, 0.7, 1.0, grid_for(tau30k))
