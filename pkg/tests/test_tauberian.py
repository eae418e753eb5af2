import math

import numpy as np
import pytest

from tauberlab.core import ValueFunction, random_game
from tauberlab.games import constant_game, two_absorbing
from tauberlab.solver import MixedValue, finite_horizon_values, fractional_horizon_value
from tauberlab.tauberian import (
    HEADER_NOTE,
    check_discount_estimate,
    check_discretization_bound,
    check_horizon_estimate,
    check_subsolution,
    discount_family,
    discount_propagation_residual,
    dpp_composition_residual,
    gap_scan,
    geometric_grid,
    horizon_family,
    kappa_discount,
    kappa_horizon,
    kappa_table,
    observed_rate,
)

MIXED = MixedValue()


class TestGapScan:
    def test_constant_game(self):
        rep = gap_scan(constant_game(), [1, 4, 16, 64])
        assert all(r.gap == 0.0 for r in rep.records)
        assert observed_rate(rep) is None

    def test_pennies_inverse_pairing(self, pennies):
        rep = gap_scan(pennies, [1, 2, 5, 20, 100], MIXED, "inverse", tol=1e-12)
        for r in rep.records:
            assert r.gap <= 1e-9

    def test_go_to_good(self, good):
        tol = 1e-12
        rep = gap_scan(good, [1, 2, 8, 32, 128], pairing="exp", tol=tol)
        for r in rep.records:
            expected = abs(math.exp(-1 / r.n) - (1 - 1 / r.n))
            assert r.gap == pytest.approx(expected, abs=2 * tol)
            assert r.gap <= 1 / (2 * r.n**2) + tol
        # D(n) ~ 1/(2n^2)
        assert observed_rate(rep) == pytest.approx(-2, abs=0.3)

    def test_report_invariants(self, bundled):
        g = bundled["two-absorbing"]
        rep = gap_scan(g, [1, 3, 9])
        for r in rep.records:
            assert r.gap == max(r.gap_above, r.gap_below)
            assert r.gap_above == pytest.approx(np.max(r.horizon.array - r.discounted.array))
        assert rep.gap_at(3) == rep.records[1].gap
        with pytest.raises(KeyError):
            rep.gap_at(2)

    def test_csv_layout(self, good):
        rep = gap_scan(good, [1, 2])
        lines = rep.to_csv().splitlines()
        assert lines[0] == "index,n,mu,V_s0,V_s1,W_s0,W_s1,gap,gap_above,gap_below"
        assert len(lines) == 3
        assert HEADER_NOTE in rep.to_table()

    @pytest.mark.parametrize("bad", [[], [3, 2], [0, 1]])
    def test_bad_lists(self, good, bad):
        with pytest.raises(ValueError):
            gap_scan(good, bad)

    def test_bad_pairing(self, good):
        with pytest.raises(ValueError):
            gap_scan(good, [1], pairing="harmonic")

    def test_non_constant_limit(self):
        g = two_absorbing()
        rep = gap_scan(g, [16, 256])
        last = rep.records[-1]
        assert np.ptp(last.horizon.array) > 0.5
        assert last.gap <= 0.1


class TestEstimates:
    def test_go_to_good_horizon(self, good):
        # T=2 vs 3: |1/2 - 2/3| = 1/6 against 2(r-1) = 1
        assert check_horizon_estimate(good, 2.0, 1.5) == pytest.approx(1 - 1 / 6, abs=1e-15)

    def test_consecutive_integers(self, bundled):
        for g in bundled.values():
            for T in (1, 2, 5, 17):
                assert check_horizon_estimate(g, float(T), (T + 1) / T) >= 0

    def test_constant_cost_full_margin(self):
        g = constant_game(0.4)
        assert check_horizon_estimate(g, 3.3, 1.7) == pytest.approx(2 * 0.7)
        assert check_discount_estimate(g, 0.2, 1.5) == pytest.approx(1.0, abs=1e-12)

    def test_random_game_discount(self):
        g = random_game((3, 2, 2), 99, deterministic=False)
        assert check_discount_estimate(g, 0.1, 1.25) >= 0

    def test_discretization(self, good):
        assert check_discretization_bound(good, 2.5) == pytest.approx(0.4 - 1 / 15, abs=1e-15)
        assert check_discretization_bound(good, 3.0) == 0.0
        assert check_discretization_bound(constant_game(), 4.2) > 0

    def test_errors(self, good):
        with pytest.raises(ValueError):
            check_horizon_estimate(good, 1.0, 1.0)
        with pytest.raises(ValueError):
            check_discount_estimate(good, -1.0, 1.5)
        with pytest.raises(ValueError):
            check_discretization_bound(good, 0.0)


class TestSubsolution:
    def test_own_values(self, bundled):
        for g in bundled.values():
            V = finite_horizon_values(g, 20)
            fam = {n: V[n - 1] for n in range(1, 21)}
            for kind in ("sub", "super"):
                assert check_subsolution(g, fam, [1, 2, 5], kind=kind) <= 1e-12

    def test_fractional_family(self, good):
        Ts = [0.5, 1.5, 2.5, 3.5, 4.5]
        fam = horizon_family(good, Ts)
        for kind in ("sub", "super"):
            assert check_subsolution(good, fam, [1, 2], kind=kind) <= 1e-12

    def test_trivial_bounds(self, bundled):
        for g in bundled.values():
            zero = {T: ValueFunction.constant(g.states, 0.0) for T in (1.0, 2.0, 3.0)}
            one = {T: ValueFunction.constant(g.states, 1.0) for T in (1.0, 2.0, 3.0)}
            assert check_subsolution(g, zero, [1, 2], kind="sub") <= 0
            assert check_subsolution(g, one, [1, 2], kind="super") <= 0
            assert check_subsolution(g, zero, [1, 3], which="discount", kind="sub") <= 0
            assert check_subsolution(g, one, [1, 3], which="discount", kind="super") <= 0

    def test_discount_family(self, good):
        tol = 1e-12
        fam = discount_family(good, [0.1, 1.0], tol)
        for kind in ("sub", "super"):
            mu = 1 - math.exp(-0.1)
            assert check_subsolution(good, fam, [1, 4], which="discount", kind=kind) <= tol * ((1 - mu) / mu + 1)

    def test_missing_member(self, good):
        fam = horizon_family(good, [1.0])
        with pytest.raises(KeyError):
            check_subsolution(good, fam, [1])
        with pytest.raises(KeyError):
            check_subsolution(good, fam, [1], indices=[1.0])


class TestDPP:
    def test_composition_residual(self, bundled):
        for g in bundled.values():
            worst, _ = dpp_composition_residual(g, 32, 4)
            assert worst <= 1e-12

    def test_discount_residual(self, bundled):
        tol = 1e-10
        for g in bundled.values():
            for mu in (0.5, 0.05):
                assert discount_propagation_residual(g, mu, 4, tol) <= tol * ((1 - mu) / mu + 1) + 1e-12


class TestKappa:
    def test_constant_family(self):
        fam = lambda T: ValueFunction.constant(("a",), 0.3)
        assert kappa_horizon(fam, 5.0, 4.0) == 0.0
        assert kappa_discount(fam, 0.5, 4.0) == 0.0

    def test_increasing_family(self):
        # U_T = 1 - 1/T increases with T, so shrinking T never increases it
        fam = lambda T: ValueFunction.constant(("a",), 1 - 1 / T)
        assert kappa_horizon(fam, 10.0, 3.0) == 0.0

    def test_go_to_good(self, good):
        fam = lambda T: fractional_horizon_value(good, T)
        assert kappa_horizon(fam, 8.0, 2.0) <= 1e-15

    def test_decreasing_family_is_positive(self):
        fam = lambda T: ValueFunction.constant(("a",), 1 / (1 + T))
        assert kappa_horizon(fam, 4.0, 2.0) == pytest.approx(1 / 3 - 1 / 5)

    def test_dict_family_records_substitutions(self):
        fam = {float(T): ValueFunction.constant(("a",), 1 / T) for T in (1, 2, 4, 8)}
        subs = []
        k = kappa_horizon(fam, 8.0, 8.0, grid_size=5, substitutions=subs)
        assert k == pytest.approx(1 - 1 / 8)
        assert subs  # off-grid lookups were replaced by the nearest member

    def test_table_monotone_in_p0(self, bundled):
        g = bundled["two-absorbing"]
        fam = lambda lam: fractional_horizon_value(g, lam)
        tab = kappa_table(fam, [4.0, 10.0], [1.0, 1.5, 3.0, 6.0], grid_size=8)
        for x in (4.0, 10.0):
            ks = [k for (i, _, k) in tab.rows if i == x]
            assert ks == sorted(ks)
        assert tab.to_csv().splitlines()[0] == "index,parameter,p0,kappa"

    def test_grid(self):
        grid = geometric_grid(8.0, 4)
        np.testing.assert_allclose(grid, [1, 2, 4, 8])
        with pytest.raises(ValueError):
            geometric_grid(2.0, 0)
        with pytest.raises(ValueError):
            kappa_horizon(lambda T: None, 1.0, 0.5)
