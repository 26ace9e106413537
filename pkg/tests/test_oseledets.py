import math

import numpy as np
import pytest

from lyaplab.hypgeo import UnitTangent
from lyaplab.linrep import (
    Representation,
    sym_power,
    trivial_rep,
    unitary_cube_rep,
)
from lyaplab.oseledets import (
    CocycleAccumulator,
    InsufficientDataError,
    RunConfig,
    SpectrumEstimate,
    advance,
    estimate_spectrum,
    random_walk_spectrum,
    run_sample,
    spectrum_csv,
    wedge_crosscheck,
)


class TestAccumulator:
    def test_identity_advances(self):
        acc = CocycleAccumulator(2)
        for _ in range(20):
            advance(acc, np.eye(2))
        assert np.array_equal(acc.finalize(), np.zeros(2))

    def test_diagonal_rates(self):
        acc = CocycleAccumulator(2, qr_interval=4)
        k = 64
        for _ in range(k):
            advance(acc, np.diag([2.0, 0.5]))
        lam = np.sort(acc.finalize())[::-1] / k
        assert np.allclose(lam, [math.log(2.0), -math.log(2.0)], atol=1e-12)

    def test_overflow_forces_flush(self):
        acc = CocycleAccumulator(2, qr_interval=10**9)
        for _ in range(20):
            advance(acc, np.diag([1e40, 1e-40]))
        assert np.isfinite(acc.finalize()).all()


class TestRunSample:
    def test_trivial_rep_exact_zero(self, tri334):
        dom, gens, rels = tri334
        rep = trivial_rep(2, len(gens), rels)
        lam = run_sample(dom, rep, UnitTangent(dom.interior_point, 0.9), 100.0)
        assert np.array_equal(lam, np.zeros(2))

    def test_fuchsian_per_sample_window(self, tri334, fuchs334):
        dom, _, _ = tri334
        lam = run_sample(dom, fuchs334, UnitTangent(dom.interior_point, 2.3), 2000.0)
        assert abs(lam[0] - 1.0) < 0.05
        assert abs(lam[1] + 1.0) < 0.05


@pytest.fixture(scope="module")
def spec334(tri334, fuchs334):
    dom, _, _ = tri334
    return estimate_spectrum(dom, fuchs334, RunConfig(T=600.0, samples=24, seed=21))


class TestEstimateSpectrum:
    def test_fuchsian_benchmark(self, spec334):
        assert abs(spec334.values[0] - 1.0) < 4 * max(spec334.stderr[0], 5e-4)

    def test_values_sorted(self, spec334):
        assert np.all(np.diff(spec334.values) <= 0)

    def test_unitary_zero(self, tri334):
        dom, _, _ = tri334
        est = estimate_spectrum(dom, unitary_cube_rep(),
                                RunConfig(T=200.0, samples=8, seed=4))
        assert np.abs(est.values).max() < 0.01

    def test_symmetry_and_zero_sum(self, tri334, fuchs334):
        dom, _, _ = tri334
        est = estimate_spectrum(dom, sym_power(fuchs334, 3),
                                RunConfig(T=400.0, samples=12, seed=10))
        comb = np.hypot(est.stderr, est.stderr[::-1])
        assert np.all(np.abs(est.values + est.values[::-1]) <= 3 * comb + 1e-9)
        se_sum = math.sqrt(float(np.sum(est.stderr**2)))
        assert abs(est.values.sum()) <= 3 * se_sum + 1e-9

    def test_conjugation_invariance(self, tri334, fuchs334, spec334):
        dom, _, _ = tri334
        x = np.array([[1.4, 0.3], [0.2, 1.0]])
        conj = Representation(
            2, "real",
            [x @ g @ np.linalg.inv(x) for g in fuchs334.generators],
            fuchs334.relations, "conjugated", projective_flag=True)
        est = estimate_spectrum(dom, conj, RunConfig(T=600.0, samples=24, seed=21))
        comb = np.hypot(est.stderr, spec334.stderr) + 1e-3 / 600.0
        assert np.all(np.abs(est.values - spec334.values) <= 3 * comb + 5e-3)

    def test_qr_interval_invariance(self, tri334, fuchs334):
        dom, _, _ = tri334
        ests = [estimate_spectrum(dom, fuchs334,
                                  RunConfig(T=200.0, samples=8, seed=77, qr_interval=q))
                for q in (1, 4, 16)]
        for e in ests[1:]:
            comb = np.hypot(e.stderr, ests[0].stderr)
            assert np.all(np.abs(e.values - ests[0].values) <= 3 * comb + 1e-9)

    def test_seed_determinism(self, tri334, fuchs334):
        dom, _, _ = tri334
        cfg = RunConfig(T=150.0, samples=6, seed=123)
        a = estimate_spectrum(dom, fuchs334, cfg)
        b = estimate_spectrum(dom, fuchs334, cfg)
        assert np.array_equal(a.values, b.values)
        assert np.array_equal(a.sample_values, b.sample_values)
        assert spectrum_csv(a) == spectrum_csv(b)

    def test_random_base_deterministic_and_valid(self, tri334, fuchs334):
        dom, _, _ = tri334
        cfg = RunConfig(T=150.0, samples=6, seed=5, random_base=True)
        a = estimate_spectrum(dom, fuchs334, cfg)
        b = estimate_spectrum(dom, fuchs334, cfg)
        assert np.array_equal(a.values, b.values)
        assert abs(a.values[0] - 1.0) < 0.1

    def test_stderr_scaling(self, tri334, fuchs334):
        dom, _, _ = tri334
        e64 = estimate_spectrum(dom, fuchs334, RunConfig(T=50.0, samples=64, seed=8))
        e256 = estimate_spectrum(dom, fuchs334, RunConfig(T=50.0, samples=256, seed=8))
        ratio = e256.stderr[0] / e64.stderr[0]
        assert 0.25 <= ratio <= 0.75

    def test_insufficient_data(self, tri334, fuchs334):
        dom, _, _ = tri334
        with pytest.raises(InsufficientDataError):
            estimate_spectrum(dom, fuchs334, RunConfig(T=50.0, samples=1, seed=1))

    def test_minus1_normalization_halves(self, tri334, fuchs334):
        dom, _, _ = tri334
        a = estimate_spectrum(dom, fuchs334,
                              RunConfig(T=150.0, samples=6, seed=13))
        b = estimate_spectrum(dom, fuchs334,
                              RunConfig(T=150.0, samples=6, seed=13,
                                        normalization="minus1"))
        assert np.allclose(a.values, 2.0 * b.values, atol=1e-14)

    @pytest.mark.parametrize("specname", ["triangle:2,3,7", "surface:3"])
    def test_uniformizing_benchmark_other_groups(self, specname):
        from lyaplab.fuchsian import build_group, parse_group_spec
        from lyaplab.linrep import uniformizing_rep

        dom, gens, rels = build_group(parse_group_spec(specname))
        rep = uniformizing_rep(gens, rels, "fuchsian")
        est = estimate_spectrum(dom, rep, RunConfig(T=300.0, samples=8, seed=1))
        assert abs(est.values[0] - 1.0) < 0.02


class TestWedge:
    def test_k1_identical(self, tri334, fuchs334):
        dom, _, _ = tri334
        wc = wedge_crosscheck(dom, fuchs334, 1,
                              RunConfig(T=150.0, samples=6, seed=3))
        assert abs(wc.discrepancy) < 1e-12

    def test_top_wedge_both_zero(self, tri334, fuchs334):
        dom, _, _ = tri334
        wc = wedge_crosscheck(dom, fuchs334, 2,
                              RunConfig(T=150.0, samples=6, seed=3))
        assert abs(wc.wedge_top) < 1e-10
        assert abs(wc.partial_sum) < 1e-10

    def test_sym2_partial_sum(self, tri334, fuchs334):
        dom, _, _ = tri334
        wc = wedge_crosscheck(dom, sym_power(fuchs334, 2), 2,
                              RunConfig(T=400.0, samples=16, seed=6))
        assert abs(wc.discrepancy) <= 3 * wc.combined_stderr + 1e-9
        assert abs(wc.partial_sum - 2.0) < 0.1

    def test_sym3_partial_sum(self, tri334, fuchs334):
        # top two exponents of Sym^3 are 3 and 1; their sum is the top
        # exponent of the 6-dimensional second exterior power
        dom, _, _ = tri334
        wc = wedge_crosscheck(dom, sym_power(fuchs334, 3), 2,
                              RunConfig(T=300.0, samples=8, seed=6))
        assert abs(wc.discrepancy) <= 3 * wc.combined_stderr + 1e-9
        assert abs(wc.partial_sum - 4.0) < 0.2
        assert abs(wc.wedge_top - 4.0) < 0.2


class TestRandomWalk:
    def test_trivial_zero(self, tri334):
        _, gens, rels = tri334
        est = random_walk_spectrum(trivial_rep(2, len(gens), rels), 500, 4, 1)
        assert np.array_equal(est.values, np.zeros(2))

    def test_unitary_zero(self):
        est = random_walk_spectrum(unitary_cube_rep(), 800, 4, 2)
        assert np.abs(est.values).max() < 0.01

    def test_fuchsian_nonzero(self, fuchs334):
        est = random_walk_spectrum(fuchs334, 4000, 8, 3)
        assert est.values[0] > 0.05
        assert est.normalization_tag == "per-step"
        assert est.caveat

    def test_determinism(self, fuchs334):
        a = random_walk_spectrum(fuchs334, 200, 4, 9)
        b = random_walk_spectrum(fuchs334, 200, 4, 9)
        assert np.array_equal(a.values, b.values)


class TestCsv:
    def test_schema(self):
        est = SpectrumEstimate(
            values=np.array([1.0, -1.0]), stderr=np.array([0.01, 0.01]),
            samples=4, normalization_tag="minus4", label="x", T=100.0, seed=7)
        csv = spectrum_csv(est)
        lines = csv.strip().split("\n")
        assert lines[0] == "label,i,lambda,stderr,samples,T,seed,normalization"
        assert lines[1] == "x,1,1,0.01,4,100,7,minus4"
        assert len(lines) == 3
