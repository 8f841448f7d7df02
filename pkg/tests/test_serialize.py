"""On-disk formats round-trip byte-for-byte or value-for-value."""

import json

import numpy as np
import pytest

from convsys import (
    Gaussian,
    GridFn,
    Laplace,
    SampleSet,
    config_hash,
    empirical_moments,
    eval_on_grid,
    generate,
    load_gridfn,
    load_momentset,
    load_sampleset,
    load_solution,
    make_grid,
    ModelSpec,
    oracle_moments,
    save_gridfn,
    save_momentset,
    save_sampleset,
    save_solution,
    solve_case_a,
)


class TestConfigHash:
    def test_stable_across_key_order(self):
        a = {"n": 10, "grid": "-8:8:1024", "seed": 0}
        b = {"seed": 0, "n": 10, "grid": "-8:8:1024"}
        assert config_hash(a) == config_hash(b)
        assert len(config_hash(a)) == 16

    def test_value_sensitivity(self):
        assert config_hash({"n": 10}) != config_hash({"n": 11})

    def test_nested(self):
        a = {"f": {"kind": "laplace", "b": 1.0}}
        b = {"f": {"b": 1.0, "kind": "laplace"}}
        assert config_hash(a) == config_hash(b)


class TestGridFnRoundTrip:
    @pytest.mark.parametrize("fmt", ["bin", "csv"])
    def test_1d(self, tmp_path, fmt, freq_1024):
        fn = eval_on_grid(freq_1024, Gaussian(0.3, 1.7).cf)
        p = save_gridfn(fn, tmp_path / "g", fmt=fmt)
        back = load_gridfn(p)
        assert back.spec == fn.spec
        assert back.label == fn.label
        if fmt == "bin":
            assert np.array_equal(back.values, fn.values)
        else:
            assert np.max(np.abs(back.values - fn.values)) < 1e-15

    def test_2d_bin(self, tmp_path):
        spec = make_grid(2, (-4.0, -2.0), (4.0, 2.0), (64, 32))
        g = Gaussian(0.0, 1.0)
        fn = eval_on_grid(spec, lambda a, b: g.cf(a) * g.cf(2 * b))
        p = save_gridfn(fn, tmp_path / "h", fmt="bin")
        back = load_gridfn(p)
        assert back.spec == spec
        assert np.array_equal(back.values, fn.values)

    def test_header_is_json(self, tmp_path, freq_1024):
        fn = eval_on_grid(freq_1024, Gaussian(0.0, 1.0).cf)
        p = save_gridfn(fn, tmp_path / "g", fmt="bin")
        header = json.loads(p.read_text())
        assert header["spec"]["n"] == [1024]
        assert header["format"] == "bin"


class TestSampleSetRoundTrip:
    def test_with_y(self, tmp_path):
        spec = ModelSpec(2, g_spec={"kind": "quadratic"},
                         f_spec={"kind": "gaussian", "mu": 0.0, "var": 0.25}, n=300)
        s = generate(spec, 8)
        p = save_sampleset(s, tmp_path / "s.csv")
        back = load_sampleset(p)
        assert back.model == "example2"
        assert np.allclose(back.z, s.z)
        assert np.allclose(back.x, s.x)
        assert np.allclose(back.y, s.y)
        assert back.seed == 8

    def test_without_y(self, tmp_path):
        spec = ModelSpec(1, g_spec={"kind": "gaussian", "mu": 0.0, "var": 1.0},
                         f_spec={"kind": "laplace", "mu": 0.0, "b": 0.5}, n=200)
        s = generate(spec, 2)
        back = load_sampleset(save_sampleset(s, tmp_path / "s.csv"))
        assert back.y is None
        assert np.allclose(back.z, s.z)

    def test_sidecar_metadata(self, tmp_path):
        spec = ModelSpec(1, g_spec={"kind": "gaussian", "mu": 0.0, "var": 1.0},
                         f_spec={"kind": "laplace", "mu": 0.0, "b": 0.5}, n=200)
        p = save_sampleset(generate(spec, 2), tmp_path / "s.csv")
        meta = json.loads((tmp_path / "s.meta.json").read_text())
        assert meta["model"] == "example1"
        assert meta["n"] == 200
        assert meta["seed"] == 2


class TestMomentSetRoundTrip:
    def test_oracle_moments(self, tmp_path, freq_1024):
        M = oracle_moments(Gaussian(0.0, 1.0), Laplace(0.0, 1.0), freq_1024)
        d = save_momentset(M, tmp_path / "mom")
        back = load_momentset(d)
        assert np.array_equal(back.eps1.values, M.eps1.values)
        assert np.array_equal(back.eps2[0].values, M.eps2[0].values)
        assert np.array_equal(back.deps1[0].values, M.deps1[0].values)
        assert back.source == M.source

    def test_empirical_moments_keep_sample_count(self, tmp_path, freq_1024):
        rng = np.random.default_rng(0)
        z = rng.normal(size=600)
        s = SampleSet("example1", z=z[:, None], x=z[:, None])
        M = empirical_moments(s, freq_1024)
        back = load_momentset(save_momentset(M, tmp_path / "mom"))
        assert back.n_samples == 600
        assert np.array_equal(back.eps1.values, M.eps1.values)


class TestSolutionRoundTrip:
    def test_fields_preserved(self, tmp_path, freq_1024):
        M = oracle_moments(Gaussian(0.0, 1.0), Laplace(0.0, 1.0), freq_1024)
        sol = solve_case_a(M, tau=1e-6, c=2.0)
        d = save_solution(sol, tmp_path / "sol", extra={"note": "test"})
        back = load_solution(d)
        assert back.case == "a"
        assert back.c == 2.0
        assert back.identified == sol.identified
        assert back.mask.tau == sol.mask.tau
        assert np.array_equal(back.mask.mask, sol.mask.mask)
        assert np.array_equal(back.gamma.values, sol.gamma.values)
        assert np.array_equal(back.phi.values, sol.phi.values)
        manifest = json.loads((d / "manifest.json").read_text())
        assert manifest["note"] == "test"
        assert manifest["mask_points"] == sol.mask.count

    def test_not_identified_flag_survives(self, tmp_path, freq_1024):
        M = oracle_moments(Gaussian(0.0, 1.0), Laplace(0.0, 1.0), freq_1024)
        sol = solve_case_a(M, tau=0.999999)
        back = load_solution(save_solution(sol, tmp_path / "sol"))
        assert not back.identified
