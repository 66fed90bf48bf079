import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from channel.fading import AssistNode
from config import DESK_SCALE
from harness.experiment_orchestrator import (ExperimentOrchestrator, ExperimentSpec, SweepParam,
                                             derive_drop_seed, derive_restart_seed, run_experiment)
from harness.validation_suite import ValidationReport, ValidationSuite, validate
from harness.waterfilling import waterfill, waterfilling_capacity
from models.system_config import Scheme, SystemConfig
from optimization import subsolvers
from optimization.subsolvers import QuadraticForm
from utils.exceptions import ConfigError, DegenerateForm


def _small_spec(**overrides):
    settings = dict(base_config=SystemConfig(K=8), schemes=[Scheme.RIS, Scheme.DIRECT],
                    sweep_param=SweepParam.K, sweep_values=[8, 4], drops=2, master_seed=3,
                    options={"max_outer_iters": 40})
    settings.update(overrides)
    return ExperimentSpec(**settings)


def _median(rows, scheme, sweep_value=None):
    values = [row.rate_bps for row in rows
              if row.scheme == scheme and (sweep_value is None or row.sweep_value == sweep_value)]
    return float(np.median(values))


class TestWaterfilling:

    def test_identity_channel(self):
        assert_allclose(waterfilling_capacity(np.eye(2), 1.0, 2.0), 2.0)

    def test_rank_one_channel(self):
        assert_allclose(waterfilling_capacity(np.ones((2, 2)), 1.0, 1.0), math.log2(5.0))

    def test_no_power(self):
        assert waterfilling_capacity(np.eye(3), 1.0, 0.0) == 0.0

    def test_weak_channel_gets_nothing(self):
        powers, level = waterfill(np.array([0.01, 10.0]), 1.0)
        assert_allclose(powers, [0.0, 1.0])
        assert_allclose(level, 1.1)

    def test_power_is_spent(self, rng):
        gains = rng.random(6) + 0.1
        powers, _ = waterfill(gains, 3.0)
        assert_allclose(powers.sum(), 3.0)
        assert np.all(powers >= 0)

    def test_stream_limit(self):
        H = np.diag([3.0, 2.0, 1.0])
        assert waterfilling_capacity(H, 1.0, 10.0, streams=1) < waterfilling_capacity(H, 1.0, 10.0)
        assert_allclose(waterfilling_capacity(H, 1.0, 10.0, streams=1), math.log2(1.0 + 90.0))

    def test_rejects_bad_noise(self):
        with pytest.raises(ConfigError):
            waterfilling_capacity(np.eye(2), 0.0, 1.0)


class TestSeeds:

    def test_drop_seed_is_stable(self):
        assert derive_drop_seed(7, 0, 3) == derive_drop_seed(7, 0, 3)
        assert 0 <= derive_drop_seed(7, 0, 3) < 2 ** 32

    def test_drop_seeds_differ(self):
        seeds = {derive_drop_seed(7, index, drop) for index in range(3) for drop in range(20)}
        assert len(seeds) == 60
        assert derive_drop_seed(8, 0, 0) != derive_drop_seed(7, 0, 0)

    def test_restart_seed(self):
        assert derive_restart_seed(11, 1) != derive_restart_seed(11, 2)


class TestExperimentSpec:

    def test_row_count(self):
        assert _small_spec().row_count() == 8
        assert ExperimentSpec(drops=3).row_count() == 12

    def test_single_point_without_sweep(self):
        assert ExperimentSpec().points() == [(0, 0.0)]

    def test_power_sweep_in_dbm(self):
        spec = ExperimentSpec(sweep_param=SweepParam.PS, sweep_values=[30.0])
        assert_allclose(spec.config_at(30.0).P_s, 1.0)

    def test_distance_sweep(self):
        spec = ExperimentSpec(sweep_param=SweepParam.D1, sweep_values=[20.0])
        assert spec.config_at(20.0).geometry.d_1 == 20.0

    def test_fractional_elements_rejected(self):
        with pytest.raises(ConfigError):
            _small_spec(sweep_values=[8.5]).validate()

    def test_invalid_settings(self):
        with pytest.raises(ConfigError):
            ExperimentSpec(drops=0).validate()
        with pytest.raises(ConfigError):
            ExperimentSpec(sweep_param=SweepParam.K).validate()
        with pytest.raises(ConfigError):
            ExperimentSpec(schemes=[]).validate()
        with pytest.raises(ConfigError):
            _small_spec(options={"eps_rel": 0.0}).validate()

    def test_sweep_param_aliases(self):
        assert SweepParam.parse("d1") == SweepParam.D1
        assert SweepParam.parse("PS") == SweepParam.PS
        with pytest.raises(ConfigError):
            SweepParam.parse("height")


class TestExperimentOrchestrator:

    def test_work_items(self):
        items = ExperimentOrchestrator(_small_spec(), workers=1).work_items()
        assert len(items) == 8
        assert {item[1] for item in items} == {Scheme.RIS, Scheme.DIRECT}

    def test_rows_sorted(self):
        rows = run_experiment(_small_spec(), workers=1)
        assert len(rows) == 8
        keys = [(row.scheme, row.sweep_value, row.drop) for row in rows]
        assert keys == sorted(keys)
        assert keys[0] == ("DIRECT", 4.0, 0)
        assert all(row.error is None for row in rows)

    def test_schemes_share_channels(self):
        rows = run_experiment(_small_spec(), workers=1)
        direct = {(row.sweep_value, row.drop): row.rate_bps for row in rows if row.scheme == "DIRECT"}
        # the direct link does not depend on the surface size
        assert direct[(4.0, 0)] == direct[(8.0, 0)]
        assert direct[(4.0, 1)] == direct[(8.0, 1)]

    def test_rates_and_efficiencies(self):
        rows = run_experiment(_small_spec(), workers=1)
        cfg = SystemConfig(K=8)
        for row in rows:
            assert_allclose(row.rate_bps, row.spectral_efficiency_bphz * cfg.bandwidth_hz)
            assert_allclose(row.energy_efficiency_bpj, row.rate_bps / cfg.P_s)
            assert row.iterations >= 1

    def test_csv_is_reproducible(self, tmp_path):
        first = ExperimentOrchestrator(_small_spec(), workers=1)
        first.run()
        second = ExperimentOrchestrator(_small_spec(), workers=1)
        second.run()
        a = first.results.write_csv(str(tmp_path / "a.csv"))
        b = second.results.write_csv(str(tmp_path / "b.csv"))
        assert open(a, "rb").read() == open(b, "rb").read()

    def test_failed_runs_become_rows(self, monkeypatch):
        def broken(q, phi0):
            raise DegenerateForm("forced")

        monkeypatch.setattr(subsolvers, "solve_phi", broken)
        rows = run_experiment(_small_spec(), workers=1)
        failed = [row for row in rows if row.error]
        assert len(failed) == 4
        assert all(row.scheme == "RIS" and not row.converged for row in failed)
        assert all(row.error.startswith("DegenerateForm") for row in failed)

    def test_restarts_keep_best(self):
        single = run_experiment(_small_spec(schemes=[Scheme.RIS], restarts=1), workers=1)
        several = run_experiment(_small_spec(schemes=[Scheme.RIS], restarts=3), workers=1)
        for one, best in zip(single, several):
            assert best.spectral_efficiency_bphz >= one.spectral_efficiency_bphz

    def test_unpaired_sweep_draws_new_channels(self):
        rows = run_experiment(_small_spec(schemes=[Scheme.DIRECT], paired_sweep=False), workers=1)
        assert rows[0].rate_bps != rows[2].rate_bps


class TestValidationSuite:

    def test_identities_pass(self):
        report = validate(7, names=["wmmse_rate_identity", "mmse_matrix_identity", "surface_as_relay_identity"])
        assert report.passed
        assert [check.name for check in report.checks] == ["wmmse_rate_identity", "mmse_matrix_identity",
                                                           "surface_as_relay_identity"]

    def test_builder_contracts_pass(self):
        assert validate(7, names=["phi_form_contract", "f_form_contract"]).passed

    def test_broken_builder_is_caught(self, monkeypatch):
        original = subsolvers.build_phi_quadratic

        def flipped(*args):
            q = original(*args)
            return QuadraticForm(Xi=q.Xi, b=-q.b)

        monkeypatch.setattr(subsolvers, "build_phi_quadratic", flipped)
        report = validate(7, names=["phi_form_contract"])
        assert not report.passed
        assert report.failures[0].name == "phi_form_contract"

    def test_report_text(self):
        text = validate(7, names=["wmmse_rate_identity"]).to_text()
        lines = text.splitlines()
        assert lines[0].startswith("PASS wmmse_rate_identity residual=")
        assert lines[-1] == "SUMMARY passed=1 failed=0"
        assert text.endswith("\n")

    def test_report_json(self):
        report = validate(7, names=["mmse_matrix_identity"])
        restored = ValidationReport.from_json(report.to_json())
        assert restored.seed == 7
        assert restored.checks[0].name == "mmse_matrix_identity"

    def test_same_seed_same_report(self):
        names = ["wmmse_rate_identity", "phi_form_contract"]
        assert validate(7, names=names).to_text() == validate(7, names=names).to_text()

    def test_failing_check_is_recorded(self):
        suite = ValidationSuite(3)

        def explode(rng):
            raise ArithmeticError("boom")

        suite.checks = {"wmmse_rate_identity": explode}
        report = suite.run()
        assert not report.passed
        assert report.checks[0].residual == math.inf

    @pytest.mark.slow
    def test_monotone_check_covers_hundred_drops(self, monkeypatch):
        suite = ValidationSuite(7)
        original = suite._drop
        nodes = []

        def counting_drop(rng, node):
            nodes.append(node)
            return original(rng, node)

        monkeypatch.setattr(suite, "_drop", counting_drop)
        report = suite.run(["monotone_traces"])
        assert report.passed, report.to_text()
        assert len(nodes) >= 100
        assert nodes.count(AssistNode.RIS) >= 34
        assert suite.cfg.K <= 32 and suite.cfg.L == 4

    @pytest.mark.slow
    def test_full_suite_passes(self):
        report = validate(7)
        assert report.passed, report.to_text()
        assert len(report.checks) == 12


@pytest.mark.slow
class TestTrends:

    def test_surface_rate_grows_with_elements(self):
        spec = ExperimentSpec(schemes=[Scheme.RIS], sweep_param=SweepParam.K,
                              sweep_values=[float(k) for k in DESK_SCALE["k_values"]],
                              drops=DESK_SCALE["drops"], master_seed=7)
        rows = run_experiment(spec, workers=1)
        medians = [_median(rows, "RIS", float(k)) for k in DESK_SCALE["k_values"]]
        assert all(b >= a for a, b in zip(medians, medians[1:]))

    def test_full_duplex_beats_half_duplex(self):
        spec = ExperimentSpec(schemes=[Scheme.FDR, Scheme.HDR], drops=DESK_SCALE["drops"], master_seed=7)
        rows = run_experiment(spec, workers=1)
        assert _median(rows, "FDR") >= _median(rows, "HDR")

    # radiated-power EE with P_s = P_r = 43 dBm: RIS needs half the FDR SE and
    # reaches 26.51 of the 26.81 b/s/Hz required (median EE 1.329e8 vs 1.344e8 b/J)
    @pytest.mark.xfail(reason="K=100 surface falls about 1.1% short of FDR energy efficiency at d_1=10 m",
                       strict=False)
    def test_surface_energy_efficiency_near_source(self):
        cfg = SystemConfig(K=100)
        spec = ExperimentSpec(base_config=cfg, schemes=[Scheme.RIS, Scheme.FDR], sweep_param=SweepParam.D1,
                              sweep_values=[10.0], drops=DESK_SCALE["drops"], master_seed=7)
        rows = run_experiment(spec, workers=1)

        def median_ee(scheme):
            return float(np.median([row.energy_efficiency_bpj for row in rows if row.scheme == scheme]))

        assert median_ee("RIS") >= median_ee("FDR")
