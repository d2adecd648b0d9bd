import json

import numpy as np
import pytest

import geomrel.evaluation as evaluation
from geomrel.data import FailureDataset, TimeConversionProfile, TimeUnit, rescale_dataset
from geomrel.estimation import OptimizerConfig
from geomrel.evaluation import (
    AggregateCurve,
    ValidityCurve,
    aggregate_median,
    aggregate_to_csv,
    aggregate_to_json,
    curve_to_csv,
    curve_to_json,
    default_cut_points,
    number_of_failures_eval,
    outlier_report,
)
from geomrel.model import GeometricModelParams, mean_failures
from geomrel.simulation import SimulationConfig, simulate

TRUE = GeometricModelParams(0.05, 0.95)


def forward_dataset(label="proj"):
    times = np.arange(10.0, 201.0, 10.0)
    points = tuple((float(t), int(round(mean_failures(TRUE, float(t))))) for t in times)
    return FailureDataset(points, label)


class TestValidityCurve:
    def test_normalized_times_validated(self):
        ValidityCurve("geometric", "p", ((0.2, 0.1), (0.5, -0.2), (1.0, 0.0)))
        with pytest.raises(ValueError):
            ValidityCurve("geometric", "p", ((0.5, 0.1), (0.5, 0.2)))
        with pytest.raises(ValueError):
            ValidityCurve("geometric", "p", ((0.0, 0.1),))
        with pytest.raises(ValueError):
            ValidityCurve("geometric", "p", ((1.2, 0.1),))


class TestNumberOfFailuresEval:
    def test_final_cut_error_near_zero_on_own_data(self):
        ds = forward_dataset()
        curve = number_of_failures_eval("geometric", ds, [ds.final_time])
        (nt, err), = curve.points
        assert nt == 1.0
        assert abs(err) < 0.05

    def test_overpredicting_stub_gives_plus_one(self, monkeypatch):
        ds = forward_dataset()

        class DoubleStub:
            def __init__(self, q):
                self.q = q

            def predict_mean(self, t):
                return 2.0 * self.q

        monkeypatch.setattr(
            evaluation, "fit_model", lambda name, sub, config=None: DoubleStub(ds.final_count)
        )
        curve = number_of_failures_eval("geometric", ds, default_cut_points(ds))
        assert curve.points
        assert all(err == pytest.approx(1.0) for _, err in curve.points)

    def test_default_schedule(self):
        ds = forward_dataset()
        cuts = default_cut_points(ds)
        assert len(cuts) == 20
        assert cuts[0] == pytest.approx(0.2 * ds.final_time)
        assert cuts[-1] == pytest.approx(ds.final_time)

    def test_early_cut_skipped_with_diagnostic(self):
        ds = forward_dataset()
        curve = number_of_failures_eval("geometric", ds, [5.0, ds.final_time])
        assert len(curve.points) == 1
        assert len(curve.skipped) == 1
        assert curve.skipped[0][0] == 5.0
        assert "fewer than 2" in curve.skipped[0][1]

    def test_failed_fits_become_gaps_not_values(self):
        # Littlewood-Verrall needs 5 failures; early cuts on a sparse
        # history must turn into gaps.
        points = ((10.0, 1), (20.0, 2), (30.0, 3), (40.0, 4), (50.0, 5), (60.0, 6), (80.0, 8))
        ds = FailureDataset(points, "sparse")
        curve = number_of_failures_eval("littlewood-verrall", ds, [20.0, 30.0, 80.0])
        skipped_cuts = [t for t, _ in curve.skipped]
        assert 20.0 in skipped_cuts and 30.0 in skipped_cuts
        assert [nt for nt, _ in curve.points] == [1.0]

    def test_deterministic(self):
        ds = forward_dataset()
        cuts = default_cut_points(ds, 6)
        a = number_of_failures_eval("geometric", ds, cuts)
        b = number_of_failures_eval("geometric", ds, cuts)
        assert a == b

    def test_cut_beyond_window_rejected(self):
        ds = forward_dataset()
        with pytest.raises(ValueError):
            number_of_failures_eval("geometric", ds, [ds.final_time * 2])

    def test_unknown_model_rejected(self):
        with pytest.raises(ValueError):
            number_of_failures_eval("weibull", forward_dataset())

    def test_no_failures_rejected(self):
        ds = FailureDataset(((10.0, 0), (20.0, 0)))
        with pytest.raises(ValueError):
            number_of_failures_eval("geometric", ds)

    def test_median_error_shrinks_with_later_cuts(self):
        # On simulated histories the fits should, in median, predict the
        # final count better as the fitting window grows.
        fractions = (0.3, 0.5, 0.7, 0.9)
        errors = {f: [] for f in fractions}
        for rep in range(20):
            ds = simulate(
                SimulationConfig(TRUE, horizon=400, seed=5000 + rep, replications=1)
            )[0]
            curve = number_of_failures_eval(
                "geometric", ds, [f * ds.final_time for f in fractions]
            )
            got = dict(curve.points)
            for f in fractions:
                key = f * ds.final_time / ds.final_time
                if key in got:
                    errors[f].append(abs(got[key]))
        first = float(np.median(errors[fractions[0]]))
        last = float(np.median(errors[fractions[-1]]))
        assert last <= first


class TestUnitInvariance:
    CUTS = (0.3, 0.5, 0.7, 1.0)
    PROFILE = TimeConversionProfile(2.0, 1)  # one incident is half a day

    def _curves(self, model_name, config=None):
        ds = forward_dataset()
        days = rescale_dataset(ds, self.PROFILE, TimeUnit.CALENDAR_DAY)
        native = number_of_failures_eval(
            model_name, ds, [f * ds.final_time for f in self.CUTS], config=config
        )
        scaled = number_of_failures_eval(
            model_name, days, [f * days.final_time for f in self.CUTS], config=config
        )
        assert len(native.points) == len(scaled.points) == len(self.CUTS)
        return native, scaled

    @pytest.mark.parametrize("model_name", ["musa-basic", "musa-okumoto", "nhpp"])
    def test_closed_form_families_are_unit_invariant(self, model_name):
        native, scaled = self._curves(model_name)
        for (nt_a, err_a), (nt_b, err_b) in zip(native.points, scaled.points):
            assert nt_a == pytest.approx(nt_b, rel=1e-12)
            assert err_a == pytest.approx(err_b, abs=1e-6)

    @pytest.mark.parametrize("model_name", ["geometric", "littlewood-verrall"])
    @pytest.mark.xfail(
        strict=False,
        reason=(
            "exact unit invariance is unattainable here: the geometric-rates "
            "family is not closed under time rescaling (survival probabilities "
            "transform as (1-p)**c, which is no longer a geometric rate "
            "sequence), and the Littlewood-Verrall marginal likelihood is so "
            "flat that rescaled optimizer trajectories stop at different "
            "points of the valley; deviations are of order 1e-3, not 1e-6"
        ),
    )
    def test_open_families_exact_invariance(self, model_name):
        native, scaled = self._curves(model_name)
        for (_, err_a), (_, err_b) in zip(native.points, scaled.points):
            assert err_a == pytest.approx(err_b, abs=1e-6)


class TestAggregateMedian:
    def test_single_curve_identity(self):
        curve = ValidityCurve("geometric", "p", ((0.25, 0.1), (0.75, -0.2)))
        agg = aggregate_median([curve], grid_cells=4)
        assert [c.median_relative_error for c in agg.cells] == [0.1, -0.2]
        assert [c.contributing_project_count for c in agg.cells] == [1, 1]

    def test_median_robust_to_far_off_value(self):
        curves = [
            ValidityCurve("geometric", a, ((0.5, v),))
            for a, v in (("a", -0.5), ("b", 0.1), ("c", 6.0))
        ]
        agg = aggregate_median(curves, grid_cells=1)
        assert agg.cells[0].median_relative_error == pytest.approx(0.1)
        assert agg.cells[0].contributing_project_count == 3

    def test_even_count_uses_middle_mean(self):
        curves = [
            ValidityCurve("geometric", a, ((0.5, v),)) for a, v in (("a", 0.2), ("b", 0.4))
        ]
        agg = aggregate_median(curves, grid_cells=1)
        assert agg.cells[0].median_relative_error == pytest.approx(0.3)

    def test_empty_cells_omitted_and_grid_covers_unit_interval(self):
        curve = ValidityCurve("geometric", "p", ((0.05, 1.0), (0.95, 2.0)))
        agg = aggregate_median([curve], grid_cells=10)
        assert len(agg.cells) == 2
        assert agg.cells[0].lower == 0.0 and agg.cells[0].upper == pytest.approx(0.1)
        assert agg.cells[-1].upper == 1.0

    def test_mixed_model_names_rejected(self):
        a = ValidityCurve("geometric", "p", ((0.5, 0.1),))
        b = ValidityCurve("nhpp", "p", ((0.5, 0.1),))
        with pytest.raises(ValueError, match="mixed"):
            aggregate_median([a, b])

    def test_no_curves_rejected(self):
        with pytest.raises(ValueError):
            aggregate_median([])

    def test_median_stays_between_extremes(self):
        rng = np.random.default_rng(3)
        curves = []
        for label in "abcde":
            nts = np.sort(rng.uniform(0.01, 1.0, size=6))
            nts = np.unique(nts)
            errs = rng.normal(0, 2, size=nts.size)
            curves.append(
                ValidityCurve("geometric", label, tuple(zip(nts.tolist(), errs.tolist())))
            )
        agg = aggregate_median(curves, grid_cells=5)
        everything = [(nt, e) for c in curves for nt, e in c.points]
        for cell in agg.cells:
            members = [e for nt, e in everything if cell.lower < nt <= cell.upper]
            assert min(members) <= cell.median_relative_error <= max(members)

    def test_removing_curve_leaves_other_cells_alone(self):
        a = ValidityCurve("geometric", "a", ((0.15, 0.5),))
        b = ValidityCurve("geometric", "b", ((0.85, -0.25),))
        both = aggregate_median([a, b], grid_cells=10)
        alone = aggregate_median([a], grid_cells=10)
        cell_a_both = [c for c in both.cells if c.lower < 0.15 <= c.upper]
        cell_a_alone = [c for c in alone.cells if c.lower < 0.15 <= c.upper]
        assert cell_a_both == cell_a_alone


class TestOutlierReport:
    def test_far_off_project_reported(self):
        curve = ValidityCurve("lv", "wild-project", ((0.5, 6.0), (1.0, 0.1)))
        assert outlier_report([curve], 5.0) == [("wild-project", 6.0)]

    def test_quiet_curves_not_reported(self):
        curve = ValidityCurve("lv", "ok", ((0.5, 0.4), (1.0, -0.8)))
        assert outlier_report([curve], 5.0) == []

    def test_stub_curve_at_threshold_half(self):
        curve = ValidityCurve("stub", "s", ((0.5, 1.0), (1.0, 1.0)))
        assert outlier_report([curve], 0.5) == [("s", 1.0)]

    def test_threshold_validated(self):
        with pytest.raises(ValueError):
            outlier_report([], 0.0)


class TestExports:
    CURVE = ValidityCurve("geometric", "proj", ((0.5, 0.25), (1.0, -0.125)), ((0.1, "thin"),))

    def test_curve_csv(self):
        text = curve_to_csv(self.CURVE)
        lines = text.strip().split("\n")
        assert lines[0] == "normalized_time,relative_error"
        assert lines[1] == "0.5,0.25"

    def test_curve_csv_with_labels(self):
        text = curve_to_csv(self.CURVE, include_labels=True)
        lines = text.strip().split("\n")
        assert lines[0] == "normalized_time,relative_error,model,dataset"
        assert lines[2] == "1.0,-0.125,geometric,proj"

    def test_curve_json_carries_diagnostics(self):
        payload = json.loads(curve_to_json(self.CURVE))
        assert payload["model"] == "geometric"
        assert payload["dataset"] == "proj"
        assert payload["points"][0] == {"normalized_time": 0.5, "relative_error": 0.25}
        assert payload["skipped"] == [{"t_e": 0.1, "reason": "thin"}]

    def test_aggregate_csv_and_json(self):
        agg = aggregate_median([self.CURVE], grid_cells=2)
        text = aggregate_to_csv(agg, include_labels=True)
        lines = text.strip().split("\n")
        assert lines[0] == "normalized_time,relative_error,model"
        assert lines[1].startswith("0.25,")
        payload = json.loads(aggregate_to_json(agg))
        assert payload["grid_cells"] == 2
        assert payload["cells"][0]["contributing_projects"] == 1
        assert isinstance(aggregate_median([self.CURVE]), AggregateCurve)
