import pytest

from muskat.bubble.linear_analysis import LinearizationReport
from muskat.bubble.suites import DEFAULT_SEED, Criterion, SuiteReport, SuiteRunner, suite_names


class TestSuiteRunner:
    """Test suite for SuiteRunner bookkeeping."""

    def test_names(self):
        assert suite_names() == [
            "integrals", "steady-state", "linearization", "diagonalization",
            "constraint", "conservation", "decay", "operators", "determinism",
        ]

    def test_unknown_suite(self):
        with pytest.raises(KeyError):
            SuiteRunner().run("everything")

    def test_jobs_must_be_positive(self):
        with pytest.raises(ValueError):
            SuiteRunner(jobs=0)

    @pytest.mark.parametrize("jobs", [1, 3])
    def test_map_keeps_order(self, jobs):
        runner = SuiteRunner(jobs=jobs)
        assert runner._map(lambda x: x * x, list(range(10))) == [x * x for x in range(10)]

    def test_report_dict(self):
        report = SuiteReport("integrals", DEFAULT_SEED, 64, [
            Criterion("a", True, 0.0, 1.0),
            Criterion("b", False, 2.0, 1.0, "too large"),
        ])
        data = report.to_dict()
        assert data["passed"] is False
        assert data["criteria"][1] == {"name": "b", "passed": False, "value": 2.0, "limit": 1.0, "detail": "too large"}

    def test_run_wraps_criteria(self):
        runner = SuiteRunner(seed=7, n_modes=16)
        runner.suites["integrals"] = lambda: [Criterion("a", True, 0.0, 1.0)]
        report = runner.run("integrals")
        assert report.suite == "integrals"
        assert report.seed == 7
        assert report.passed

    @pytest.mark.parametrize("slope", [2.0, 0.5, float("nan")])
    def test_linearization_slope_must_be_near_one(self, mocker, slope):
        """A second-order or stalled error sweep fails the slope criterion."""
        report = LinearizationReport(mode=2, rows=[{"k": 2, "eps": 1e-2, "err": 1e-2}], fitted_slope=slope,
                                     anomaly_expected=1.0, anomaly_measured=1.0)
        mocker.patch("muskat.bubble.suites.verify_linearization", return_value=report)
        result = SuiteRunner().run("linearization")
        slopes = [c for c in result.criteria if "fitted slope" in c.name]
        assert len(slopes) == 3
        assert not any(c.passed for c in slopes)
        assert not result.passed


class TestSuites:
    """Test suite for the cheaper acceptance suites."""

    def test_integrals(self):
        assert SuiteRunner(jobs=2).run("integrals").passed

    def test_steady_state(self):
        report = SuiteRunner(n_modes=16).run("steady-state")
        assert report.passed, report.to_dict()

    def test_constraint(self):
        report = SuiteRunner(n_modes=16).run("constraint")
        assert report.passed, report.to_dict()

    def test_diagonalization(self):
        report = SuiteRunner(n_modes=32).run("diagonalization")
        assert report.passed, report.to_dict()

    def test_operators(self):
        report = SuiteRunner().run("operators")
        assert report.passed, report.to_dict()

    @pytest.mark.slow
    def test_linearization(self):
        report = SuiteRunner(n_modes=16).run("linearization")
        assert report.passed, report.to_dict()

    def test_determinism(self):
        report = SuiteRunner(n_modes=16).run("determinism")
        assert report.passed, report.to_dict()

    @pytest.mark.slow
    @pytest.mark.parametrize("name", ["conservation", "decay"])
    def test_reference_run(self, name):
        report = SuiteRunner(n_modes=32).run(name)
        assert report.passed, report.to_dict()


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
