import numpy as np
import pytest

from opnav import reports, study
from opnav.analytics import compare_groups, doubling_rates


@pytest.fixture(scope="module")
def bundled_matrices():
    a = reports.read_setup_matrix(study.data_text("traditional.csv"))
    b = reports.read_setup_matrix(study.data_text("assisted.csv"))
    return a, b


class TestMatrixCsv:
    def test_round_trip(self):
        matrix = np.array([[1.25, 2.5, 3.75], [4.0, 5.0, 6.0]])
        text = reports.write_setup_matrix(matrix)
        again = reports.read_setup_matrix(text)
        assert np.allclose(matrix, again, atol=1e-6)

    def test_header_required(self):
        with pytest.raises(reports.BadDataset):
            reports.read_setup_matrix("1,2,3\n4,5,6\n")

    def test_out_of_order_columns_rejected(self):
        with pytest.raises(reports.BadDataset):
            reports.read_setup_matrix("batch_2,batch_1\n1,2\n")

    def test_bad_value_reported_with_line(self):
        with pytest.raises(reports.BadDataset) as err:
            reports.read_setup_matrix("batch_1,batch_2\n1,2\n3,oops\n")
        assert "line 3" in str(err.value)

    def test_bundled_datasets_shape(self, bundled_matrices):
        a, b = bundled_matrices
        assert a.shape == (10, 64)
        assert b.shape == (10, 64)
        assert (a > 0).all() and (b > 0).all()


class TestTables:
    def test_rates_table_matches_reference(self):
        table = reports.rates_table_csv(doubling_rates(list(study.TRADITIONAL_SERIES)))
        lines = table.strip().splitlines()
        assert lines[0] == "cumulative_production,avg_setup_minutes,learning_rate_pct"
        assert lines[1] == "1,27.88,"
        assert lines[2] == "2,27.05,97.0"
        assert lines[-1] == "mean,,91.85"

    def test_rank_tests_table(self, bundled_matrices):
        report = compare_groups(*bundled_matrices, levels=study.LEVELS)
        table = reports.rank_tests_csv(report)
        lines = table.strip().splitlines()
        assert lines[1] == "1,10,10,152,58,3,23,3.552866,0.000381,reject"
        assert lines[2] == "2,10,10,155,55,0,23,3.779645,0.000157,reject"
        assert len(lines) == 8

    def test_curve_series_and_scatter(self, bundled_matrices):
        a, b = bundled_matrices
        report = compare_groups(a, b, levels=study.LEVELS)
        series = reports.curve_series_csv(report, "traditional", "assisted")
        assert series.splitlines()[0] == (
            "cumulative_production,mean_traditional,mean_assisted,marginal_difference"
        )
        assert len(series.strip().splitlines()) == 8
        scatter = reports.scatter_csv(a, b, study.LEVELS, "traditional", "assisted")
        assert len(scatter.strip().splitlines()) == 1 + 2 * 10 * 7

    def test_summary_json_stable(self, bundled_matrices):
        report = compare_groups(*bundled_matrices, levels=study.LEVELS)
        one = reports.to_json(reports.comparison_summary(report, "t", "a"))
        two = reports.to_json(reports.comparison_summary(report, "t", "a"))
        assert one == two
        assert '"mean_rate_pct": 91.85' in one
        assert '"mean_rate_pct": 89.82' in one

    def test_learning_summary(self, bundled_matrices):
        a, _ = bundled_matrices
        summary = reports.learning_summary(a)
        assert summary["levels"] == list(study.LEVELS)
        assert summary["doubling"]["mean_rate_pct"] == 91.85
        assert summary["operators"] == 10
