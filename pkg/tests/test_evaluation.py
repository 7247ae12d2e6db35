import math
from pathlib import Path

import numpy as np
import pytest

from idpmask.dataset import ColumnStats, Dataset, column_stats
from idpmask.errors import (
    AlignmentError,
    DegenerateVarianceError,
    DomainError,
    ParameterError,
)
from idpmask.evaluation import (
    AVERAGE_COLUMNS,
    RESULT_COLUMNS,
    ExperimentGrid,
    ExperimentResult,
    cell_averages,
    derive_cell_seed,
    record_distance,
    run_experiment,
    sse,
    write_averages_csv,
    write_results_csv,
)


def make_dataset(values, attributes=None, stage="original"):
    values = np.asarray(values, dtype=np.float64)
    if attributes is None:
        attributes = tuple(f"a{i}" for i in range(values.shape[1]))
    return Dataset(attributes=tuple(attributes), values=values, stage=stage)


def stats_for(variances, attributes=None):
    variances = np.asarray(variances, dtype=np.float64)
    m = len(variances)
    if attributes is None:
        attributes = tuple(f"a{i}" for i in range(m))
    zeros = np.zeros(m)
    return ColumnStats(
        attributes=tuple(attributes), means=zeros, variances=variances,
        mins=zeros, maxs=zeros, rows=5,
    )


class TestRecordDistance:
    def test_hand_worked_value(self):
        stats = stats_for([4.0, 1.0])
        d = record_distance([1.0, 2.0], [3.0, 2.5], stats)
        # terms: 2/4 = 0.5 and 0.5/1 = 0.5; sqrt(0.5)/2
        assert d == pytest.approx(math.sqrt(0.5) / 2, rel=1e-15)

    def test_std_normalization(self):
        stats = stats_for([4.0, 1.0])
        d = record_distance([1.0, 2.0], [3.0, 2.5], stats, normalize="std")
        # terms: 2/2 = 1 and 0.5/1 = 0.5; sqrt(1.25)/2
        assert d == pytest.approx(math.sqrt(1.25) / 2, rel=1e-15)

    def test_identical_records_zero(self):
        stats = stats_for([1.0, 3.0])
        assert record_distance([5.0, 6.0], [5.0, 6.0], stats) == 0.0

    def test_zero_variance_with_difference_raises(self):
        stats = stats_for([1.0, 0.0])
        with pytest.raises(DegenerateVarianceError, match="a1"):
            record_distance([1.0, 2.0], [1.0, 2.5], stats)

    def test_zero_variance_without_difference_ok(self):
        stats = stats_for([1.0, 0.0])
        d = record_distance([1.0, 2.0], [2.0, 2.0], stats)
        assert d == pytest.approx(1.0 / 2, rel=1e-15)

    def test_width_mismatch(self):
        stats = stats_for([1.0, 1.0])
        with pytest.raises(AlignmentError):
            record_distance([1.0], [1.0], stats)

    def test_unknown_normalization(self):
        stats = stats_for([1.0])
        with pytest.raises(ParameterError):
            record_distance([1.0], [1.0], stats, normalize="minmax")


class TestSse:
    def test_hand_worked_value(self):
        orig = make_dataset([[0.0, 0.0], [2.0, 2.0]])
        masked = make_dataset([[1.0, 0.0], [1.0, 2.0]], stage="masked")
        total, mean = sse(orig, masked)
        assert total == pytest.approx(0.125, rel=1e-15)
        assert mean == pytest.approx(0.0625, rel=1e-15)

    def test_matches_per_record_distances(self):
        rng = np.random.default_rng(7)
        orig = make_dataset(rng.normal(size=(40, 3)))
        masked = make_dataset(orig.values + rng.normal(size=(40, 3)),
                              stage="masked")
        stats = column_stats(orig)
        expected = math.fsum(
            record_distance(orig.values[i], masked.values[i], stats) ** 2
            for i in range(orig.n)
        )
        total, mean = sse(orig, masked, stats)
        assert total == pytest.approx(expected, rel=1e-12)
        assert mean == pytest.approx(expected / 40, rel=1e-12)

    def test_zero_variance_column_dropped_with_warning(self):
        orig = make_dataset([[0.0, 7.0], [2.0, 7.0]])
        masked = make_dataset([[1.0, 9.0], [1.0, 9.0]], stage="masked")
        with pytest.warns(UserWarning, match="a1"):
            total, mean = sse(orig, masked)
        # only a0 is scored, with m = 1: terms 0.5 each, d^2 = 0.25
        assert total == pytest.approx(0.5, rel=1e-15)
        assert mean == pytest.approx(0.25, rel=1e-15)

    def test_all_columns_degenerate_raises(self):
        orig = make_dataset([[1.0], [1.0]])
        masked = make_dataset([[2.0], [2.0]], stage="masked")
        with pytest.warns(UserWarning):
            with pytest.raises(DegenerateVarianceError):
                sse(orig, masked)

    def test_row_count_mismatch(self):
        orig = make_dataset([[0.0], [1.0]])
        masked = make_dataset([[0.0]], stage="masked")
        with pytest.raises(AlignmentError, match="row counts"):
            sse(orig, masked)

    def test_attribute_mismatch(self):
        orig = make_dataset([[0.0], [1.0]], attributes=("a",))
        masked = make_dataset([[0.0], [1.0]], attributes=("b",),
                              stage="masked")
        with pytest.raises(AlignmentError, match="attribute names"):
            sse(orig, masked)

    def test_stats_attribute_mismatch(self):
        orig = make_dataset([[0.0], [1.0]], attributes=("a",))
        masked = make_dataset([[0.0], [1.0]], attributes=("a",),
                              stage="masked")
        with pytest.raises(AlignmentError, match="statistics"):
            sse(orig, masked, stats_for([1.0], attributes=("b",)))


class TestDeriveCellSeed:
    def test_frozen_values(self):
        assert derive_cell_seed(42, "dp-um", 0.1, 10, 1.5, 1) == \
            3313493408383671380
        assert derive_cell_seed(42, "dp", 0.01, 0, 1.5, 3) == \
            16770301750455669480

    def test_sensitive_to_every_field(self):
        base = derive_cell_seed(42, "dp-um", 0.1, 10, 1.5, 1)
        assert derive_cell_seed(43, "dp-um", 0.1, 10, 1.5, 1) != base
        assert derive_cell_seed(42, "idp-ls", 0.1, 10, 1.5, 1) != base
        assert derive_cell_seed(42, "dp-um", 0.2, 10, 1.5, 1) != base
        assert derive_cell_seed(42, "dp-um", 0.1, 11, 1.5, 1) != base
        assert derive_cell_seed(42, "dp-um", 0.1, 10, 3.0, 1) != base
        assert derive_cell_seed(42, "dp-um", 0.1, 10, 1.5, 2) != base

    def test_fits_in_64_bits(self):
        for run in range(50):
            seed = derive_cell_seed(1, "dp", 1.0, 0, 1.5, run)
            assert 0 <= seed < 2 ** 64


def experiment_data(n=60, m=2, seed=3):
    rng = np.random.default_rng(seed)
    return make_dataset(rng.uniform(1.0, 100.0, size=(n, m)))


class TestExperimentGrid:
    def test_validation(self):
        good = dict(methods=("dp-um",), epsilons=(0.1,), ks=(10,),
                    alphas=(1.5,), repetitions=2, base_seed=1)
        ExperimentGrid(**good)
        for bad in (
            dict(good, methods=()),
            dict(good, methods=("nope",)),
            dict(good, epsilons=()),
            dict(good, epsilons=(0.0,)),
            dict(good, epsilons=(math.inf,)),
            dict(good, ks=()),
            dict(good, ks=(0,)),
            dict(good, alphas=(-1.0,)),
            dict(good, repetitions=0),
            dict(good, normalize="minmax"),
        ):
            with pytest.raises(ParameterError):
                ExperimentGrid(**bad)

    def test_dp_only_grid_needs_no_k(self):
        grid = ExperimentGrid(methods=("dp",), epsilons=(1.0,), ks=(),
                              alphas=(1.5,), repetitions=1, base_seed=1)
        rows = run_experiment(grid, experiment_data())
        assert len(rows) == 1


class TestRunExperiment:
    def test_row_counting_contract(self):
        grid = ExperimentGrid(
            methods=("dp-um", "idp-ls"), epsilons=(0.1,), ks=(10,),
            alphas=(1.5,), repetitions=10, base_seed=42,
        )
        rows = run_experiment(grid, experiment_data())
        assert len(rows) == 20
        assert all(r.k == 10 for r in rows)
        assert [r.run for r in rows if r.method == "dp-um"] == \
            list(range(1, 11))
        averages = cell_averages(rows)
        assert len(averages) == 2
        assert [a.method for a in averages] == ["dp-um", "idp-ls"]
        assert all(a.runs == 10 for a in averages)
        for a in averages:
            manual = math.fsum(r.mean_sse for r in rows
                               if r.method == a.method) / 10
            assert a.avg_mean_sse == pytest.approx(manual, rel=1e-15)

    def test_dp_collapses_over_k(self):
        grid = ExperimentGrid(
            methods=("dp",), epsilons=(0.1, 1.0), ks=(5, 10),
            alphas=(1.5,), repetitions=2, base_seed=7,
        )
        rows = run_experiment(grid, experiment_data())
        assert len(rows) == 4
        assert all(r.k == 0 for r in rows)
        assert sorted({r.epsilon for r in rows}) == [0.1, 1.0]

    def test_unusable_cells_skipped_with_warning(self):
        grid = ExperimentGrid(
            methods=("idp-cbls",), epsilons=(1.0,), ks=(2, 5),
            alphas=(1.5,), repetitions=1, base_seed=7,
        )
        with pytest.warns(UserWarning, match="k=2"):
            rows = run_experiment(grid, experiment_data())
        assert [r.k for r in rows] == [5]

    def test_oversized_k_skipped(self):
        grid = ExperimentGrid(
            methods=("dp-um",), epsilons=(1.0,), ks=(10, 100),
            alphas=(1.5,), repetitions=1, base_seed=7,
        )
        with pytest.warns(UserWarning, match="k=100"):
            rows = run_experiment(grid, experiment_data(n=60))
        assert [r.k for r in rows] == [10]

    def test_deterministic_and_thread_invariant(self):
        grid = ExperimentGrid(
            methods=("dp", "dp-um", "idp-ls", "idp-cbls"),
            epsilons=(0.5,), ks=(5,), alphas=(1.5,),
            repetitions=3, base_seed=11,
        )
        data = experiment_data()
        first = run_experiment(grid, data)
        second = run_experiment(grid, data)
        threaded = run_experiment(grid, data, threads=4)
        assert first == second == threaded

    def test_runs_within_a_cell_differ(self):
        grid = ExperimentGrid(
            methods=("dp-um",), epsilons=(0.5,), ks=(5,), alphas=(1.5,),
            repetitions=4, base_seed=11,
        )
        rows = run_experiment(grid, experiment_data())
        values = [r.sse for r in rows]
        assert len(set(values)) == len(values)

    def test_cbls_grid_ignores_domain_scaling(self):
        # negative values make alpha-derived domains impossible; the
        # cluster-based method must not even try to build them
        data = make_dataset(np.linspace(-50.0, 50.0, 30).reshape(30, 1))
        grid = ExperimentGrid(
            methods=("idp-cbls",), epsilons=(1.0,), ks=(5,),
            alphas=(1.5,), repetitions=1, base_seed=3,
        )
        rows = run_experiment(grid, data)
        assert len(rows) == 1
        with pytest.raises(DomainError):
            run_experiment(
                ExperimentGrid(methods=("dp",), epsilons=(1.0,), ks=(),
                               alphas=(1.5,), repetitions=1, base_seed=3),
                data,
            )

    def test_more_budget_means_less_error(self):
        grid = ExperimentGrid(
            methods=("dp-um",), epsilons=(0.01, 1.0), ks=(10,),
            alphas=(1.5,), repetitions=5, base_seed=23,
        )
        rows = run_experiment(grid, experiment_data(n=120))
        averages = {a.epsilon: a.avg_mean_sse for a in cell_averages(rows)}
        assert averages[1.0] < averages[0.01]

    def test_bad_threads(self):
        grid = ExperimentGrid(methods=("dp",), epsilons=(1.0,), ks=(),
                              alphas=(1.5,), repetitions=1, base_seed=1)
        with pytest.raises(ParameterError):
            run_experiment(grid, experiment_data(), threads=0)


class TestCsvOutput:
    def test_headers_and_byte_identical_reruns(self, tmp_path):
        grid = ExperimentGrid(
            methods=("dp-um", "idp-cbls"), epsilons=(0.5,), ks=(5,),
            alphas=(1.5,), repetitions=2, base_seed=9,
        )
        rows = run_experiment(grid, experiment_data())
        averages = cell_averages(rows)

        first_rows = tmp_path / "rows1.csv"
        first_avgs = tmp_path / "avgs1.csv"
        write_results_csv(rows, first_rows)
        write_averages_csv(averages, first_avgs)

        text = first_rows.read_text(encoding="utf-8")
        assert text.splitlines()[0] == ",".join(RESULT_COLUMNS)
        assert len(text.splitlines()) == 1 + len(rows)
        avg_text = first_avgs.read_text(encoding="utf-8")
        assert avg_text.splitlines()[0] == ",".join(AVERAGE_COLUMNS)

        rows2 = run_experiment(grid, experiment_data())
        second_rows = tmp_path / "rows2.csv"
        second_avgs = tmp_path / "avgs2.csv"
        write_results_csv(rows2, second_rows)
        write_averages_csv(cell_averages(rows2), second_avgs)
        assert first_rows.read_bytes() == second_rows.read_bytes()
        assert first_avgs.read_bytes() == second_avgs.read_bytes()

    def test_values_roundtrip_exactly(self, tmp_path):
        rows = [ExperimentResult(method="dp", epsilon=0.1, k=0, alpha=1.5,
                                 run=1, seed=5, sse=1.2345678901234567,
                                 mean_sse=0.1)]
        path = tmp_path / "rows.csv"
        write_results_csv(rows, path)
        import csv as csvmod
        with path.open(newline="") as fh:
            record = list(csvmod.DictReader(fh))[0]
        assert float(record["sse"]) == rows[0].sse
        assert float(record["epsilon"]) == 0.1
        assert record["method"] == "dp"


class TestCellAverages:
    def test_empty(self):
        assert cell_averages([]) == []

    def test_preserves_first_seen_order(self):
        rows = [
            ExperimentResult("idp-ls", 0.1, 5, 1.5, 1, 0, 4.0, 2.0),
            ExperimentResult("dp", 0.1, 0, 1.5, 1, 0, 8.0, 4.0),
            ExperimentResult("idp-ls", 0.1, 5, 1.5, 2, 0, 6.0, 3.0),
        ]
        averages = cell_averages(rows)
        assert [a.method for a in averages] == ["idp-ls", "dp"]
        assert averages[0].avg_sse == 5.0
        assert averages[0].avg_mean_sse == 2.5
        assert averages[0].runs == 2
        assert averages[1].runs == 1
