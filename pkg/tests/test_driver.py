"""End-to-end run behavior, configuration handling, persistence, CLI."""

import json
import math

import numpy as np
import pytest

from emobatch.cli import main as cli_main
from emobatch.core import ConfigError, Source
from emobatch.driver import (
    ExperimentConfig,
    InstanceSpec,
    SuiteConfig,
    _dedup_walk,
    _initial_subproblem_bests,
    _lattice_divisions,
    _search_config,
    _thread_count,
    emit_front,
    load_experiment_config,
    load_record,
    read_objective_csv,
    record_from_dict,
    record_to_dict,
    reference_front,
    run_dmi,
    run_label,
    run_suite,
    save_record,
)
from emobatch.emo import MIN_WEIGHT, das_dennis_weights
from emobatch.metrics import hypervolume
from emobatch.problems import make_problem
from emobatch.sampling import default_initial_size

SMALL = dict(
    problem="zdt31",
    n_var=5,
    optimizer="moead",
    selector="ihv",
    seed=5,
    max_fes=20,
    generations=10,
)


@pytest.fixture(scope="module")
def small_record():
    return run_dmi(ExperimentConfig(**SMALL))


class TestExperimentConfig:
    def test_defaults_resolve(self):
        config = ExperimentConfig(
            problem="zdt31", n_var=10, optimizer="moead", selector="ihv", seed=1
        )
        assert config.resolved_initial_size == default_initial_size(10) == 109
        assert config.resolved_max_fes(2) == 150
        assert config.resolved_max_fes(3) == 250
        assert config.batch_size == 10
        assert config.candidate_count == 100
        assert config.step_scale == 0.1
        assert config.interpolation_enabled

    def test_explicit_sizes_win(self):
        config = ExperimentConfig(
            problem="zdt31",
            n_var=10,
            optimizer="moead",
            selector="ihv",
            seed=1,
            initial_size=30,
            max_fes=40,
        )
        assert config.resolved_initial_size == 30
        assert config.resolved_max_fes(2) == 40

    @pytest.mark.parametrize(
        "bad",
        [
            dict(optimizer="annealing"),
            dict(selector="random"),
            dict(n_var=0),
            dict(seed=-1),
            dict(batch_size=0),
            dict(candidate_count=0),
            dict(step_scale=-0.1),
            dict(initial_size=0),
            dict(max_fes=-1),
            dict(population_size=1),
            dict(generations=-1),
            dict(hyper_bounds=(1e-6, 1e5)),
            dict(hyper_bounds=(1.0, 1.0)),
        ],
    )
    def test_invalid_values_rejected(self, bad):
        base = dict(
            problem="zdt31", n_var=5, optimizer="moead", selector="ihv", seed=1
        )
        base.update(bad)
        with pytest.raises(ConfigError):
            ExperimentConfig(**base)

    def test_dict_round_trip(self):
        config = ExperimentConfig(
            problem="dtlz71",
            n_var=10,
            optimizer="nsga2",
            selector="native",
            seed=9,
            hyper_bounds=(1e-3, 1e3),
            interpolation_enabled=False,
        )
        rebuilt = ExperimentConfig.from_dict(config.to_dict())
        assert rebuilt == config
        assert json.loads(json.dumps(config.to_dict())) == config.to_dict()

    def test_unknown_key_rejected(self):
        data = ExperimentConfig(
            problem="zdt31", n_var=5, optimizer="moead", selector="ihv", seed=1
        ).to_dict()
        data["typo_key"] = 3
        with pytest.raises(ConfigError, match="typo_key"):
            ExperimentConfig.from_dict(data)

    def test_missing_required_key_rejected(self):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict({"problem": "zdt31", "n_var": 5})

    def test_load_from_file(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(
            json.dumps(
                {
                    "problem": "zdt31",
                    "n_var": 5,
                    "optimizer": "moead",
                    "selector": "ihv",
                    "seed": 3,
                }
            )
        )
        config = load_experiment_config(path)
        assert config.problem == "zdt31"
        assert config.seed == 3

    def test_invalid_json_rejected(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        with pytest.raises(ConfigError):
            load_experiment_config(path)

    def test_run_label(self):
        config = ExperimentConfig(**SMALL)
        assert run_label(config) == "dmi-moead-ihv"
        ablated = ExperimentConfig(**{**SMALL, "interpolation_enabled": False})
        assert run_label(ablated) == "moead-ihv"


class TestSearchConfig:
    def test_lattice_divisions(self):
        assert _lattice_divisions(2, 100) == 99
        assert _lattice_divisions(2, 2) == 1
        assert _lattice_divisions(3, 105) == 13
        assert math.comb(13 + 2, 2) == 105
        assert _lattice_divisions(3, 100) is None

    def test_defaults_by_objective_count(self):
        config = ExperimentConfig(**SMALL)
        two = _search_config(config, 2)
        assert (two.population_size, two.weight_divisions) == (100, 99)
        three = _search_config(config, 3)
        assert (three.population_size, three.weight_divisions) == (105, 13)
        assert two.generations == SMALL["generations"]

    def test_population_override_needs_matching_lattice(self):
        config = ExperimentConfig(**{**SMALL, "population_size": 100})
        with pytest.raises(ConfigError, match="lattice"):
            _search_config(config, 3)
        # nsga2 with contribution selection never touches weight vectors
        relaxed = ExperimentConfig(
            **{**SMALL, "optimizer": "nsga2", "population_size": 100}
        )
        assert _search_config(relaxed, 3).weight_divisions is None


class TestRunDmi:
    def test_budget_is_exact(self, small_record):
        config = small_record.config
        expected = config.resolved_initial_size + config.max_fes
        assert small_record.evaluations == expected
        assert len(small_record.archive) == expected
        used = [log.evaluations_used for log in small_record.iterations]
        assert used == sorted(used)
        assert used[-1] == config.max_fes
        steps = np.diff([0] + used)
        assert (steps >= 1).all() and (steps <= config.batch_size).all()

    def test_zero_budget_keeps_only_initial_design(self):
        record = run_dmi(ExperimentConfig(**{**SMALL, "max_fes": 0}))
        assert record.evaluations == record.config.resolved_initial_size
        assert record.iterations == ()
        assert record.final_hypervolume == record.initial_hypervolume

    def test_deterministic_given_seed(self):
        a = run_dmi(ExperimentConfig(**SMALL))
        b = run_dmi(ExperimentConfig(**SMALL))
        assert np.array_equal(a.archive.X, b.archive.X)
        assert np.array_equal(a.archive.F, b.archive.F)
        assert a.final_hypervolume == b.final_hypervolume
        assert [log.archive_hypervolume for log in a.iterations] == [
            log.archive_hypervolume for log in b.iterations
        ]

    def test_seed_changes_trajectory(self, small_record):
        other = run_dmi(ExperimentConfig(**{**SMALL, "seed": 6}))
        assert not np.array_equal(other.archive.X, small_record.archive.X)

    def test_archive_hypervolume_never_decreases(self, small_record):
        series = [small_record.initial_hypervolume] + [
            log.archive_hypervolume for log in small_record.iterations
        ]
        assert all(a <= b for a, b in zip(series, series[1:]))
        assert small_record.final_hypervolume == series[-1]

    def test_front_is_nondominated_subset_of_archive(self, small_record):
        front = small_record.front
        archive = small_record.archive
        assert len(front) >= 1
        # every front row appears somewhere in the archive
        for row in front.F:
            assert (np.abs(archive.F - row).max(axis=1) < 1e-15).any()
        # no archive member dominates a front member
        for row in front.F:
            strictly_better = (archive.F <= row).all(axis=1) & (
                archive.F < row
            ).any(axis=1)
            assert not strictly_better.any()

    def test_all_sources_are_true_evaluations(self, small_record):
        assert (small_record.archive.sources == Source.TRUE_EVALUATION.value).all()

    def test_batches_stay_inside_bounds(self, small_record):
        bounds = make_problem("zdt31", SMALL["n_var"]).bounds
        for log in small_record.iterations:
            assert (log.batch_x >= bounds.lower).all()
            assert (log.batch_x <= bounds.upper).all()

    def test_gp_parameters_logged_per_objective(self, small_record):
        for log in small_record.iterations:
            assert len(log.gp_parameters) == 2
            for amplitude, length_scale, jitter in log.gp_parameters:
                assert amplitude > 0 and length_scale > 0 and jitter > 0

    def test_ablation_disables_interpolation_but_stays_deterministic(self):
        ablated = ExperimentConfig(**{**SMALL, "interpolation_enabled": False})
        a = run_dmi(ablated)
        b = run_dmi(ablated)
        assert np.array_equal(a.archive.X, b.archive.X)
        assert a.evaluations == a.config.resolved_initial_size + SMALL["max_fes"]
        with_interp = run_dmi(ExperimentConfig(**SMALL))
        assert not np.array_equal(a.archive.X, with_interp.archive.X)

    def test_final_hypervolume_beats_initial_design(self):
        record = run_dmi(
            ExperimentConfig(**{**SMALL, "max_fes": 30, "generations": 20})
        )
        assert record.final_hypervolume > record.initial_hypervolume

    def test_small_pool_is_padded_with_fresh_points(self):
        record = run_dmi(
            ExperimentConfig(
                problem="zdt31",
                n_var=5,
                optimizer="moead",
                selector="ihv",
                seed=2,
                max_fes=10,
                generations=0,
                population_size=2,
                interpolation_enabled=False,
            )
        )
        (log,) = record.iterations
        assert log.padded_from_lhs >= 8
        assert len(log.batch_x) == 10
        assert record.evaluations == record.config.resolved_initial_size + 10

    def test_moead_native_selector_carries_subproblem_bests(self):
        record = run_dmi(ExperimentConfig(**{**SMALL, "selector": "native"}))
        assert record.evaluations == record.config.resolved_initial_size + 20

    def test_reference_front_is_shared_and_cached(self, small_record):
        spec = make_problem("zdt31", SMALL["n_var"])
        pf = reference_front(spec)
        assert pf is reference_front(spec)
        assert np.array_equal(pf.F, small_record.reference_front.F)
        assert len(pf) == 1000


class TestHelpers:
    def test_dedup_walk_skips_taken_points(self):
        pool = np.array([[0.5, 0.5], [0.2, 0.2], [0.50000001, 0.5], [0.9, 0.1]])
        taken = np.array([[0.2, 0.2]])
        ranking = np.array([0, 2, 1, 3])
        chosen = _dedup_walk(pool, ranking, taken, 2)
        # index 2 collides with the already-chosen index 0; index 1 with taken
        assert chosen == [0, 3]

    def test_dedup_walk_returns_short_list_when_pool_exhausted(self):
        pool = np.array([[0.3, 0.3], [0.3, 0.3]])
        chosen = _dedup_walk(pool, np.array([0, 1]), np.empty((0, 2)), 2)
        assert chosen == [0]

    def test_initial_subproblem_bests_match_direct_scan(self):
        rng = np.random.default_rng(0)
        F = rng.uniform(size=(40, 2))
        weights = das_dennis_weights(2, 9)
        bests = _initial_subproblem_bests(F, weights)
        z = F.min(axis=0)
        for k, w in enumerate(weights.vectors):
            direct = min(
                float(np.max(np.abs(f - z) / np.maximum(w, MIN_WEIGHT))) for f in F
            )
            assert bests[k] == pytest.approx(direct, abs=1e-12)

    def test_thread_count_env_override(self, monkeypatch):
        monkeypatch.delenv("EMOBATCH_THREADS", raising=False)
        assert _thread_count() == 1
        monkeypatch.setenv("EMOBATCH_THREADS", "4")
        assert _thread_count() == 4
        monkeypatch.setenv("EMOBATCH_THREADS", "zero")
        with pytest.raises(ConfigError):
            _thread_count()
        monkeypatch.setenv("EMOBATCH_THREADS", "0")
        with pytest.raises(ConfigError):
            _thread_count()

    def test_threaded_evaluation_matches_sequential(self, monkeypatch):
        sequential = run_dmi(ExperimentConfig(**{**SMALL, "max_fes": 10}))
        monkeypatch.setenv("EMOBATCH_THREADS", "3")
        threaded = run_dmi(ExperimentConfig(**{**SMALL, "max_fes": 10}))
        assert np.array_equal(sequential.archive.X, threaded.archive.X)
        assert np.array_equal(sequential.archive.F, threaded.archive.F)


class TestPersistence:
    def test_record_round_trip_is_exact(self, small_record, tmp_path):
        path = save_record(small_record, tmp_path / "record.json")
        loaded = load_record(path)
        assert loaded.config == small_record.config
        assert np.array_equal(loaded.archive.X, small_record.archive.X)
        assert np.array_equal(loaded.archive.F, small_record.archive.F)
        assert np.array_equal(loaded.front.F, small_record.front.F)
        assert loaded.final_hypervolume == small_record.final_hypervolume
        assert loaded.initial_hypervolume == small_record.initial_hypervolume
        assert loaded.coverage == small_record.coverage
        assert np.array_equal(loaded.reference_point, small_record.reference_point)
        assert len(loaded.iterations) == len(small_record.iterations)
        for a, b in zip(loaded.iterations, small_record.iterations):
            assert a.evaluations_used == b.evaluations_used
            assert a.archive_hypervolume == b.archive_hypervolume
            assert np.array_equal(a.batch_x, b.batch_x)
            assert a.gp_parameters == b.gp_parameters

    def test_record_dict_survives_json(self, small_record):
        data = json.loads(json.dumps(record_to_dict(small_record)))
        rebuilt = record_from_dict(data)
        assert rebuilt.final_hypervolume == small_record.final_hypervolume
        assert np.array_equal(rebuilt.archive.X, small_record.archive.X)

    def test_emit_front_writes_front_and_true_front(self, small_record, tmp_path):
        path = emit_front(small_record, tmp_path / "front.csv")
        front = read_objective_csv(path)
        assert front.shape == small_record.front.F.shape
        assert front.shape[1] == 2
        assert front.shape[0] >= 1
        companion = tmp_path / "front_pf.csv"
        assert companion.exists()
        pf = read_objective_csv(companion)
        assert pf.shape == small_record.reference_front.F.shape

    def test_front_csv_round_trips_hypervolume(self, small_record, tmp_path):
        path = emit_front(small_record, tmp_path / "front.csv")
        replayed = hypervolume(
            read_objective_csv(path), small_record.reference_point
        )
        assert replayed == pytest.approx(
            small_record.final_hypervolume, abs=1e-9
        )

    def test_emit_front_unwritable_path_raises(self, small_record, tmp_path):
        with pytest.raises(OSError):
            emit_front(small_record, tmp_path / "missing_dir" / "front.csv")

    def test_read_objective_csv_requires_data(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("f1,f2\n")
        with pytest.raises(ValueError):
            read_objective_csv(path)


SUITE_DATA = {
    "problems": [{"name": "zdt31", "n": 5}],
    "instances": [
        {"optimizer": "moead", "selector": "ihv"},
        {
            "optimizer": "moead",
            "selector": "ihv",
            "interpolation": False,
            "label": "moead-ihv-ablated",
        },
    ],
    "seeds": [1, 2],
    "overrides": {"max_fes": 10, "generations": 5},
}


class TestSuite:
    def test_suite_config_validation(self):
        suite = SuiteConfig.from_dict(SUITE_DATA)
        assert suite.problems == (("zdt31", 5),)
        assert suite.instances[1].resolved_label() == "moead-ihv-ablated"
        assert suite.instances[0].resolved_label() == "dmi-moead-ihv"
        with pytest.raises(ConfigError):
            SuiteConfig.from_dict({**SUITE_DATA, "bogus": 1})
        with pytest.raises(ConfigError):
            SuiteConfig.from_dict({**SUITE_DATA, "seeds": []})
        with pytest.raises(ConfigError):
            SuiteConfig.from_dict(
                {**SUITE_DATA, "overrides": {"seed": 4}}
            )

    def test_suite_runs_and_summarizes(self, tmp_path):
        suite = SuiteConfig.from_dict(SUITE_DATA)
        records = run_suite(suite, tmp_path)
        assert len(records) == 4
        names = sorted(p.name for p in tmp_path.glob("*.json"))
        assert names == [
            "zdt31_dmi-moead-ihv_s1.json",
            "zdt31_dmi-moead-ihv_s2.json",
            "zdt31_moead-ihv-ablated_s1.json",
            "zdt31_moead-ihv-ablated_s2.json",
        ]
        lines = (tmp_path / "summary.csv").read_text(encoding="utf-8").splitlines()
        assert len(lines) == 5
        assert lines[0].startswith("problem,n_var,instance,seed,status")
        assert all(",ok," in line for line in lines[1:])

    def test_suite_summaries_bit_identical(self, tmp_path):
        suite = SuiteConfig.from_dict(SUITE_DATA)
        run_suite(suite, tmp_path / "first")
        run_suite(suite, tmp_path / "second")
        first = (tmp_path / "first" / "summary.csv").read_bytes()
        second = (tmp_path / "second" / "summary.csv").read_bytes()
        assert first == second

    def test_suite_records_failures_and_continues(self, tmp_path):
        data = {
            **SUITE_DATA,
            "problems": [{"name": "zdt31", "n": 5}, {"name": "zdt31", "n": 1}],
            "instances": [{"optimizer": "moead", "selector": "ihv"}],
            "seeds": [1],
        }
        records = run_suite(SuiteConfig.from_dict(data), tmp_path)
        assert len(records) == 1
        lines = (tmp_path / "summary.csv").read_text(encoding="utf-8").splitlines()
        assert len(lines) == 3
        statuses = [line.split(",")[4] for line in lines[1:]]
        assert statuses == ["ok", "failed"]

    def test_replaying_a_config_reproduces_summary_numbers(self, tmp_path):
        suite = SuiteConfig.from_dict(
            {**SUITE_DATA, "seeds": [1], "instances": [SUITE_DATA["instances"][0]]}
        )
        (record,) = run_suite(suite, tmp_path)
        replay = run_dmi(record.config)
        assert replay.final_hypervolume == record.final_hypervolume
        assert replay.initial_hypervolume == record.initial_hypervolume
        assert replay.coverage == record.coverage


class TestCli:
    @pytest.fixture()
    def config_file(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(json.dumps({**SMALL, "max_fes": 10, "generations": 5}))
        return path

    def test_run_writes_record_and_front(self, config_file, tmp_path, capsys):
        out = tmp_path / "out"
        code = cli_main(
            ["run", "--config", str(config_file), "--out", str(out)]
        )
        assert code == 0
        assert (out / "zdt31_dmi-moead-ihv_s5.json").exists()
        assert (out / "zdt31_dmi-moead-ihv_s5_front.csv").exists()
        assert (out / "zdt31_dmi-moead-ihv_s5_front_pf.csv").exists()
        assert "final_hv=" in capsys.readouterr().out

    def test_run_seed_and_interpolation_overrides(self, config_file, tmp_path):
        out = tmp_path / "out"
        code = cli_main(
            [
                "run",
                "--config",
                str(config_file),
                "--seed",
                "77",
                "--no-interpolation",
                "--out",
                str(out),
            ]
        )
        assert code == 0
        record = load_record(out / "zdt31_moead-ihv_s77.json")
        assert record.config.seed == 77
        assert not record.config.interpolation_enabled

    def test_run_bad_config_exits_two(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({**SMALL, "optimizer": "annealing"}))
        code = cli_main(["run", "--config", str(path), "--out", str(tmp_path)])
        assert code == 2
        assert "configuration error" in capsys.readouterr().err

    def test_run_missing_config_exits_one(self, tmp_path, capsys):
        code = cli_main(
            ["run", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path)]
        )
        assert code == 1
        assert "error" in capsys.readouterr().err

    def test_hv_golden_staircase(self, tmp_path, capsys):
        front = tmp_path / "front.csv"
        front.write_text("f1,f2\n1.0,3.0\n2.0,2.0\n3.0,1.0\n")
        code = cli_main(
            ["hv", "--front", str(front), "--ref", "4", "--ref", "4"]
        )
        assert code == 0
        assert float(capsys.readouterr().out.strip()) == 6.0

    def test_hv_reference_arity_mismatch_exits_one(self, tmp_path, capsys):
        front = tmp_path / "front.csv"
        front.write_text("f1,f2\n1.0,3.0\n")
        code = cli_main(["hv", "--front", str(front), "--ref", "4"])
        assert code == 1
        assert "reference" in capsys.readouterr().err

    def test_stats_compares_two_columns(self, tmp_path, capsys):
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        a.write_text("hv\n" + "\n".join(str(0.9 + 0.01 * i) for i in range(8)) + "\n")
        b.write_text("hv\n" + "\n".join(str(0.5 + 0.01 * i) for i in range(8)) + "\n")
        code = cli_main(["stats", "--a", str(a), "--b", str(b)])
        assert code == 0
        out = capsys.readouterr().out
        assert "p_value=" in out and "a12=" in out
        assert "magnitude=large" in out

    def test_front_subcommand_round_trips(self, config_file, tmp_path, capsys):
        out = tmp_path / "out"
        cli_main(["run", "--config", str(config_file), "--out", str(out)])
        capsys.readouterr()
        target = tmp_path / "replay.csv"
        code = cli_main(
            [
                "front",
                "--record",
                str(out / "zdt31_dmi-moead-ihv_s5.json"),
                "--out",
                str(target),
            ]
        )
        assert code == 0
        original = (out / "zdt31_dmi-moead-ihv_s5_front.csv").read_bytes()
        assert target.read_bytes() == original

    def test_suite_subcommand(self, tmp_path, capsys):
        suite_path = tmp_path / "suite.json"
        suite_path.write_text(
            json.dumps(
                {
                    **SUITE_DATA,
                    "seeds": [1],
                    "instances": [SUITE_DATA["instances"][0]],
                    "overrides": {"max_fes": 5, "generations": 5},
                }
            )
        )
        out = tmp_path / "suite_out"
        code = cli_main(["suite", "--config", str(suite_path), "--out", str(out)])
        assert code == 0
        assert (out / "summary.csv").exists()
        assert "1 of 1 runs succeeded" in capsys.readouterr().out

    def test_suite_with_failures_exits_one(self, tmp_path, capsys):
        suite_path = tmp_path / "suite.json"
        suite_path.write_text(
            json.dumps(
                {
                    "problems": [{"name": "zdt31", "n": 1}],
                    "instances": [{"optimizer": "moead", "selector": "ihv"}],
                    "seeds": [1],
                    "overrides": {"max_fes": 5, "generations": 5},
                }
            )
        )
        code = cli_main(
            ["suite", "--config", str(suite_path), "--out", str(tmp_path / "o")]
        )
        assert code == 1
        assert "failed" in capsys.readouterr().err
