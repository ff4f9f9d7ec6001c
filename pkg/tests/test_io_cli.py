"""Event-file ingestion, unit handling, CLI subcommands and exit codes."""

import json

import numpy as np
import pytest

from hawkesmom import (
    EmptyFile,
    NegativeTimestamp,
    ParseError,
    convert_unit,
    parse_events,
    validate_params,
)
from hawkesmom.cli import (
    EXIT_CAPACITY,
    EXIT_CONVERGENCE,
    EXIT_OK,
    EXIT_PARSE,
    RunConfig,
    cmd_estimate,
    cmd_moments,
    cmd_simulate,
    cmd_validate,
    main,
)


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


class TestParseEvents:
    def test_header_and_ties(self, tmp_path):
        path = write(tmp_path, "ev.txt", "t\n0.5\n1.0\n1.0\n")
        seq = parse_events(path)
        assert list(seq.times) == [0.5, 1.0, 1.0]
        assert seq.horizon == 1.0
        assert seq.unit == "minutes"

    def test_no_header(self, tmp_path):
        path = write(tmp_path, "ev.txt", "0.25\n2.5\n")
        assert list(parse_events(path).times) == [0.25, 2.5]

    def test_unsorted_sorted_with_warning(self, tmp_path):
        path = write(tmp_path, "ev.txt", "2\n1\n")
        with pytest.warns(UserWarning, match="sort"):
            seq = parse_events(path)
        assert list(seq.times) == [1.0, 2.0]

    def test_parse_error_reports_line(self, tmp_path):
        path = write(tmp_path, "ev.txt", "t\n1.0\nbogus\n2.0\n")
        with pytest.raises(ParseError) as excinfo:
            parse_events(path)
        assert excinfo.value.line_number == 3

    def test_negative_timestamp(self, tmp_path):
        path = write(tmp_path, "ev.txt", "1.0\n-0.5\n")
        with pytest.raises(NegativeTimestamp):
            parse_events(path)

    def test_empty_file(self, tmp_path):
        path = write(tmp_path, "ev.txt", "t\n\n")
        with pytest.raises(EmptyFile):
            parse_events(path)

    def test_cascade_shape_horizon(self, tmp_path):
        # 448 events spread over 600 minutes: horizon from the data
        rng = np.random.default_rng(4)
        times = np.sort(rng.uniform(0.0, 600.0, size=447))
        lines = "\n".join(repr(float(t)) for t in [*times, 600.0])
        path = write(tmp_path, "cascade.txt", "t\n" + lines + "\n")
        seq = parse_events(path, unit="minutes")
        assert len(seq) == 448
        assert seq.horizon == 600.0

    def test_horizon_truncation_flagged(self, tmp_path):
        path = write(tmp_path, "ev.txt", "1.0\n5.0\n9.0\n")
        with pytest.warns(UserWarning, match="dropping"):
            seq = parse_events(path, horizon=6.0)
        assert list(seq.times) == [1.0, 5.0]
        assert seq.horizon == 6.0

    def test_unit_round_trip(self, tmp_path):
        rng = np.random.default_rng(9)
        minutes = np.sort(rng.uniform(0, 30, size=50))
        p_min = write(tmp_path, "minutes.txt", "\n".join(repr(float(t)) for t in minutes))
        p_sec = write(tmp_path, "seconds.txt", "\n".join(repr(float(t) * 60.0) for t in minutes))
        direct = parse_events(p_min, unit="minutes")
        converted = convert_unit(parse_events(p_sec, unit="seconds"), "minutes")
        assert np.allclose(converted.times, direct.times, rtol=1e-12, atol=0.0)
        assert converted.horizon == pytest.approx(direct.horizon, rel=1e-12)

    def test_unknown_unit_conversion_rejected(self, tmp_path):
        path = write(tmp_path, "ev.txt", "1.0\n")
        seq = parse_events(path, unit="fortnights")
        with pytest.raises(ValueError):
            convert_unit(seq, "minutes")


class TestCmdSimulate:
    def test_deterministic_byte_identical(self, tmp_path):
        cfgs = [RunConfig(command="simulate", alpha=0.15, beta=1.0, lambda_inf=1.0,
                          lambda0=1.2, horizon=20.0, seed=7, grid_step=0.01,
                          out_dir=tmp_path / d) for d in ("a", "b")]
        files_a = cmd_simulate(cfgs[0])
        files_b = cmd_simulate(cfgs[1])
        for fa, fb in zip(files_a, files_b):
            assert fa.read_bytes() == fb.read_bytes()

    def test_poisson_run_intensity_bounds(self, tmp_path):
        cfg = RunConfig(command="simulate", alpha=0.0, beta=1.0, lambda_inf=1.0,
                        lambda0=1.4, horizon=15.0, seed=3, out_dir=tmp_path)
        _, intensity_path = cmd_simulate(cfg)
        rows = intensity_path.read_text().strip().splitlines()[1:]
        values = np.array([float(r.split(",")[1]) for r in rows])
        assert np.all(values >= 1.0 - 1e-12) and np.all(values <= 1.4 + 1e-12)

    def test_grid_row_count(self, tmp_path):
        cfg = RunConfig(command="simulate", alpha=0.2, beta=1.0, lambda_inf=1.0,
                        horizon=20.0, seed=5, grid_step=0.01, out_dir=tmp_path)
        _, intensity_path = cmd_simulate(cfg)
        rows = intensity_path.read_text().strip().splitlines()
        assert len(rows) - 1 == int(20.0 / 0.01) + 1

    def test_events_file_round_trips(self, tmp_path):
        cfg = RunConfig(command="simulate", alpha=0.2, beta=1.0, lambda_inf=1.0,
                        horizon=50.0, seed=11, out_dir=tmp_path)
        events_path, _ = cmd_simulate(cfg)
        seq = parse_events(events_path, horizon=50.0)
        assert len(seq) > 0

    def test_seed_required(self, tmp_path, monkeypatch):
        monkeypatch.delenv("HAWKES_SEED", raising=False)
        cfg = RunConfig(command="simulate", alpha=0.2, beta=1.0, lambda_inf=1.0,
                        horizon=10.0, out_dir=tmp_path)
        with pytest.raises(ValueError, match="seed"):
            cmd_simulate(cfg)

    def test_env_seed_fallback_and_flag_precedence(self, tmp_path, monkeypatch):
        monkeypatch.setenv("HAWKES_SEED", "123")
        cfg_env = RunConfig(command="simulate", alpha=0.2, beta=1.0, lambda_inf=1.0,
                            horizon=30.0, out_dir=tmp_path / "env")
        cfg_flag = RunConfig(command="simulate", alpha=0.2, beta=1.0, lambda_inf=1.0,
                             horizon=30.0, seed=123, out_dir=tmp_path / "flag")
        a = cmd_simulate(cfg_env)[0].read_bytes()
        b = cmd_simulate(cfg_flag)[0].read_bytes()
        assert a == b
        cfg_diff = RunConfig(command="simulate", alpha=0.2, beta=1.0, lambda_inf=1.0,
                             horizon=30.0, seed=124, out_dir=tmp_path / "diff")
        assert cmd_simulate(cfg_diff)[0].read_bytes() != a


class TestCmdMoments:
    def test_payload(self, capsys):
        cfg = RunConfig(command="moments", alpha=0.2, beta=1.0, lambda_inf=1.0, delta=0.5)
        payload = cmd_moments(cfg)
        assert payload["m1"] == pytest.approx(0.625)
        assert payload["m2"] == pytest.approx(1.0774297279610112)
        assert payload["Lambda2"] == pytest.approx(1.59375)
        printed = json.loads(capsys.readouterr().out)
        assert printed == payload


class TestCmdEstimate:
    def _events_file(self, tmp_path, seed=21, horizon=4000.0):
        from hawkesmom import simulate_exact
        from hawkesmom.io import write_events

        p = validate_params(0.2, 1.0, 1.0, 1.0)
        traj = simulate_exact(p, horizon, seed)
        return write_events(tmp_path / "events.txt", traj.events)

    def test_report_schema(self, tmp_path):
        path = self._events_file(tmp_path)
        cfg = RunConfig(command="estimate", events_path=path, delta=0.5, t0=500.0,
                        init=(0.5, 1.5, 2.0), out_dir=tmp_path, unit="unitless")
        report = cmd_estimate(cfg)
        data = json.loads((tmp_path / "estimate.json").read_text())
        assert set(data["params_hat"]) == {"alpha", "beta", "lambda_inf"}
        for key in ("residual_norm", "iterations", "converged", "window_stats"):
            assert key in data
        assert set(data["window_stats"]) == {"m1", "m2", "m3", "delta", "count", "t0"}
        assert data["converged"] == report.converged
        assert data["params_hat"]["alpha"] == report.params_hat.alpha

    def test_retweet_workflow_shape(self, tmp_path):
        # minute-unit cascade fit with the documented starting point
        from hawkesmom import simulate_exact
        from hawkesmom.io import write_events

        p = validate_params(0.772, 1.133, 0.243, 0.243)
        traj = simulate_exact(p, 600.0, 13, unit="minutes")
        path = write_events(tmp_path / "cascade.txt", traj.events)
        cfg = RunConfig(command="estimate", events_path=path, delta=1.0 / 60.0,
                        t0=0.0, init=(0.5, 1.5, 0.75), out_dir=tmp_path)
        with pytest.warns(UserWarning):
            report = cmd_estimate(cfg)
        hat = report.params_hat
        assert hat.beta > hat.alpha > 0.0 and hat.lambda_inf > 0.0
        assert "t0_in_transient" in report.flags


class TestCmdValidate:
    def test_small_harness_with_partial_failures(self, tmp_path):
        # tiny horizon: some runs cannot even fill windows; harness keeps going
        cfg = RunConfig(command="validate", alpha=0.2, beta=1.0, lambda_inf=1.0,
                        horizon=12.0, seed=2, count=2, delta=0.5, t0=0.0,
                        out_dir=tmp_path)
        import warnings

        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            harness = cmd_validate(cfg)
        assert len(harness.reports) == 2
        table = (tmp_path / "table.csv").read_text().strip().splitlines()
        assert table[0] == "run,alpha_hat,beta_hat,lambda_inf_hat,converged"
        assert len(table) == 3

    def test_envelope_shape_and_overlay(self, tmp_path):
        from hawkesmom import simulate_exact
        from hawkesmom.io import write_events

        p = validate_params(0.772, 1.133, 0.243, 0.243)
        real = simulate_exact(p, 600.0, 99, unit="minutes")
        real_path = write_events(tmp_path / "real.txt", real.events)
        cfg = RunConfig(command="validate", alpha=0.772, beta=1.133, lambda_inf=0.243,
                        lambda0=0.243, horizon=600.0, seed=1, count=20, delta=1.0 / 60.0,
                        t0=0.0, out_dir=tmp_path, envelope=True, envelope_step=1.0,
                        real_events_path=real_path)
        import warnings

        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            harness = cmd_validate(cfg)
        assert harness.envelope_counts.shape == (20, 601)
        assert harness.real_counts is not None
        header = (tmp_path / "envelope.csv").read_text().splitlines()[0].split(",")
        assert header == ["t"] + [f"run_{i}" for i in range(20)] + ["real"]
        # cumulative counts are nondecreasing along the grid
        assert np.all(np.diff(harness.envelope_counts, axis=1) >= 0)

    def test_summary_over_converged_only(self, tmp_path):
        cfg = RunConfig(command="validate", alpha=0.2, beta=1.0, lambda_inf=1.0,
                        horizon=3000.0, seed=10, count=3, delta=0.5, t0=500.0,
                        out_dir=tmp_path)
        harness = cmd_validate(cfg)
        data = json.loads((tmp_path / "validate.json").read_text())
        assert data["summary"]["total_runs"] == 3
        assert data["summary"]["converged_runs"] == len(harness.reports) - len(harness.non_converged)

    def test_byte_identical_outputs(self, tmp_path):
        outs = []
        for d in ("x", "y"):
            cfg = RunConfig(command="validate", alpha=0.2, beta=1.0, lambda_inf=1.0,
                            horizon=2000.0, seed=6, count=2, delta=0.5, t0=500.0,
                            out_dir=tmp_path / d)
            cmd_validate(cfg)
            outs.append(tmp_path / d)
        for name in ("table.csv", "validate.json"):
            assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()

    def test_cluster_method(self, tmp_path):
        cfg = RunConfig(command="simulate", alpha=0.2, beta=1.0, lambda_inf=1.0,
                        horizon=100.0, seed=8, method="cluster", out_dir=tmp_path)
        events_path, _ = cmd_simulate(cfg)
        seq = parse_events(events_path, horizon=100.0)
        assert len(seq) > 0


class TestMainExitCodes:
    def test_ok(self, tmp_path):
        code = main(["simulate", "--alpha", "0.2", "--beta", "1.0", "--lambda-inf", "1.0",
                     "--horizon", "10", "--seed", "4", "--out-dir", str(tmp_path)])
        assert code == EXIT_OK

    def test_parse_error(self, tmp_path):
        bad = write(tmp_path, "bad.txt", "t\nnot-a-number\n")
        code = main(["estimate", "--events", str(bad), "--delta", "0.5",
                     "--out-dir", str(tmp_path)])
        assert code == EXIT_PARSE

    def test_convergence_error(self, tmp_path):
        # two events cannot fill a single window beyond t0
        sparse = write(tmp_path, "sparse.txt", "t\n0.2\n0.4\n")
        code = main(["estimate", "--events", str(sparse), "--delta", "0.5",
                     "--t0", "0.4", "--out-dir", str(tmp_path)])
        assert code == EXIT_CONVERGENCE

    def test_capacity_error(self, tmp_path):
        code = main(["simulate", "--alpha", "0.95", "--beta", "1.0",
                     "--lambda-inf", "5.0", "--horizon", "5000", "--seed", "1",
                     "--cap", "500", "--out-dir", str(tmp_path)])
        assert code == EXIT_CAPACITY

    def test_validation_error(self, tmp_path):
        code = main(["simulate", "--alpha", "1.5", "--beta", "1.0",
                     "--lambda-inf", "1.0", "--horizon", "10", "--seed", "1",
                     "--out-dir", str(tmp_path)])
        assert code == 1

    def test_moments_ok(self):
        assert main(["moments", "--alpha", "0.2", "--beta", "1.0",
                     "--lambda-inf", "1.0", "--delta", "0.5"]) == EXIT_OK
