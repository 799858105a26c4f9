import dataclasses

import numpy as np
import pytest

from fbc2c.config import (BasisSpec, DatasetSpec, EncodeSpec, ExperimentConfig,
                          NetSpec, config_to_dict)
from fbc2c.errors import ConfigurationError
from fbc2c.experiment import (compare_vector_scalar, eval_resolutions,
                              evaluate_on, load_checkpoint, prepare_data, run,
                              sweep_cutoff)
from fbc2c.neuralop import TrainConfig


def _darcy_config(**overrides):
    base = dict(
        dataset=DatasetSpec(kind="darcy1d", n=120, m_train=16, m_test=8, seed=3),
        input_basis=BasisSpec(kind="rfm", partitions=[4], features_per_partition=8,
                              range_bound=3.0, seed=1, bounds=[[0.0, 1.0]]),
        output_basis=BasisSpec(kind="rfm", partitions=[2], features_per_partition=6,
                               range_bound=3.0, seed=2, bounds=[[0.0, 1.0]]),
        input_encode=EncodeSpec(method="tsvd", cut=1e-2),
        output_encode=EncodeSpec(method="tsvd", cut=1e-8),
        net=NetSpec(hidden=24, seed=5),
        train=TrainConfig(epochs=60, seed=6, eval_interval=30),
    )
    base.update(overrides)
    return ExperimentConfig(**base)


@pytest.fixture(scope="module")
def darcy_result():
    return run(_darcy_config())


def test_run_report_fields_populated(darcy_result):
    report = darcy_result.report
    assert np.isfinite(report.final_test_error)
    assert report.test_error_per_sample.shape == (8,)
    assert np.isfinite(report.projection.mean)
    assert report.erank is not None and report.erank >= 1.0
    assert report.variance_entropy is not None
    assert report.input_dim == 32 and report.output_dim == 12
    assert report.n_parameters == darcy_result.net.n_parameters
    assert report.wall_seconds > 0
    assert len(report.config_hash) == 16


def test_run_is_deterministic_except_wall_clock():
    r1 = run(_darcy_config())
    r2 = run(_darcy_config())
    assert r1.report.final_test_error == r2.report.final_test_error
    assert np.array_equal(r1.report.test_error_per_sample,
                          r2.report.test_error_per_sample)
    assert np.array_equal(r1.net.flat_parameters(), r2.net.flat_parameters())
    assert np.array_equal(r1.trace.train_loss, r2.trace.train_loss)


def test_projection_bound_per_sample(darcy_result):
    report = darcy_result.report
    ok = ~np.isnan(report.projection.per_sample)
    assert np.all(report.test_error_per_sample[ok]
                  >= report.projection.per_sample[ok] - 1e-9)


def test_fem_output_at_grid_nodes_gives_zero_projection():
    cfg = _darcy_config(
        output_basis=BasisSpec(kind="fem", n_nodes=120),
        output_encode=EncodeSpec(method="ridge", lam=0.0),
    )
    result = run(cfg)
    assert result.report.projection.mean < 1e-10


def test_p2c_flag_changes_only_input_side():
    c2c = _darcy_config()
    p2c = _darcy_config(p2c=True)
    d1, d2 = config_to_dict(c2c), config_to_dict(p2c)
    diff = {k for k in d1 if d1[k] != d2[k]}
    assert diff == {"p2c"}
    r = run(p2c)
    assert r.report.input_dim == 120           # raw point values feed the net
    assert r.report.erank is None
    r2 = run(c2c)
    assert r2.report.input_dim == 32           # coefficients feed the net


def test_sweep_singleton_matches_run():
    cfg = _darcy_config()
    table = sweep_cutoff(cfg, [cfg.input_encode.cut], keep_results=True)
    assert len(table.rows) == 1
    row = table.rows[0]
    single = run(cfg)
    assert row.final_test_error == single.report.final_test_error
    assert row.erank == single.report.erank


def test_sweep_reuses_dataset_and_orders_rows(tmp_path):
    cfg = _darcy_config(train=TrainConfig(epochs=0, seed=6))
    table = sweep_cutoff(cfg, [1e-6, 1e-2])
    assert [r.cut for r in table.rows] == [1e-6, 1e-2]
    csv_path = tmp_path / "sweep.csv"
    table.write_csv(csv_path)
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "cut,erank,variance_entropy,final_test_error"
    assert len(lines) == 3
    with pytest.raises(ConfigurationError):
        sweep_cutoff(cfg, [])
    with pytest.raises(ConfigurationError):
        sweep_cutoff(_darcy_config(p2c=True), [1e-2])


def test_evaluate_on_reproduces_test_error(darcy_result):
    mean, per = evaluate_on(darcy_result, darcy_result.data.test)
    assert mean == pytest.approx(darcy_result.report.final_test_error, rel=1e-12)
    assert np.array_equal(per, darcy_result.report.test_error_per_sample)


def test_eval_resolutions_basic(darcy_result):
    table = eval_resolutions(darcy_result, [40, 120])
    assert set(table) == {40, 120}
    assert all(np.isfinite(v) for v in table.values())
    # evaluation at the training resolution is statistically consistent with
    # the run's own test error (fresh draws from the same distribution)
    assert table[120] == pytest.approx(darcy_result.report.final_test_error, rel=0.8)
    with pytest.raises(ConfigurationError):
        eval_resolutions(darcy_result, [])


def test_eval_resolutions_rejects_p2c():
    result = run(_darcy_config(p2c=True))
    with pytest.raises(ConfigurationError):
        eval_resolutions(result, [40])


def test_artifacts_round_trip(tmp_path, darcy_result):
    outdir = tmp_path / "art"
    from fbc2c.experiment import write_artifacts
    write_artifacts(darcy_result, outdir)
    net = load_checkpoint(outdir / "checkpoint.fbc")
    assert np.array_equal(net.flat_parameters(), darcy_result.net.flat_parameters())
    lines = (outdir / "traces.csv").read_text().splitlines()
    assert lines[0] == "epoch,train_rel_err,test_rel_err,lr"
    assert len(lines) == 61
    from fbc2c.config import load_config
    loaded = load_config(outdir / "config.json")
    assert config_to_dict(loaded) == config_to_dict(darcy_result.config)
    report_text = (outdir / "report.txt").read_text()
    assert "final_test_relative_error" in report_text


# ---------------------------------------------------------------------------
# multi-component datasets


def _multi_config(**overrides):
    base = dict(
        dataset=DatasetSpec(kind="multi_output_1d", n=60, m_train=12, m_test=6, seed=9),
        input_basis=BasisSpec(kind="rfm", partitions=[2], features_per_partition=8,
                              range_bound=3.0, seed=1, bounds=[[0.0, 1.0]]),
        output_basis=BasisSpec(kind="rfm", partitions=[2], features_per_partition=5,
                               range_bound=3.0, seed=2, bounds=[[0.0, 1.0]]),
        input_encode=EncodeSpec(method="tsvd", cut=1e-2),
        output_encode=EncodeSpec(method="tsvd", cut=1e-8),
        net=NetSpec(hidden=16, seed=5),
        train=TrainConfig(epochs=40, seed=6),
    )
    base.update(overrides)
    return ExperimentConfig(**base)


def test_vector_and_scalar_output_dims():
    scalar = run(_multi_config(output_mode="scalar"))
    vector = run(_multi_config(output_mode="vector"))
    assert scalar.report.output_dim == 20      # C * m2 coefficient blocks
    assert vector.report.output_dim == 10      # shared coefficients
    assert (scalar.net.n_parameters - vector.net.n_parameters) == 10 * 16


def test_compare_vector_scalar_on_multi_output():
    comparison = compare_vector_scalar(_multi_config())
    assert comparison.parameter_difference == 10 * 16
    assert comparison.scalar.report.final_test_error > 0
    assert comparison.vector.report.final_test_error > 0
    assert len(comparison.seconds_per_epoch) == 2


def test_compare_vector_scalar_single_component_degenerates():
    comparison = compare_vector_scalar(_darcy_config())
    assert comparison.scalar.report.final_test_error == comparison.vector.report.final_test_error
    assert comparison.parameter_difference == 0


def test_prepare_data_highd_splits():
    prepared = prepare_data(DatasetSpec(kind="highd_poisson", d=3, n_points=50, seed=2))
    assert prepared.train.n_samples == 8
    assert prepared.test.n_samples == 2
    assert prepared.extra["gen2"].n_samples == 10
