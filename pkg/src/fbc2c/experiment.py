"""End-to-end orchestration: encode, train, evaluate, and the paper-style studies.

``run`` executes one full pipeline and returns a RunResult whose report
carries the test error, the output-space projection floor, and the input
coefficient diagnostics.  ``sweep_cutoff``, ``eval_resolutions`` and
``compare_vector_scalar`` drive the cutoff sensitivity, resolution transfer,
and scalar-vs-vector-output studies on top of it.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import datagen
from .basis import VectorBasis
from .config import (BasisSpec, DatasetSpec, EncodeSpec, ExperimentConfig,
                     config_hash, config_to_dict, dump_config)
from .container import write_container
from .encoder import (LeastSquaresEncoder, ProjectionError, diagnostics,
                      projection_error_from_design)
from .errors import ConfigurationError
from .neuralop import OperatorNet, forward, init_net, relative_loss, train


@dataclass
class PreparedData:
    """Datasets built once so sweeps can reuse them across member runs."""

    train: datagen.FunctionDataset
    test: datagen.FunctionDataset
    extra: dict = field(default_factory=dict)


@dataclass
class InputScaler:
    """Per-column affine normalization fitted on the training inputs.

    Stabilizes training when encoded coefficients carry wildly different
    scales across directions (small singular values amplify); applied
    identically to coefficient and raw-value inputs so the P2C/C2C pipelines
    still differ only in what the input vector is.
    """

    mean: np.ndarray
    scale: np.ndarray

    @staticmethod
    def fit(features: np.ndarray) -> "InputScaler":
        mean = features.mean(axis=0)
        std = features.std(axis=0)
        floor = 1e-12 * max(float(std.max(initial=0.0)), 1e-300)
        return InputScaler(mean=mean, scale=np.where(std > floor, std, 1.0))

    def apply(self, features: np.ndarray) -> np.ndarray:
        return (features - self.mean) / self.scale


def prepare_data(spec: DatasetSpec) -> PreparedData:
    if spec.kind == "darcy1d":
        tr, te = datagen.make_darcy1d(spec.n, spec.m_train, spec.m_test, spec.seed,
                                      spec.length_scale, spec.amplitude, spec.tol)
        return PreparedData(tr, te)
    if spec.kind == "poisson2d":
        tr, te = datagen.make_poisson2d(spec.n, spec.m_train, spec.m_test,
                                        spec.seed, spec.modes)
        return PreparedData(tr, te)
    if spec.kind == "highd_poisson":
        tr, gen1, gen2 = datagen.make_highd_poisson(spec.d, spec.n_points, spec.seed,
                                                    spec.n_train, spec.n_gen1, spec.n_gen2)
        return PreparedData(tr, gen1, extra={"gen2": gen2})
    if spec.kind == "multi_output_1d":
        tr, te = datagen.make_multi_output_1d(spec.n, spec.m_train, spec.m_test,
                                              spec.seed, spec.length_scale, spec.amplitude)
        return PreparedData(tr, te)
    raise ConfigurationError(f"dataset.kind: no generator for {spec.kind!r}")


# ---------------------------------------------------------------------------
# pipeline pieces


def _stack_components(values: np.ndarray) -> np.ndarray:
    """(M, C, n) -> (M, C*n) component-major; (M, n) passes through."""
    if values.ndim == 2:
        return values
    return values.reshape(values.shape[0], -1)


def _output_system(config: ExperimentConfig, dataset: datagen.FunctionDataset):
    """Build the output basis and its reconstruction matrix.

    Returns (basis, psi_eff, n2, m_out) where psi_eff maps net outputs to the
    stacked output samples.  Scalar mode with C components reconstructs each
    component from its own coefficient block (block-diagonal psi); vector
    mode shares one coefficient vector across components (stacked psi).
    """
    c_out = dataset.output_components
    pts = dataset.output_points
    n2 = pts.shape[0]
    if c_out == 1 or config.output_mode == "scalar":
        basis = config.output_basis.build()
        psi = basis.design_matrix(pts)
        if c_out == 1:
            return basis, psi, n2, psi.shape[1]
        psi_eff = scipy.linalg.block_diag(*([psi] * c_out))
        return basis, psi_eff, n2, c_out * psi.shape[1]
    basis = config.output_basis.build(n_components=c_out)
    psi_eff = basis.design_matrix(pts)
    return basis, psi_eff, n2, psi_eff.shape[1]


def _input_features(config: ExperimentConfig, basis, dataset: datagen.FunctionDataset):
    """Network input rows for one dataset: coefficients, or raw values for P2C."""
    values = dataset.inputs
    if config.p2c:
        return _stack_components(values)
    c_in = dataset.input_components
    pts = dataset.input_points
    if c_in == 1:
        enc = LeastSquaresEncoder(basis.design_matrix(pts), config.input_encode.to_config())
        return np.atleast_2d(enc.encode_values(values))
    if config.input_mode == "vector":
        enc = LeastSquaresEncoder(basis.design_matrix(pts),
                                  config.input_encode.to_config(), n_points=pts.shape[0])
        return np.atleast_2d(enc.encode_values(_stack_components(values)))
    enc = LeastSquaresEncoder(basis.design_matrix(pts), config.input_encode.to_config())
    blocks = [np.atleast_2d(enc.encode_values(values[:, c, :])) for c in range(c_in)]
    return np.concatenate(blocks, axis=1)


def _build_input_basis(config: ExperimentConfig, dataset: datagen.FunctionDataset):
    if config.p2c:
        return None
    c_in = dataset.input_components
    if c_in > 1 and config.input_mode == "vector":
        return config.input_basis.build(n_components=c_in)
    return config.input_basis.build()


# ---------------------------------------------------------------------------
# reports


@dataclass
class RunReport:
    final_test_error: float
    test_error_per_sample: np.ndarray
    projection: ProjectionError
    erank: float | None
    variance_entropy: float | None
    input_dim: int
    output_dim: int
    hidden_dim: int
    n_parameters: int
    wall_seconds: float
    config_hash: str

    def summary_lines(self) -> list:
        lines = [
            f"config_hash = {self.config_hash}",
            f"final_test_relative_error = {self.final_test_error!r}",
            f"mean_projection_error = {self.projection.mean!r}",
            f"projection_zero_norm_count = {self.projection.zero_norm_count}",
            f"input_dim = {self.input_dim}",
            f"output_dim = {self.output_dim}",
            f"hidden_dim = {self.hidden_dim}",
            f"n_parameters = {self.n_parameters}",
            f"wall_seconds = {self.wall_seconds:.3f}",
        ]
        if self.erank is not None:
            lines.insert(3, f"input_coefficient_erank = {self.erank!r}")
            lines.insert(4, f"input_variance_entropy = {self.variance_entropy!r}")
        return lines


@dataclass
class RunResult:
    report: RunReport
    net: OperatorNet
    trace: object
    config: ExperimentConfig
    input_basis: object
    output_basis: object
    psi: np.ndarray
    data: PreparedData
    input_coefficients: np.ndarray
    input_scaler: InputScaler | None = None


def run(config: ExperimentConfig, outdir=None, prepared: PreparedData | None = None) -> RunResult:
    """Execute one experiment: build, encode, train, evaluate, report."""
    started = time.perf_counter()
    data = prepared if prepared is not None else prepare_data(config.dataset)
    train_ds, test_ds = data.train, data.test

    out_basis, psi_eff, _, m_out = _output_system(config, train_ds)
    u_train = _stack_components(train_ds.outputs)
    u_test = _stack_components(test_ds.outputs)

    in_basis = _build_input_basis(config, train_ds)
    a_train = _input_features(config, in_basis, train_ds)
    a_test = _input_features(config, in_basis, test_ds)

    erank = entropy = None
    if not config.p2c:
        # diagnostics describe the raw coefficient representation
        diag = diagnostics(a_train)
        erank = diag.effective_rank
        entropy = diag.variance_entropy

    scaler = None
    if config.standardize_inputs:
        scaler = InputScaler.fit(a_train)
        a_train = scaler.apply(a_train)
        a_test = scaler.apply(a_test)

    net0 = init_net(a_train.shape[1], config.net.hidden, m_out, config.net.seed)
    net, trace = train(net0, a_train, u_train, psi_eff, config.train,
                       test_inputs=a_test, test_targets=u_test)

    final_err, per_sample = relative_loss(forward(net, a_test), psi_eff, u_test)
    proj = projection_error_from_design(psi_eff, u_test,
                                        config.output_encode.to_config(),
                                        n_points=test_ds.output_points.shape[0])
    report = RunReport(
        final_test_error=final_err,
        test_error_per_sample=per_sample,
        projection=proj,
        erank=erank,
        variance_entropy=entropy,
        input_dim=a_train.shape[1],
        output_dim=m_out,
        hidden_dim=config.net.hidden,
        n_parameters=net.n_parameters,
        wall_seconds=time.perf_counter() - started,
        config_hash=config_hash(config),
    )
    result = RunResult(report=report, net=net, trace=trace, config=config,
                       input_basis=in_basis, output_basis=out_basis, psi=psi_eff,
                       data=data, input_coefficients=a_train, input_scaler=scaler)
    if outdir is not None:
        write_artifacts(result, outdir)
    return result


def evaluate_on(result: RunResult, dataset: datagen.FunctionDataset):
    """Mean and per-sample relative error of a trained run on another dataset.

    The input side is re-encoded against the run's input basis at the
    dataset's own points; the reconstruction matrix is re-evaluated at the
    dataset's output points.  P2C runs require matching input dimension.
    """
    config = result.config
    a = _input_features(config, result.input_basis, dataset)
    if a.shape[1] != result.net.input_dim:
        raise ConfigurationError(
            f"network expects {result.net.input_dim} inputs, dataset encodes to {a.shape[1]}"
        )
    if result.input_scaler is not None:
        a = result.input_scaler.apply(a)
    c_out = dataset.output_components
    pts = dataset.output_points
    if isinstance(result.output_basis, VectorBasis):
        psi = result.output_basis.design_matrix(pts)
    else:
        psi = result.output_basis.design_matrix(pts)
        if c_out > 1:
            psi = scipy.linalg.block_diag(*([psi] * c_out))
    mean, per_sample = relative_loss(forward(result.net, a), psi,
                                     _stack_components(dataset.outputs))
    return mean, per_sample


# ---------------------------------------------------------------------------
# studies


@dataclass
class SweepRow:
    cut: float
    erank: float
    variance_entropy: float
    final_test_error: float


@dataclass
class SweepResult:
    rows: list
    results: list

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["cut", "erank", "variance_entropy", "final_test_error"])
            for row in self.rows:
                writer.writerow([repr(row.cut), repr(row.erank),
                                 repr(row.variance_entropy), repr(row.final_test_error)])


def sweep_cutoff(config: ExperimentConfig, cuts, prepared: PreparedData | None = None,
                 keep_results: bool = False) -> SweepResult:
    """One run per input-side cutoff, reusing the dataset and all seeds."""
    if len(cuts) < 1:
        raise ConfigurationError("sweep needs at least one cut value")
    if config.p2c:
        raise ConfigurationError("cutoff sweep requires coefficient inputs, not P2C")
    data = prepared if prepared is not None else prepare_data(config.dataset)
    rows = []
    results = []
    for cut in cuts:
        member = ExperimentConfig(
            dataset=config.dataset, output_basis=config.output_basis,
            train=config.train, input_basis=config.input_basis,
            input_encode=EncodeSpec(method="tsvd", cut=float(cut),
                                    cut_mode=config.input_encode.cut_mode),
            output_encode=config.output_encode, net=config.net, p2c=False,
            input_mode=config.input_mode, output_mode=config.output_mode,
            standardize_inputs=config.standardize_inputs,
        )
        result = run(member, prepared=data)
        rows.append(SweepRow(
            cut=float(cut),
            erank=result.report.erank,
            variance_entropy=result.report.variance_entropy,
            final_test_error=result.report.final_test_error,
        ))
        results.append(result if keep_results else None)
    return SweepResult(rows=rows, results=results)


def eval_resolutions(result: RunResult, resolutions) -> dict:
    """Test a trained Darcy run on freshly generated data at other grid sizes.

    The forcing field is drawn jointly across all the grids and the PDE is
    solved once on a fine reference grid, so the per-resolution targets are
    restrictions of the same underlying solutions.
    """
    if not resolutions:
        raise ConfigurationError("resolutions list is empty")
    config = result.config
    if config.dataset.kind != "darcy1d":
        raise ConfigurationError("resolution transfer is defined for darcy1d datasets")
    if config.p2c:
        raise ConfigurationError("P2C inputs pin the grid size; resolution transfer needs C2C")
    spec = config.dataset
    datasets = datagen.make_darcy1d_multiresolution(
        sorted(set(int(r) for r in resolutions)), spec.m_test,
        seed=[spec.seed, 0x5E5], length_scale=spec.length_scale,
        amplitude=spec.amplitude, tol=spec.tol,
    )
    return {r: evaluate_on(result, ds)[0] for r, ds in sorted(datasets.items())}


@dataclass
class VectorScalarComparison:
    scalar: RunResult
    vector: RunResult

    @property
    def parameter_difference(self) -> int:
        return self.scalar.net.n_parameters - self.vector.net.n_parameters

    @property
    def seconds_per_epoch(self) -> tuple:
        eps = max(self.scalar.config.train.epochs, 1)
        epv = max(self.vector.config.train.epochs, 1)
        return (self.scalar.trace.wall_seconds / eps,
                self.vector.trace.wall_seconds / epv)


def compare_vector_scalar(config: ExperimentConfig,
                          prepared: PreparedData | None = None) -> VectorScalarComparison:
    """Scalar-valued vs vector-valued construction on identical data.

    With single-component data the two constructions coincide and the paired
    reports come out identical.
    """
    data = prepared if prepared is not None else prepare_data(config.dataset)
    variants = {}
    for mode in ("scalar", "vector"):
        member = ExperimentConfig(
            dataset=config.dataset, output_basis=config.output_basis,
            train=config.train, input_basis=config.input_basis,
            input_encode=config.input_encode, output_encode=config.output_encode,
            net=config.net, p2c=config.p2c,
            input_mode=mode if data.train.input_components > 1 else config.input_mode,
            output_mode=mode if data.train.output_components > 1 else config.output_mode,
            standardize_inputs=config.standardize_inputs,
        )
        variants[mode] = run(member, prepared=data)
    return VectorScalarComparison(scalar=variants["scalar"], vector=variants["vector"])


# ---------------------------------------------------------------------------
# artifacts


def write_artifacts(result: RunResult, outdir) -> None:
    """Per-run directory: report, traces CSV, diagnostics CSV, checkpoint, config."""
    import pathlib

    out = pathlib.Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    report, trace, config = result.report, result.trace, result.config

    with open(out / "report.txt", "w") as fh:
        fh.write("\n".join(report.summary_lines()) + "\n")

    test_at = {int(e): float(v) for e, v in zip(trace.test_epochs, trace.test_loss)}
    with open(out / "traces.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "train_rel_err", "test_rel_err", "lr"])
        for epoch in range(trace.train_loss.shape[0]):
            test_val = test_at.get(epoch, "")
            writer.writerow([epoch, repr(float(trace.train_loss[epoch])),
                             repr(test_val) if test_val != "" else "",
                             repr(float(trace.lr[epoch]))])

    from .encoder import write_diagnostics_csv
    write_diagnostics_csv(out / "diagnostics.csv", [(
        config.input_encode.cut_or_lambda,
        report.erank if report.erank is not None else float("nan"),
        report.variance_entropy if report.variance_entropy is not None else float("nan"),
        report.projection.mean,
    )])

    write_container(out / "checkpoint.fbc",
                    arrays={"parameters": result.net.flat_parameters()},
                    meta={
                        "input_dim": result.net.input_dim,
                        "hidden_dim": result.net.hidden_dim,
                        "output_dim": result.net.output_dim,
                        "net_seed": result.net.seed,
                        "epochs": config.train.epochs,
                        "config_hash": report.config_hash,
                    })
    dump_config(config, out / "config.json")


def load_checkpoint(path) -> OperatorNet:
    from .container import read_container

    arrays, meta = read_container(path)
    return OperatorNet.from_flat(arrays["parameters"], meta["input_dim"],
                                 meta["hidden_dim"], meta["output_dim"],
                                 meta.get("net_seed", 0))
