"""Coefficient estimation against a fixed basis, plus quality diagnostics.

Two interchangeable least-squares backends are provided: ridge with a
closed-form normal-equations solve, and a truncated-SVD pseudo-inverse.
The factorization is computed once per (design matrix, config) pair and
applied to all samples by matrix multiplication.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.linalg

from .basis import VectorBasis
from .errors import ConfigurationError, DataError, RankDeficiencyError


class CutMode(str, Enum):
    RELATIVE_TO_SIGMA1 = "relative"
    ABSOLUTE = "absolute"


@dataclass(frozen=True)
class Ridge:
    """Penalized least squares; lam is the penalty weight on ||a||^2.

    The data term carries a 1/n factor, so the closed form solved here is
    a = (Phi^T Phi + lam * n * I)^{-1} Phi^T f with n the number of sample
    points.  This keeps a given lam meaningful across grid sizes.
    """

    lam: float = 0.0

    def __post_init__(self):
        if self.lam < 0:
            raise ConfigurationError(f"ridge penalty must be >= 0, got {self.lam}")


@dataclass(frozen=True)
class TruncatedSvd:
    """Pseudo-inverse that discards singular values below a threshold.

    In relative mode (default) the threshold is cut * sigma_1; in absolute
    mode it is cut itself.  Relative mode is the scale-portable choice.
    """

    cut: float = 0.0
    cut_mode: CutMode = CutMode.RELATIVE_TO_SIGMA1

    def __post_init__(self):
        if self.cut < 0:
            raise ConfigurationError(f"SVD cut must be >= 0, got {self.cut}")
        object.__setattr__(self, "cut_mode", CutMode(self.cut_mode))


# condition estimate beyond which an unregularized solve is refused
_COND_LIMIT = 1.0 / (100.0 * np.finfo(np.float64).eps)


class LeastSquaresEncoder:
    """Holds one factorization of a design matrix and encodes sample batches.

    ``n_points`` is the number of spatial sample points; for a stacked
    vector-valued design matrix this is rows / n_components, and it is what
    scales the ridge penalty.
    """

    def __init__(self, design: np.ndarray, config, n_points: int | None = None):
        design = np.asarray(design, dtype=np.float64)
        if design.ndim != 2 or design.size == 0:
            raise ConfigurationError(f"design matrix must be 2-D and nonempty, got shape {design.shape}")
        self.design = design
        self.config = config
        self.n_points = int(n_points) if n_points is not None else design.shape[0]
        if isinstance(config, Ridge):
            gram = design.T @ design + config.lam * self.n_points * np.eye(design.shape[1])
            if config.lam == 0.0:
                cond = np.linalg.cond(gram)
                if not np.isfinite(cond) or cond > _COND_LIMIT:
                    raise RankDeficiencyError(
                        f"normal equations singular without regularization "
                        f"(condition estimate {cond:.3e}); increase lam or use a cut",
                        condition_estimate=float(cond),
                    )
            try:
                self._chol = scipy.linalg.cho_factor(gram)
            except scipy.linalg.LinAlgError as exc:
                cond = np.linalg.cond(gram)
                raise RankDeficiencyError(
                    f"normal-equations factorization failed (condition estimate {cond:.3e})",
                    condition_estimate=float(cond),
                ) from exc
            self._svd = None
        elif isinstance(config, TruncatedSvd):
            u, s, vt = np.linalg.svd(design, full_matrices=False)
            if config.cut_mode == CutMode.RELATIVE_TO_SIGMA1:
                threshold = config.cut * (s[0] if s.size else 0.0)
            else:
                threshold = config.cut
            inv = np.zeros_like(s)
            keep = (s >= threshold) & (s > 0)
            inv[keep] = 1.0 / s[keep]
            self._svd = (u, inv, vt)
            self._chol = None
        else:
            raise ConfigurationError(f"unknown encode config {config!r}")

    @property
    def m(self) -> int:
        return self.design.shape[1]

    def encode_values(self, values: np.ndarray) -> np.ndarray:
        """Encode a batch of sampled functions, shape (M, n) -> (M, m)."""
        values = np.asarray(values, dtype=np.float64)
        squeeze = values.ndim == 1
        if squeeze:
            values = values[None, :]
        if values.shape[1] != self.design.shape[0]:
            raise ConfigurationError(
                f"sample vectors have {values.shape[1]} entries, design matrix has "
                f"{self.design.shape[0]} rows"
            )
        if self._chol is not None:
            coeffs = scipy.linalg.cho_solve(self._chol, self.design.T @ values.T).T
        else:
            u, inv, vt = self._svd
            coeffs = ((values @ u) * inv) @ vt
        return coeffs[0] if squeeze else coeffs


@dataclass
class CoefficientMatrix:
    """Rows are per-sample coefficient vectors, columns follow basis order."""

    values: np.ndarray
    basis_id: str

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def n_basis(self) -> int:
        return self.values.shape[1]


def encode(basis, points, values, config) -> CoefficientMatrix:
    """Project sampled functions onto a scalar basis.

    values: (M, n) or (n,) function samples at ``points``.
    """
    phi = basis.design_matrix(points)
    enc = LeastSquaresEncoder(phi, config)
    coeffs = np.atleast_2d(enc.encode_values(values))
    return CoefficientMatrix(values=coeffs, basis_id=basis.identity())


def encode_vector(vbasis: VectorBasis, points, values, config) -> CoefficientMatrix:
    """Project multi-component samples onto a vector-valued basis.

    values: (M, C, n) with C matching the basis component count.  The solve
    runs on the stacked (C*n, m) design matrix; the ridge penalty scales
    with n, matching the per-point normalization of the data term.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.ndim == 2:
        values = values[None, :, :]
    if values.ndim != 3 or values.shape[1] != vbasis.n_components:
        raise ConfigurationError(
            f"expected values of shape (M, {vbasis.n_components}, n), got {values.shape}"
        )
    stacked = vbasis.design_matrix(points)
    n = stacked.shape[0] // vbasis.n_components
    if values.shape[2] != n:
        raise ConfigurationError(
            f"samples have {values.shape[2]} points per component, design matrix has {n}"
        )
    enc = LeastSquaresEncoder(stacked, config, n_points=n)
    coeffs = np.atleast_2d(enc.encode_values(values.reshape(values.shape[0], -1)))
    return CoefficientMatrix(values=coeffs, basis_id=vbasis.identity())


# ---------------------------------------------------------------------------
# diagnostics


@dataclass
class CoefficientDiagnostics:
    effective_rank: float
    singular_values: np.ndarray
    per_basis_variance: np.ndarray
    variance_entropy: float
    degenerate: bool = False


def effective_rank_of_singular_values(s: np.ndarray) -> float:
    """exp of the Shannon entropy of the L1-normalized singular values."""
    s = np.asarray(s, dtype=np.float64)
    total = s.sum()
    if total <= 0:
        return 1.0
    p = s / total
    p = p[p > 0]
    return float(np.exp(-np.sum(p * np.log(p))))


def _entropy_balance(weights: np.ndarray) -> float:
    total = weights.sum()
    if total <= 0:
        return 1.0
    q = weights / total
    q = q[q > 0]
    return float(np.exp(-np.sum(q * np.log(q))))


def diagnostics(coeffs: CoefficientMatrix | np.ndarray) -> CoefficientDiagnostics:
    """Effective rank, spectrum, and variance balance of a coefficient matrix.

    The variance entropy is an implementer's proxy for how evenly the
    coefficient variation spreads across basis functions: exp of the entropy
    of the normalized per-column sample variances.
    """
    a = coeffs.values if isinstance(coeffs, CoefficientMatrix) else np.asarray(coeffs, dtype=np.float64)
    a = np.atleast_2d(a)
    if a.size == 0:
        raise ConfigurationError("coefficient matrix is empty")
    s = np.linalg.svd(a, compute_uv=False)
    degenerate = bool(np.all(s == 0))
    erank = 1.0 if degenerate else effective_rank_of_singular_values(s)
    if a.shape[0] >= 2:
        variances = a.var(axis=0, ddof=1)
    else:
        variances = np.zeros(a.shape[1])
    return CoefficientDiagnostics(
        effective_rank=erank,
        singular_values=s,
        per_basis_variance=variances,
        variance_entropy=_entropy_balance(variances),
        degenerate=degenerate,
    )


# ---------------------------------------------------------------------------
# projection error


@dataclass
class ProjectionError:
    """Per-sample relative L2 distance from targets to their best basis fit.

    Samples with zero norm are excluded from the mean; their per-sample
    entries are NaN and their count is reported.
    """

    per_sample: np.ndarray
    mean: float
    zero_norm_count: int


def projection_error_from_design(design: np.ndarray, targets: np.ndarray, config,
                                 n_points: int | None = None) -> ProjectionError:
    targets = np.atleast_2d(np.asarray(targets, dtype=np.float64))
    enc = LeastSquaresEncoder(design, config, n_points=n_points)
    coeffs = np.atleast_2d(enc.encode_values(targets))
    resid = coeffs @ design.T - targets
    rnorm = np.linalg.norm(resid, axis=1)
    tnorm = np.linalg.norm(targets, axis=1)
    nonzero = tnorm > 0
    per_sample = np.full(targets.shape[0], np.nan)
    per_sample[nonzero] = rnorm[nonzero] / tnorm[nonzero]
    if not np.any(nonzero):
        raise DataError("all target samples have zero norm")
    return ProjectionError(
        per_sample=per_sample,
        mean=float(per_sample[nonzero].mean()),
        zero_norm_count=int(np.sum(~nonzero)),
    )


def projection_error(basis, points, targets, config) -> ProjectionError:
    """Relative L2 error of the regularized best fit in the basis span.

    For a VectorBasis, targets are (M, C, n) and the norm runs over the
    stacked component values.
    """
    if isinstance(basis, VectorBasis):
        targets = np.asarray(targets, dtype=np.float64)
        if targets.ndim == 2:
            targets = targets[None, :, :]
        design = basis.design_matrix(points)
        n = design.shape[0] // basis.n_components
        return projection_error_from_design(
            design, targets.reshape(targets.shape[0], -1), config, n_points=n
        )
    return projection_error_from_design(basis.design_matrix(points), targets, config)


def write_diagnostics_csv(path, rows) -> None:
    """Flat diagnostics export: one row per encode config.

    Columns: cut_or_lambda, erank, variance_entropy, mean_projection_error.
    """
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["cut_or_lambda", "erank", "variance_entropy", "mean_projection_error"])
        for row in rows:
            writer.writerow([repr(float(row[0])), repr(float(row[1])),
                             repr(float(row[2])), repr(float(row[3]))])
