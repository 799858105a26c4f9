import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fbc2c.basis import (ActivationKind, Partition, RfmBasis, VectorBasis,
                         WindowKind, build_rfm, build_vector_rfm,
                         uniform_fem_basis)
from fbc2c.encoder import (CoefficientMatrix, CutMode, LeastSquaresEncoder,
                           Ridge, TruncatedSvd, diagnostics,
                           effective_rank_of_singular_values, encode,
                           encode_vector, projection_error)
from fbc2c.errors import ConfigurationError, DataError, RankDeficiencyError


def test_ridge_normal_equations_hand_case():
    enc = LeastSquaresEncoder(np.array([[1.0], [1.0]]), Ridge(0.0))
    assert enc.encode_values(np.array([1.0, 3.0])) == pytest.approx([2.0])


def test_ridge_identity_design_returns_values():
    enc = LeastSquaresEncoder(np.eye(3), Ridge(0.0))
    f = np.array([0.3, -1.2, 4.0])
    assert enc.encode_values(f) == pytest.approx(f)


def test_tsvd_discards_small_singular_values():
    enc = LeastSquaresEncoder(np.diag([1.0, 1e-8]), TruncatedSvd(1e-3))
    assert enc.encode_values(np.array([1.0, 1.0])) == pytest.approx([1.0, 0.0])


def test_tsvd_absolute_mode():
    enc = LeastSquaresEncoder(np.diag([1.0, 1e-8]),
                              TruncatedSvd(1e-3, CutMode.ABSOLUTE))
    assert enc.encode_values(np.array([1.0, 1.0])) == pytest.approx([1.0, 0.0])
    enc2 = LeastSquaresEncoder(np.diag([1.0, 0.5]),
                               TruncatedSvd(0.6, CutMode.ABSOLUTE))
    assert enc2.encode_values(np.array([1.0, 1.0])) == pytest.approx([1.0, 0.0])


def test_ridge_penalty_scales_with_point_count():
    # closed form (Phi^T Phi + lam n I)^{-1} Phi^T f, n = number of points
    rng = np.random.default_rng(2)
    phi = rng.standard_normal((25, 4))
    f = rng.standard_normal(25)
    lam = 0.37
    expected = np.linalg.solve(phi.T @ phi + lam * 25 * np.eye(4), phi.T @ f)
    got = LeastSquaresEncoder(phi, Ridge(lam)).encode_values(f)
    assert got == pytest.approx(expected, rel=1e-12)


def test_unregularized_rank_deficiency_raises():
    phi = np.column_stack([np.ones(6), np.ones(6)])
    with pytest.raises(RankDeficiencyError) as info:
        LeastSquaresEncoder(phi, Ridge(0.0))
    assert info.value.condition_estimate > 1e12


def test_dimension_mismatch_rejected():
    enc = LeastSquaresEncoder(np.eye(3), Ridge(0.0))
    with pytest.raises(ConfigurationError):
        enc.encode_values(np.ones(4))
    with pytest.raises(ConfigurationError):
        Ridge(-1.0)
    with pytest.raises(ConfigurationError):
        TruncatedSvd(-0.5)


def test_batch_encode_matches_per_sample():
    rng = np.random.default_rng(3)
    phi = rng.standard_normal((30, 5))
    values = rng.standard_normal((8, 30))
    enc = LeastSquaresEncoder(phi, TruncatedSvd(1e-10))
    batch = enc.encode_values(values)
    singles = np.stack([enc.encode_values(v) for v in values])
    assert np.array_equal(batch, singles)


def test_tsvd_zero_cut_matches_ridge_zero_on_full_rank():
    rng = np.random.default_rng(5)
    phi = rng.standard_normal((40, 7))
    values = rng.standard_normal((3, 40))
    a_ridge = LeastSquaresEncoder(phi, Ridge(0.0)).encode_values(values)
    a_svd = LeastSquaresEncoder(phi, TruncatedSvd(0.0)).encode_values(values)
    assert np.max(np.abs(a_ridge - a_svd)) < 1e-9


def test_ridge_optimality_via_finite_differences():
    # gradient of (1/n)||Phi a - f||^2 + lam ||a||^2 vanishes at the solution
    rng = np.random.default_rng(11)
    for _ in range(5):
        n, m = rng.integers(5, 30), rng.integers(1, 10)
        phi = rng.standard_normal((n, m))
        f = rng.standard_normal(n)
        lam = 10.0 ** rng.uniform(-6, -1)
        a = LeastSquaresEncoder(phi, Ridge(lam)).encode_values(f)
        grad = 2.0 / n * phi.T @ (phi @ a - f) + 2.0 * lam * a
        assert np.linalg.norm(grad) < 1e-8


def test_monotone_shrinkage_in_lambda():
    rng = np.random.default_rng(7)
    phi = rng.standard_normal((20, 6))
    f = rng.standard_normal(20)
    norms = [np.linalg.norm(LeastSquaresEncoder(phi, Ridge(lam)).encode_values(f))
             for lam in np.logspace(-8, 2, 12)]
    assert all(a >= b - 1e-12 for a, b in zip(norms, norms[1:]))


def test_encode_through_basis():
    basis = uniform_fem_basis(5)
    pts = basis.nodes
    values = np.array([[0.0, 1.0, 2.0, 1.0, 0.0]])
    coeffs = encode(basis, pts, values, Ridge(0.0))
    assert isinstance(coeffs, CoefficientMatrix)
    assert coeffs.values == pytest.approx(values)  # interpolatory basis
    assert coeffs.basis_id == basis.identity()


# ---------------------------------------------------------------------------
# vector-valued encoding


def _zero_basis_like(basis):
    return RfmBasis(dim=basis.dim, partitions=basis.partitions,
                    weights=tuple(np.zeros_like(w) for w in basis.weights),
                    biases=tuple(np.zeros_like(b) for b in basis.biases),
                    range_bound=basis.range_bound, activation=ActivationKind.TANH,
                    window_kind=basis.window_kind, seed=0, bounds=basis.bounds)


def test_encode_vector_single_component_reduces_to_encode():
    basis = build_rfm(1, [2], 4, 2.0, seed=9, bounds=[[0.0, 1.0]])
    vb = VectorBasis((basis,))
    pts = np.linspace(0, 1, 30)
    rng = np.random.default_rng(0)
    values = rng.standard_normal((5, 30))
    scalar = encode(basis, pts, values, Ridge(1e-6)).values
    vector = encode_vector(vb, pts, values[:, None, :], Ridge(1e-6)).values
    assert vector == pytest.approx(scalar, rel=1e-12, abs=1e-12)


def test_encode_vector_zero_component_padding():
    basis = build_rfm(1, [2], 4, 2.0, seed=9, bounds=[[0.0, 1.0]])
    vb = VectorBasis((basis, _zero_basis_like(basis)))
    pts = np.linspace(0, 1, 30)
    rng = np.random.default_rng(1)
    comp1 = rng.standard_normal((5, 30))
    stacked = np.stack([comp1, np.zeros_like(comp1)], axis=1)
    vector = encode_vector(vb, pts, stacked, Ridge(1e-6)).values
    scalar = encode(basis, pts, comp1, Ridge(1e-6)).values
    assert vector == pytest.approx(scalar, rel=1e-10, abs=1e-12)


def test_encode_vector_matches_dense_stacked_oracle():
    vb = build_vector_rfm(2, 1, [2], 5, 2.5, seed=17, bounds=[[0.0, 1.0]])
    pts = np.linspace(0, 1, 40)
    rng = np.random.default_rng(2)
    values = rng.standard_normal((4, 2, 40))
    lam = 1e-4
    got = encode_vector(vb, pts, values, Ridge(lam)).values
    design = vb.design_matrix(pts)
    gram = design.T @ design + lam * 40 * np.eye(design.shape[1])
    expected = np.stack([
        np.linalg.solve(gram, design.T @ v.reshape(-1)) for v in values
    ])
    assert np.max(np.abs(got - expected)) < 1e-10


def test_encode_vector_shape_validation():
    vb = build_vector_rfm(2, 1, [2], 5, 2.5, seed=17)
    pts = np.linspace(-1, 1, 10)
    with pytest.raises(ConfigurationError):
        encode_vector(vb, pts, np.zeros((3, 3, 10)), Ridge(0.1))
    with pytest.raises(ConfigurationError):
        encode_vector(vb, pts, np.zeros((3, 2, 7)), Ridge(0.1))


# ---------------------------------------------------------------------------
# diagnostics


def _matrix_with_singular_values(s, rng):
    n = len(s)
    q1, _ = np.linalg.qr(rng.standard_normal((n + 3, n)))
    q2, _ = np.linalg.qr(rng.standard_normal((n, n)))
    return q1 @ np.diag(s) @ q2


def test_effective_rank_hand_cases():
    assert effective_rank_of_singular_values(np.ones(4)) == pytest.approx(4.0, abs=1e-12)
    assert effective_rank_of_singular_values(np.array([5.0, 0, 0])) == pytest.approx(1.0, abs=1e-12)
    assert effective_rank_of_singular_values(np.array([2.0, 1.0, 1.0])) == pytest.approx(
        2.0 ** 1.5, abs=1e-12)


def test_diagnostics_from_constructed_spectrum():
    rng = np.random.default_rng(21)
    a = _matrix_with_singular_values([2.0, 1.0, 1.0], rng)
    d = diagnostics(a)
    assert d.effective_rank == pytest.approx(2.0 ** 1.5, abs=1e-9)
    assert np.all(np.diff(d.singular_values) <= 1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.floats(0.1, 100.0))
def test_effective_rank_scale_invariant(seed, scale):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((6, 4))
    assert diagnostics(a).effective_rank == pytest.approx(
        diagnostics(scale * a).effective_rank, rel=1e-9)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_effective_rank_bounds(seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((7, 5))
    d = diagnostics(a)
    positive = int(np.sum(d.singular_values > 1e-12 * d.singular_values[0]))
    assert 1.0 - 1e-9 <= d.effective_rank <= positive + 1e-9


def test_diagnostics_degenerate_zero_matrix():
    d = diagnostics(np.zeros((4, 3)))
    assert d.degenerate
    assert d.effective_rank == 1.0


def test_variance_entropy_balance():
    rng = np.random.default_rng(3)
    balanced = rng.standard_normal((200, 6))
    lopsided = balanced.copy()
    lopsided[:, 0] *= 40.0
    assert diagnostics(balanced).variance_entropy > diagnostics(lopsided).variance_entropy


# ---------------------------------------------------------------------------
# projection error


def test_projection_error_in_span_target():
    basis = build_rfm(1, [3], 6, 2.0, seed=31, bounds=[[0.0, 1.0]])
    pts = np.linspace(0, 1, 120)
    phi = basis.design_matrix(pts)
    rng = np.random.default_rng(6)
    targets = (phi @ rng.standard_normal((basis.size, 3))).T
    pe = projection_error(basis, pts, targets, Ridge(0.0))
    assert pe.mean < 1e-10


def test_projection_error_fem_interpolates_linear():
    basis = uniform_fem_basis(3)
    pts = basis.nodes
    pe = projection_error(basis, pts, pts[None, :], Ridge(0.0))  # u(x) = x at nodes
    assert pe.mean < 1e-12


def test_projection_error_matches_dense_oracle():
    basis = uniform_fem_basis(3)
    pts = np.linspace(0, 1, 100)
    target = np.sin(np.pi * pts)[None, :]
    pe = projection_error(basis, pts, target, Ridge(0.0))
    phi = basis.design_matrix(pts)
    coef, *_ = np.linalg.lstsq(phi, target[0], rcond=None)
    expected = np.linalg.norm(phi @ coef - target[0]) / np.linalg.norm(target[0])
    assert pe.mean == pytest.approx(expected, abs=1e-10)


def test_projection_error_excludes_zero_norm_samples():
    basis = uniform_fem_basis(4)
    pts = np.linspace(0, 1, 50)
    targets = np.vstack([np.sin(pts), np.zeros(50)])
    pe = projection_error(basis, pts, targets, Ridge(1e-8))
    assert pe.zero_norm_count == 1
    assert np.isnan(pe.per_sample[1])
    assert np.isfinite(pe.mean)
    with pytest.raises(DataError):
        projection_error(basis, pts, np.zeros((2, 50)), Ridge(1e-8))
