"""One-hidden-layer coefficient-to-coefficient network with hand-rolled Adam.

The network maps input coefficients a in R^{m1} to output coefficients
b in R^{m2} through b_k = sum_i c_ki * tanh(sum_j xi_ij a_j + eta_i).
Training minimizes the relative loss: the batch mean of
||Psi b - u||_2 / ||u||_2 on the output sample grid.  Gradients are exact;
samples with exactly zero residual contribute zero (subgradient choice at
the norm's kink).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DataError, TrainingDiverged


@dataclass
class OperatorNet:
    """Parameters of the coefficient map; hidden activation is tanh."""

    hidden_weights: np.ndarray   # (H, m1)
    hidden_biases: np.ndarray    # (H,)
    output_weights: np.ndarray   # (m2, H)
    seed: int = 0

    @property
    def input_dim(self) -> int:
        return self.hidden_weights.shape[1]

    @property
    def hidden_dim(self) -> int:
        return self.hidden_weights.shape[0]

    @property
    def output_dim(self) -> int:
        return self.output_weights.shape[0]

    @property
    def n_parameters(self) -> int:
        return self.hidden_weights.size + self.hidden_biases.size + self.output_weights.size

    def copy(self) -> "OperatorNet":
        return OperatorNet(self.hidden_weights.copy(), self.hidden_biases.copy(),
                           self.output_weights.copy(), self.seed)

    def flat_parameters(self) -> np.ndarray:
        """Concatenation [hidden_weights, hidden_biases, output_weights]."""
        return np.concatenate([
            self.hidden_weights.ravel(), self.hidden_biases.ravel(),
            self.output_weights.ravel(),
        ])

    @staticmethod
    def from_flat(flat: np.ndarray, m1: int, hidden: int, m2: int, seed: int = 0) -> "OperatorNet":
        flat = np.asarray(flat, dtype=np.float64)
        expected = hidden * m1 + hidden + m2 * hidden
        if flat.size != expected:
            raise ConfigurationError(f"flat parameter vector has {flat.size} entries, expected {expected}")
        xi = flat[: hidden * m1].reshape(hidden, m1).copy()
        eta = flat[hidden * m1: hidden * m1 + hidden].copy()
        c = flat[hidden * m1 + hidden:].reshape(m2, hidden).copy()
        return OperatorNet(xi, eta, c, seed)


def init_net(m1: int, hidden: int, m2: int, seed: int = 0) -> OperatorNet:
    """Uniform init scaled by 1/sqrt(fan_in) per layer, zero biases."""
    if min(m1, hidden, m2) < 1:
        raise ConfigurationError("all network dimensions must be >= 1")
    rng = np.random.default_rng(seed)
    xi = rng.uniform(-1.0, 1.0, size=(hidden, m1)) / np.sqrt(m1)
    c = rng.uniform(-1.0, 1.0, size=(m2, hidden)) / np.sqrt(hidden)
    eta = np.zeros(hidden)
    return OperatorNet(xi, eta, c, int(seed))


def forward(net: OperatorNet, inputs: np.ndarray) -> np.ndarray:
    """Row-wise application of the coefficient map, (M, m1) -> (M, m2)."""
    a = np.atleast_2d(np.asarray(inputs, dtype=np.float64))
    if a.shape[1] != net.input_dim:
        raise ConfigurationError(
            f"inputs have {a.shape[1]} columns, network expects {net.input_dim}"
        )
    if not np.all(np.isfinite(a)):
        raise DataError("network inputs contain NaN or Inf")
    hidden = np.tanh(a @ net.hidden_weights.T + net.hidden_biases)
    return hidden @ net.output_weights.T


def relative_loss(coeff_batch: np.ndarray, psi: np.ndarray, targets: np.ndarray):
    """Mean over samples of ||Psi b - u|| / ||u||; also per-sample values."""
    b = np.atleast_2d(np.asarray(coeff_batch, dtype=np.float64))
    u = np.atleast_2d(np.asarray(targets, dtype=np.float64))
    psi = np.asarray(psi, dtype=np.float64)
    if psi.shape != (u.shape[1], b.shape[1]):
        raise ConfigurationError(
            f"basis evaluation matrix has shape {psi.shape}, expected ({u.shape[1]}, {b.shape[1]})"
        )
    unorm = np.linalg.norm(u, axis=1)
    if np.any(unorm == 0):
        bad = np.flatnonzero(unorm == 0).tolist()
        raise DataError(f"target samples with zero norm at indices {bad}")
    resid = b @ psi.T - u
    per_sample = np.linalg.norm(resid, axis=1) / unorm
    return float(per_sample.mean()), per_sample


@dataclass
class Gradients:
    hidden_weights: np.ndarray
    hidden_biases: np.ndarray
    output_weights: np.ndarray


class ReconstructionLoss:
    """Relative loss and its gradient through a fixed reconstruction matrix.

    Precomputes the Gram matrix of Psi and the target projections so per-step
    work avoids the full n2-point reconstruction: with G = Psi^T Psi and
    W = U Psi, each residual norm is sqrt(b.Gb - 2 b.w + ||u||^2) and the
    coefficient gradient is (Gb - w) / (M rho ||u||).
    """

    def __init__(self, psi: np.ndarray, targets: np.ndarray):
        psi = np.asarray(psi, dtype=np.float64)
        u = np.atleast_2d(np.asarray(targets, dtype=np.float64))
        if psi.ndim != 2 or u.shape[1] != psi.shape[0]:
            raise ConfigurationError(
                f"targets have {u.shape[1]} points, basis evaluation matrix has {psi.shape[0]} rows"
            )
        unorm = np.linalg.norm(u, axis=1)
        if np.any(unorm == 0):
            bad = np.flatnonzero(unorm == 0).tolist()
            raise DataError(f"target samples with zero norm at indices {bad}")
        self.psi = psi
        self.gram = psi.T @ psi
        self.proj = u @ psi          # (M, m2)
        self.unorm = unorm
        self.n_samples = u.shape[0]
        self.m2 = psi.shape[1]

    def _rho(self, b: np.ndarray, rows) -> tuple[np.ndarray, np.ndarray]:
        q = b @ self.gram
        rho_sq = (np.einsum("ij,ij->i", b, q)
                  - 2.0 * np.einsum("ij,ij->i", b, self.proj[rows])
                  + self.unorm[rows] ** 2)
        return np.sqrt(np.maximum(rho_sq, 0.0)), q

    def loss(self, net: OperatorNet, inputs: np.ndarray, rows=slice(None)) -> float:
        hidden = np.tanh(inputs @ net.hidden_weights.T + net.hidden_biases)
        b = hidden @ net.output_weights.T
        rho, _ = self._rho(b, rows)
        return float(np.mean(rho / self.unorm[rows]))

    def loss_and_grads(self, net: OperatorNet, inputs: np.ndarray, rows=slice(None)):
        hidden = np.tanh(inputs @ net.hidden_weights.T + net.hidden_biases)
        b = hidden @ net.output_weights.T
        rho, q = self._rho(b, rows)
        unorm = self.unorm[rows]
        batch = b.shape[0]
        loss = float(np.mean(rho / unorm))
        # zero-residual samples get a zero subgradient
        weight = np.zeros(batch)
        nz = rho > 0
        weight[nz] = 1.0 / (batch * rho[nz] * unorm[nz])
        d_b = (q - self.proj[rows]) * weight[:, None]
        d_c = d_b.T @ hidden
        d_hidden = (d_b @ net.output_weights) * (1.0 - hidden ** 2)
        d_eta = d_hidden.sum(axis=0)
        d_xi = d_hidden.T @ inputs
        return loss, Gradients(d_xi, d_eta, d_c)


def gradient(net: OperatorNet, inputs: np.ndarray, psi: np.ndarray,
             targets: np.ndarray) -> Gradients:
    """Exact gradient of the relative loss w.r.t. all parameters."""
    a = np.atleast_2d(np.asarray(inputs, dtype=np.float64))
    if not np.all(np.isfinite(a)):
        raise DataError("network inputs contain NaN or Inf")
    ws = ReconstructionLoss(psi, targets)
    _, grads = ws.loss_and_grads(net, a)
    return grads


# ---------------------------------------------------------------------------
# training


@dataclass
class TrainConfig:
    """Adam on the relative loss with a staged geometric LR decay.

    The learning rate starts at lr_start, ends at lr_end on the final epoch,
    and decreases gradually within every lr_stage_epochs window; each stage
    covers an equal share of the total log decay.  batch_size None means
    full batch.
    """

    epochs: int
    batch_size: int | None = None
    lr_start: float = 1e-3
    lr_end: float = 1e-6
    lr_stage_epochs: int = 10_000
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    seed: int = 0
    eval_interval: int = 100

    def __post_init__(self):
        if self.epochs < 0:
            raise ConfigurationError(f"epochs must be >= 0, got {self.epochs}")
        if not (self.lr_start >= self.lr_end > 0):
            raise ConfigurationError("need lr_start >= lr_end > 0")
        if self.lr_stage_epochs < 1:
            raise ConfigurationError("lr_stage_epochs must be >= 1")
        if self.batch_size is not None and self.batch_size < 1:
            raise ConfigurationError("batch_size must be >= 1 or None for full batch")
        if self.eval_interval < 1:
            raise ConfigurationError("eval_interval must be >= 1")


def learning_rate(epoch: int, config: TrainConfig) -> float:
    """Stagewise geometric schedule hitting lr_start at epoch 0, lr_end at the end."""
    total = config.epochs
    if total <= 1:
        return config.lr_start
    stage_len = config.lr_stage_epochs
    n_stages = -(-total // stage_len)  # ceil
    shrink = (config.lr_end / config.lr_start) ** (1.0 / n_stages)
    stage = epoch // stage_len
    within = epoch % stage_len
    this_len = min(stage_len, total - stage * stage_len)
    frac = within / (this_len - 1) if this_len > 1 else 1.0
    return config.lr_start * shrink ** (stage + frac)


@dataclass
class TrainTrace:
    train_loss: np.ndarray              # per epoch
    lr: np.ndarray                      # per epoch
    test_epochs: np.ndarray = field(default_factory=lambda: np.array([], dtype=int))
    test_loss: np.ndarray = field(default_factory=lambda: np.array([]))
    wall_seconds: float = 0.0


class _Adam:
    def __init__(self, shapes, beta1, beta2, eps):
        self.m = [np.zeros(s) for s in shapes]
        self.v = [np.zeros(s) for s in shapes]
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.t = 0

    def step(self, params, grads, lr):
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        c1 = 1.0 - b1 ** self.t
        c2 = 1.0 - b2 ** self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * g * g
            p -= lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


def train(net: OperatorNet,
          train_inputs: np.ndarray,
          train_targets: np.ndarray,
          psi: np.ndarray,
          config: TrainConfig,
          test_inputs: np.ndarray | None = None,
          test_targets: np.ndarray | None = None) -> tuple[OperatorNet, TrainTrace]:
    """Train a copy of ``net``; the argument itself is left untouched.

    Deterministic for fixed seeds and thread count: full-batch reductions are
    single matrix products, and mini-batch order comes from the config seed.
    """
    a_train = np.atleast_2d(np.asarray(train_inputs, dtype=np.float64))
    if not np.all(np.isfinite(a_train)):
        raise DataError("training inputs contain NaN or Inf")
    if a_train.shape[1] != net.input_dim:
        raise ConfigurationError(
            f"training inputs have {a_train.shape[1]} columns, network expects {net.input_dim}"
        )
    loss_ws = ReconstructionLoss(psi, train_targets)
    if loss_ws.m2 != net.output_dim:
        raise ConfigurationError(
            f"basis evaluation matrix has {loss_ws.m2} columns, network outputs {net.output_dim}"
        )
    if loss_ws.n_samples != a_train.shape[0]:
        raise ConfigurationError("input and target sample counts differ")
    test_ws = None
    a_test = None
    if test_inputs is not None:
        a_test = np.atleast_2d(np.asarray(test_inputs, dtype=np.float64))
        test_ws = ReconstructionLoss(psi, test_targets)

    net = net.copy()
    params = [net.hidden_weights, net.hidden_biases, net.output_weights]
    adam = _Adam([p.shape for p in params], config.beta1, config.beta2, config.eps)
    rng = np.random.default_rng(config.seed)
    n_samples = a_train.shape[0]

    train_hist = np.empty(config.epochs)
    lr_hist = np.empty(config.epochs)
    test_epochs: list[int] = []
    test_hist: list[float] = []
    started = time.perf_counter()

    for epoch in range(config.epochs):
        lr = learning_rate(epoch, config)
        lr_hist[epoch] = lr
        if config.batch_size is None or config.batch_size >= n_samples:
            loss, grads = loss_ws.loss_and_grads(net, a_train)
            if not np.isfinite(loss):
                raise TrainingDiverged(
                    f"training loss became non-finite at epoch {epoch}",
                    epoch=epoch, checkpoint=net.copy(),
                    trace=_finish_trace(train_hist[:epoch], lr_hist[:epoch],
                                        test_epochs, test_hist, started),
                )
            adam.step(params, [grads.hidden_weights, grads.hidden_biases,
                               grads.output_weights], lr)
        else:
            order = rng.permutation(n_samples)
            batch_losses = []
            for start in range(0, n_samples, config.batch_size):
                rows = order[start: start + config.batch_size]
                loss, grads = loss_ws.loss_and_grads(net, a_train[rows], rows=rows)
                if not np.isfinite(loss):
                    raise TrainingDiverged(
                        f"training loss became non-finite at epoch {epoch}",
                        epoch=epoch, checkpoint=net.copy(),
                        trace=_finish_trace(train_hist[:epoch], lr_hist[:epoch],
                                            test_epochs, test_hist, started),
                    )
                adam.step(params, [grads.hidden_weights, grads.hidden_biases,
                                   grads.output_weights], lr)
                batch_losses.append(loss)
            loss = float(np.mean(batch_losses))
        train_hist[epoch] = loss
        if test_ws is not None and (epoch % config.eval_interval == 0
                                    or epoch == config.epochs - 1):
            test_epochs.append(epoch)
            test_hist.append(test_ws.loss(net, a_test))

    trace = _finish_trace(train_hist, lr_hist, test_epochs, test_hist, started)
    return net, trace


def _finish_trace(train_hist, lr_hist, test_epochs, test_hist, started) -> TrainTrace:
    return TrainTrace(
        train_loss=np.asarray(train_hist, dtype=np.float64),
        lr=np.asarray(lr_hist, dtype=np.float64),
        test_epochs=np.asarray(test_epochs, dtype=int),
        test_loss=np.asarray(test_hist, dtype=np.float64),
        wall_seconds=time.perf_counter() - started,
    )
