"""Baseline and multi-head inertial regression networks.

Each model is conv -> ReLU -> maxpool per head, channel-wise concatenation,
then a shared Bi-LSTM, dropout, a hidden FC layer and a linear regression
output.  Multi-head variants split the six input channels internally, so all
head modes accept the same (batch, 6, window) tensors.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import NumericError, ShapeError, UsageError
from .kernels import Adam, BiLSTM, Conv1d, ConvSpec, Dense, Dropout, DropoutSpec, MaxPool1d, ReLU
from .losses import LossSpec, compute_loss

HEAD_MODES = ("single", "head2", "head3")

# channel groups per head mode: indices into (fx, fy, fz, wx, wy, wz)
_GROUPS = {
    "single": ([0, 1, 2, 3, 4, 5],),
    "head2": ([0, 1, 2], [3, 4, 5]),
    "head3": ([0, 3], [1, 4], [2, 5]),
}

CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class ModelConfig:
    head_mode: str = "single"
    conv_filters: int = 64
    kernel_size: int = 5
    stride: int = 1
    pool_depth: int = 3
    dropout: float = 0.25
    lstm_hidden: int = 128
    fc_width: int = 256
    output_dim: int = 1

    def __post_init__(self):
        if self.head_mode not in HEAD_MODES:
            raise ShapeError(f"unknown head mode '{self.head_mode}'")
        if min(self.conv_filters, self.kernel_size, self.stride, self.pool_depth,
               self.lstm_hidden, self.fc_width, self.output_dim) < 1:
            raise ShapeError(f"invalid model config: {self}")
        DropoutSpec(self.dropout)

    @property
    def channel_groups(self):
        return _GROUPS[self.head_mode]

    @property
    def lstm_input(self) -> int:
        return self.conv_filters * len(self.channel_groups)

    def parameter_count(self) -> int:
        """Closed-form learnable parameter count."""
        n = 0
        for group in self.channel_groups:
            n += self.conv_filters * (len(group) * self.kernel_size + 1)
        gates = 4 * self.lstm_hidden
        n += 2 * (gates * (self.lstm_input + self.lstm_hidden) + gates)
        summary = 2 * self.lstm_hidden
        n += (summary + 1) * self.fc_width
        n += (self.fc_width + 1) * self.output_dim
        return n


class InertialRegressor:
    """A configured network together with its parameters."""

    def __init__(self, config: ModelConfig, rng: np.random.Generator):
        self.config = config
        self.branches = []
        for group in config.channel_groups:
            spec = ConvSpec(len(group), config.conv_filters, config.kernel_size,
                            config.stride)
            self.branches.append(
                (list(group), Conv1d(spec, rng), ReLU(), MaxPool1d(config.pool_depth))
            )
        self.lstm = BiLSTM(config.lstm_input, config.lstm_hidden, rng)
        self.drop = Dropout(DropoutSpec(config.dropout))
        self.fc = Dense(2 * config.lstm_hidden, config.fc_width, rng)
        self.fc_act = ReLU()
        self.head = Dense(config.fc_width, config.output_dim, rng)
        self._summary_shape = None

    def _layers(self):
        for i, (_, conv, _, _) in enumerate(self.branches):
            yield f"branch{i}.conv", conv
        yield "lstm", self.lstm
        yield "fc", self.fc
        yield "head", self.head

    def parameters(self) -> dict[str, np.ndarray]:
        return {f"{prefix}.{name}": arr
                for prefix, layer in self._layers()
                for name, arr in layer.params.items()}

    def gradients(self) -> dict[str, np.ndarray]:
        return {f"{prefix}.{name}": arr
                for prefix, layer in self._layers()
                for name, arr in layer.grads.items()}

    def zero_grad(self):
        for _, layer in self._layers():
            layer.zero_grad()

    def forward(self, x, train=False, rng=None):
        x = np.asarray(x, dtype=float)
        if x.ndim != 3 or x.shape[1] != 6:
            raise ShapeError(f"expected (B, 6, W) windows, got {x.shape}")
        parts = []
        for cols, conv, act, pool in self.branches:
            parts.append(pool.forward(act.forward(conv.forward(x[:, cols, :]))))
        trunk = np.concatenate(parts, axis=1)
        hs = self.lstm.forward(trunk)
        hidden = self.config.lstm_hidden
        # sequence summary: forward state at the last step, backward at the first
        summary = np.concatenate([hs[:, :hidden, -1], hs[:, hidden:, 0]], axis=1)
        self._summary_shape = hs.shape
        out = self.drop.forward(summary, train=train, rng=rng)
        out = self.fc_act.forward(self.fc.forward(out))
        return self.head.forward(out)

    def backward(self, gout):
        if self._summary_shape is None:
            raise UsageError("backward called before forward")
        g = self.head.backward(gout)
        g = self.fc.backward(self.fc_act.backward(g))
        g = self.drop.backward(g)
        hidden = self.config.lstm_hidden
        ghs = np.zeros(self._summary_shape)
        ghs[:, :hidden, -1] = g[:, :hidden]
        ghs[:, hidden:, 0] = g[:, hidden:]
        gtrunk = self.lstm.backward(ghs)
        offset = 0
        for cols, conv, act, pool in self.branches:
            gpart = gtrunk[:, offset : offset + self.config.conv_filters, :]
            conv.backward(act.backward(pool.backward(gpart)))
            offset += self.config.conv_filters

    def predict(self, windows) -> np.ndarray:
        """Deterministic eval-mode prediction, (batch, output_dim)."""
        return self.forward(windows, train=False)


def build_model(config: ModelConfig, rng: np.random.Generator) -> InertialRegressor:
    """Construct a model with uniform +-1/sqrt(fan_in) initial weights."""
    return InertialRegressor(config, rng)


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 10
    batch_size: int = 64
    learning_rate: float = 0.001
    loss: LossSpec = field(default_factory=LossSpec)
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1 or self.learning_rate <= 0:
            raise ShapeError(f"invalid training config: {self}")


def train_model(model: InertialRegressor, tc: TrainConfig, windows, labels,
                shuffle_rng: np.random.Generator | None = None,
                dropout_rng: np.random.Generator | None = None) -> list[float]:
    """Mini-batch Adam training; returns the per-epoch mean loss curve.

    Raises NumericError and aborts if the loss goes non-finite.
    """
    windows = np.asarray(windows, dtype=float)
    labels = np.asarray(labels, dtype=float)
    if len(windows) == 0:
        raise UsageError("cannot train on an empty dataset")
    if len(windows) != len(labels):
        raise ShapeError("window/label count mismatch")
    shuffle_rng = shuffle_rng or np.random.default_rng(tc.seed)
    dropout_rng = dropout_rng or np.random.default_rng(tc.seed + 1)
    opt = Adam(lr=tc.learning_rate)
    curve = []
    n = len(windows)
    for _ in range(tc.epochs):
        order = shuffle_rng.permutation(n)
        total = 0.0
        for start in range(0, n, tc.batch_size):
            idx = order[start : start + tc.batch_size]
            pred = model.forward(windows[idx], train=True, rng=dropout_rng)
            value, grad = compute_loss(tc.loss, labels[idx], pred)
            if not np.isfinite(value):
                raise NumericError(f"training loss became non-finite ({value})")
            model.zero_grad()
            model.backward(grad)
            opt.step(model.parameters(), model.gradients())
            total += value * len(idx)
        curve.append(total / n)
    return curve


# ---------------------------------------------------------------------------
# checkpoints


def save_checkpoint(path, model: InertialRegressor):
    """Write config + parameters as a versioned .npz archive."""
    meta = {"version": CHECKPOINT_VERSION, "config": asdict(model.config)}
    arrays = {f"param/{k}": v for k, v in model.parameters().items()}
    np.savez(path, __meta__=np.frombuffer(json.dumps(meta).encode(), dtype=np.uint8),
             **arrays)


def load_checkpoint(path) -> InertialRegressor:
    with np.load(path) as archive:
        meta = json.loads(archive["__meta__"].tobytes().decode())
        if meta.get("version") != CHECKPOINT_VERSION:
            raise UsageError(f"unsupported checkpoint version {meta.get('version')}")
        config = ModelConfig(**meta["config"])
        model = InertialRegressor(config, np.random.default_rng(0))
        params = model.parameters()
        for key in archive.files:
            if not key.startswith("param/"):
                continue
            name = key[len("param/"):]
            if name not in params:
                raise UsageError(f"unexpected parameter '{name}' in checkpoint")
            params[name][...] = archive[key]
    return model
