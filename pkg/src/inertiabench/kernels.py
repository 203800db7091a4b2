"""Differentiable numeric building blocks with hand-derived backward passes.

Layers operate on batched float64 arrays shaped ``(batch, channels, steps)``
or ``(batch, features)``.  Each layer caches whatever its backward pass needs
during ``forward``; parameter gradients accumulate into ``grads`` until
``zero_grad`` is called.  All randomness comes from explicitly passed
``numpy.random.Generator`` instances.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import NumericError, ShapeError, UsageError


def _sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


# ---------------------------------------------------------------------------
# specs


@dataclass(frozen=True)
class ConvSpec:
    """Shape description for a 1D convolution layer (valid padding)."""

    in_channels: int
    filters: int
    kernel: int
    stride: int = 1

    def __post_init__(self):
        if self.in_channels < 1 or self.filters < 1 or self.kernel < 1 or self.stride < 1:
            raise ShapeError(f"invalid conv spec: {self}")

    def out_steps(self, in_steps: int) -> int:
        if in_steps < self.kernel:
            raise ShapeError(f"input steps {in_steps} < kernel {self.kernel}")
        return (in_steps - self.kernel) // self.stride + 1


@dataclass(frozen=True)
class DropoutSpec:
    """Dropout rate container; ``rate`` is the drop probability."""

    rate: float

    def __post_init__(self):
        if not (0.0 <= self.rate < 1.0):
            raise ShapeError(f"dropout rate must be in [0, 1): {self.rate}")


@dataclass
class LstmParams:
    """Gate weights for one bidirectional LSTM layer.

    Gate order inside the stacked ``4H`` axis is input, forget, cell, output.
    ``*_wx`` is (4H, input_size), ``*_wh`` is (4H, H), ``*_b`` is (4H,).
    """

    input_size: int
    hidden_size: int
    fwd_wx: np.ndarray
    fwd_wh: np.ndarray
    fwd_b: np.ndarray
    bwd_wx: np.ndarray
    bwd_wh: np.ndarray
    bwd_b: np.ndarray

    @classmethod
    def zeros(cls, input_size: int, hidden_size: int) -> "LstmParams":
        g = 4 * hidden_size
        return cls(
            input_size,
            hidden_size,
            np.zeros((g, input_size)),
            np.zeros((g, hidden_size)),
            np.zeros(g),
            np.zeros((g, input_size)),
            np.zeros((g, hidden_size)),
            np.zeros(g),
        )

    def validate(self):
        g = 4 * self.hidden_size
        shapes = {
            "fwd_wx": (g, self.input_size),
            "fwd_wh": (g, self.hidden_size),
            "fwd_b": (g,),
            "bwd_wx": (g, self.input_size),
            "bwd_wh": (g, self.hidden_size),
            "bwd_b": (g,),
        }
        for name, shape in shapes.items():
            arr = getattr(self, name)
            if arr.shape != shape:
                raise ShapeError(f"{name} has shape {arr.shape}, expected {shape}")
            if not np.all(np.isfinite(arr)):
                raise NumericError(f"{name} contains non-finite values")


@dataclass
class DenseParams:
    """Weights for a fully connected layer: ``y = x @ weights + bias``."""

    weights: np.ndarray
    bias: np.ndarray

    def validate(self):
        if self.weights.ndim != 2 or self.bias.shape != (self.weights.shape[1],):
            raise ShapeError(
                f"inconsistent dense shapes {self.weights.shape} / {self.bias.shape}"
            )
        if not (np.all(np.isfinite(self.weights)) and np.all(np.isfinite(self.bias))):
            raise NumericError("dense parameters contain non-finite values")


# ---------------------------------------------------------------------------
# layers


class Layer:
    """Base class: parameter/gradient dicts plus forward/backward."""

    def __init__(self):
        self.params: dict[str, np.ndarray] = {}
        self.grads: dict[str, np.ndarray] = {}

    def zero_grad(self):
        for name, p in self.params.items():
            self.grads[name] = np.zeros_like(p)

    def forward(self, x, train=False, rng=None):
        raise NotImplementedError

    def backward(self, gout):
        raise NotImplementedError

    def _accum(self, name, value):
        if name not in self.grads:
            self.grads[name] = np.zeros_like(self.params[name])
        self.grads[name] += value


def _init_uniform(rng, shape, fan_in):
    bound = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape)


class Conv1d(Layer):
    """1D convolution over (batch, channels, steps), valid padding."""

    def __init__(self, spec: ConvSpec, rng: np.random.Generator | None = None):
        super().__init__()
        self.spec = spec
        shape = (spec.filters, spec.in_channels, spec.kernel)
        if rng is None:
            self.params["w"] = np.zeros(shape)
        else:
            self.params["w"] = _init_uniform(rng, shape, spec.in_channels * spec.kernel)
        self.params["b"] = np.zeros(spec.filters)
        self._cache = None

    def forward(self, x, train=False, rng=None):
        if x.ndim != 3 or x.shape[1] != self.spec.in_channels:
            raise ShapeError(
                f"expected (B, {self.spec.in_channels}, T) input, got {x.shape}"
            )
        if not np.all(np.isfinite(x)):
            raise NumericError("conv input contains non-finite values")
        self.spec.out_steps(x.shape[2])
        s, k = self.spec.stride, self.spec.kernel
        xs = sliding_window_view(x, k, axis=2)[:, :, ::s, :]
        out = np.einsum("fci,bcti->bft", self.params["w"], xs)
        out += self.params["b"][None, :, None]
        self._cache = (x.shape, xs)
        return out

    def backward(self, gout):
        if self._cache is None:
            raise UsageError("backward called before forward")
        in_shape, xs = self._cache
        s, k = self.spec.stride, self.spec.kernel
        t_out = gout.shape[2]
        self._accum("w", np.einsum("bft,bcti->fci", gout, xs))
        self._accum("b", gout.sum(axis=(0, 2)))
        gx = np.zeros(in_shape)
        w = self.params["w"]
        for i in range(k):
            gx[:, :, i : i + t_out * s : s] += np.einsum("bft,fc->bct", gout, w[:, :, i])
        return gx


class ReLU(Layer):
    def __init__(self):
        super().__init__()
        self._mask = None

    def forward(self, x, train=False, rng=None):
        self._mask = x > 0
        return np.where(self._mask, x, 0.0)

    def backward(self, gout):
        if self._mask is None:
            raise UsageError("backward called before forward")
        return gout * self._mask


class MaxPool1d(Layer):
    """Non-overlapping max pooling; trailing partial window dropped."""

    def __init__(self, depth: int):
        super().__init__()
        if depth < 1:
            raise ShapeError(f"pool depth must be >= 1, got {depth}")
        self.depth = depth
        self._cache = None

    def forward(self, x, train=False, rng=None):
        d = self.depth
        b, c, t = x.shape
        if d > t:
            raise ShapeError(f"pool depth {d} exceeds {t} steps")
        t_out = t // d
        xr = x[:, :, : t_out * d].reshape(b, c, t_out, d)
        idx = xr.argmax(axis=3)
        out = np.take_along_axis(xr, idx[..., None], axis=3)[..., 0]
        self._cache = (x.shape, idx)
        return out

    def backward(self, gout):
        if self._cache is None:
            raise UsageError("backward called before forward")
        in_shape, idx = self._cache
        b, c, t = in_shape
        d = self.depth
        t_out = idx.shape[2]
        gxr = np.zeros((b, c, t_out, d))
        np.put_along_axis(gxr, idx[..., None], gout[..., None], axis=3)
        gx = np.zeros(in_shape)
        gx[:, :, : t_out * d] = gxr.reshape(b, c, t_out * d)
        return gx


class BiLSTM(Layer):
    """Bidirectional LSTM over (batch, channels, steps).

    Output is (batch, 2*hidden, steps): forward-direction hidden states
    stacked on top of backward-direction ones for every time step.
    """

    def __init__(self, input_size: int, hidden_size: int,
                 rng: np.random.Generator | None = None):
        super().__init__()
        self.input_size = input_size
        self.hidden_size = hidden_size
        g = 4 * hidden_size
        for d in ("fwd", "bwd"):
            if rng is None:
                self.params[f"{d}_wx"] = np.zeros((g, input_size))
                self.params[f"{d}_wh"] = np.zeros((g, hidden_size))
            else:
                self.params[f"{d}_wx"] = _init_uniform(rng, (g, input_size), input_size)
                self.params[f"{d}_wh"] = _init_uniform(rng, (g, hidden_size), hidden_size)
            self.params[f"{d}_b"] = np.zeros(g)
        self._cache = None

    @classmethod
    def from_params(cls, p: LstmParams) -> "BiLSTM":
        p.validate()
        layer = cls(p.input_size, p.hidden_size)
        for name in ("fwd_wx", "fwd_wh", "fwd_b", "bwd_wx", "bwd_wh", "bwd_b"):
            layer.params[name] = np.array(getattr(p, name), dtype=float)
        return layer

    def _run(self, x, direction: str):
        b, _, t = x.shape
        h = self.hidden_size
        wx = self.params[f"{direction}_wx"]
        wh = self.params[f"{direction}_wh"]
        bias = self.params[f"{direction}_b"]
        order = range(t) if direction == "fwd" else range(t - 1, -1, -1)
        hs = np.zeros((t, b, h))
        cache = []
        h_prev = np.zeros((b, h))
        c_prev = np.zeros((b, h))
        for step in order:
            xt = x[:, :, step]
            z = xt @ wx.T + h_prev @ wh.T + bias
            gi = _sigmoid(z[:, :h])
            gf = _sigmoid(z[:, h : 2 * h])
            gg = np.tanh(z[:, 2 * h : 3 * h])
            go = _sigmoid(z[:, 3 * h :])
            c = gf * c_prev + gi * gg
            tc = np.tanh(c)
            ht = go * tc
            hs[step] = ht
            cache.append((step, xt, h_prev, c_prev, gi, gf, gg, go, tc))
            h_prev, c_prev = ht, c
        return hs, cache

    def _run_back(self, ghs, cache, direction: str):
        h = self.hidden_size
        wx = self.params[f"{direction}_wx"]
        wh = self.params[f"{direction}_wh"]
        gwx = np.zeros_like(wx)
        gwh = np.zeros_like(wh)
        gb = np.zeros_like(self.params[f"{direction}_b"])
        b = ghs.shape[1]
        gx = np.zeros((b, self.input_size, ghs.shape[0]))
        dh_next = np.zeros((b, h))
        dc_next = np.zeros((b, h))
        for step, xt, h_prev, c_prev, gi, gf, gg, go, tc in reversed(cache):
            dh = ghs[step] + dh_next
            do = dh * tc
            dc = dc_next + dh * go * (1.0 - tc * tc)
            di = dc * gg
            dg = dc * gi
            df = dc * c_prev
            dc_next = dc * gf
            dz = np.concatenate(
                [
                    di * gi * (1.0 - gi),
                    df * gf * (1.0 - gf),
                    dg * (1.0 - gg * gg),
                    do * go * (1.0 - go),
                ],
                axis=1,
            )
            gwx += dz.T @ xt
            gwh += dz.T @ h_prev
            gb += dz.sum(axis=0)
            gx[:, :, step] = dz @ wx
            dh_next = dz @ wh
        self._accum(f"{direction}_wx", gwx)
        self._accum(f"{direction}_wh", gwh)
        self._accum(f"{direction}_b", gb)
        return gx

    def forward(self, x, train=False, rng=None):
        if x.ndim != 3 or x.shape[1] != self.input_size:
            raise ShapeError(f"expected (B, {self.input_size}, T) input, got {x.shape}")
        hs_f, cache_f = self._run(x, "fwd")
        hs_b, cache_b = self._run(x, "bwd")
        self._cache = (cache_f, cache_b)
        # (T, B, H) -> (B, H, T), stacked fwd over bwd
        out = np.concatenate([hs_f.transpose(1, 2, 0), hs_b.transpose(1, 2, 0)], axis=1)
        return out

    def backward(self, gout):
        if self._cache is None:
            raise UsageError("backward called before forward")
        cache_f, cache_b = self._cache
        h = self.hidden_size
        ghs_f = gout[:, :h, :].transpose(2, 0, 1)
        ghs_b = gout[:, h:, :].transpose(2, 0, 1)
        gx = self._run_back(ghs_f, cache_f, "fwd")
        gx += self._run_back(ghs_b, cache_b, "bwd")
        return gx


class Dropout(Layer):
    """Inverted dropout: identity in eval mode, x * mask / (1-p) in train."""

    def __init__(self, spec: DropoutSpec):
        super().__init__()
        self.spec = spec
        self._mask = None

    def forward(self, x, train=False, rng=None):
        p = self.spec.rate
        if not train or p == 0.0:
            self._mask = 1.0
            return x
        if rng is None:
            raise UsageError("train-mode dropout needs an rng")
        keep = rng.random(x.shape) < (1.0 - p)
        self._mask = keep / (1.0 - p)
        return x * self._mask

    def backward(self, gout):
        if self._mask is None:
            raise UsageError("backward called before forward")
        return gout * self._mask


class Dense(Layer):
    """Fully connected layer over (batch, features)."""

    def __init__(self, n_in: int, n_out: int, rng: np.random.Generator | None = None):
        super().__init__()
        if rng is None:
            self.params["w"] = np.zeros((n_in, n_out))
        else:
            self.params["w"] = _init_uniform(rng, (n_in, n_out), n_in)
        self.params["b"] = np.zeros(n_out)
        self._x = None

    def forward(self, x, train=False, rng=None):
        if x.ndim != 2 or x.shape[1] != self.params["w"].shape[0]:
            raise ShapeError(
                f"expected (B, {self.params['w'].shape[0]}) input, got {x.shape}"
            )
        self._x = x
        return x @ self.params["w"] + self.params["b"]

    def backward(self, gout):
        if self._x is None:
            raise UsageError("backward called before forward")
        self._accum("w", self._x.T @ gout)
        self._accum("b", gout.sum(axis=0))
        return gout @ self.params["w"].T


# ---------------------------------------------------------------------------
# optimizer


class Adam:
    """Adam with bias correction; per-name moment buffers.

    Moments are keyed by parameter name, so the update is independent of
    the order in which parameters are visited.
    """

    def __init__(self, lr=0.001, beta1=0.9, beta2=0.999, epsilon=1e-8):
        if lr <= 0 or not (0 < beta1 < 1) or not (0 < beta2 < 1):
            raise ShapeError("invalid Adam hyperparameters")
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.step_count = 0
        self.m: dict[str, np.ndarray] = {}
        self.v: dict[str, np.ndarray] = {}

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]):
        """Update ``params`` in place from ``grads``."""
        self.step_count += 1
        t = self.step_count
        b1, b2 = self.beta1, self.beta2
        for name in sorted(params):
            g = grads[name]
            if g.shape != params[name].shape:
                raise ShapeError(f"gradient shape mismatch for '{name}'")
            if name not in self.m:
                self.m[name] = np.zeros_like(g)
                self.v[name] = np.zeros_like(g)
            self.m[name] = b1 * self.m[name] + (1 - b1) * g
            self.v[name] = b2 * self.v[name] + (1 - b2) * g * g
            m_hat = self.m[name] / (1 - b1**t)
            v_hat = self.v[name] / (1 - b2**t)
            params[name] -= self.lr * m_hat / (np.sqrt(v_hat) + self.epsilon)


# ---------------------------------------------------------------------------
# single-sample functional API (channels x steps arrays)


def conv1d_forward(x, weights, bias, stride: int = 1):
    """Valid-padding 1D convolution of a (channels, steps) array.

    ``weights`` is (filters, channels, kernel), ``bias`` is (filters,).
    """
    x = np.asarray(x, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if x.ndim == 1:
        x = x[None, :]
    if weights.ndim == 2:
        weights = weights[None]
    spec = ConvSpec(weights.shape[1], weights.shape[0], weights.shape[2], stride)
    layer = Conv1d(spec)
    layer.params["w"] = weights
    layer.params["b"] = np.asarray(bias, dtype=float) * np.ones(weights.shape[0])
    return layer.forward(x[None])[0]


def relu(x):
    return np.maximum(0.0, np.asarray(x, dtype=float))


def maxpool1d(x, depth: int):
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        return MaxPool1d(depth).forward(x[None, None])[0, 0]
    return MaxPool1d(depth).forward(x[None])[0]


def bilstm_forward(x, params: LstmParams):
    x = np.asarray(x, dtype=float)
    return BiLSTM.from_params(params).forward(x[None])[0]


def dropout_apply(x, spec: DropoutSpec, train: bool, rng=None):
    return Dropout(spec).forward(np.asarray(x, dtype=float), train=train, rng=rng)


def fc_forward(x, params: DenseParams):
    params.validate()
    x = np.asarray(x, dtype=float)
    layer = Dense(*params.weights.shape)
    layer.params["w"] = params.weights
    layer.params["b"] = params.bias
    if x.ndim == 1:
        return layer.forward(x[None])[0]
    return layer.forward(x)
