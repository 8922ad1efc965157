"""Word-level LSTM language model, trained from scratch in numpy.

Standard cell (input/forget/output gates, tanh candidate, untied weights),
trained with truncated backpropagation through time over ``batch_size``
parallel streams, plain SGD, global gradient-norm clipping, and dropout on
the non-recurrent connections only (embedding output and every layer output,
training time only). The learning rate is divided by ``lr_decay`` after any
epoch whose validation loss fails to improve on the best seen so far by more
than 1e-4 nats.

All state is float64 and every source of randomness is derived from the
training seed, so a (seed, corpus, hyperparams) triple reproduces the exact
same parameters on a given platform.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..corpus import Vocabulary
from ..errors import ModelFormatError, TrainingError
from .base import LanguageModel, softmax

#: Validation-loss slack below which an epoch counts as "did not improve".
IMPROVE_TOLERANCE = 1e-4
VAL_FRACTION = 0.1


@dataclass(frozen=True)
class LstmHyperparams:
    layers: int = 1
    units: int = 64
    embed_dim: int = 32
    unroll_steps: int = 16
    batch_size: int = 16
    lr_init: float = 4.0
    lr_decay: float = 2.0
    clip_norm: float | None = 0.25
    dropout: float = 0.0

    def __post_init__(self):
        for name in ("layers", "units", "embed_dim", "unroll_steps", "batch_size"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be a positive integer")
        if self.lr_init <= 0:
            raise ValueError("lr_init must be positive")
        if self.lr_decay <= 1:
            raise ValueError("lr_decay must exceed 1")
        if self.clip_norm is not None and self.clip_norm <= 0:
            raise ValueError("clip_norm must be positive or None")
        if not 0 <= self.dropout < 1:
            raise ValueError("dropout must lie in [0, 1)")


#: Named hyperparameter presets. "desk" trains in minutes on a ~100k-token
#: corpus. The two paper-* presets record full-scale recipes (hours of GPU
#: training on tens of millions of tokens); they exist for configurability
#: and make no promises at desk scale.
PRESETS: dict[str, LstmHyperparams] = {
    "desk": LstmHyperparams(),
    "paper-twitter": LstmHyperparams(
        layers=2, units=600, embed_dim=200, unroll_steps=25, batch_size=20,
        lr_init=20.0, lr_decay=4.0, clip_norm=0.25, dropout=0.2,
    ),
    "paper-enron": LstmHyperparams(
        layers=3, units=600, embed_dim=200, unroll_steps=20, batch_size=20,
        lr_init=20.0, lr_decay=4.0, clip_norm=None, dropout=0.0,
    ),
}


@dataclass(frozen=True)
class EpochStats:
    epoch: int
    train_nll: float
    val_nll: float
    lr_after: float
    decayed: bool


class LstmContext:
    """Per-layer (hidden, cell) vectors; treated as an immutable value."""

    __slots__ = ("states",)

    def __init__(self, states: tuple[tuple[np.ndarray, np.ndarray], ...]):
        self.states = states


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def init_params(vocab_size: int, hp: LstmHyperparams, seed: int) -> dict[str, np.ndarray]:
    """Uniform [-0.1, 0.1] weights, zero biases, from a seeded generator."""
    rng = np.random.default_rng(seed)

    def uniform(*shape):
        return rng.uniform(-0.1, 0.1, size=shape)

    params = {"embed": uniform(vocab_size, hp.embed_dim)}
    for layer in range(hp.layers):
        in_dim = hp.embed_dim if layer == 0 else hp.units
        params[f"wx{layer}"] = uniform(in_dim, 4 * hp.units)
        params[f"wh{layer}"] = uniform(hp.units, 4 * hp.units)
        params[f"b{layer}"] = np.zeros(4 * hp.units)
    params["wo"] = uniform(hp.units, vocab_size)
    params["bo"] = np.zeros(vocab_size)
    return params


def _zero_states(hp: LstmHyperparams, batch: int) -> list[list[np.ndarray]]:
    return [[np.zeros((batch, hp.units)), np.zeros((batch, hp.units))]
            for _ in range(hp.layers)]


def _cell_forward(params, hp, layer, x, h_prev, c_prev):
    units = hp.units
    z = x @ params[f"wx{layer}"] + h_prev @ params[f"wh{layer}"] + params[f"b{layer}"]
    gi = _sigmoid(z[..., :units])
    gf = _sigmoid(z[..., units:2 * units])
    gg = np.tanh(z[..., 2 * units:3 * units])
    go = _sigmoid(z[..., 3 * units:])
    c = gf * c_prev + gi * gg
    h = go * np.tanh(c)
    return h, c, (gi, gf, gg, go)


def window_forward(params, hp, inputs, targets, states, drop_masks=None):
    """Forward pass over one (batch, steps) window.

    Returns (mean NLL in nats/token, caches or None, final states).
    ``states`` is consumed read-only; ``drop_masks`` is the structure produced
    by :func:`_sample_drop_masks` or None for inference.
    """
    batch, steps = inputs.shape
    xin = params["embed"][inputs]  # (B, T, E)
    if drop_masks is not None:
        xin = xin * drop_masks[0]
    caches = []
    new_states = []
    for layer in range(hp.layers):
        h_prev, c_prev = states[layer]
        hs = np.empty((batch, steps, hp.units))
        layer_cache = []
        for t in range(steps):
            h, c, gates = _cell_forward(params, hp, layer, xin[:, t], h_prev, c_prev)
            layer_cache.append((xin[:, t], h_prev, c_prev, c, gates))
            h_prev, c_prev = h, c
            hs[:, t] = h
        caches.append(layer_cache)
        new_states.append([h_prev, c_prev])
        xin = hs if drop_masks is None else hs * drop_masks[layer + 1]
    logits = xin @ params["wo"] + params["bo"]  # (B, T, V)
    shifted = logits - logits.max(axis=-1, keepdims=True)
    logz = np.log(np.exp(shifted).sum(axis=-1))
    picked = np.take_along_axis(shifted, targets[..., None], axis=-1)[..., 0]
    loss = float((logz - picked).mean())
    return loss, (caches, xin, logits), new_states


def _sample_drop_masks(hp, rng, batch, steps):
    """Inverted-dropout masks for every non-recurrent boundary, or None."""
    if hp.dropout == 0.0:
        return None
    keep = 1.0 - hp.dropout
    masks = []
    for layer in range(hp.layers + 1):
        dim = hp.embed_dim if layer == 0 else hp.units
        masks.append((rng.random((batch, steps, dim)) < keep) / keep)
    return masks


def window_loss_and_grads(params, hp, inputs, targets, states, drop_masks=None):
    """Loss, analytic parameter gradients, and carried states for one window."""
    loss, (caches, top_out, logits), new_states = window_forward(
        params, hp, inputs, targets, states, drop_masks)
    batch, steps = inputs.shape
    grads = {k: np.zeros_like(v) for k, v in params.items()}

    shifted = logits - logits.max(axis=-1, keepdims=True)
    expd = np.exp(shifted)
    dlogits = expd / expd.sum(axis=-1, keepdims=True)
    rows = np.arange(batch)[:, None], np.arange(steps)[None, :]
    dlogits[rows[0], rows[1], targets] -= 1.0
    dlogits /= batch * steps

    grads["wo"] = np.tensordot(top_out, dlogits, axes=([0, 1], [0, 1]))
    grads["bo"] = dlogits.sum(axis=(0, 1))
    d_out = np.tensordot(dlogits, params["wo"].T, axes=([2], [0]))  # (B, T, H)

    for layer in reversed(range(hp.layers)):
        if drop_masks is not None:
            d_out = d_out * drop_masks[layer + 1]
        dh_next = np.zeros((batch, hp.units))
        dc_next = np.zeros((batch, hp.units))
        in_dim = hp.embed_dim if layer == 0 else hp.units
        d_in = np.empty((batch, steps, in_dim))
        wh_t = params[f"wh{layer}"].T
        wx_t = params[f"wx{layer}"].T
        for t in reversed(range(steps)):
            x_t, h_prev, c_prev, c, (gi, gf, gg, go) = caches[layer][t]
            dh = d_out[:, t] + dh_next
            tc = np.tanh(c)
            d_go = dh * tc
            dc = dh * go * (1.0 - tc * tc) + dc_next
            d_gi = dc * gg
            d_gg = dc * gi
            d_gf = dc * c_prev
            dc_next = dc * gf
            dz = np.concatenate([
                d_gi * gi * (1.0 - gi),
                d_gf * gf * (1.0 - gf),
                d_gg * (1.0 - gg * gg),
                d_go * go * (1.0 - go),
            ], axis=1)
            grads[f"wx{layer}"] += x_t.T @ dz
            grads[f"wh{layer}"] += h_prev.T @ dz
            grads[f"b{layer}"] += dz.sum(axis=0)
            dh_next = dz @ wh_t
            d_in[:, t] = dz @ wx_t
        d_out = d_in
    if drop_masks is not None:
        d_out = d_out * drop_masks[0]
    np.add.at(grads["embed"], inputs.reshape(-1), d_out.reshape(-1, hp.embed_dim))
    return loss, grads, new_states


def global_grad_norm(grads: dict[str, np.ndarray]) -> float:
    return float(np.sqrt(sum(float((g * g).sum()) for g in grads.values())))


def clip_gradients(grads: dict[str, np.ndarray], clip_norm: float | None) -> float:
    """Scale all gradients in place so the global norm is at most clip_norm."""
    norm = global_grad_norm(grads)
    if clip_norm is not None and norm > clip_norm:
        scale = clip_norm / norm
        for g in grads.values():
            g *= scale
    return norm


def sgd_step(params, grads, lr: float, clip_norm: float | None = None) -> None:
    """In-place update: clip globally, then theta <- theta - lr * grad."""
    clip_gradients(grads, clip_norm)
    for name, grad in grads.items():
        params[name] -= lr * grad


def _batchify(ids: np.ndarray, batch: int) -> np.ndarray:
    stream_len = len(ids) // batch
    if stream_len < 2:
        raise TrainingError(
            f"stream of {len(ids)} tokens is too small for batch_size={batch}"
        )
    return ids[: batch * stream_len].reshape(batch, stream_len)


def _mean_nll(params, hp, data: np.ndarray) -> float:
    """Forward-only mean NLL over a batchified stream (no dropout)."""
    batch, stream_len = data.shape
    states = _zero_states(hp, batch)
    total, count = 0.0, 0
    for start in range(0, stream_len - 1, hp.unroll_steps):
        steps = min(hp.unroll_steps, stream_len - 1 - start)
        inputs = data[:, start:start + steps]
        targets = data[:, start + 1:start + 1 + steps]
        loss, _, states = window_forward(params, hp, inputs, targets, states)
        total += loss * batch * steps
        count += batch * steps
    return total / count


class LstmModel(LanguageModel):
    backend = "lstm"

    def __init__(self, vocab: Vocabulary, hp: LstmHyperparams,
                 params: dict[str, np.ndarray], history: Sequence[EpochStats] = ()):
        super().__init__(vocab)
        if params["embed"].shape[0] != len(vocab):
            raise ModelFormatError(
                f"embedding rows ({params['embed'].shape[0]}) != |V| ({len(vocab)})"
            )
        self.hp = hp
        self.params = params
        self.history = list(history)

    def initial_context(self) -> LstmContext:
        zeros = np.zeros(self.hp.units)
        return LstmContext(tuple((zeros, zeros) for _ in range(self.hp.layers)))

    def advance(self, ctx: LstmContext, token_index: int) -> LstmContext:
        self.check_index(token_index)
        x = self.params["embed"][token_index]
        states = []
        for layer in range(self.hp.layers):
            h_prev, c_prev = ctx.states[layer]
            h, c, _ = _cell_forward(self.params, self.hp, layer, x, h_prev, c_prev)
            states.append((h, c))
            x = h
        return LstmContext(tuple(states))

    def next_distribution(self, ctx: LstmContext) -> np.ndarray:
        h_top = ctx.states[-1][0]
        return softmax(h_top @ self.params["wo"] + self.params["bo"])

    def to_payload(self) -> bytes:
        buf = io.BytesIO()
        np.savez(buf, **self.params)
        return buf.getvalue()

    @classmethod
    def from_payload(cls, vocab: Vocabulary, hp: LstmHyperparams, payload: bytes,
                     history: Sequence[EpochStats] = ()) -> "LstmModel":
        try:
            with np.load(io.BytesIO(payload)) as stash:
                params = {name: stash[name] for name in stash.files}
        except Exception as exc:
            raise ModelFormatError(f"bad lstm payload: {exc}") from None
        return cls(vocab, hp, params, history)


def train_lstm(tokens: Sequence[str], vocab: Vocabulary, hp: LstmHyperparams,
               epochs: int, seed: int) -> LstmModel:
    """Train on a token stream (OOV folded to <unk>), last 10% held out."""
    if len(tokens) < hp.unroll_steps * hp.batch_size:
        raise TrainingError(
            f"corpus of {len(tokens)} tokens is smaller than "
            f"unroll_steps*batch_size = {hp.unroll_steps * hp.batch_size}"
        )
    ids = np.asarray([vocab.index_or_unk(t) for t in tokens], dtype=np.int64)
    split = int(round(len(ids) * (1.0 - VAL_FRACTION)))
    train_data = _batchify(ids[:split], hp.batch_size)
    val_batch = max(1, min(hp.batch_size, len(ids[split:]) // (hp.unroll_steps + 1)))
    val_data = _batchify(ids[split:], val_batch)

    params = init_params(len(vocab), hp, seed)
    drop_rng = np.random.default_rng([seed, 0xD0])
    lr = hp.lr_init
    best_val = np.inf
    history: list[EpochStats] = []
    stream_len = train_data.shape[1]
    for epoch in range(epochs):
        states = _zero_states(hp, hp.batch_size)
        total, count = 0.0, 0
        for start in range(0, stream_len - 1, hp.unroll_steps):
            steps = min(hp.unroll_steps, stream_len - 1 - start)
            inputs = train_data[:, start:start + steps]
            targets = train_data[:, start + 1:start + 1 + steps]
            masks = _sample_drop_masks(hp, drop_rng, hp.batch_size, steps)
            loss, grads, states = window_loss_and_grads(
                params, hp, inputs, targets, states, masks)
            if not np.isfinite(loss):
                raise TrainingError(
                    f"training diverged at epoch {epoch} (loss={loss}); "
                    "lower lr_init or enable clip_norm"
                )
            sgd_step(params, grads, lr, hp.clip_norm)
            total += loss * hp.batch_size * steps
            count += hp.batch_size * steps
        train_nll = total / count
        val_nll = _mean_nll(params, hp, val_data)
        if not np.isfinite(val_nll):
            raise TrainingError(f"validation loss diverged at epoch {epoch}")
        decayed = val_nll >= best_val - IMPROVE_TOLERANCE
        if decayed:
            lr /= hp.lr_decay
        else:
            best_val = val_nll
        history.append(EpochStats(epoch, train_nll, val_nll, lr, decayed))
    return LstmModel(vocab, hp, params, history)
