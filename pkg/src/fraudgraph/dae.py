"""Denoising autoencoder for latent tabular features.

Single hidden layer: tanh encoder, linear decoder. Training corrupts
inputs by zero-masking random cells and reconstructs the clean row under
mean squared error, which distills robust structure from unlabeled rows.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .embedding import EmbeddingMatrix
from .errors import UsageError
from .features import FeatureTable


@dataclass
class DaeModel:
    w_enc: np.ndarray   # (input_dim, hidden_dim)
    b_enc: np.ndarray   # (hidden_dim,)
    w_dec: np.ndarray   # (hidden_dim, input_dim)
    b_dec: np.ndarray   # (input_dim,)
    corruption_rate: float
    loss_curve: list = field(default_factory=list)

    @property
    def input_dim(self):
        return self.w_enc.shape[0]

    @property
    def hidden_dim(self):
        return self.w_enc.shape[1]


def reconstruction_loss_and_grad(w_enc, b_enc, w_dec, b_dec, x, mask):
    """Loss and analytic gradients for one corrupted batch.

    ``mask`` is 1 where the input survives corruption. The loss is the
    mean over all cells of the squared error between the reconstruction
    of the masked input and the clean input.
    """
    x_tilde = x * mask
    pre = x_tilde @ w_enc + b_enc
    hidden = np.tanh(pre)
    x_hat = hidden @ w_dec + b_dec
    resid = x_hat - x
    loss = float(np.mean(resid * resid))
    d_xhat = 2.0 * resid / resid.size
    g_w_dec = hidden.T @ d_xhat
    g_b_dec = d_xhat.sum(axis=0)
    d_hidden = d_xhat @ w_dec.T
    d_pre = d_hidden * (1.0 - hidden * hidden)
    g_w_enc = x_tilde.T @ d_pre
    g_b_enc = d_pre.sum(axis=0)
    return loss, (g_w_enc, g_b_enc, g_w_dec, g_b_dec)


def dae_train(table, hidden_dim: int = 32, corruption_rate: float = 0.1,
              epochs: int = 30, lr: float = 0.05, seed: int = 0,
              batch_size: int = 32) -> DaeModel:
    """Train by seeded minibatch SGD; deterministic for a given seed.

    The monitored loss is the clean-input reconstruction MSE over the full
    table, recorded before training and after every epoch. An epoch that
    raises the monitored loss is rolled back and the learning rate halved,
    so the recorded curve never increases.
    """
    x = table.to_matrix() if isinstance(table, FeatureTable) else np.asarray(
        table, dtype=np.float64)
    if hidden_dim <= 0:
        raise UsageError(f"hidden_dim must be positive, got {hidden_dim}")
    if lr <= 0:
        raise UsageError(f"lr must be positive, got {lr}")
    if not 0.0 <= corruption_rate < 1.0:
        raise UsageError(f"corruption_rate must be in [0, 1), got {corruption_rate}")
    n, d = x.shape
    rng = np.random.default_rng(seed)
    limit_e = 1.0 / np.sqrt(d)
    limit_d = 1.0 / np.sqrt(hidden_dim)
    w_enc = rng.uniform(-limit_e, limit_e, size=(d, hidden_dim))
    b_enc = np.zeros(hidden_dim)
    w_dec = rng.uniform(-limit_d, limit_d, size=(hidden_dim, d))
    b_dec = np.zeros(d)

    def monitored_loss():
        recon = np.tanh(x @ w_enc + b_enc) @ w_dec + b_dec
        return float(np.mean((recon - x) ** 2))

    curve = [monitored_loss()]
    step = lr
    for _ in range(epochs):
        snapshot = (w_enc.copy(), b_enc.copy(), w_dec.copy(), b_dec.copy())
        order = rng.permutation(n)
        for start in range(0, n, batch_size):
            rows = order[start:start + batch_size]
            batch = x[rows]
            mask = (rng.random(batch.shape) >= corruption_rate).astype(np.float64)
            _, (gwe, gbe, gwd, gbd) = reconstruction_loss_and_grad(
                w_enc, b_enc, w_dec, b_dec, batch, mask)
            w_enc -= step * gwe
            b_enc -= step * gbe
            w_dec -= step * gwd
            b_dec -= step * gbd
        loss = monitored_loss()
        if loss > curve[-1]:
            w_enc, b_enc, w_dec, b_dec = snapshot
            step *= 0.5
            loss = curve[-1]
        curve.append(loss)
    return DaeModel(w_enc=w_enc, b_enc=b_enc, w_dec=w_dec, b_dec=b_dec,
                    corruption_rate=corruption_rate, loss_curve=curve)


def dae_encode(model: DaeModel, table) -> EmbeddingMatrix:
    """Encoder activations per row, corruption off."""
    if isinstance(table, FeatureTable):
        row_ids = table.row_ids
        x = table.to_matrix()
    else:
        x = np.asarray(table, dtype=np.float64)
        row_ids = [str(i) for i in range(x.shape[0])]
    if x.shape[1] != model.input_dim:
        raise UsageError(f"table has {x.shape[1]} columns, model expects "
                         f"{model.input_dim}")
    hidden = np.tanh(x @ model.w_enc + model.b_enc)
    return EmbeddingMatrix(row_ids, hidden)
