"""Softmax MLP baseline classifier with cross-entropy training."""
from __future__ import annotations

import numpy as np

from .errors import ShapeError
from .numeric import MlpShape, make_rng, mlp_backward, mlp_forward, mlp_init


def softmax(z: np.ndarray) -> np.ndarray:
    """Row-wise max-subtracted softmax."""
    z = np.atleast_2d(np.asarray(z, dtype=float))
    e = np.exp(z - z.max(axis=1, keepdims=True))
    return e / e.sum(axis=1, keepdims=True)


class SoftmaxMlp:
    """MLP with ReLU hidden layers, linear logits and softmax probabilities."""

    def __init__(self, dim: int, hidden, classes: int,
                 rng: np.random.Generator | None = None):
        self.shape = MlpShape((dim, *hidden, classes))
        self.classes = classes
        self.dim = dim
        self.params = mlp_init(self.shape, rng if rng is not None else make_rng(0))

    def param_count(self) -> int:
        return self.shape.param_count()

    def get_params(self) -> np.ndarray:
        return self.params

    def set_params(self, flat: np.ndarray) -> None:
        if flat.size != self.params.size:
            raise ShapeError("parameter vector size mismatch")
        self.params = np.asarray(flat, dtype=float)

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        logits, _ = mlp_forward(self.shape, self.params, x)
        return softmax(logits)

    def predict(self, x: np.ndarray):
        p = self.predict_proba(x)
        return np.argmax(p, axis=1), p

    def loss_and_grad(self, x: np.ndarray, y: np.ndarray, eps: float = 1e-10):
        """Mean cross-entropy -log(p_y + eps) and the flat parameter gradient."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        y = np.asarray(y, dtype=int)
        n = x.shape[0]
        if n == 0:
            raise ShapeError("empty batch")
        logits, cache = mlp_forward(self.shape, self.params, x)
        p = softmax(logits)
        p_y = p[np.arange(n), y]
        loss = float(-np.mean(np.log(p_y + eps)))
        # d(-log(p_y + eps))/dz through softmax, scaled by p_y/(p_y + eps)
        scale = (p_y / (p_y + eps) / n)[:, None]
        onehot = np.zeros_like(p)
        onehot[np.arange(n), y] = 1.0
        upstream = scale * (p - onehot)
        grad, _ = mlp_backward(self.shape, self.params, cache, upstream)
        return loss, grad
