"""Single-hidden-layer perceptron (ReLU units, sigmoid output, Adam)."""
from __future__ import annotations

import numpy as np

from .logistic import sigmoid

DEFAULTS = {"hidden": 64, "epochs": 200, "learning_rate": 1e-3, "batch_size": 32}


class MLP:
    def __init__(self, hidden=64, epochs=200, learning_rate=1e-3, batch_size=32):
        self.hidden = int(hidden)
        self.epochs = int(epochs)
        self.learning_rate = float(learning_rate)
        self.batch_size = int(batch_size)
        self.w1 = self.b1 = self.w2 = None
        self.b2 = 0.0

    def fit(self, X: np.ndarray, y: np.ndarray, rng: np.random.Generator):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        n, f = X.shape
        w1 = rng.normal(0.0, np.sqrt(2.0 / max(f, 1)), size=(f, self.hidden))
        b1 = np.zeros(self.hidden)
        w2 = rng.normal(0.0, np.sqrt(2.0 / self.hidden), size=self.hidden)
        b2 = 0.0
        params = [w1, b1, w2, np.array([b2])]
        m = [np.zeros_like(p) for p in params]
        v = [np.zeros_like(p) for p in params]
        beta1, beta2, eps = 0.9, 0.999, 1e-8
        step = 0
        for _ in range(self.epochs):
            order = rng.permutation(n)
            for start in range(0, n, self.batch_size):
                rows = order[start : start + self.batch_size]
                xb, yb = X[rows], y[rows]
                hidden_raw = xb @ params[0] + params[1]
                hidden = np.maximum(hidden_raw, 0.0)
                p = sigmoid(hidden @ params[2] + params[3][0])
                # BCE gradient w.r.t. the raw output is (p - y) / batch
                delta_out = (p - yb) / rows.size
                grad_w2 = hidden.T @ delta_out
                grad_b2 = np.array([delta_out.sum()])
                delta_hidden = np.outer(delta_out, params[2]) * (hidden_raw > 0.0)
                grad_w1 = xb.T @ delta_hidden
                grad_b1 = delta_hidden.sum(axis=0)
                grads = [grad_w1, grad_b1, grad_w2, grad_b2]
                step += 1
                for k in range(4):
                    m[k] = beta1 * m[k] + (1 - beta1) * grads[k]
                    v[k] = beta2 * v[k] + (1 - beta2) * grads[k] ** 2
                    m_hat = m[k] / (1 - beta1**step)
                    v_hat = v[k] / (1 - beta2**step)
                    params[k] -= self.learning_rate * m_hat / (np.sqrt(v_hat) + eps)
        self.w1, self.b1, self.w2 = params[0], params[1], params[2]
        self.b2 = float(params[3][0])
        return self

    def predict_scores(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        hidden = np.maximum(X @ self.w1 + self.b1, 0.0)
        return sigmoid(hidden @ self.w2 + self.b2)

    def to_dict(self) -> dict:
        return {
            "hidden": self.hidden,
            "epochs": self.epochs,
            "learning_rate": self.learning_rate,
            "batch_size": self.batch_size,
            "w1": [list(map(float, row)) for row in self.w1],
            "b1": list(map(float, self.b1)),
            "w2": list(map(float, self.w2)),
            "b2": self.b2,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "MLP":
        model = cls(payload["hidden"], payload["epochs"], payload["learning_rate"], payload["batch_size"])
        model.w1 = np.asarray(payload["w1"], dtype=float)
        model.b1 = np.asarray(payload["b1"], dtype=float)
        model.w2 = np.asarray(payload["w2"], dtype=float)
        model.b2 = float(payload["b2"])
        return model
