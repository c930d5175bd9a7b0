"""Logistic regression via full-batch gradient descent with L2 penalty."""
from __future__ import annotations

import numpy as np

DEFAULTS = {"epochs": 500, "l2": 1e-4, "learning_rate": 0.5}


def sigmoid(z: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * z))  # numerically stable form


class LogisticRegression:
    def __init__(self, epochs=500, l2=1e-4, learning_rate=0.5):
        self.epochs = int(epochs)
        self.l2 = float(l2)
        self.learning_rate = float(learning_rate)
        self.weights: np.ndarray | None = None
        self.bias = 0.0

    def fit(self, X: np.ndarray, y: np.ndarray, rng=None):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        n, f = X.shape
        w = np.zeros(f)
        b = 0.0
        for _ in range(self.epochs):
            p = sigmoid(X @ w + b)
            err = p - y
            grad_w = X.T @ err / n + self.l2 * w
            grad_b = float(err.mean())
            w -= self.learning_rate * grad_w
            b -= self.learning_rate * grad_b
        self.weights = w
        self.bias = b
        return self

    def predict_scores(self, X: np.ndarray) -> np.ndarray:
        return sigmoid(np.asarray(X, dtype=float) @ self.weights + self.bias)

    def to_dict(self) -> dict:
        return {
            "epochs": self.epochs,
            "l2": self.l2,
            "learning_rate": self.learning_rate,
            "weights": list(map(float, self.weights)),
            "bias": self.bias,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "LogisticRegression":
        model = cls(payload["epochs"], payload["l2"], payload["learning_rate"])
        model.weights = np.asarray(payload["weights"], dtype=float)
        model.bias = float(payload["bias"])
        return model
