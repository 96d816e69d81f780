"""Independent numpy re-implementations used to freeze expected values in the
C++ tests. Run with `python3 frozen_values.py`; the printed numbers are
pasted into tests/test_*.cpp.

Weights follow the deterministic fill used by the tests:
  W[i][j] = 0.1 * (((7*i + 3*j + salt) % 11) - 5)
"""
import numpy as np


def fill(rows, cols, salt):
    return np.array([[0.1 * (((7 * i + 3 * j + salt) % 11) - 5) for j in range(cols)]
                     for i in range(rows)], dtype=np.float64)


def relu(x):
    return np.maximum(x, 0.0)


def sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def sinkhorn(a, iters, tau):
    m = np.exp(a / tau)
    for _ in range(iters):
        m = m / m.sum(axis=1, keepdims=True)
        m = m / m.sum(axis=0, keepdims=True)
    return m


TETRA = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=np.float64)
K4 = np.ones((4, 4)) - np.eye(4)


def rbmpnn_k1():
    # d=3, hidden 4 and 5, K=1, lambda_S=1, lambda_R=0.
    w1, b1 = fill(3, 4, 0), fill(1, 4, 1)
    w2, b2 = fill(4, 5, 2), fill(1, 5, 3)
    w3, b3 = fill(5, 3, 4), fill(1, 3, 5)
    wb, wr = fill(3, 3, 6), fill(3, 3, 7)
    wt = 10.0 * fill(3, 3, 8)
    v0 = TETRA
    # G_1: rows reordered by source [2,0,3,1], then scaled and shifted.
    v1 = TETRA[[2, 0, 3, 1]] * np.array([1.2, 0.9, 1.1]) + np.array([0.3, -0.2, 0.1])

    def f_init(v):
        v = v - v.mean(axis=0)
        return relu(relu(relu(v @ w1 + b1) @ w2 + b2) @ w3 + b3)

    x0, x1 = f_init(v0), f_init(v1)
    r = np.full((4, 4), 0.25)
    y0 = relu(K4 @ x0 @ wb + r @ x1 @ wr)
    y1 = relu(K4 @ x1 @ wb + r.T @ x0 @ wr)

    def nrm(x):
        n = np.linalg.norm(x, axis=1, keepdims=True)
        n[n == 0] = 1.0
        return x / n

    rhat = (nrm(y0) @ wt) @ (nrm(y1) @ wt).T
    r = 1.0 * sinkhorn(rhat, 20, 1.0) + 0.0 * r
    return sigmoid(r.T)


def bmpnn_isolated():
    # One vertex, no edges: the propagation matrix is [[1]].
    v = np.array([[0.4, -0.7, 1.3]])
    w1, b1 = fill(3, 4, 0), fill(1, 4, 1)
    w2, b2 = fill(4, 4, 2), fill(1, 4, 3)
    x = relu(v @ w1 + b1) @ w2 + b2
    for k in range(6):
        x = relu(x @ fill(4, 4, 4 + k)) + x
    return x


def k4_uniform_loss():
    p = np.full((4, 4), 0.25)
    i = np.eye(4)
    f = np.linalg.norm
    return (f(p @ K4 @ p.T - K4) + f(p.T @ K4 @ p - K4) + f(p @ p.T - i) + f(p.T @ p - i))


def sinkhorn_diag():
    a = 10.0 * np.eye(5)
    return sinkhorn(a, 20, 1.0)


if __name__ == "__main__":
    np.set_printoptions(precision=17)
    print("rbmpnn K=1 soft:")
    for row in rbmpnn_k1():
        print(", ".join(repr(float(x)) for x in row))
    print("bmpnn isolated:", ", ".join(repr(float(x)) for x in bmpnn_isolated()[0]))
    print("K4 uniform loss:", repr(float(k4_uniform_loss())), "4*sqrt(3) =", repr(4 * np.sqrt(3.0)))
    print("sinkhorn 10*I diag, offdiag:", repr(float(sinkhorn_diag()[0, 0])),
          repr(float(sinkhorn_diag()[0, 1])))
