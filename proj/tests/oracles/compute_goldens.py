#!/usr/bin/env python3
"""Independent oracle for the frozen golden values used by the C++ tests.

Every quantity here is computed by a different route than the library:
dense linear solves of the truncated balance equations (instead of the
log-space product-form recursion), exhaustive scans in numpy, and plain
least-squares fits. Run it to regenerate the constants pasted into the
tests; it is not part of the build.
"""
import math

import numpy as np

KJ = 3.6e6


def balance_solve(lam, mu, theta, n, K=200):
    """Solve Q^T pi = 0, sum(pi) = 1 for the truncated birth-death chain."""
    Q = np.zeros((K + 1, K + 1))
    for k in range(K + 1):
        if k < K:
            Q[k, k + 1] = lam
        if k > 0:
            Q[k, k - 1] = min(k, n) * mu + max(0, k - n) * theta
        Q[k, k] = -Q[k].sum()
    A = Q.T.copy()
    A[-1, :] = 1.0
    b = np.zeros(K + 1)
    b[-1] = 1.0
    return np.linalg.solve(A, b)


def metrics(lam, mu, theta, n, K=200):
    pi = balance_solve(lam, mu, theta, n, K)
    k = np.arange(K + 1)
    p_ab = (pi * np.maximum(0, k - n) * theta).sum() / lam if lam > 0 else 0.0
    util = (pi * np.minimum(k, n)).sum() / n if n > 0 else 0.0
    return pi, p_ab, util


def wait_served(lam, mu, theta, n, K=400):
    """Mean queueing delay of served jobs from a tagged-job absorption solve.

    Unknowns per j (waiting jobs ahead of the tagged one): g_j = P(served),
    h_j = E[delay * 1{served}]. Both solve dense linear systems.
    """
    pi = balance_solve(lam, mu, theta, n, K)
    J = K - n + 1
    G = np.zeros((J, J))
    bg = np.zeros(J)
    for j in range(J):
        out = n * mu + j * theta + theta
        G[j, j] = out
        if j == 0:
            bg[j] = n * mu
        else:
            G[j, j - 1] = -(n * mu + j * theta)
    g = np.linalg.solve(G, bg)
    h = np.linalg.solve(G, g)
    served = pi[:n].sum() + (pi[n:n + J] * g).sum()
    return (pi[n:n + J] * h).sum() / served


def objective(lam, mu, theta, n, reward, price, p_peak, idle, penalty=0.0):
    K = max(400, int(lam / min(mu, theta) * 3) + 200)
    _, p_ab, util = metrics(lam, mu, theta, n, K)
    power = p_peak * (idle + (1 - idle) * util)
    return reward * lam * (1 - p_ab) - penalty * lam * p_ab - price * n * power / KJ


def main():
    pi, _, _ = metrics(1.0, 1.0, 2.0, 1)
    print("steady_state(1,1,2,1) first 10:", [f"{x:.17g}" for x in pi[:10]])

    _, p_ab, util = metrics(1.0, 1.0, 1.0, 1)
    print("p_abandon(1,1,1,1) =", f"{p_ab:.17g}", "e^-1 =", f"{math.exp(-1):.17g}")
    print("utilization(1,1,1,1) =", f"{util:.17g}")

    for case in ((1.0, 1.0, 1.0, 1), (50.0, 1.0, 0.5, 55), (8.0, 2.0, 0.25, 3)):
        print("wait_served", case, "=", f"{wait_served(*case):.17g}")

    pi = balance_solve(1.0, 1.0, 1e-12, 2, 400)
    print("p_wait(1,1,~0,2) =", f"{pi[2:].sum():.17g}")

    vals = [objective(50.0, 1.0, 1.0, n, 1.0, 0.10, 200.0, 0.65) for n in range(0, 101)]
    best = int(np.argmax(vals))
    print("adaptive golden n* =", best, "objective =", f"{vals[best]:.17g}")

    # Switching guard: QED decision that adds exactly one server.
    lam, mu, theta = 10.0, 1.0, 1.0
    econ = dict(reward=0.01, price=0.1, p_peak=200.0, idle=0.65)
    r13 = objective(lam, mu, theta, 13, **econ)
    r14 = objective(lam, mu, theta, 14, **econ)
    gain = r14 - r13
    print("guard: rev(13) =", f"{r13:.17g}", "rev(14) =", f"{r14:.17g}")
    print("guard: epoch_length for 0.001 gain =", f"{0.001 / gain:.17g}")
    print("guard: setup_duration for 0.002 cost =", f"{0.002 * KJ / (200.0 * 0.1):.17g}")

    # Sinusoidal trace, 288 five-minute bins, noise free.
    w = 300.0
    mids = (np.arange(288) + 0.5) * w
    counts = np.rint((100 + 50 * np.sin(2 * math.pi * mids / 86400.0)) * w)
    rates = counts / w

    def window(h, m):
        return h[-m:].mean()

    def trend(h, m):
        y = h[-m:]
        x = np.arange(len(h) - m, len(h)) + 0.5
        slope, icpt = np.polyfit(x, y, 1)
        return max(0.0, slope * (len(h) + 0.5) + icpt)

    for name, fn in (("window5", window), ("trend5", trend)):
        err = np.array([fn(rates[:t], 5) - rates[t] for t in range(5, 288)])
        print(name, "rmse =", f"{math.sqrt((err ** 2).mean()):.17g}",
              "bias =", f"{err.mean():.17g}",
              "mape% =", f"{100 * (np.abs(err) / rates[5:]).mean():.17g}")


if __name__ == "__main__":
    main()
