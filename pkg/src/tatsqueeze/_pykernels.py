"""Pure-Python twins of the compiled kernels in ``_kernels.pyx``."""
import math

import numpy as np


def _pass_matrix(g, theta):
    c, s = math.cos(theta), math.sin(theta)
    t = np.eye(4)
    t[2, 0] = -g * s
    t[2, 1] = g * c
    t[0, 3] = g * c
    t[1, 3] = g * s
    return t


def _rotation_matrix(angle):
    c, s = math.cos(angle), math.sin(angle)
    t = np.eye(4)
    t[2:, 2:] = [[c, s], [-s, c]]
    return t


def run_segments(spin_cov, spin_mean, couplings, axes, rotations,
                 transmission, larmor_angle, decay_rate, m_segments):
    passes = [_pass_matrix(g, th) for g, th in zip(couplings, axes)]
    rots = [_rotation_matrix(a) for a in rotations]
    r = math.sqrt(transmission)
    loss_t = np.diag([1.0, 1.0, r, r])
    loss_n = np.diag([0.0, 0.0, 0.5 * (1.0 - transmission), 0.5 * (1.0 - transmission)])
    cl, sl = math.cos(-0.5 * larmor_angle), math.sin(-0.5 * larmor_angle)
    larmor = np.array([[cl, sl], [-sl, cl]])
    amp = 1.0 - 0.5 * decay_rate

    s = np.array(spin_cov, dtype=float)
    x = np.array(spin_mean, dtype=float)
    c = np.zeros((4, 4))
    mu = np.zeros(4)
    leak = 0.0
    for _ in range(m_segments):
        s = larmor @ s @ larmor.T
        x = larmor @ x
        c[:] = 0.0
        c[:2, :2] = s
        c[2, 2] = c[3, 3] = 0.5
        mu[:2] = x
        mu[2:] = 0.0
        c = passes[0] @ c @ passes[0].T
        mu = passes[0] @ mu
        for k in range(1, len(passes)):
            c = rots[k - 1] @ c @ rots[k - 1].T
            mu = rots[k - 1] @ mu
            if transmission < 1.0:
                c = loss_t @ c @ loss_t + loss_n
                mu = loss_t @ mu
            c = passes[k] @ c @ passes[k].T
            mu = passes[k] @ mu
        leak = max(leak, float(np.abs(c[2:, :2]).max()))
        blk = 0.5 * (c[:2, :2] + c[:2, :2].T)
        s = larmor @ blk @ larmor.T
        x = larmor @ mu[:2]
        s = (1.0 - decay_rate) * s + 0.5 * decay_rate * np.eye(2)
        s[1, 0] = s[0, 1]
        x = amp * x
    return s, x, leak


def rk4_lyapunov(drift, diffusion, initial, n_steps):
    a = np.asarray(drift, dtype=float)
    d = np.asarray(diffusion, dtype=float)
    s = np.array(initial, dtype=float)
    h = 1.0 / n_steps

    def rhs(m):
        return a @ m + m @ a.T + d

    for _ in range(n_steps):
        k1 = rhs(s)
        k2 = rhs(s + 0.5 * h * k1)
        k3 = rhs(s + 0.5 * h * k2)
        k4 = rhs(s + h * k3)
        s = s + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    return s
