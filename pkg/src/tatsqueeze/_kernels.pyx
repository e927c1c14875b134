# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops. Must stay numerically equivalent to ``_pykernels``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sin, cos, sqrt, fabs

cnp.import_array()


cdef inline void _pass(double c[4][4], double m[4], double g, double th) noexcept nogil:
    # rows then columns of T = I + g E, light (x, p) = indices (2, 3)
    cdef double cs = cos(th), sn = sin(th)
    cdef double a = -g * sn, b = g * cs, e = g * sn
    cdef int j
    for j in range(4):
        c[2][j] += a * c[0][j] + b * c[1][j]
        c[0][j] += b * c[3][j]
        c[1][j] += e * c[3][j]
    for j in range(4):
        c[j][2] += a * c[j][0] + b * c[j][1]
        c[j][0] += b * c[j][3]
        c[j][1] += e * c[j][3]
    m[2] += a * m[0] + b * m[1]
    m[0] += b * m[3]
    m[1] += e * m[3]


cdef inline void _rotate(double c[4][4], double m[4], int i, double ang) noexcept nogil:
    cdef double cs = cos(ang), sn = sin(ang), u, v
    cdef int j
    for j in range(4):
        u = c[i][j]
        v = c[i + 1][j]
        c[i][j] = cs * u + sn * v
        c[i + 1][j] = cs * v - sn * u
    for j in range(4):
        u = c[j][i]
        v = c[j][i + 1]
        c[j][i] = cs * u + sn * v
        c[j][i + 1] = cs * v - sn * u
    u = m[i]
    v = m[i + 1]
    m[i] = cs * u + sn * v
    m[i + 1] = cs * v - sn * u


cdef inline void _loss(double c[4][4], double m[4], double t) noexcept nogil:
    cdef double r = sqrt(t)
    cdef int j
    for j in range(4):
        c[2][j] *= r
        c[3][j] *= r
    for j in range(4):
        c[j][2] *= r
        c[j][3] *= r
    c[2][2] += 0.5 * (1.0 - t)
    c[3][3] += 0.5 * (1.0 - t)
    m[2] *= r
    m[3] *= r


cdef inline void _larmor(double *s00, double *s01, double *s11, double *x0, double *p0,
                         double cl, double sl) noexcept nogil:
    # rotation by the angle whose cosine/sine are (cl, sl), waveplate convention
    cdef double a00 = s00[0], a01 = s01[0], a11 = s11[0], u = x0[0], w = p0[0]
    s00[0] = cl * cl * a00 + 2.0 * cl * sl * a01 + sl * sl * a11
    s11[0] = sl * sl * a00 - 2.0 * cl * sl * a01 + cl * cl * a11
    s01[0] = cl * sl * (a11 - a00) + (cl * cl - sl * sl) * a01
    x0[0] = cl * u + sl * w
    p0[0] = cl * w - sl * u


def run_segments(const double[:, ::1] spin_cov, const double[::1] spin_mean,
                 const double[::1] couplings, const double[::1] axes, const double[::1] rotations,
                 double transmission, double larmor_angle, double decay_rate, long m_segments):
    cdef double c[4][4]
    cdef double mu[4]
    cdef double s00 = spin_cov[0, 0], s01 = spin_cov[0, 1], s11 = spin_cov[1, 1]
    cdef double x0 = spin_mean[0], p0 = spin_mean[1]
    cdef double leak = 0.0, v, amp = 1.0 - 0.5 * decay_rate
    # Larmor precession is split symmetrically, half before and half after the passes
    cdef double cl = cos(-0.5 * larmor_angle), sl = sin(-0.5 * larmor_angle)
    cdef Py_ssize_t n_pass = couplings.shape[0]
    cdef long seg
    cdef Py_ssize_t k
    cdef int i, j
    with nogil:
        for seg in range(m_segments):
            _larmor(&s00, &s01, &s11, &x0, &p0, cl, sl)
            for i in range(4):
                for j in range(4):
                    c[i][j] = 0.0
            c[0][0] = s00
            c[0][1] = s01
            c[1][0] = s01
            c[1][1] = s11
            c[2][2] = 0.5
            c[3][3] = 0.5
            mu[0] = x0
            mu[1] = p0
            mu[2] = 0.0
            mu[3] = 0.0
            _pass(c, mu, couplings[0], axes[0])
            for k in range(1, n_pass):
                _rotate(c, mu, 2, rotations[k - 1])
                if transmission < 1.0:
                    _loss(c, mu, transmission)
                _pass(c, mu, couplings[k], axes[k])
            for i in range(2, 4):
                for j in range(2):
                    v = fabs(c[i][j])
                    if v > leak:
                        leak = v
            s00 = c[0][0]
            s01 = 0.5 * (c[0][1] + c[1][0])
            s11 = c[1][1]
            x0 = mu[0]
            p0 = mu[1]
            _larmor(&s00, &s01, &s11, &x0, &p0, cl, sl)
            # spin decay towards the coherent-spin level
            s00 = (1.0 - decay_rate) * s00 + 0.5 * decay_rate
            s11 = (1.0 - decay_rate) * s11 + 0.5 * decay_rate
            s01 = (1.0 - decay_rate) * s01
            x0 *= amp
            p0 *= amp
    out = np.array([[s00, s01], [s01, s11]])
    return out, np.array([x0, p0]), leak


cdef inline void _lyap_rhs(double[2][2] a, double[2][2] d, double[2][2] s, double[2][2] out) noexcept nogil:
    cdef int i, j, k
    cdef double acc
    for i in range(2):
        for j in range(2):
            acc = d[i][j]
            for k in range(2):
                acc += a[i][k] * s[k][j] + s[i][k] * a[j][k]
            out[i][j] = acc


def rk4_lyapunov(const double[:, ::1] drift, const double[:, ::1] diffusion,
                 const double[:, ::1] initial, long n_steps):
    """Integrate dS/dt = A S + S A^T + D over t in [0, 1] with classical RK4."""
    cdef double a[2][2]
    cdef double d[2][2]
    cdef double s[2][2]
    cdef double k1[2][2]
    cdef double k2[2][2]
    cdef double k3[2][2]
    cdef double k4[2][2]
    cdef double tmp[2][2]
    cdef double h = 1.0 / n_steps
    cdef long step
    cdef int i, j
    for i in range(2):
        for j in range(2):
            a[i][j] = drift[i, j]
            d[i][j] = diffusion[i, j]
            s[i][j] = initial[i, j]
    with nogil:
        for step in range(n_steps):
            _lyap_rhs(a, d, s, k1)
            for i in range(2):
                for j in range(2):
                    tmp[i][j] = s[i][j] + 0.5 * h * k1[i][j]
            _lyap_rhs(a, d, tmp, k2)
            for i in range(2):
                for j in range(2):
                    tmp[i][j] = s[i][j] + 0.5 * h * k2[i][j]
            _lyap_rhs(a, d, tmp, k3)
            for i in range(2):
                for j in range(2):
                    tmp[i][j] = s[i][j] + h * k3[i][j]
            _lyap_rhs(a, d, tmp, k4)
            for i in range(2):
                for j in range(2):
                    s[i][j] += h / 6.0 * (k1[i][j] + 2.0 * k2[i][j] + 2.0 * k3[i][j] + k4[i][j])
    return np.array([[s[0][0], s[0][1]], [s[1][0], s[1][1]]])
