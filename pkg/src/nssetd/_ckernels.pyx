# cython: language_level=3
"""Compiled stepping kernels; see ``_kernels_py`` for the reference twin.

Complex spectral arrays arrive as interleaved float64 views
(``z.view(np.float64)``): column ``2j`` is the real part of mode ``j`` and
column ``2j + 1`` its imaginary part.
"""


def beta_flux(const double[:, ::1] gx, const double[:, ::1] gy, double kappa,
              double[:, ::1] out_x, double[:, ::1] out_y):
    cdef Py_ssize_t i, j
    cdef double a, b, d
    with nogil:
        for i in range(gx.shape[0]):
            for j in range(gx.shape[1]):
                a = gx[i, j]
                b = gy[i, j]
                d = 1.0 + (a * a + b * b)
                out_x[i, j] = a / d + kappa * a
                out_y[i, j] = b / d + kappa * b


def assemble_f_hat(const double[:, ::1] bx_hat, const double[:, ::1] by_hat,
                   const double[:, ::1] u_hat,
                   const double[::1] kx, const double[::1] ky,
                   const double[:, ::1] lam, double kappa,
                   double[:, ::1] out):
    cdef Py_ssize_t i, j, re, im
    cdef double kl
    with nogil:
        for i in range(lam.shape[0]):
            for j in range(lam.shape[1]):
                re = 2 * j
                im = re + 1
                kl = kappa * lam[i, j]
                out[i, re] = -(kx[i] * bx_hat[i, im]) - ky[j] * by_hat[i, im] - kl * u_hat[i, re]
                out[i, im] = kx[i] * bx_hat[i, re] + ky[j] * by_hat[i, re] - kl * u_hat[i, im]


cdef inline double _etd3(double e, double r, double p0, double p1, double p2,
                         double dt, double u, double a, double b, double c) noexcept nogil:
    return (e * u
            + r * u
            - dt * p0 * a
            - dt * p1 * (1.5 * a - 2.0 * b + 0.5 * c)
            - dt * p2 * (0.5 * a - b + 0.5 * c))


def etd3_combine(const double[:, ::1] u_hat, const double[:, ::1] n0,
                 const double[:, ::1] n1, const double[:, ::1] n2,
                 const double[:, ::1] exp_neg, const double[:, ::1] phi0,
                 const double[:, ::1] phi1, const double[:, ::1] phi2,
                 const double[:, ::1] reg, const double[:, ::1] denom,
                 double dt, double[:, ::1] out):
    cdef Py_ssize_t i, j, c
    cdef double e, r, p0, p1, p2, d
    with nogil:
        for i in range(exp_neg.shape[0]):
            for j in range(exp_neg.shape[1]):
                e = exp_neg[i, j]
                r = reg[i, j]
                p0 = phi0[i, j]
                p1 = phi1[i, j]
                p2 = phi2[i, j]
                d = denom[i, j]
                for c in range(2 * j, 2 * j + 2):
                    out[i, c] = _etd3(e, r, p0, p1, p2, dt, u_hat[i, c],
                                      n0[i, c], n1[i, c], n2[i, c]) / d
