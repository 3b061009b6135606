# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops: streaming log-sum-exp and the log-space bridge
iteration.

Signatures and semantics mirror ``_kernels_py`` exactly.
"""

from libc.math cimport exp, log, log1p, fabs, INFINITY, isfinite


cdef inline double _logaddexp(double x, double y) noexcept nogil:
    cdef double m = x if x > y else y
    if m == -INFINITY:
        return -INFINITY
    return m + log1p(exp(-fabs(x - y)))


cdef inline void _push(double x, double* m, double* s) noexcept nogil:
    # one-pass accumulator: result is m + log(s)
    if x == -INFINITY:
        return
    if x <= m[0]:
        s[0] += exp(x - m[0])
    else:
        s[0] = s[0] * exp(m[0] - x) + 1.0
        m[0] = x


cdef inline double _finish(double m, double s) noexcept nogil:
    if s == 0.0:
        return -INFINITY
    return m + log(s)


def logsumexp(const double[::1] x):
    """Single-pass log(sum(exp(x))); -inf entries contribute nothing."""
    cdef Py_ssize_t i, n = x.shape[0]
    cdef double m = -INFINITY, s = 0.0
    with nogil:
        for i in range(n):
            _push(x[i], &m, &s)
    return _finish(m, s)


def bridge_iterate(const double[::1] log_l1, const double[::1] log_l2,
                   double log_s1, double log_s2, double log_init,
                   double tol, Py_ssize_t max_iter, double[::1] trace):
    """Run the optimal-bridge fixed-point update in log space.

    ``trace`` must hold ``max_iter + 1`` values; entry ``t`` receives the
    iterate after ``t`` updates. Returns ``(log_ml, n_iter, converged)``.
    """
    cdef Py_ssize_t n1 = log_l1.shape[0], n2 = log_l2.shape[0]
    cdef Py_ssize_t i, j, t = 0
    cdef double r = log_init, r_new, a, num, den, m, s
    cdef double log_n1 = log(<double>n1), log_n2 = log(<double>n2)
    cdef bint converged = False
    if trace.shape[0] < max_iter + 1:
        raise ValueError("trace buffer shorter than max_iter + 1")
    trace[0] = r
    with nogil:
        while t < max_iter:
            a = log_s2 + r
            m = -INFINITY
            s = 0.0
            for j in range(n2):
                _push(log_l2[j] - _logaddexp(log_s1 + log_l2[j], a), &m, &s)
            num = _finish(m, s) - log_n2
            m = -INFINITY
            s = 0.0
            for i in range(n1):
                _push(-_logaddexp(log_s1 + log_l1[i], a), &m, &s)
            den = _finish(m, s) - log_n1
            r_new = num - den
            t += 1
            trace[t] = r_new
            if not isfinite(r_new):
                r = r_new
                break
            if fabs(r_new - r) < tol:
                r = r_new
                converged = True
                break
            r = r_new
    return r, t, bool(converged)
