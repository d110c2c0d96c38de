# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loop: one shuffled pass of hinge-loss subgradient descent.

Must remain operation-for-operation identical to the pure-Python twin in
``_hinge_sgd_py`` so that both backends produce bit-identical models
(the extension is compiled with -ffp-contract=off for this reason).
"""


def hinge_epoch(const double[:, ::1] x, const double[::1] y,
                const long long[::1] order, double[::1] w, double b,
                double lam, double t0, long long t):
    """Run one epoch of SGD over rows in ``order``; updates ``w`` in place.

    Returns the new bias and global step counter.
    """
    cdef Py_ssize_t n = order.shape[0]
    cdef Py_ssize_t d = w.shape[0]
    cdef Py_ssize_t pos, k, i
    cdef double eta, margin, acc, factor, step

    with nogil:
        for pos in range(n):
            i = order[pos]
            t += 1
            eta = 1.0 / (lam * (t0 + t))
            acc = 0.0
            for k in range(d):
                acc += w[k] * x[i, k]
            margin = y[i] * (acc - b)
            factor = 1.0 - eta * lam
            if margin < 1.0:
                step = eta * y[i]
                for k in range(d):
                    w[k] = factor * w[k] + step * x[i, k]
                b = b - step
            else:
                for k in range(d):
                    w[k] = factor * w[k]
    return b, t
