"""Pure-Python twin of the compiled SGD kernel.

Same operations in the same order as ``_hinge_sgd.pyx`` (CPython floats are
C doubles), so results are bit-identical to the extension, just slower.
"""


def hinge_epoch(x, y, order, w, b, lam, t0, t):
    """Run one epoch of SGD over rows in ``order``; updates ``w`` in place.

    Returns the new bias and global step counter.
    """
    rows = x.tolist()
    ys = y.tolist()
    ws = w.tolist()
    d = len(ws)
    for i in order.tolist():
        t += 1
        eta = 1.0 / (lam * (t0 + t))
        xi = rows[i]
        yi = ys[i]
        acc = 0.0
        for k in range(d):
            acc += ws[k] * xi[k]
        margin = yi * (acc - b)
        factor = 1.0 - eta * lam
        if margin < 1.0:
            step = eta * yi
            for k in range(d):
                ws[k] = factor * ws[k] + step * xi[k]
            b = b - step
        else:
            for k in range(d):
                ws[k] = factor * ws[k]
    w[:] = ws
    return b, t
