"""Pure numpy implementations of the hot kernels.

Used when the compiled extension is unavailable or when
``HERMITE_BMO_BACKEND=python`` is set.  Every function here has the same
signature and semantics as its counterpart in ``_ckernels.pyx``.
"""

import numpy as np

# rescaling threshold for the recurrence; values are carried as p * 2**e
_BIG = 2.0**512
_SHIFT = 512
_LN2 = np.log(2.0)
_PI_QUARTER = np.pi**-0.25


def _start(x):
    # phi_0(x) = pi^{-1/4} exp(-x^2/2) = pi^{-1/4} 2^{-a},  a = x^2 / (2 ln 2)
    a = x * x / (2.0 * _LN2)
    fl = np.floor(a)
    p0 = _PI_QUARTER * np.exp2(fl - a)
    return p0, (-fl).astype(np.int64)


def hermite_table(nmax, x):
    """Return ``phi_k(x)`` for ``k = 0..nmax`` as an array of shape (nmax+1, len(x))."""
    x = np.ascontiguousarray(x, dtype=np.float64).ravel()
    out = np.empty((nmax + 1, x.size))
    p_prev = np.zeros_like(x)
    p_cur, e = _start(x)
    out[0] = np.ldexp(p_cur, e)
    for k in range(nmax):
        p_next = x * np.sqrt(2.0 / (k + 1)) * p_cur - np.sqrt(k / (k + 1.0)) * p_prev
        big = np.abs(p_next) > _BIG
        if big.any():
            p_next[big] = np.ldexp(p_next[big], -_SHIFT)
            p_cur[big] = np.ldexp(p_cur[big], -_SHIFT)
            e[big] += _SHIFT
        p_prev, p_cur = p_cur, p_next
        out[k + 1] = np.ldexp(p_cur, e)
    return out


def hermite_last_two(k, x):
    """Return ``(phi_{k-1}(x), phi_k(x))`` without storing the full table."""
    x = np.ascontiguousarray(x, dtype=np.float64).ravel()
    p_prev = np.zeros_like(x)
    p_cur, e = _start(x)
    for j in range(k):
        p_next = x * np.sqrt(2.0 / (j + 1)) * p_cur - np.sqrt(j / (j + 1.0)) * p_prev
        big = np.abs(p_next) > _BIG
        if big.any():
            p_next[big] = np.ldexp(p_next[big], -_SHIFT)
            p_cur[big] = np.ldexp(p_cur[big], -_SHIFT)
            e[big] += _SHIFT
        p_prev, p_cur = p_cur, p_next
    return np.ldexp(p_prev, e), np.ldexp(p_cur, e)


def _box_sum(prefix, width):
    # prefix has a leading zero along every axis; returns window sums for all anchors
    n = prefix.ndim
    out = 0
    for corner in np.ndindex(*(2,) * n):
        sl = tuple(
            slice(width, None) if c else slice(0, prefix.shape[ax] - width)
            for ax, c in enumerate(corner)
        )
        sign = (-1) ** (n - sum(corner))
        out = out + sign * prefix[sl]
    return out


def window_means(values, width):
    """Mean of every axis-aligned window of ``width`` points per axis."""
    prefix = np.asarray(values)
    for ax in range(prefix.ndim):
        prefix = np.cumsum(prefix, axis=ax)
        pad = [(0, 0)] * prefix.ndim
        pad[ax] = (1, 0)
        prefix = np.pad(prefix, pad)
    return _box_sum(prefix, width) / float(width**prefix.ndim)


def mean_oscillation_scan(values, means, width):
    """Mean of ``|f - f_Q|`` over each window Q with the given anchor means."""
    values = np.asarray(values)
    n = values.ndim
    win = np.lib.stride_tricks.sliding_window_view(values, (width,) * n)
    out = np.empty(means.shape)
    # chunk along the first anchor axis to bound memory
    per_row = max(1, int(np.prod(win.shape[1:])))
    step = max(1, (1 << 22) // per_row)
    axes = tuple(range(n, 2 * n))
    expand = (Ellipsis,) + (None,) * n
    for start in range(0, means.shape[0], step):
        stop = min(start + step, means.shape[0])
        diff = win[start:stop] - means[start:stop][expand]
        out[start:stop] = np.abs(diff).mean(axis=axes)
    return out
