"""Pure-Python/numpy versions of the compiled kernels in ``_ckernels.pyx``.

Counting is done with one-hot matrix products so that the fallback stays
usable on realistic panel sizes; the float64 products are exact for any
count below 2**53.
"""

import numpy as np

_BATCH = 32


def _one_hot(cols, q):
    # cols: (n, T) -> (T, n*q)
    n, T = cols.shape
    out = np.zeros((T, n * q), dtype=np.float64)
    idx = cols.T.astype(np.intp) + np.arange(n, dtype=np.intp) * q
    np.put_along_axis(out, idx, 1.0, axis=1)
    return out


def pair_counts(a_cols, b_cols, q):
    a_cols = np.asarray(a_cols)
    b_cols = np.asarray(b_cols)
    if a_cols.shape[1] != b_cols.shape[1]:
        raise ValueError("a_cols and b_cols must have the same number of rows")
    na, nb = a_cols.shape[0], b_cols.shape[0]
    prod = _one_hot(a_cols, q).T @ _one_hot(b_cols, q)
    counts = np.rint(prod).astype(np.int64).reshape(na, q, nb, q)
    return np.ascontiguousarray(counts.transpose(0, 2, 1, 3))


def joint_exceedances(a_cols, b_cols, q, perms, clogc, j_obs, tol, u_out):
    a_cols = np.asarray(a_cols)
    perms = np.asarray(perms)
    T = a_cols.shape[1]
    if perms.shape[1] != T or b_cols.shape[1] != T:
        raise ValueError("row count mismatch")
    na, nb = a_cols.shape[0], b_cols.shape[0]
    a_hot = _one_hot(a_cols, q)
    b_hot = _one_hot(b_cols, q)
    for start in range(0, perms.shape[0], _BATCH):
        chunk = perms[start:start + _BATCH]
        # (k, T, na*q) @ (T, nb*q) -> (k, na*q, nb*q)
        prod = np.matmul(a_hot[chunk].transpose(0, 2, 1), b_hot)
        counts = np.rint(prod).astype(np.intp).reshape(-1, na, q, nb, q)
        js = clogc[counts].sum(axis=(2, 4))
        u_out += (js >= j_obs - tol).sum(axis=0)


def pearson_exceedances(az, bz, perms, c_obs, tol, u_out, d_out):
    T = az.shape[0]
    for start in range(0, perms.shape[0], _BATCH):
        chunk = perms[start:start + _BATCH]
        ct = np.matmul(az[chunk].transpose(0, 2, 1), bz) / (T - 1)
        u_out += (ct >= c_obs - tol).sum(axis=0)
        d_out += (ct <= c_obs + tol).sum(axis=0)


def _occurs_before(b, l, m):
    # does b[l:l+m] start at some position < l?  Such an occurrence lies in b[:l+m-1].
    return b.find(b[l:l + m], 0, l + m - 1) >= 0


def lz76_complexity(s):
    """LZ76 phrase count. Each phrase is one symbol longer than the longest
    prefix of the remainder that also starts earlier in the sequence.
    """
    arr = np.asarray(s)
    n = arr.size
    if n < 2:
        return n
    _, codes = np.unique(arr, return_inverse=True)
    if codes.max() > 255:
        return _lz76_scan(arr.tolist())
    b = codes.astype(np.uint8).tobytes()
    c = l = 0
    while l < n:
        # match length is monotone: gallop, then bisect
        lo, step = 0, 1
        while lo + step <= n - l and _occurs_before(b, l, lo + step):
            lo += step
            step *= 2
        hi = min(lo + step, n - l + 1)
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if _occurs_before(b, l, mid):
                lo = mid
            else:
                hi = mid
        c += 1
        l += lo + 1
    return c


def _lz76_scan(s):
    # Kaspar-Schuster loop; used only for alphabets too large for a byte string
    n = len(s)
    if n == 0:
        return 0
    if n == 1:
        return 1
    c, l, i, k, k_max = 1, 1, 0, 1, 1
    while True:
        if s[i + k - 1] == s[l + k - 1]:
            k += 1
            if l + k > n:
                c += 1
                break
        else:
            if k > k_max:
                k_max = k
            i += 1
            if i == l:
                c += 1
                l += k_max
                if l + 1 > n:
                    break
                i, k, k_max = 0, 1, 1
            else:
                k = 1
    return c
