"""Pure-Python kernels; same API as the compiled ``_kernels`` module.

Used when the extension is not built or ``MONOHAZ_PURE_PYTHON=1`` is set.
"""

import numpy as np

NAME = "python"


def _pava(num, den, decreasing):
    # blocks as parallel lists; pool on ties so block values are strictly
    # monotone
    bnum, bden, bstart = [], [], []
    for i in range(len(num)):
        cn, cd, cs = num[i], den[i], i
        while bnum:
            prev = bnum[-1] / bden[-1]
            cur = cn / cd
            if (prev <= cur) if decreasing else (prev >= cur):
                cn += bnum.pop()
                cd += bden.pop()
                cs = bstart.pop()
            else:
                break
        bnum.append(cn)
        bden.append(cd)
        bstart.append(cs)
    return bnum, bden, bstart


def isotonic_blocks(num, den, decreasing=False):
    """Weighted isotonic regression of ``num/den`` with weights ``den``.

    Returns ``(starts, values)``: the start index of each block and the
    pooled ratio ``sum(num)/sum(den)`` on it. Values are strictly increasing
    (strictly decreasing if ``decreasing``).
    """
    num = [float(v) for v in num]
    den = [float(v) for v in den]
    bnum, bden, bstart = _pava(num, den, bool(decreasing))
    values = np.array([a / b for a, b in zip(bnum, bden)], dtype=float)
    return np.array(bstart, dtype=np.int64), values


def _expand(num, den, decreasing):
    bnum, bden, bstart = _pava(num, den, decreasing)
    out = [0.0] * len(num)
    bstart.append(len(num))
    for k in range(len(bnum)):
        v = bnum[k] / bden[k]
        for i in range(bstart[k], bstart[k + 1]):
            out[i] = v
    return out


def d_statistic_batch(paths, h):
    """Discretized ``int (g^2 - g0^2)`` for each row of ``paths``.

    Rows hold a path on the grid ``-c, -c+h, ..., c`` (odd length, t=0 in
    the middle). Returns ``(D, touches)`` where ``touches[r]`` is 1 when the
    set on which the two slope processes differ includes the first or last
    grid cell.
    """
    paths = np.ascontiguousarray(paths, dtype=float)
    n_paths, m = paths.shape
    k = (m - 1) // 2
    dvals = np.empty(n_paths)
    touches = np.zeros(n_paths, dtype=np.int8)
    for r in range(n_paths):
        dy = np.diff(paths[r]).tolist()
        den = [h] * (m - 1)
        g = _expand(dy, den, False)
        left = _expand(dy[:k], den[:k], False)
        right = _expand(dy[k:], den[k:], False)
        g0 = [min(v, 0.0) for v in left] + [max(v, 0.0) for v in right]
        total = 0.0
        for a, b in zip(g, g0):
            if a != b:
                total += a * a - b * b
        dvals[r] = total * h
        touches[r] = (g[0] != g0[0]) or (g[-1] != g0[-1])
    return dvals, touches
