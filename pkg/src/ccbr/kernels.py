"""Hot inner loops.

Each kernel exists twice: a numba-compiled ``*_nb`` version and a numpy
``*_np`` version with the same signature and semantics. The public name
dispatches on :data:`ccbr._accel.USE_NUMBA`. Tests call both variants
directly and check that they agree.
"""

import numpy as np

from ._accel import USE_NUMBA, njit

__all__ = [
    "jacobi_eigh",
    "sosfilt",
    "threshold_crossings",
    "best_axis_split",
    "l1_distances",
    "svm_dual_cd",
    "softmax_residual",
    "softmax_xent",
]


# ---------------------------------------------------------------------------
# cyclic Jacobi eigendecomposition of a symmetric matrix


def _jacobi_angle(app, aqq, apq):
    theta = (aqq - app) / (2.0 * apq)
    t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
    if theta < 0.0:
        t = -t
    c = 1.0 / np.sqrt(t * t + 1.0)
    return t, c, t * c


_jacobi_angle_nb = njit(_jacobi_angle)


@njit
def jacobi_eigh_nb(a, tol, max_sweeps):
    # rows p, q are updated (contiguous) and mirrored into the columns;
    # eigenvectors are accumulated as rows of vt for the same reason
    n = a.shape[0]
    a = a.copy()
    vt = np.eye(n)
    total = 0.0
    for i in range(n):
        for j in range(n):
            total += a[i, j] * a[i, j]
    if total == 0.0:
        return np.zeros(n), vt, 0
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        off = 0.0
        for i in range(n):
            for j in range(i + 1, n):
                off += 2.0 * a[i, j] * a[i, j]
        if off <= tol * tol * total:
            return np.diag(a).copy(), vt.T.copy(), sweeps - 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                app = a[p, p]
                aqq = a[q, q]
                t, c, s = _jacobi_angle_nb(app, aqq, apq)
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk - s * aqk
                    a[q, k] = s * apk + c * aqk
                for k in range(n):
                    a[k, p] = a[p, k]
                    a[k, q] = a[q, k]
                a[p, p] = app - t * apq
                a[q, q] = aqq + t * apq
                a[p, q] = 0.0
                a[q, p] = 0.0
                for k in range(n):
                    vp = vt[p, k]
                    vq = vt[q, k]
                    vt[p, k] = c * vp - s * vq
                    vt[q, k] = s * vp + c * vq
    return np.diag(a).copy(), vt.T.copy(), sweeps


def jacobi_eigh_np(a, tol, max_sweeps):
    n = a.shape[0]
    a = np.array(a, dtype=np.float64, copy=True)
    v = np.eye(n)
    total = float(np.sum(a * a))
    if total == 0.0:
        return np.zeros(n), v, 0
    iu = np.triu_indices(n, 1)
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        off = 2.0 * float(np.sum(a[iu] ** 2))
        if off <= tol * tol * total:
            return np.diag(a).copy(), v, sweeps - 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                app = a[p, p]
                aqq = a[q, q]
                t, c, s = _jacobi_angle(app, aqq, apq)
                colp = a[:, p].copy()
                colq = a[:, q]
                a[:, p] = c * colp - s * colq
                a[:, q] = s * colp + c * colq
                a[p, :] = a[:, p]
                a[q, :] = a[:, q]
                a[p, p] = app - t * apq
                a[q, q] = aqq + t * apq
                a[p, q] = 0.0
                a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q]
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    return np.diag(a).copy(), v, sweeps


def jacobi_eigh(a, tol=1e-12, max_sweeps=100):
    """Eigenvalues and eigenvectors (columns) of symmetric ``a``, unsorted.

    Returns ``(values, vectors, sweeps)``. Stops when the off-diagonal
    Frobenius mass drops below ``tol`` relative to the whole matrix.
    """
    a = np.ascontiguousarray(a, dtype=np.float64)
    if USE_NUMBA:
        return jacobi_eigh_nb(a, float(tol), int(max_sweeps))
    return jacobi_eigh_np(a, float(tol), int(max_sweeps))


# ---------------------------------------------------------------------------
# cascaded biquads, transposed direct form II, causal


@njit
def sosfilt_nb(sos, x):
    n_ch, n_s = x.shape
    y = np.empty_like(x)
    for c in range(n_ch):
        for i in range(n_s):
            y[c, i] = x[c, i]
        for k in range(sos.shape[0]):
            b0, b1, b2 = sos[k, 0], sos[k, 1], sos[k, 2]
            a1, a2 = sos[k, 4], sos[k, 5]
            z1 = 0.0
            z2 = 0.0
            for i in range(n_s):
                xi = y[c, i]
                yi = b0 * xi + z1
                z1 = b1 * xi - a1 * yi + z2
                z2 = b2 * xi - a2 * yi
                y[c, i] = yi
    return y


def sosfilt_np(sos, x):
    from scipy.signal import sosfilt as _scipy_sosfilt

    return _scipy_sosfilt(sos, x, axis=-1)


def sosfilt(sos, x):
    """Filter each row of ``x`` (channels × samples) through ``sos`` sections.

    Sections use the ``[b0, b1, b2, 1, a1, a2]`` row layout with zero
    initial state.
    """
    sos = np.ascontiguousarray(sos, dtype=np.float64)
    x = np.ascontiguousarray(np.atleast_2d(x), dtype=np.float64)
    if USE_NUMBA:
        return sosfilt_nb(sos, x)
    return sosfilt_np(sos, x)


# ---------------------------------------------------------------------------
# negative-going threshold crossings with refractory period


@njit
def threshold_crossings_nb(x, threshold, refractory):
    out = np.empty(x.shape[0], dtype=np.int64)
    n = 0
    last = -refractory - 1
    for i in range(1, x.shape[0]):
        if x[i] < threshold and x[i - 1] >= threshold:
            if n == 0 or i - last > refractory:
                out[n] = i
                n += 1
                last = i
    return out[:n]


def threshold_crossings_np(x, threshold, refractory):
    cand = np.flatnonzero((x[1:] < threshold) & (x[:-1] >= threshold)) + 1
    if refractory <= 0 or cand.size < 2:
        return cand.astype(np.int64)
    keep = []
    last = None
    for i in cand:
        if last is None or i - last > refractory:
            keep.append(i)
            last = i
    return np.asarray(keep, dtype=np.int64)


def threshold_crossings(x, threshold, refractory):
    """Sample indices where ``x`` first drops strictly below ``threshold``.

    A crossing within ``refractory`` samples of the previously accepted one
    is discarded.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    if USE_NUMBA:
        return threshold_crossings_nb(x, float(threshold), int(refractory))
    return threshold_crossings_np(x, float(threshold), int(refractory))


# ---------------------------------------------------------------------------
# exhaustive Gini search over axis-parallel splits


@njit
def best_axis_split_nb(x, y, n_classes, min_leaf):
    n, d = x.shape
    total = np.zeros(n_classes)
    for i in range(n):
        total[y[i]] += 1.0
    best_imp = np.inf
    best_f = -1
    best_thr = 0.0
    left = np.zeros(n_classes)
    for f in range(d):
        order = np.argsort(x[:, f], kind="mergesort")
        left[:] = 0.0
        for i in range(n - 1):
            left[y[order[i]]] += 1.0
            nl = i + 1.0
            nr = n - nl
            xa = x[order[i], f]
            xb = x[order[i + 1], f]
            if xa == xb or nl < min_leaf or nr < min_leaf:
                continue
            sl = 0.0
            sr = 0.0
            for k in range(n_classes):
                sl += left[k] * left[k]
                r = total[k] - left[k]
                sr += r * r
            imp = (nl - sl / nl + nr - sr / nr) / n
            if imp < best_imp:
                best_imp = imp
                best_f = f
                best_thr = 0.5 * (xa + xb)
    return best_f, best_thr, best_imp


def best_axis_split_np(x, y, n_classes, min_leaf):
    n, d = x.shape
    onehot = np.zeros((n, n_classes))
    onehot[np.arange(n), y] = 1.0
    total = onehot.sum(axis=0)
    nl = np.arange(1, n, dtype=np.float64)
    nr = n - nl
    best_imp, best_f, best_thr = np.inf, -1, 0.0
    for f in range(d):
        order = np.argsort(x[:, f], kind="mergesort")
        xs = x[order, f]
        left = np.cumsum(onehot[order], axis=0)[:-1]
        right = total - left
        valid = (xs[:-1] != xs[1:]) & (nl >= min_leaf) & (nr >= min_leaf)
        if not valid.any():
            continue
        sl = np.einsum("ij,ij->i", left, left)
        sr = np.einsum("ij,ij->i", right, right)
        imp = (nl - sl / nl + nr - sr / nr) / n
        imp[~valid] = np.inf
        i = int(np.argmin(imp))
        if imp[i] < best_imp:
            best_imp = float(imp[i])
            best_f = f
            best_thr = 0.5 * (xs[i] + xs[i + 1])
    return best_f, best_thr, best_imp


def best_axis_split(x, y, n_classes, min_leaf):
    """Best ``(feature, threshold, weighted_gini)`` split; feature -1 if none.

    Thresholds are midpoints between consecutive distinct sorted values and
    both children must hold at least ``min_leaf`` samples.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.int64)
    if USE_NUMBA:
        f, t, g = best_axis_split_nb(x, y, int(n_classes), int(min_leaf))
    else:
        f, t, g = best_axis_split_np(x, y, int(n_classes), int(min_leaf))
    return int(f), float(t), float(g)


# ---------------------------------------------------------------------------
# Manhattan distances


@njit
def l1_distances_nb(x, c):
    n, d = x.shape
    k = c.shape[0]
    out = np.empty((n, k))
    for i in range(n):
        for j in range(k):
            s = 0.0
            for f in range(d):
                s += abs(x[i, f] - c[j, f])
            out[i, j] = s
    return out


def l1_distances_np(x, c):
    out = np.empty((x.shape[0], c.shape[0]))
    for j in range(c.shape[0]):
        out[:, j] = np.abs(x - c[j]).sum(axis=1)
    return out


def l1_distances(x, c):
    x = np.ascontiguousarray(np.atleast_2d(x), dtype=np.float64)
    c = np.ascontiguousarray(np.atleast_2d(c), dtype=np.float64)
    if USE_NUMBA:
        return l1_distances_nb(x, c)
    return l1_distances_np(x, c)


# ---------------------------------------------------------------------------
# dual coordinate descent for the L2-regularized hinge-loss SVM


@njit
def svm_dual_cd_nb(x, y, c, tol, max_epochs, order):
    n, d = x.shape
    alpha = np.zeros(n)
    w = np.zeros(d)
    qd = np.empty(n)
    for i in range(n):
        s = 0.0
        for f in range(d):
            s += x[i, f] * x[i, f]
        qd[i] = s
    epochs = 0
    for epochs in range(1, max_epochs + 1):
        pg_max = -np.inf
        pg_min = np.inf
        for ii in range(n):
            i = order[ii]
            if qd[i] == 0.0:
                continue
            g = 0.0
            for f in range(d):
                g += w[f] * x[i, f]
            g = y[i] * g - 1.0
            a = alpha[i]
            if a == 0.0:
                pg = min(g, 0.0)
            elif a == c:
                pg = max(g, 0.0)
            else:
                pg = g
            if pg > pg_max:
                pg_max = pg
            if pg < pg_min:
                pg_min = pg
            if pg != 0.0:
                a_new = min(max(a - g / qd[i], 0.0), c)
                delta = (a_new - a) * y[i]
                alpha[i] = a_new
                for f in range(d):
                    w[f] += delta * x[i, f]
        if pg_max - pg_min <= tol:
            break
    return w, alpha, epochs


def svm_dual_cd_np(x, y, c, tol, max_epochs, order):
    n, d = x.shape
    alpha = np.zeros(n)
    w = np.zeros(d)
    qd = np.einsum("ij,ij->i", x, x)
    epochs = 0
    for epochs in range(1, max_epochs + 1):
        pg_max, pg_min = -np.inf, np.inf
        for i in order:
            if qd[i] == 0.0:
                continue
            g = y[i] * float(w @ x[i]) - 1.0
            a = alpha[i]
            if a == 0.0:
                pg = min(g, 0.0)
            elif a == c:
                pg = max(g, 0.0)
            else:
                pg = g
            pg_max = max(pg_max, pg)
            pg_min = min(pg_min, pg)
            if pg != 0.0:
                a_new = min(max(a - g / qd[i], 0.0), c)
                w += (a_new - a) * y[i] * x[i]
                alpha[i] = a_new
        if pg_max - pg_min <= tol:
            break
    return w, alpha, epochs


def svm_dual_cd(x, y, c, tol=1e-4, max_epochs=1000, order=None):
    """Solve ``min ½|w|² + c·Σ max(0, 1 − yᵢ w·xᵢ)`` with ``y ∈ {−1, +1}``.

    Returns ``(w, alpha, epochs)``. Samples are visited in ``order`` every
    epoch (identity by default), so results are deterministic.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if order is None:
        order = np.arange(x.shape[0], dtype=np.int64)
    order = np.ascontiguousarray(order, dtype=np.int64)
    if USE_NUMBA:
        return svm_dual_cd_nb(x, y, float(c), float(tol), int(max_epochs), order)
    return svm_dual_cd_np(x, y, float(c), float(tol), int(max_epochs), order)


# ---------------------------------------------------------------------------
# multinomial cross-entropy and its gradient
#
# The exponentials go through numpy's vectorized ``exp`` on both paths; the
# numba passes replace the row-wise max/normalize steps, which numpy runs
# slowly along a short trailing axis.


@njit
def _shift_rows_nb(z, labels, zy):
    t, k = z.shape
    for i in range(t):
        zmax = z[i, 0]
        for c in range(1, k):
            if z[i, c] > zmax:
                zmax = z[i, c]
        for c in range(k):
            z[i, c] -= zmax
        zy[i] = z[i, labels[i]]


@njit
def _normalize_rows_nb(z, labels, zy):
    t, k = z.shape
    loss = 0.0
    for i in range(t):
        se = 0.0
        for c in range(k):
            se += z[i, c]
        loss += np.log(se) - zy[i]
        inv = 1.0 / se
        for c in range(k):
            z[i, c] *= inv
        z[i, labels[i]] -= 1.0
    return loss


def softmax_residual_nb(z, labels):
    zy = np.empty(z.shape[0])
    _shift_rows_nb(z, labels, zy)
    np.exp(z, out=z)
    return _normalize_rows_nb(z, labels, zy)


def softmax_residual_np(z, labels):
    rows = np.arange(z.shape[0])
    np.subtract(z, z.max(axis=1, keepdims=True), out=z)
    zy = z[rows, labels]
    np.exp(z, out=z)
    se = z.sum(axis=1, keepdims=True)
    loss = float(np.sum(np.log(se[:, 0]) - zy))
    np.divide(z, se, out=z)
    z[rows, labels] -= 1.0
    return loss


def softmax_residual(z, labels):
    """Overwrite logits ``z`` with ``softmax(z) − onehot(labels)`` in place
    and return the summed cross-entropy."""
    if USE_NUMBA:
        return softmax_residual_nb(z, labels)
    return softmax_residual_np(z, labels)


def softmax_xent(x, labels, wb):
    """Summed softmax cross-entropy of affine scores ``[W | b]`` and its
    gradient with respect to ``[W | b]``.

    Matrix products go through BLAS; the row-wise softmax is the kernel.
    """
    d = x.shape[1]
    z = x @ wb[:, :d].T
    z += wb[:, d]
    loss = softmax_residual(z, labels)
    grad = np.empty_like(wb)
    grad[:, :d] = z.T @ x
    grad[:, d] = z.sum(axis=0)
    return loss, grad
