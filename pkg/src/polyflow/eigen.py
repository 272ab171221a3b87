"""Dense nonsymmetric eigenvalues: balancing, Householder reduction to
Hessenberg form and the Francis double-shift QR iteration."""
from __future__ import annotations

import math

import numpy as np


class EigenError(RuntimeError):
    pass


def balance(A: np.ndarray) -> np.ndarray:
    """Parlett-Reinsch diagonal similarity with powers of two (exact in floating point)."""
    a = np.array(A, dtype=float)
    n = a.shape[0]
    radix = 2.0
    sqrdx = radix * radix
    done = False
    while not done:
        done = True
        for i in range(n):
            c = np.abs(a[:, i]).sum() - abs(a[i, i])
            r = np.abs(a[i, :]).sum() - abs(a[i, i])
            if c == 0.0 or r == 0.0:
                continue
            g = r / radix
            f = 1.0
            s = c + r
            while c < g:
                f *= radix
                c *= sqrdx
            g = r * radix
            while c > g:
                f /= radix
                c /= sqrdx
            if (c + r) / f < 0.95 * s:
                done = False
                a[i, :] /= f
                a[:, i] *= f
    return a


def hessenberg(A: np.ndarray) -> np.ndarray:
    """Upper Hessenberg matrix similar to ``A`` (Householder reflections)."""
    h = np.array(A, dtype=float)
    n = h.shape[0]
    for k in range(n - 2):
        x = h[k + 1:, k].copy()
        alpha = np.linalg.norm(x)
        if alpha == 0.0:
            continue
        v = x
        v[0] += math.copysign(alpha, x[0])
        v /= np.linalg.norm(v)
        h[k + 1:, k:] -= 2.0 * np.outer(v, v @ h[k + 1:, k:])
        h[:, k + 1:] -= 2.0 * np.outer(h[:, k + 1:] @ v, v)
        h[k + 2:, k] = 0.0
    return h


def hqr(H: np.ndarray, max_iter: int = 60) -> np.ndarray:
    """Eigenvalues of an upper Hessenberg matrix by shifted double-step QR.

    Raises :class:`EigenError` if one eigenvalue needs more than ``max_iter``
    iterations.
    """
    a = [list(map(float, row)) for row in np.asarray(H, dtype=float)]
    n = len(a)
    wr = [0.0] * n
    wi = [0.0] * n
    anorm = sum(abs(a[i][j]) for i in range(n) for j in range(max(i - 1, 0), n))
    nn = n - 1
    t = 0.0
    while nn >= 0:
        its = 0
        while True:
            l = nn
            while l >= 1:
                s = abs(a[l - 1][l - 1]) + abs(a[l][l])
                if s == 0.0:
                    s = anorm
                if abs(a[l][l - 1]) + s == s:
                    a[l][l - 1] = 0.0
                    break
                l -= 1
            x = a[nn][nn]
            if l == nn:
                wr[nn] = x + t
                wi[nn] = 0.0
                nn -= 1
                break
            y = a[nn - 1][nn - 1]
            w = a[nn][nn - 1] * a[nn - 1][nn]
            if l == nn - 1:
                p = 0.5 * (y - x)
                q = p * p + w
                z = math.sqrt(abs(q))
                x += t
                if q >= 0.0:
                    z = p + math.copysign(z, p)
                    wr[nn - 1] = wr[nn] = x + z
                    if z:
                        wr[nn] = x - w / z
                    wi[nn - 1] = wi[nn] = 0.0
                else:
                    wr[nn - 1] = wr[nn] = x + p
                    wi[nn - 1] = -z
                    wi[nn] = z
                nn -= 2
                break
            if its >= max_iter:
                raise EigenError(f"QR iteration did not converge after {max_iter} iterations")
            if its and its % 10 == 0:
                # exceptional shift
                t += x
                for i in range(nn + 1):
                    a[i][i] -= x
                s = abs(a[nn][nn - 1]) + abs(a[nn - 1][nn - 2])
                y = x = 0.75 * s
                w = -0.4375 * s * s
            its += 1
            m = nn - 2
            while m >= l:
                z = a[m][m]
                r = x - z
                s = y - z
                p = (r * s - w) / a[m + 1][m] + a[m][m + 1]
                q = a[m + 1][m + 1] - z - r - s
                r = a[m + 2][m + 1]
                s = abs(p) + abs(q) + abs(r)
                p /= s
                q /= s
                r /= s
                if m == l:
                    break
                u = abs(a[m][m - 1]) * (abs(q) + abs(r))
                v = abs(p) * (abs(a[m - 1][m - 1]) + abs(z) + abs(a[m + 1][m + 1]))
                if u + v == v:
                    break
                m -= 1
            for i in range(m + 2, nn + 1):
                a[i][i - 2] = 0.0
                if i != m + 2:
                    a[i][i - 3] = 0.0
            for k in range(m, nn):
                if k != m:
                    p = a[k][k - 1]
                    q = a[k + 1][k - 1]
                    r = a[k + 2][k - 1] if k != nn - 1 else 0.0
                    x = abs(p) + abs(q) + abs(r)
                    if x != 0.0:
                        p /= x
                        q /= x
                        r /= x
                s = math.copysign(math.sqrt(p * p + q * q + r * r), p)
                if s == 0.0:
                    continue
                if k == m:
                    if l != m:
                        a[k][k - 1] = -a[k][k - 1]
                else:
                    a[k][k - 1] = -s * x
                p += s
                x = p / s
                y = q / s
                z = r / s
                q /= p
                r /= p
                for j in range(k, nn + 1):
                    p = a[k][j] + q * a[k + 1][j]
                    if k != nn - 1:
                        p += r * a[k + 2][j]
                        a[k + 2][j] -= p * z
                    a[k + 1][j] -= p * y
                    a[k][j] -= p * x
                for i in range(l, min(nn, k + 3) + 1):
                    p = x * a[i][k] + y * a[i][k + 1]
                    if k != nn - 1:
                        p += z * a[i][k + 2]
                        a[i][k + 2] -= p * r
                    a[i][k + 1] -= p * q
                    a[i][k] -= p
    return np.array(wr) + 1j * np.array(wi)


def merge_multiple(w: np.ndarray, scale: float) -> np.ndarray:
    """Replace numerically split multiple eigenvalues by their cluster mean.

    A k-fold defective eigenvalue is only determined to about
    ``(u * scale) ** (1 / k)``, while the mean of the k computed values is
    accurate to working precision. Eigenvalues are grouped by single linkage;
    a group of size k is merged only if its radius is below
    ``2 * scale * u ** (1 / k)``, otherwise it is left untouched.
    """
    w = np.asarray(w, dtype=complex)
    n = w.size
    if n < 2:
        return w.copy()
    u = np.finfo(float).eps
    link = 2.0 * scale * u ** (1.0 / n)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(w[i] - w[j]) <= link:
                parent[find(i)] = find(j)
    out = w.copy()
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    for idx in groups.values():
        k = len(idx)
        if k < 2:
            continue
        mean = w[idx].mean()
        radius = np.abs(w[idx] - mean).max()
        bound = 2.0 * scale * u ** (1.0 / k)
        if radius <= bound:
            if abs(mean.imag) <= bound:
                mean = complex(mean.real, 0.0)
            out[idx] = mean
    return out


def eigvals(A, merge: bool = True, max_iter: int = 60) -> np.ndarray:
    """All eigenvalues of a real square matrix, sorted by real then imaginary part."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("matrix must be square")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    if A.shape[0] == 0:
        return np.zeros(0, dtype=complex)
    b = balance(A)
    w = hqr(hessenberg(b), max_iter=max_iter)
    if merge:
        w = merge_multiple(w, max(1.0, float(np.abs(b).sum(axis=0).max())))
    order = np.lexsort((w.imag, w.real))
    return w[order]
