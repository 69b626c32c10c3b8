"""Pure-numpy kernels: batched eigendecomposition per segment.

Vectorizes over samples with numpy's batched ``eigh``; the costate sweep
caches eigendata per sample chunk so memory stays bounded for long
schedules.  See the package docstring for the kernel contract.
"""

import numpy as np

# cap on cached complex entries per chunk (~64 MB of eigenvector data)
_CHUNK_BUDGET = 4_000_000


def _eigh_segments(hdata, hctrl, theta_row):
    """Eigendecompose H_i = hdata[i] + sum_c theta_c hctrl[c] for all samples."""
    h = hdata + np.tensordot(theta_row, hctrl, axes=(0, 0))[None, :, :]
    return np.linalg.eigh(h)


def evolve_batch(hdata, hctrl, theta, dt, psi0):
    hdata = np.asarray(hdata, dtype=complex)
    hctrl = np.asarray(hctrl, dtype=complex)
    theta = np.atleast_2d(np.asarray(theta, dtype=float))
    n = hdata.shape[0]
    psi = np.broadcast_to(np.asarray(psi0, dtype=complex), (n, hdata.shape[1])).copy()
    for j in range(theta.shape[0]):
        w, q = _eigh_segments(hdata, hctrl, theta[j])
        y = np.einsum("nia,ni->na", q.conj(), psi)
        y *= np.exp(-1j * dt * w)
        psi = np.einsum("nia,na->ni", q, y)
    return psi


def _divided_differences(w, dt):
    """Eigenbasis divided differences of exp(-i*dt*lambda), stable near ties."""
    diff = 0.5 * dt * (w[:, :, None] - w[:, None, :])
    avg = 0.5 * dt * (w[:, :, None] + w[:, None, :])
    return -1j * dt * np.exp(-1j * avg) * np.sinc(diff / np.pi)


def grad_batch(hdata, hctrl, theta, dt, psi0, mop, targets):
    hdata = np.asarray(hdata, dtype=complex)
    hctrl = np.asarray(hctrl, dtype=complex)
    theta = np.atleast_2d(np.asarray(theta, dtype=float))
    mop = np.asarray(mop, dtype=complex)
    targets = np.asarray(targets, dtype=float)
    n, d = hdata.shape[0], hdata.shape[1]
    k, p = theta.shape

    chunk = max(1, min(n, _CHUNK_BUDGET // (k * d * d)))
    grad = np.zeros((k, p))
    preds = np.empty(n)
    sq_err = 0.0

    for lo in range(0, n, chunk):
        hi = min(lo + chunk, n)
        hd = hdata[lo:hi]
        b = hd.shape[0]
        psis = np.empty((k + 1, b, d), dtype=complex)
        ws = np.empty((k, b, d))
        qs = np.empty((k, b, d, d), dtype=complex)
        psis[0] = np.asarray(psi0, dtype=complex)[None, :]
        for j in range(k):
            w, q = _eigh_segments(hd, hctrl, theta[j])
            ws[j], qs[j] = w, q
            y = np.einsum("nia,ni->na", q.conj(), psis[j])
            y *= np.exp(-1j * dt * w)
            psis[j + 1] = np.einsum("nia,na->ni", q, y)

        mpsi = psis[k] @ mop.T
        f = np.einsum("ni,ni->n", psis[k].conj(), mpsi).real
        preds[lo:hi] = f
        err = f - targets[lo:hi]
        sq_err += float(err @ err)
        chi = (2.0 / n) * err[:, None] * mpsi

        for j in range(k - 1, -1, -1):
            w, q = ws[j], qs[j]
            a = np.einsum("nia,ni->na", q.conj(), chi)
            bb = np.einsum("nia,ni->na", q.conj(), psis[j])
            g = a.conj()[:, :, None] * bb[:, None, :] * _divided_differences(w, dt)
            # Z[i, k] = sum_ab conj(Q[i, a]) G[a, b] Q[k, b]
            z = np.matmul(q.conj(), np.matmul(g, q.transpose(0, 2, 1)))
            grad[j] += 2.0 * np.einsum("nik,cik->c", z, hctrl).real
            chi = np.einsum("nia,na->ni", q, np.exp(1j * dt * w) * a)

    loss = sq_err / n
    return loss, grad, preds
