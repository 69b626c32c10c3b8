# cython: language_level=3
# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled propagation/gradient kernels.

Same contract as the numpy fallback (see the package docstring).  Samples
are processed sequentially; per-segment Hamiltonians are eigendecomposed
with a closed-form routine for d = 2 and LAPACK ``zheevd`` otherwise, and
the costate sweep reuses the cached eigenbases.
"""

import numpy as np

from libc.math cimport cos, fabs, sin, sqrt
from scipy.linalg.cython_lapack cimport zheevd

ctypedef double complex cplx


cdef inline void _build_h(cplx* hbuf, const cplx* hd, const cplx* hc,
                          const double* th, Py_ssize_t p, Py_ssize_t dd) noexcept nogil:
    """hbuf = sample Hamiltonian + sum_c th[c] * controls[c], row-major d*d."""
    cdef Py_ssize_t q, c
    cdef double tv
    for q in range(dd):
        hbuf[q] = hd[q]
    for c in range(p):
        tv = th[c]
        if tv != 0.0:
            for q in range(dd):
                hbuf[q] = hbuf[q] + tv * hc[c * dd + q]


cdef inline void _eig2(const cplx* h, double* w, cplx* qh) noexcept nogil:
    """Closed-form 2x2 Hermitian eigendecomposition.

    Ascending eigenvalues in ``w``; ``qh`` rows are the bras of the
    eigenvectors (qh[a*2+i] = conj(Q[i,a])).  Branches on the sign of the
    z component to stay stable near degeneracy.
    """
    cdef double h00 = h[0].real, h11 = h[3].real
    cdef double ax = h[1].real, ay = -h[1].imag
    cdef double c0 = 0.5 * (h00 + h11), az = 0.5 * (h00 - h11)
    cdef double r = sqrt(ax * ax + ay * ay + az * az)
    cdef double nrm
    cdef cplx vp0, vp1
    w[0] = c0 - r
    w[1] = c0 + r
    if r < 1e-300:
        qh[0] = 1.0
        qh[1] = 0.0
        qh[2] = 0.0
        qh[3] = 1.0
        return
    if az >= 0.0:
        nrm = sqrt(2.0 * r * (r + az))
        vp0 = (r + az) / nrm
        vp1 = (ax + 1j * ay) / nrm
    else:
        nrm = sqrt(2.0 * r * (r - az))
        vp0 = (ax - 1j * ay) / nrm
        vp1 = (r - az) / nrm
    # row 1 is <v+|; row 0 is <v-| with v- = (-conj(vp1), conj(vp0))
    qh[2] = vp0.conjugate()
    qh[3] = vp1.conjugate()
    qh[0] = -vp1
    qh[1] = vp0


cdef inline int _eigh(cplx* hbuf, double* w, cplx* qh, Py_ssize_t d,
                      cplx* work, int lwork, double* rwork, int lrwork,
                      int* iwork, int liwork) noexcept nogil:
    """Eigendecompose the row-major Hermitian matrix in ``hbuf`` into ``qh``.

    For d > 2 the buffer is handed to zheevd as column-major data, i.e. as
    conj(H); the returned eigenvector columns then equal the bras of H's
    eigenvectors, which is exactly the ``qh`` row convention.
    """
    cdef int info = 0, n = <int> d
    cdef char jobz = b'V', uplo = b'L'
    cdef Py_ssize_t q
    if d == 2:
        _eig2(hbuf, w, qh)
        return 0
    zheevd(&jobz, &uplo, &n, hbuf, &n, w, work, &lwork, rwork, &lrwork,
           iwork, &liwork, &info)
    if info != 0:
        return info
    for q in range(d * d):
        qh[q] = hbuf[q]
    return 0


cdef inline void _forward_segment(const cplx* qh, const double* w, double dt,
                                  cplx* psi, cplx* bvec, cplx* evec,
                                  Py_ssize_t d) noexcept nogil:
    """psi <- Q exp(-i dt w) Q^dag psi; also exports b = QH psi and the phases."""
    cdef Py_ssize_t a, i
    cdef cplx acc
    for a in range(d):
        acc = 0.0
        for i in range(d):
            acc = acc + qh[a * d + i] * psi[i]
        bvec[a] = acc
        evec[a] = cos(dt * w[a]) - 1j * sin(dt * w[a])
    for i in range(d):
        acc = 0.0
        for a in range(d):
            acc = acc + (qh[a * d + i]).conjugate() * evec[a] * bvec[a]
        psi[i] = acc


def evolve_batch(hdata, hctrl, theta, double dt, psi0):
    hdata = np.ascontiguousarray(hdata, dtype=np.complex128)
    hctrl = np.ascontiguousarray(hctrl, dtype=np.complex128)
    theta = np.ascontiguousarray(np.atleast_2d(theta), dtype=np.float64)
    psi0 = np.ascontiguousarray(psi0, dtype=np.complex128)

    cdef const cplx[:, :, ::1] hd = hdata
    cdef const cplx[:, :, ::1] hc = hctrl
    cdef const double[:, ::1] th = theta
    cdef const cplx[::1] p0 = psi0
    cdef Py_ssize_t n = hd.shape[0], d = hd.shape[1]
    cdef Py_ssize_t k = th.shape[0], p = th.shape[1]
    if p < 1:
        raise ValueError("need at least one control channel")

    out = np.empty((n, d), dtype=np.complex128)
    cdef cplx[:, ::1] outv = out

    scratch = np.empty(3 * d + 2 * d * d, dtype=np.complex128)
    wbuf = np.empty(d, dtype=np.float64)
    cdef cplx[::1] sc = scratch
    cdef double[::1] wv = wbuf
    cdef int lwork = 2 * <int> d + <int> (d * d)
    cdef int lrwork = 1 + 5 * <int> d + 2 * <int> (d * d)
    cdef int liwork = 3 + 5 * <int> d
    lapack_work = np.empty(lwork, dtype=np.complex128)
    lapack_rwork = np.empty(lrwork, dtype=np.float64)
    lapack_iwork = np.empty(liwork, dtype=np.int32)
    cdef cplx[::1] lw = lapack_work
    cdef double[::1] lr = lapack_rwork
    cdef int[::1] li = lapack_iwork

    cdef cplx* hbuf = &sc[0]
    cdef cplx* qh = &sc[d * d]
    cdef cplx* psi = &sc[2 * d * d]
    cdef cplx* bvec = &sc[2 * d * d + d]
    cdef cplx* evec = &sc[2 * d * d + 2 * d]
    cdef Py_ssize_t i, j, q
    cdef int info = 0

    with nogil:
        for i in range(n):
            for q in range(d):
                psi[q] = p0[q]
            for j in range(k):
                _build_h(hbuf, &hd[i, 0, 0], &hc[0, 0, 0], &th[j, 0], p, d * d)
                info = _eigh(hbuf, &wv[0], qh, d, &lw[0], lwork, &lr[0],
                             lrwork, <int*> &li[0], liwork)
                if info != 0:
                    break
                _forward_segment(qh, &wv[0], dt, psi, bvec, evec, d)
            if info != 0:
                break
            for q in range(d):
                outv[i, q] = psi[q]
    if info != 0:
        raise np.linalg.LinAlgError(f"zheevd failed with info={info}")
    return out


def grad_batch(hdata, hctrl, theta, double dt, psi0, mop, targets):
    hdata = np.ascontiguousarray(hdata, dtype=np.complex128)
    hctrl = np.ascontiguousarray(hctrl, dtype=np.complex128)
    theta = np.ascontiguousarray(np.atleast_2d(theta), dtype=np.float64)
    psi0 = np.ascontiguousarray(psi0, dtype=np.complex128)
    mop = np.ascontiguousarray(mop, dtype=np.complex128)
    targets = np.ascontiguousarray(targets, dtype=np.float64)

    cdef const cplx[:, :, ::1] hd = hdata
    cdef const cplx[:, :, ::1] hc = hctrl
    cdef const double[:, ::1] th = theta
    cdef const cplx[::1] p0 = psi0
    cdef const cplx[:, ::1] mv = mop
    cdef const double[::1] tv = targets
    cdef Py_ssize_t n = hd.shape[0], d = hd.shape[1]
    cdef Py_ssize_t k = th.shape[0], p = th.shape[1]
    if p < 1:
        raise ValueError("need at least one control channel")

    grad = np.zeros((k, p), dtype=np.float64)
    preds = np.empty(n, dtype=np.float64)
    cdef double[:, ::1] gv = grad
    cdef double[::1] pv = preds

    # per-sample caches reused across samples
    qh_cache = np.empty((k, d, d), dtype=np.complex128)
    w_cache = np.empty((k, d), dtype=np.float64)
    e_cache = np.empty((k, d), dtype=np.complex128)
    b_cache = np.empty((k, d), dtype=np.complex128)
    cdef cplx[:, :, ::1] qhc = qh_cache
    cdef double[:, ::1] wc = w_cache
    cdef cplx[:, ::1] ec = e_cache
    cdef cplx[:, ::1] bc = b_cache

    scratch = np.empty(4 * d + 4 * d * d, dtype=np.complex128)
    cdef cplx[::1] sc = scratch
    cdef cplx* hbuf = &sc[0]
    cdef cplx* gmat = &sc[d * d]
    cdef cplx* tmat = &sc[2 * d * d]
    cdef cplx* zmat = &sc[3 * d * d]
    cdef cplx* psi = &sc[4 * d * d]
    cdef cplx* chi = &sc[4 * d * d + d]
    cdef cplx* avec = &sc[4 * d * d + 2 * d]
    cdef cplx* mpsi = &sc[4 * d * d + 3 * d]

    cdef int lwork = 2 * <int> d + <int> (d * d)
    cdef int lrwork = 1 + 5 * <int> d + 2 * <int> (d * d)
    cdef int liwork = 3 + 5 * <int> d
    lapack_work = np.empty(lwork, dtype=np.complex128)
    lapack_rwork = np.empty(lrwork, dtype=np.float64)
    lapack_iwork = np.empty(liwork, dtype=np.int32)
    cdef cplx[::1] lw = lapack_work
    cdef double[::1] lr = lapack_rwork
    cdef int[::1] li = lapack_iwork

    cdef Py_ssize_t i, j, q, a, b, c, row, col
    cdef int info = 0
    cdef double sq_err = 0.0, f, err, wgt, diff, avg, sfac, contrib
    cdef cplx acc, dd, phase

    with nogil:
        for i in range(n):
            for q in range(d):
                psi[q] = p0[q]
            # forward sweep, caching eigenbases, phases and b = QH psi
            for j in range(k):
                _build_h(hbuf, &hd[i, 0, 0], &hc[0, 0, 0], &th[j, 0], p, d * d)
                info = _eigh(hbuf, &wc[j, 0], &qhc[j, 0, 0], d, &lw[0], lwork,
                             &lr[0], lrwork, <int*> &li[0], liwork)
                if info != 0:
                    break
                _forward_segment(&qhc[j, 0, 0], &wc[j, 0], dt, psi,
                                 &bc[j, 0], &ec[j, 0], d)
            if info != 0:
                break

            # prediction and weighted costate seed chi = (2 err / n) M psi
            f = 0.0
            for row in range(d):
                acc = 0.0
                for col in range(d):
                    acc = acc + mv[row, col] * psi[col]
                mpsi[row] = acc
                f = f + ((psi[row]).conjugate() * acc).real
            pv[i] = f
            err = f - tv[i]
            sq_err = sq_err + err * err
            wgt = 2.0 * err / <double> n
            for row in range(d):
                chi[row] = wgt * mpsi[row]

            # backward costate sweep
            for j in range(k - 1, -1, -1):
                for a in range(d):
                    acc = 0.0
                    for q in range(d):
                        acc = acc + qhc[j, a, q] * chi[q]
                    avec[a] = acc
                # G[a,b] = conj(avec[a]) * b[b] * divided-difference(a, b)
                for a in range(d):
                    for b in range(d):
                        diff = 0.5 * dt * (wc[j, a] - wc[j, b])
                        avg = 0.5 * dt * (wc[j, a] + wc[j, b])
                        if fabs(diff) < 1e-4:
                            sfac = 1.0 - diff * diff / 6.0
                        else:
                            sfac = sin(diff) / diff
                        dd = (-1j * dt) * (cos(avg) - 1j * sin(avg)) * sfac
                        gmat[a * d + b] = (avec[a]).conjugate() * bc[j, b] * dd
                # T = G conj(QH);  Z = QH^T T
                for a in range(d):
                    for col in range(d):
                        acc = 0.0
                        for b in range(d):
                            acc = acc + gmat[a * d + b] * (qhc[j, b, col]).conjugate()
                        tmat[a * d + col] = acc
                for row in range(d):
                    for col in range(d):
                        acc = 0.0
                        for a in range(d):
                            acc = acc + qhc[j, a, row] * tmat[a * d + col]
                        zmat[row * d + col] = acc
                for c in range(p):
                    contrib = 0.0
                    for row in range(d):
                        for col in range(d):
                            contrib = contrib + (hc[c, row, col] * zmat[row * d + col]).real
                    gv[j, c] += 2.0 * contrib
                # chi <- U^dag chi = Q conj(E) QH chi
                for row in range(d):
                    acc = 0.0
                    for a in range(d):
                        acc = acc + (qhc[j, a, row]).conjugate() * (ec[j, a]).conjugate() * avec[a]
                    chi[row] = acc
    if info != 0:
        raise np.linalg.LinAlgError(f"zheevd failed with info={info}")
    return sq_err / <double> n, grad, preds
