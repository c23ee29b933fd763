# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernel backend.

Same contract as _kernels_py; hand loops keep the small matrix-vector
products free of numpy call overhead, which dominates at these layer sizes.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, log, log1p, sqrt, tanh

cnp.import_array()

BACKEND_NAME = "cython"

ACT_LINEAR = 0
ACT_RELU6 = 1
ACT_TANH = 2
ACT_SOFTPLUS = 3


cdef inline double _sigmoid(double z) nogil:
    return 1.0 / (1.0 + exp(-z))


def dense_forward(double[:, ::1] w, double[::1] b, double[::1] x, int act):
    cdef Py_ssize_t m = w.shape[0], n = w.shape[1]
    cdef cnp.ndarray[double, ndim=1] y = np.empty(m)
    cdef cnp.ndarray[double, ndim=1] z = np.empty(m)
    cdef double[::1] yv = y, zv = z
    cdef Py_ssize_t i, j
    cdef double s
    for i in range(m):
        s = b[i]
        for j in range(n):
            s += w[i, j] * x[j]
        zv[i] = s
        if act == 0:
            yv[i] = s
        elif act == 1:
            yv[i] = 0.0 if s < 0.0 else (6.0 if s > 6.0 else s)
        elif act == 2:
            yv[i] = tanh(s)
        else:
            yv[i] = s if s > 30.0 else log1p(exp(s))
    return y, z


def dense_backward(double[:, ::1] w, double[::1] x, double[::1] z,
                   double[::1] y, int act, double[::1] gy):
    cdef Py_ssize_t m = w.shape[0], n = w.shape[1]
    cdef cnp.ndarray[double, ndim=2] gw = np.empty((m, n))
    cdef cnp.ndarray[double, ndim=1] gb = np.empty(m)
    cdef cnp.ndarray[double, ndim=1] gx = np.zeros(n)
    cdef double[:, ::1] gwv = gw
    cdef double[::1] gbv = gb, gxv = gx
    cdef Py_ssize_t i, j
    cdef double dz
    for i in range(m):
        if act == 0:
            dz = gy[i]
        elif act == 1:
            dz = gy[i] if (z[i] > 0.0 and z[i] < 6.0) else 0.0
        elif act == 2:
            dz = gy[i] * (1.0 - y[i] * y[i])
        else:
            dz = gy[i] * _sigmoid(z[i])
        gbv[i] = dz
        for j in range(n):
            gwv[i, j] = dz * x[j]
            gxv[j] += w[i, j] * dz
    return gw, gb, gx


def lstm_forward(double[:, ::1] wx, double[:, ::1] wh, double[::1] b,
                 double[::1] x, double[::1] h, double[::1] c):
    cdef Py_ssize_t nh = wh.shape[1], nin = wx.shape[1]
    cdef cnp.ndarray[double, ndim=1] i_ = np.empty(nh)
    cdef cnp.ndarray[double, ndim=1] f_ = np.empty(nh)
    cdef cnp.ndarray[double, ndim=1] g_ = np.empty(nh)
    cdef cnp.ndarray[double, ndim=1] o_ = np.empty(nh)
    cdef cnp.ndarray[double, ndim=1] c2 = np.empty(nh)
    cdef cnp.ndarray[double, ndim=1] tc = np.empty(nh)
    cdef cnp.ndarray[double, ndim=1] h2 = np.empty(nh)
    cdef double[::1] iv = i_, fv = f_, gv = g_, ov = o_, c2v = c2, tcv = tc, h2v = h2
    cdef Py_ssize_t k, j, row
    cdef double s
    for k in range(4 * nh):
        s = b[k]
        for j in range(nin):
            s += wx[k, j] * x[j]
        for j in range(nh):
            s += wh[k, j] * h[j]
        row = k / nh
        if row == 0:
            iv[k] = _sigmoid(s)
        elif row == 1:
            fv[k - nh] = _sigmoid(s)
        elif row == 2:
            gv[k - 2 * nh] = tanh(s)
        else:
            ov[k - 3 * nh] = _sigmoid(s)
    for k in range(nh):
        c2v[k] = fv[k] * c[k] + iv[k] * gv[k]
        tcv[k] = tanh(c2v[k])
        h2v[k] = ov[k] * tcv[k]
    return h2, c2, (i_, f_, g_, o_, tc)


def lstm_backward(double[:, ::1] wx, double[:, ::1] wh,
                  double[::1] x, double[::1] h, double[::1] c,
                  cache, double[::1] gh2, double[::1] gc2):
    cdef double[::1] iv = cache[0], fv = cache[1], gv = cache[2]
    cdef double[::1] ov = cache[3], tcv = cache[4]
    cdef Py_ssize_t nh = wh.shape[1], nin = wx.shape[1]
    cdef cnp.ndarray[double, ndim=1] ds = np.empty(4 * nh)
    cdef cnp.ndarray[double, ndim=1] gc = np.empty(nh)
    cdef cnp.ndarray[double, ndim=2] gwx = np.empty((4 * nh, nin))
    cdef cnp.ndarray[double, ndim=2] gwh = np.empty((4 * nh, nh))
    cdef cnp.ndarray[double, ndim=1] gx = np.zeros(nin)
    cdef cnp.ndarray[double, ndim=1] gh = np.zeros(nh)
    cdef double[::1] dsv = ds, gcv = gc, gxv = gx, ghv = gh
    cdef double[:, ::1] gwxv = gwx, gwhv = gwh
    cdef Py_ssize_t k, j
    cdef double gctot, d
    for k in range(nh):
        gctot = gc2[k] + gh2[k] * ov[k] * (1.0 - tcv[k] * tcv[k])
        dsv[k] = gctot * gv[k] * iv[k] * (1.0 - iv[k])
        dsv[k + nh] = gctot * c[k] * fv[k] * (1.0 - fv[k])
        dsv[k + 2 * nh] = gctot * iv[k] * (1.0 - gv[k] * gv[k])
        dsv[k + 3 * nh] = gh2[k] * tcv[k] * ov[k] * (1.0 - ov[k])
        gcv[k] = gctot * fv[k]
    for k in range(4 * nh):
        d = dsv[k]
        for j in range(nin):
            gwxv[k, j] = d * x[j]
            gxv[j] += wx[k, j] * d
        for j in range(nh):
            gwhv[k, j] = d * h[j]
            ghv[j] += wh[k, j] * d
    return gwx, gwh, ds, gx, gh, gc


def dense_backward_acc(double[:, ::1] w, double[::1] x, double[::1] z,
                       double[::1] y, int act, double[::1] gy,
                       double[:, ::1] gw, double[::1] gb):
    cdef Py_ssize_t m = w.shape[0], n = w.shape[1]
    cdef cnp.ndarray[double, ndim=1] gx = np.zeros(n)
    cdef double[::1] gxv = gx
    cdef Py_ssize_t i, j
    cdef double dz
    for i in range(m):
        if act == 0:
            dz = gy[i]
        elif act == 1:
            dz = gy[i] if (z[i] > 0.0 and z[i] < 6.0) else 0.0
        elif act == 2:
            dz = gy[i] * (1.0 - y[i] * y[i])
        else:
            dz = gy[i] * _sigmoid(z[i])
        if dz != 0.0:
            gb[i] += dz
            for j in range(n):
                gw[i, j] += dz * x[j]
                gxv[j] += w[i, j] * dz
    return gx


def lstm_backward_acc(double[:, ::1] wx, double[:, ::1] wh,
                      double[::1] x, double[::1] h, double[::1] c,
                      cache, double[::1] gh2, double[::1] gc2,
                      double[:, ::1] gwx, double[:, ::1] gwh, double[::1] gb):
    cdef double[::1] iv = cache[0], fv = cache[1], gv = cache[2]
    cdef double[::1] ov = cache[3], tcv = cache[4]
    cdef Py_ssize_t nh = wh.shape[1], nin = wx.shape[1]
    cdef cnp.ndarray[double, ndim=1] ds = np.empty(4 * nh)
    cdef cnp.ndarray[double, ndim=1] gc = np.empty(nh)
    cdef cnp.ndarray[double, ndim=1] gx = np.zeros(nin)
    cdef cnp.ndarray[double, ndim=1] gh = np.zeros(nh)
    cdef double[::1] dsv = ds, gcv = gc, gxv = gx, ghv = gh
    cdef Py_ssize_t k, j
    cdef double gctot, d
    for k in range(nh):
        gctot = gc2[k] + gh2[k] * ov[k] * (1.0 - tcv[k] * tcv[k])
        dsv[k] = gctot * gv[k] * iv[k] * (1.0 - iv[k])
        dsv[k + nh] = gctot * c[k] * fv[k] * (1.0 - fv[k])
        dsv[k + 2 * nh] = gctot * iv[k] * (1.0 - gv[k] * gv[k])
        dsv[k + 3 * nh] = gh2[k] * tcv[k] * ov[k] * (1.0 - ov[k])
        gcv[k] = gctot * fv[k]
    for k in range(4 * nh):
        d = dsv[k]
        gb[k] += d
        for j in range(nin):
            gwx[k, j] += d * x[j]
            gxv[j] += wx[k, j] * d
        for j in range(nh):
            gwh[k, j] += d * h[j]
            ghv[j] += wh[k, j] * d
    return gx, gh, gc


def rmsprop_update(param, grad, acc, double lr, double alpha, double eps):
    # parameters and fresh gradients are always C-contiguous; ravel is a view
    cdef double[::1] p = param.ravel()
    cdef double[::1] g = np.ascontiguousarray(grad).ravel()
    cdef double[::1] a = acc.ravel()
    cdef Py_ssize_t n = p.shape[0]
    cdef Py_ssize_t k
    for k in range(n):
        a[k] = alpha * a[k] + (1.0 - alpha) * g[k] * g[k]
        p[k] -= lr * g[k] / (sqrt(a[k]) + eps)
