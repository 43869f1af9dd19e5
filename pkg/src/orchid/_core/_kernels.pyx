# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled radio kernels. Same contract as kernels_py.radio_snapshot."""

import numpy as np

cimport numpy as cnp
from libc.math cimport asin, exp, log10, log2, sqrt, pow

cnp.import_array()

DEF RAD2DEG = 57.29577951308232


def radio_snapshot(cnp.ndarray[cnp.float64_t, ndim=2] uav_pos,
                   cnp.ndarray[cnp.float64_t, ndim=1] tx_dbm,
                   cnp.ndarray[cnp.float64_t, ndim=2] users,
                   cnp.ndarray[cnp.float64_t, ndim=1] gbs_pos,
                   consts):
    cdef double a = consts[0]
    cdef double b = consts[1]
    cdef double eta_los = consts[2]
    cdef double eta_nlos = consts[3]
    cdef double fspl_const = consts[4]
    cdef double gains_db = consts[5]
    cdef double noise_dbm = consts[6]
    cdef double bandwidth = consts[7]
    cdef double snr_req = consts[8]
    cdef double d_min = consts[9]

    cdef Py_ssize_t n = uav_pos.shape[0]
    cdef Py_ssize_t m = users.shape[0]
    cdef Py_ssize_t i, j, best

    cdef cnp.ndarray[cnp.int64_t, ndim=1] assoc = np.zeros(m, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] snr = np.zeros(m)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] rates = np.zeros(m)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] covered = np.zeros(m, dtype=np.uint8)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] loads = np.zeros(n, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] served = np.zeros(n, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] min_user_dist = np.full(n, np.inf)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] collisions = np.zeros(n, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] backhaul = np.zeros(n)

    cdef double dx, dy, z, d3d, theta, p_los, loss, r, best_rssi, s, k
    cdef double ux, uy

    for j in range(m):
        ux = users[j, 0]
        uy = users[j, 1]
        best = 0
        best_rssi = -1e300
        for i in range(n):
            dx = uav_pos[i, 0] - ux
            dy = uav_pos[i, 1] - uy
            z = uav_pos[i, 2]
            d3d = sqrt(dx * dx + dy * dy + z * z)
            s = z / d3d
            if s > 1.0:
                s = 1.0
            elif s < -1.0:
                s = -1.0
            theta = RAD2DEG * asin(s)
            p_los = 1.0 / (1.0 + a * exp(-b * (theta - a)))
            loss = (20.0 * log10(d3d) + fspl_const
                    + p_los * eta_los + (1.0 - p_los) * eta_nlos)
            r = tx_dbm[i] + gains_db - loss
            if r > best_rssi:
                best_rssi = r
                best = i
            if d3d < min_user_dist[i]:
                min_user_dist[i] = d3d
        assoc[j] = best
        snr[j] = best_rssi - noise_dbm
        loads[best] += 1
        if snr[j] >= snr_req:
            covered[j] = 1
            served[best] += 1

    for j in range(m):
        k = <double> loads[assoc[j]]
        rates[j] = bandwidth / k * log2(1.0 + pow(10.0, snr[j] / 10.0))

    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            dx = uav_pos[i, 0] - uav_pos[j, 0]
            dy = uav_pos[i, 1] - uav_pos[j, 1]
            z = uav_pos[i, 2] - uav_pos[j, 2]
            d3d = sqrt(dx * dx + dy * dy + z * z)
            if d3d < d_min:
                collisions[i] += 1

    for i in range(n):
        dx = uav_pos[i, 0] - gbs_pos[0]
        dy = uav_pos[i, 1] - gbs_pos[1]
        z = uav_pos[i, 2] - gbs_pos[2]
        d3d = sqrt(dx * dx + dy * dy + z * z)
        loss = 20.0 * log10(d3d) + fspl_const + eta_los
        backhaul[i] = tx_dbm[i] + gains_db - loss - noise_dbm

    return (assoc, snr, rates, covered.view(np.bool_), loads, served,
            min_user_dist, collisions, backhaul)
