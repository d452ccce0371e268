# cython: boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled twins of the sweep kernels in `_kernels_py`.

Same contracts, same bit-exact results; only faster. State arrays are int64,
mutated in place.
"""

import numpy as np
cimport numpy as cnp


cdef inline cnp.int64_t _decay_one(cnp.int64_t v, int k) nogil:
    cdef cnp.int64_t mag = -v if v < 0 else v
    cdef cnp.int64_t acc = 0
    cdef int s
    for s in range(1, 9):
        if (k >> (8 - s)) & 1:
            acc += mag >> s
    return -acc if v < 0 else acc


def decay_array(cnp.int64_t[::1] values, int raw):
    cdef Py_ssize_t i, n = values.shape[0]
    cdef int k = raw & 0xFF
    if raw & 0x100:
        return
    for i in range(n):
        values[i] = _decay_one(values[i], k)


def add_column(cnp.int64_t[::1] state, cnp.int64_t[::1] weights,
               cnp.int64_t lo, cnp.int64_t hi):
    cdef Py_ssize_t i, n = state.shape[0]
    cdef cnp.int64_t s
    for i in range(n):
        s = state[i] + weights[i]
        state[i] = hi if s > hi else (lo if s < lo else s)


def add_at(cnp.int64_t[::1] state, Py_ssize_t index, cnp.int64_t delta,
           cnp.int64_t lo, cnp.int64_t hi):
    cdef cnp.int64_t s = state[index] + delta
    state[index] = hi if s > hi else (lo if s < lo else s)


def leak_fire_lif(cnp.int64_t[::1] membrane, cnp.int64_t threshold, int beta_raw,
                  int reset_code, cnp.int64_t lo, cnp.int64_t hi):
    cdef Py_ssize_t i, n = membrane.shape[0]
    cdef cnp.int64_t m
    cdef int bypass = beta_raw & 0x100
    cdef int k = beta_raw & 0xFF
    fired = []
    for i in range(n):
        m = membrane[i]
        if m >= threshold:
            fired.append(i)
            if reset_code == 0:
                membrane[i] = 0
            else:
                m = m - threshold
                membrane[i] = hi if m > hi else (lo if m < lo else m)
        elif not bypass:
            membrane[i] = _decay_one(m, k)
    return fired


def leak_fire_syn(cnp.int64_t[::1] membrane, cnp.int64_t[::1] syn,
                  cnp.int64_t threshold, int beta_raw, int alpha_raw,
                  int reset_code, cnp.int64_t lo, cnp.int64_t hi):
    cdef Py_ssize_t i, n = membrane.shape[0]
    cdef cnp.int64_t m
    cdef int beta_bypass = beta_raw & 0x100
    cdef int alpha_bypass = alpha_raw & 0x100
    cdef int bk = beta_raw & 0xFF
    cdef int ak = alpha_raw & 0xFF
    fired = []
    for i in range(n):
        m = membrane[i] if beta_bypass else _decay_one(membrane[i], bk)
        m = m + syn[i]
        m = hi if m > hi else (lo if m < lo else m)
        if m >= threshold:
            fired.append(i)
            if reset_code == 0:
                m = 0
            else:
                m = m - threshold
                m = hi if m > hi else (lo if m < lo else m)
        membrane[i] = m
        if not alpha_bypass:
            syn[i] = _decay_one(syn[i], ak)
    return fired
