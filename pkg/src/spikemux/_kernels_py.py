"""Pure-Python (numpy) implementations of the per-neuron sweep kernels.

Fallback backend when the compiled extension is unavailable. Must match
`_kernels_cy` and the scalar routines in `fxp`/`decay`/`neuron` bit for bit.
All state arrays are int64 and are mutated in place.
"""

import numpy as np


def decay_array(values, raw):
    """In-place shift-and-add decay of every element."""
    if raw & 0x100:
        return
    k = raw & 0xFF
    mag = np.abs(values)
    acc = np.zeros_like(values)
    for s in range(1, 9):
        if (k >> (8 - s)) & 1:
            acc += mag >> s
    np.copyto(values, np.where(values < 0, -acc, acc))


def add_column(state, weights, lo, hi):
    """Saturating elementwise accumulate of one weight column."""
    np.copyto(state, np.clip(state + weights, lo, hi))


def add_at(state, index, delta, lo, hi):
    """Saturating accumulate into a single element."""
    s = int(state[index]) + delta
    state[index] = hi if s > hi else (lo if s < lo else s)


def leak_fire_lif(membrane, threshold, beta_raw, reset_code, lo, hi):
    """Leak/spike sweep for the IF/LIF datapath.

    Fired neurons reset (to zero or by threshold subtraction); the rest decay.
    Returns the fired indices in ascending order.
    """
    fired = membrane >= threshold
    if reset_code == 0:
        reset_vals = np.zeros_like(membrane)
    else:
        reset_vals = np.clip(membrane - threshold, lo, hi)
    decayed = membrane.copy()
    decay_array(decayed, beta_raw)
    np.copyto(membrane, np.where(fired, reset_vals, decayed))
    return np.nonzero(fired)[0].tolist()


def leak_fire_syn(membrane, syn, threshold, beta_raw, alpha_raw, reset_code, lo, hi):
    """Leak/spike sweep for the synaptic datapath.

    The decayed membrane absorbs the post-integration current before the
    threshold test; the current then decays unconditionally.
    """
    decayed = membrane.copy()
    decay_array(decayed, beta_raw)
    pre = np.clip(decayed + syn, lo, hi)
    fired = pre >= threshold
    if reset_code == 0:
        reset_vals = np.zeros_like(pre)
    else:
        reset_vals = np.clip(pre - threshold, lo, hi)
    np.copyto(membrane, np.where(fired, reset_vals, pre))
    decay_array(syn, alpha_raw)
    return np.nonzero(fired)[0].tolist()
