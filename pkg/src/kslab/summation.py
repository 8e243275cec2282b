"""Compensated summation helpers.

Sums are accumulated block-wise: numpy's pairwise summation inside blocks of
``BLOCK`` terms, Neumaier's error-free transformation across blocks. Real and
imaginary parts are compensated independently.
"""

import numpy as np

BLOCK = 128


def _neumaier_real(x):
    # x has shape (..., n); compensation runs along the last axis
    n = x.shape[-1]
    s = np.zeros(x.shape[:-1])
    comp = np.zeros(x.shape[:-1])
    for start in range(0, n, BLOCK):
        part = x[..., start:start + BLOCK].sum(axis=-1)
        t = s + part
        big = np.abs(s) >= np.abs(part)
        comp += np.where(big, (s - t) + part, (part - t) + s)
        s = t
    return s + comp


def compensated_sum(terms, axis=-1):
    """Sum ``terms`` along ``axis`` with compensation; complex input is supported."""
    terms = np.moveaxis(np.asarray(terms), axis, -1)
    if terms.shape[-1] == 0:
        return np.zeros(terms.shape[:-1], dtype=terms.dtype)
    if np.iscomplexobj(terms):
        return _neumaier_real(terms.real) + 1j * _neumaier_real(terms.imag)
    return _neumaier_real(terms)
