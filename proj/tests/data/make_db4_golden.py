"""Regenerates db4_golden.csv with numpy and PyWavelets.

Taps come from pywt; the single-level transform is computed with numpy
(half-point symmetric padding, full convolution, even output indices), and
the highpass is built as (-1)^k * lowpass[L-1-k].
"""
import numpy as np
import pywt

lo = np.array(pywt.Wavelet("db4").dec_lo)
L = len(lo)
hi = np.array([(-1) ** k * lo[L - 1 - k] for k in range(L)])

i = np.arange(32, dtype=float)
x = 0.25 * i + np.sin(0.7 * i)
pad = np.pad(x, (L - 1, L - 1), mode="symmetric")
# valid convolution of the padded signal gives c[m] = sum_k h[k] x[m - k]
# for m = 0 .. N + L - 2; keep even m
full_lo = np.convolve(pad, lo, mode="valid")
full_hi = np.convolve(pad, hi, mode="valid")
approx = full_lo[0::2]
detail = full_hi[0::2]
assert len(approx) == (len(x) + L) // 2

with open("db4_golden.csv", "w") as f:
    f.write("kind,index,value\n")
    for kind, v in (("lowpass", lo), ("highpass", hi), ("signal", x), ("approx", approx), ("detail", detail)):
        for k, val in enumerate(v):
            f.write(f"{kind},{k},{float(val)!r}\n")
