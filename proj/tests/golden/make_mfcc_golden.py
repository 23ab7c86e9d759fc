#!/usr/bin/env python3
"""Regenerates mfcc_vectors.txt with a numpy/scipy MFCC written from the
textbook definition (HTK mel scale, Hamming frames, orthonormal DCT-II).

Per vector:
  name
  pcm <16000 int16 samples>
  49 lines of 13 coefficients
"""
import sys

import numpy as np
from scipy.fft import dct

RATE = 16000
FRAME = 400
STRIDE = 320
NFFT = 512
NMEL = 32
NMFCC = 13
ALPHA = 0.98
FLOOR = 1e-10


def mel(hz):
    return 2595.0 * np.log10(1.0 + hz / 700.0)


def inv_mel(m):
    return 700.0 * (10.0 ** (m / 2595.0) - 1.0)


def filterbank():
    edges = inv_mel(np.linspace(mel(0.0), mel(RATE / 2), NMEL + 2))
    freqs = np.arange(NFFT // 2 + 1) * RATE / NFFT
    fb = np.zeros((NMEL, freqs.size))
    for m in range(NMEL):
        lo, c, hi = edges[m], edges[m + 1], edges[m + 2]
        up = (freqs > lo) & (freqs <= c)
        down = (freqs > c) & (freqs < hi)
        fb[m, up] = (freqs[up] - lo) / (c - lo)
        fb[m, down] = (hi - freqs[down]) / (hi - c)
    return fb


def mfcc(pcm):
    x = pcm.astype(np.float64) / 32768.0
    y = np.concatenate([[x[0]], x[1:] - ALPHA * x[:-1]])
    win = np.hamming(FRAME)
    fb = filterbank()
    n_frames = (RATE - FRAME) // STRIDE + 1
    out = []
    for r in range(n_frames):
        spec = np.abs(np.fft.rfft(y[r * STRIDE : r * STRIDE + FRAME] * win, NFFT)) ** 2
        out.append(dct(np.log(fb @ spec + FLOOR), type=2, norm="ortho")[:NMFCC])
    return np.array(out)


def vectors():
    t = np.arange(RATE) / RATE
    rng = np.random.default_rng(5)
    yield "two_tones", np.round(8000 * np.sin(2 * np.pi * 523 * t) + 3000 * np.sin(2 * np.pi * 1700 * t)).astype(np.int16)
    yield "noise", rng.integers(-6000, 6000, RATE).astype(np.int16)
    burst = np.zeros(RATE)
    burst[4000:9000] = 12000 * np.sin(2 * np.pi * 300 * t[4000:9000]) * np.hanning(5000)
    yield "burst", np.round(burst).astype(np.int16)


def main(path):
    with open(path, "w") as out:
        for name, pcm in vectors():
            out.write(name + "\n")
            out.write(" ".join(map(str, pcm.tolist())) + "\n")
            for row in mfcc(pcm):
                out.write(" ".join("%.6f" % v for v in row) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "mfcc_vectors.txt")
