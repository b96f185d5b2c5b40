"""Seeded image generators shared with tests/support/seeded.hpp (bit-compatible)."""
import math
import numpy as np

MASK = (1 << 64) - 1


def splitmix64(x):
    z = (x + 0x9E3779B97F4A7C15) & MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
    return z ^ (z >> 31)


def grid_noise(width, height, seed):
    """Pixel values k/255 with k = splitmix64(seed * 2^32 + idx) % 256."""
    out = np.zeros((height, width, 3))
    for r in range(height):
        for c in range(width):
            for ch in range(3):
                idx = (r * width + c) * 3 + ch
                out[r, c, ch] = (splitmix64(((seed << 32) + idx) & MASK) % 256) / 255.0
    return out


def blended_pair(width, height, seed):
    """(a, b) with b = (3*ka + kn) // 4 on the 8-bit grid."""
    a = np.zeros((height, width, 3))
    b = np.zeros((height, width, 3))
    for r in range(height):
        for c in range(width):
            for ch in range(3):
                idx = (r * width + c) * 3 + ch
                ka = splitmix64(((seed << 32) + idx) & MASK) % 256
                kn = splitmix64((((seed + 1) << 32) + idx) & MASK) % 256
                a[r, c, ch] = ka / 255.0
                b[r, c, ch] = ((3 * ka + kn) // 4) / 255.0
    return a, b


def normal(seed, idx):
    h1 = splitmix64(((seed << 32) + 2 * idx) & MASK)
    h2 = splitmix64(((seed << 32) + 2 * idx + 1) & MASK)
    u1 = ((h1 >> 11) + 1) * 2.0 ** -53
    u2 = (h2 >> 11) * 2.0 ** -53
    return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)


def gradient_image(width, height):
    out = np.zeros((height, width, 3))
    for r in range(height):
        for c in range(width):
            out[r, c, 0] = c / (width - 1)
            out[r, c, 1] = r / (height - 1)
            out[r, c, 2] = (r + c) / (width + height - 2)
    return out


def add_noise(img, sigma, seed):
    h, w, _ = img.shape
    out = img.copy()
    for r in range(h):
        for c in range(w):
            for ch in range(3):
                idx = (r * w + c) * 3 + ch
                out[r, c, ch] = min(1.0, max(0.0, img[r, c, ch] + sigma * normal(seed, idx)))
    return out
