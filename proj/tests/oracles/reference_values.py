"""Independent reference computations whose outputs are frozen into the C++ tests.

Run: python3 reference_values.py
"""
import numpy as np
from scipy.signal import correlate2d
from skimage.color import rgb2lab
from skimage.metrics import structural_similarity

import seeded

np.set_printoptions(precision=17)

# --- colorimetry ---------------------------------------------------------
gray = np.full((1, 1, 3), 0.5)
print("skimage L*(0.5 gray) =", repr(rgb2lab(gray)[0, 0, 0]))


def srgb_decode(v):
    return np.where(v <= 0.04045, v / 12.92, ((v + 0.055) / 1.055) ** 2.4)


M = np.array([[0.4124564, 0.3575761, 0.1804375],
              [0.2126729, 0.7151522, 0.0721750],
              [0.0193339, 0.1191920, 0.9503041]])
WHITE = M.sum(axis=1)


def lab_f(t):
    d = 6.0 / 29.0
    return np.where(t > d ** 3, np.cbrt(t), t / (3 * d * d) + 4.0 / 29.0)


def l_channel(img):
    lin = srgb_decode(np.clip(img, 0, 1))
    xyz = lin @ M.T
    fy = lab_f(xyz[..., 1] / WHITE[1])
    return 116.0 * fy - 16.0


print("own-constants L*(0.5 gray) =", repr(l_channel(gray)[0, 0]))

# --- SSIM on a seeded 64x64 pair ------------------------------------------
a, b = seeded.blended_pair(64, 64, 11)
s = structural_similarity(a, b, channel_axis=2, gaussian_weights=True, sigma=1.5,
                          use_sample_covariance=False, data_range=1.0)
print("skimage SSIM(blended_pair(64,64,11)) =", repr(s))


# --- MS-SSIM on the L channel --------------------------------------------
def gaussian_window(size=11, sigma=1.5):
    r = np.arange(size) - (size - 1) / 2.0
    g = np.exp(-(r ** 2) / (2 * sigma ** 2))
    g /= g.sum()
    return np.outer(g, g)


def ssim_stats(x, y, win, c1, c2):
    mu_x = correlate2d(x, win, mode="valid")
    mu_y = correlate2d(y, win, mode="valid")
    sxx = correlate2d(x * x, win, mode="valid") - mu_x ** 2
    syy = correlate2d(y * y, win, mode="valid") - mu_y ** 2
    sxy = correlate2d(x * y, win, mode="valid") - mu_x * mu_y
    lum = (2 * mu_x * mu_y + c1) / (mu_x ** 2 + mu_y ** 2 + c1)
    cs = (2 * sxy + c2) / (sxx + syy + c2)
    return (lum * cs).mean(), cs.mean()


def pool2(x):
    h, w = x.shape[0] // 2 * 2, x.shape[1] // 2 * 2
    x = x[:h, :w]
    return 0.25 * (x[0::2, 0::2] + x[1::2, 0::2] + x[0::2, 1::2] + x[1::2, 1::2])


def msssim(x, y, scales):
    w = np.array([0.0448, 0.2856, 0.3001, 0.2363, 0.1333])[:scales]
    w = w / w.sum()
    win = gaussian_window()
    c1, c2 = (0.01 * 100) ** 2, (0.03 * 100) ** 2
    val = 1.0
    for j in range(scales):
        ssim_j, cs_j = ssim_stats(x, y, win, c1, c2)
        val *= (ssim_j if j == scales - 1 else max(cs_j, 0.0)) ** w[j]
        x, y = pool2(x), pool2(y)
    return val


target = seeded.gradient_image(128, 128)
pred = seeded.add_noise(target, 0.01, 5)
print("MS-SSIM_L(noisy gradient 128x128, 4 scales) =",
      repr(msssim(l_channel(pred), l_channel(target), 4)))

# --- Adam scalar trace: f = (t-2)^2 from t=0, lr 0.1 ------------------------
t, m, v = 0.0, 0.0, 0.0
trace = []
for k in range(1, 6):
    g = 2 * (t - 2)
    m = 0.9 * m + 0.1 * g
    v = 0.999 * v + 0.001 * g * g
    mh, vh = m / (1 - 0.9 ** k), v / (1 - 0.999 ** k)
    t = t - 0.1 * mh / (np.sqrt(vh) + 1e-8)
    trace.append(t)
print("adam trace =", [repr(x) for x in trace])
