"""Dense-grid oracle for s(x): minimum of the binary relative entropy over
10^6 evenly spaced interior points r in (x, 1)."""
import numpy as np


def s_grid(x, points=1_000_000):
    k = np.arange(1, points + 1, dtype=np.float64)
    r = x + (1.0 - x) * k / (points + 1)
    p = r - x
    g = p * np.log(p / r) + (1.0 - p) * np.log((1.0 - p) / (1.0 - r))
    i = int(np.argmin(g))
    return g[i], r[i]


if __name__ == "__main__":
    for i in range(1, 10):
        x = i / 10
        s, r = s_grid(x)
        print(f"{x:.1f} {s:.17g} {r:.17g}")
