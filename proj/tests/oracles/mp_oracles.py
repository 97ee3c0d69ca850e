"""Arbitrary-precision reference values: binary relative entropy and the
return-probability rates of a small LMG quench."""
import sys
import mpmath as mp

mp.mp.dps = 60


def binary_kl(p, q):
    p, q = mp.mpf(p), mp.mpf(q)
    return p * mp.log(p / q) + (1 - p) * mp.log((1 - p) / (1 - q))


def s_fine(x):
    # g is convex in r; bracket the root of its analytic derivative.
    x = mp.mpf(x)
    g = lambda r: binary_kl(r - x, r)

    def dg(r):
        p = r - x
        return mp.log(p / r) - mp.log((1 - p) / (1 - r)) - p / r + (1 - p) / (1 - r)

    lo, hi = x + (1 - x) * mp.mpf(10) ** -30, 1 - (1 - x) * mp.mpf(10) ** -30
    for _ in range(400):
        mid = (lo + hi) / 2
        if dg(mid) > 0:
            hi = mid
        else:
            lo = mid
    return (lo + hi) / 2, g


def lmg_block(twice_j, h, parity, gamma=mp.mpf(1) / 2):
    j = mp.mpf(twice_j) / 2
    ks = [k for k in range(twice_j + 1) if (k % 2 == 0) == (parity == 1)]
    n = len(ks)
    a = mp.zeros(n, n)
    cp = lambda m: mp.sqrt(j * (j + 1) - m * (m + 1))
    for i, k in enumerate(ks):
        m = k - j
        a[i, i] = -2 * h * m - (1 + gamma) * (j * (j + 1) - m * m) / (2 * j)
        if i + 1 < n:
            a[i, i + 1] = a[i + 1, i] = -(1 - gamma) / (4 * j) * cp(m) * cp(m + 1)
    return a


def sector_rates(twice_j, h0, hf, times):
    res = {}
    states = {}
    for par in (1, -1):
        e0, v0 = mp.eigsy(lmg_block(twice_j, mp.mpf(h0), par))
        i0 = min(range(len(e0)), key=lambda i: e0[i])
        states[par] = v0[:, i0]
    # even: largest component positive; odd: <even|J_x|odd> >= 0
    ev = states[1]
    if max(ev, key=abs) < 0:
        states[1] = -ev
    j = mp.mpf(twice_j) / 2
    jx = 0
    for k in range(twice_j):
        e = states[1][(k // 2) if k % 2 == 0 else (k + 1) // 2]
        o = states[-1][k // 2]
        jx += e * o * mp.sqrt((k + 1) * (twice_j - k)) / 2
    if jx < 0:
        states[-1] = -states[-1]
    for par in (1, -1):
        ef, vf = mp.eigsy(lmg_block(twice_j, mp.mpf(hf), par))
        w = [(vf[:, k].T * states[par])[0] ** 2 for k in range(len(ef))]
        res[par] = (w, ef)
    out = []
    for t in times:
        g = {p: mp.fsum(c * mp.expj(-e * t) for c, e in zip(*res[p])) for p in res}
        plus = abs(g[1] + g[-1]) / 2
        minus = abs(g[1] - g[-1]) / 2
        out.append((t, -2 * mp.log(plus) / twice_j, -2 * mp.log(minus) / twice_j))
    return out


if __name__ == "__main__":
    print("binary_kl(0.7,0.4)", mp.nstr(binary_kl("0.7", "0.4"), 25))
    r, g = s_fine("0.5")
    print("s(0.5)", mp.nstr(g(r), 25), "r*", mp.nstr(r, 25))
    r, g = s_fine("0.999")
    print("s(0.999)", mp.nstr(g(r), 25), "r*", mp.nstr(r, 25))
    for t, lp, lm in sector_rates(100, 0, "0.8", [mp.mpf(1), mp.mpf(2), mp.mpf("3.5"), mp.mpf("7.25")]):
        print("rates N=100 h=0.8 t=", mp.nstr(t, 5), mp.nstr(lp, 20), mp.nstr(lm, 20))
