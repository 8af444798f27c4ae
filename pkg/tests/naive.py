"""Slow reference implementations recomputed from scratch at every epoch.

Plain Python over lists, 1-based epoch arithmetic, no numpy and no shared
code with the package. ``None`` marks an undefined value.
"""

import math


def optimal_error(val, e):
    return min(val[:e])


def gl(val, e):
    op = optimal_error(val, e)
    if op <= 0:
        return None
    return 100.0 * (val[e - 1] / op - 1.0)


def p(train, e, k, scale=100.0):
    if e < k:
        return None
    strip = [train[i - 1] for i in range(e - k + 1, e + 1)]
    low = min(strip)
    if low <= 0:
        return None
    return max(0.0, scale * (math.fsum(strip) / (k * low) - 1.0))


def pq(train, val, e, k, eps=1e-9):
    g = gl(val, e)
    q = p(train, e, k)
    if g is None or q is None or q <= eps:
        return None
    return g / q


def up(val, e, s, k):
    if e - s * k < 1:
        return None
    if s == 1:
        return val[e - 1] > val[e - k - 1]
    return up(val, e - k, s - 1, k) and val[e - 1] > val[e - k - 1]


def hnr(train, e, k):
    if e - k - 2 < 1:
        return None
    num = []
    den = []
    for eh in range(e - 1, e - k - 1, -1):
        num.append(train[eh - 1] - 2 * train[eh - 2] + train[eh - 3])
        den.append(train[eh - 1])
    d = math.fsum(den)
    if d == 0:
        return None
    return math.fsum(num) / d


def og(train, val, e):
    gaps = [abs(train[i] - val[i]) for i in range(e)]
    return abs(gaps[-1]) - abs(min(gaps))


def oracle(val, h):
    best = None
    for e in range(1, h + 1):
        if best is None or val[e - 1] < val[best - 1]:
            best = e
    return best


def pearson(x, y):
    n = len(x)
    mx = math.fsum(x) / n
    my = math.fsum(y) / n
    sxy = math.fsum((a - mx) * (b - my) for a, b in zip(x, y))
    sxx = math.fsum((a - mx) ** 2 for a in x)
    syy = math.fsum((b - my) ** 2 for b in y)
    if sxx == 0 or syy == 0:
        return None
    return sxy / math.sqrt(sxx * syy)


def close(a, b, rel=1e-9, abs_tol=1e-12):
    if a is None or b is None:
        return a is None and b is None
    return math.isclose(a, b, rel_tol=rel, abs_tol=abs_tol)
