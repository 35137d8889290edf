"""Independent brute-force oracles the test suite checks the fast paths against."""

from itertools import combinations, permutations, product

import numpy as np


def signflip_p_paired(x, y):
    """Exhaustive sign-flip permutation p for the paired t (n <= 14)."""
    d = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    n = d.size
    signs = np.array(list(product([1.0, -1.0], repeat=n)))
    flipped = signs * d
    means = flipped.mean(axis=1)
    sds = flipped.std(axis=1, ddof=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        ts = means / (sds / np.sqrt(n))
    t_obs = d.mean() / (d.std(ddof=1) / np.sqrt(n))
    ts = np.where(np.isfinite(ts), ts, np.inf * np.sign(means))
    return float(np.mean(np.abs(ts) >= abs(t_obs) - 1e-12))


def relabel_p_independent(a, b):
    """Exhaustive two-sample relabeling p for pooled-variance t."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    pooled = np.concatenate([a, b])
    na = a.size
    idx_all = range(pooled.size)

    def t_stat(ia):
        ia = np.asarray(ia)
        mask = np.zeros(pooled.size, dtype=bool)
        mask[ia] = True
        x, y = pooled[mask], pooled[~mask]
        sp2 = ((x.size - 1) * x.var(ddof=1) + (y.size - 1) * y.var(ddof=1)) / (
            x.size + y.size - 2
        )
        if sp2 == 0:
            return 0.0
        return (x.mean() - y.mean()) / np.sqrt(sp2 * (1 / x.size + 1 / y.size))

    t_obs = abs(t_stat(list(range(na))))
    hits = total = 0
    for ia in combinations(idx_all, na):
        total += 1
        if abs(t_stat(ia)) >= t_obs - 1e-12:
            hits += 1
    return hits / total


def _kw_h(pooled_ranks, sizes):
    n = pooled_ranks.size
    h = 0.0
    off = 0
    for s in sizes:
        r = pooled_ranks[off : off + s]
        h += s * (r.mean() - (n + 1) / 2.0) ** 2
        off += s
    return h * 12.0 / (n * (n + 1))


def permutation_p_kruskal(groups):
    """Exhaustive partition-enumeration p for Kruskal-Wallis.

    H depends only on which ranks land in which group, so the exact null
    enumerates the multinomial partitions (not all orderings).
    """
    arrays = [np.asarray(g, dtype=float) for g in groups]
    sizes = [a.size for a in arrays]
    pooled = np.concatenate(arrays)
    order = np.argsort(pooled, kind="stable")
    ranks = np.empty(pooled.size)
    ranks[order] = np.arange(1, pooled.size + 1, dtype=float)
    sv = pooled[order]
    i = 0
    while i < pooled.size:
        j = i
        while j + 1 < pooled.size and sv[j + 1] == sv[i]:
            j += 1
        if j > i:
            ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1

    h_obs = _kw_h(ranks, sizes)
    n = pooled.size
    const = 12.0 / (n * (n + 1))
    center = (n + 1) / 2.0
    hits = total = 0

    def recurse(avail: tuple, g: int, acc: float):
        nonlocal hits, total
        if g == len(sizes) - 1:
            mean_last = sum(ranks[i] for i in avail) / sizes[-1]
            h = const * (acc + sizes[-1] * (mean_last - center) ** 2)
            total += 1
            if h >= h_obs - 1e-12:
                hits += 1
            return
        for combo in combinations(avail, sizes[g]):
            mean_g = sum(ranks[i] for i in combo) / sizes[g]
            rest = tuple(i for i in avail if i not in set(combo))
            recurse(rest, g + 1, acc + sizes[g] * (mean_g - center) ** 2)

    recurse(tuple(range(n)), 0, 0.0)
    return hits / total


def rm_anova_brute_ss(matrix):
    """F from an explicitly looped sums-of-squares decomposition."""
    x = np.asarray(matrix, dtype=float)
    n, p = x.shape
    grand = x.sum() / (n * p)
    subj_means = [x[i].sum() / p for i in range(n)]
    cond_means = [x[:, j].sum() / n for j in range(p)]
    ss_cond = sum(n * (cm - grand) ** 2 for cm in cond_means)
    ss_err = 0.0
    for i in range(n):
        for j in range(p):
            resid = x[i, j] - subj_means[i] - cond_means[j] + grand
            ss_err += resid * resid
    df_c, df_e = p - 1, (p - 1) * (n - 1)
    return (ss_cond / df_c) / (ss_err / df_e)


def rm_anova_permutation_p(matrix):
    """Exact within-subject permutation p for the RM-ANOVA F (small cases)."""
    x = np.asarray(matrix, dtype=float)
    n, p = x.shape
    f_obs = rm_anova_brute_ss(x)
    perms = list(permutations(range(p)))
    hits = total = 0
    for combo in product(perms, repeat=n):
        total += 1
        xp = np.vstack([x[i, list(combo[i])] for i in range(n)])
        if rm_anova_brute_ss(xp) >= f_obs - 1e-12:
            hits += 1
    return hits / total


def auc_pair_counting(y_true, scores):
    """Brute-force AUC: fraction of (pos, neg) pairs ranked correctly (ties 0.5)."""
    y_true = np.asarray(y_true)
    scores = np.asarray(scores, dtype=float)
    pos = scores[y_true == 1]
    neg = scores[y_true == 0]
    total = wins = 0.0
    for sp in pos:
        for sn in neg:
            total += 1
            if sp > sn:
                wins += 1
            elif sp == sn:
                wins += 0.5
    return wins / total


def exact_shapley_interventional(predict, x, background, d):
    """Full coalition enumeration against a background set (d <= 10)."""
    from itertools import combinations as combos
    from math import factorial

    cache = {}

    def v_of(S):
        if S in cache:
            return cache[S]
        Xq = background.copy()
        for f in S:
            Xq[:, f] = x[f]
        out = float(predict(Xq).mean())
        cache[S] = out
        return out

    phi = np.zeros(d)
    for i in range(d):
        others = [f for f in range(d) if f != i]
        for k in range(d):
            for S in combos(others, k):
                w = factorial(k) * factorial(d - k - 1) / factorial(d)
                phi[i] += w * (v_of(tuple(sorted(S + (i,)))) - v_of(S))
    return phi
