"""Independent pure-Python reference computations used by the tests."""


def msr_oracle(values, genes, conds, times):
    """Three-way mean square residue by explicit loops over nested lists."""
    v = values.tolist() if hasattr(values, "tolist") else values
    n_g, n_c, n_t = len(genes), len(conds), len(times)
    n = n_g * n_c * n_t

    total = 0.0
    for g in genes:
        for c in conds:
            for t in times:
                total += v[g][c][t]
    overall = total / n

    gene_mean = {}
    for g in genes:
        s = 0.0
        for c in conds:
            for t in times:
                s += v[g][c][t]
        gene_mean[g] = s / (n_c * n_t)
    cond_mean = {}
    for c in conds:
        s = 0.0
        for g in genes:
            for t in times:
                s += v[g][c][t]
        cond_mean[c] = s / (n_g * n_t)
    time_mean = {}
    for t in times:
        s = 0.0
        for g in genes:
            for c in conds:
                s += v[g][c][t]
        time_mean[t] = s / (n_g * n_c)

    ss = 0.0
    for g in genes:
        for c in conds:
            for t in times:
                r = v[g][c][t] - gene_mean[g] - cond_mean[c] - time_mean[t] + 2 * overall
                ss += r * r
    return ss / n


def weights_oracle(n_genes, n_conds, n_times, cfg):
    return n_genes * cfg.w_g + n_conds * cfg.w_c + n_times * cfg.w_t


def distinction_oracle(genes, conds, times, found_lists, cfg):
    """``found_lists`` holds (genes, conds, times) index lists of earlier hits."""
    used = [set(), set(), set()]
    for member in found_lists:
        for axis, idx in enumerate(member):
            used[axis].update(idx)
    terms = []
    for axis, (idx, w) in enumerate(zip((genes, conds, times),
                                        (cfg.wd_g, cfg.wd_c, cfg.wd_t))):
        novel = sum(1 for i in idx if i not in used[axis])
        terms.append(novel / len(idx) * w)
    return terms[0] + terms[1] + terms[2]


def nonempty_subsets(n):
    """All non-empty subsets of range(n) as sorted lists."""
    return [[i for i in range(n) if mask >> i & 1] for mask in range(1, 1 << n)]
