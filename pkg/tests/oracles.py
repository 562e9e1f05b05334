"""Independent brute-force recomputations used to check the real implementations.

Everything here is deliberately written the slow, obvious way (plain loops,
the statistics module) and shares no code with the package under test.
"""

from __future__ import annotations

import math
import statistics


def brute_fuse(modules, weights, codes):
    """Linear opinion pool recomputed with plain loops.

    ``modules``: list of (module_id, scores dict, abstained flag).
    ``weights``: dict module_id -> weight. Returns dict code -> fused score.
    """
    active = [(mid, scores) for mid, scores, abstained in modules if not abstained]
    if not active:
        return {code: 1.0 / len(codes) for code in codes}
    total = sum(weights[mid] for mid, _ in active)
    if total > 0:
        effective = {mid: weights[mid] / total for mid, _ in active}
    else:
        effective = {mid: 1.0 / len(active) for mid, _ in active}
    fused = {}
    for code in codes:
        value = 0.0
        for mid, scores in active:
            value += effective[mid] * scores.get(code, 0.0)
        fused[code] = value
    return fused


def brute_rank_stats(ranks):
    """(mean, sample std, median, top1 count) via the statistics module."""
    mean = statistics.fmean(ranks)
    std = statistics.stdev(ranks) if len(ranks) > 1 else 0.0
    median = float(statistics.median(ranks))
    top1 = sum(1 for r in ranks if r == 1)
    return mean, std, median, top1


def brute_histogram(pixels):
    """Per-channel frequency bins counted pixel by pixel. Returns 3x256 lists."""
    h = len(pixels)
    w = len(pixels[0])
    bins = [[0.0] * 256 for _ in range(3)]
    for row in pixels:
        for px in row:
            for c in range(3):
                bins[c][int(px[c])] += 1.0
    n = h * w
    return [[v / n for v in channel] for channel in bins]


def brute_histogram_mean(histograms):
    """Position-wise mean of 3x256 bin grids."""
    k = len(histograms)
    out = [[0.0] * 256 for _ in range(3)]
    for hist in histograms:
        for c in range(3):
            for b in range(256):
                out[c][b] += float(hist[c][b])
    return [[v / k for v in channel] for channel in out]


def brute_color_distance(bins_a, bins_b):
    """Mean absolute difference over all 3x256 positions."""
    total = 0.0
    for c in range(3):
        for b in range(256):
            total += abs(float(bins_a[c][b]) - float(bins_b[c][b]))
    return total / (3 * 256)


def brute_cosine(a, b):
    terms = set(a) | set(b)
    dot = sum(a.get(t, 0.0) * b.get(t, 0.0) for t in terms)
    norm_a = math.sqrt(sum(v * v for v in a.values()))
    norm_b = math.sqrt(sum(v * v for v in b.values()))
    if norm_a == 0.0 or norm_b == 0.0:
        return 0.0
    return dot / (norm_a * norm_b)


def brute_avg_freq(docs):
    """Average occurrences per document for every term seen in any doc."""
    terms = set()
    for doc in docs:
        terms.update(doc)
    return {t: sum(doc.get(t, 0) for doc in docs) / len(docs) for t in terms}
