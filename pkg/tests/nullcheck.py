"""Delete-a-block jackknife for psi(r) flatness under a null model.

Bin means of psi share minutes across many pairs and neighbouring minutes are
serially dependent, so ``sd / sqrt(pairs)`` understates the error badly. The
jackknife over contiguous time blocks accounts for both.
"""

import numpy as np

from trendscale.stats import AlignedSample, build_tuple_index, similarity_histogram


def psi_deviation(sample):
    """psi(r) minus the global pair mean, with NaN for empty bins."""
    h = similarity_histogram(build_tuple_index(sample))
    pairs = np.array(h.pairs, dtype=float)
    nums = np.array(h.numerators, dtype=float)
    with np.errstate(invalid="ignore", divide="ignore"):
        return nums / pairs - nums.sum() / pairs.sum(), pairs


def flatness_z(sample, blocks=20):
    """z-score of every psi bin's deviation from the global mean."""
    full, pairs = psi_deviation(sample)
    edges = np.linspace(0, len(sample), blocks + 1).astype(int)
    reps = []
    for b in range(blocks):
        keep = np.r_[0 : edges[b], edges[b + 1] : len(sample)]
        sub = AlignedSample(sample.t_values[keep], sample.words[keep], sample.shifts[keep], sample.width)
        reps.append(psi_deviation(sub)[0])
    reps = np.array(reps)
    se = np.sqrt((blocks - 1) / blocks * ((reps - reps.mean(axis=0)) ** 2).sum(axis=0))
    with np.errstate(invalid="ignore", divide="ignore"):
        z = full / se
    return z, pairs
