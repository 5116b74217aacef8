"""Pure-Python/numpy fallback for the compiled kernels (same arithmetic, same order)."""
import math

import numpy as np


def ucbn_rounds(indptr, indices, means, sigma, noise, counts, sums, t0, arms):
    for r in range(noise.shape[0]):
        unseen = np.flatnonzero(counts == 0.0)
        if unseen.size:
            a = int(unseen[0])
        else:
            lt = math.log(t0 + r)
            a = int(np.argmax(sums / counts + np.sqrt(2.0 * lt / counts)))
        arms[r] = a
        nb = indices[indptr[a] : indptr[a + 1]]
        counts[nb] += 1.0
        sums[nb] += means[nb] + sigma * noise[r, nb]
