"""Maximum bin load when n balls fall uniformly into k bins."""

from dataclasses import dataclass
import math

import numpy as np

from .. import _accel


@dataclass(frozen=True)
class TailCheck:
    event: str
    frequency: float
    bound: float
    se: float
    passed: bool


@dataclass(frozen=True)
class OccupancyStats:
    n: int
    k: int
    max_loads: np.ndarray
    bin_means: np.ndarray  # average load of every bin over the trials

    @property
    def trials(self):
        return self.max_loads.size

    def tail_frequency(self, threshold):
        return float(np.mean(self.max_loads >= threshold))

    def _check(self, event, threshold, bound):
        freq = self.tail_frequency(threshold)
        se = math.sqrt(freq * (1 - freq) / self.trials)
        return TailCheck(event, freq, bound, se, freq <= bound + 3 * se)

    def check_few_balls(self, c):
        """P[max >= c + 1] <= k e^{-c/2}, stated for k >= n."""
        if self.k < self.n:
            raise ValueError("this bound needs k >= n")
        return self._check(f"max >= {c + 1}", c + 1, self.k * math.exp(-c / 2))

    def check_many_balls(self, c):
        """P[max >= c n / k] <= k e^{-c n / (8k)}, stated for n >= k."""
        if self.n < self.k:
            raise ValueError("this bound needs n >= k")
        return self._check(
            f"max >= {c}n/k", c * self.n / self.k, self.k * math.exp(-c * self.n / (8 * self.k))
        )

    def checks(self, cs=(10, 20)):
        """Every bound that applies to (n, k), for each c."""
        out = []
        for c in cs:
            if self.k >= self.n:
                out.append(self.check_few_balls(c))
            if self.n >= self.k:
                out.append(self.check_many_balls(c))
        return out

    def mean_load_ok(self, sigmas=4.0):
        """Every bin's average load equals n/k within ``sigmas`` binomial standard errors."""
        p = 1.0 / self.k
        se = math.sqrt(self.n * p * (1 - p) / self.trials)
        if se == 0:
            return bool(np.allclose(self.bin_means, self.n / self.k))
        return bool(np.all(np.abs(self.bin_means - self.n / self.k) <= sigmas * se))


def balls_bins_sim(n, k, trials, rng):
    if n < 1 or k < 1:
        raise ValueError("n and k must be positive")
    balls = rng.integers(0, k, size=(trials, n))
    loads = np.zeros(k)
    # bin totals across all trials, for the mean-load check
    np.add.at(loads, balls.ravel(), 1.0)
    return OccupancyStats(n, k, _accel.max_load(balls, k), loads / trials)
