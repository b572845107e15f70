"""Time-indexed ensemble statistics shared by the simulation drivers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class EnsembleSeries:
    """Mean and standard error of one observable over realizations.

    ``stderr`` is the sample standard deviation over realizations
    divided by sqrt(n); ``n`` is the same for every row.
    """

    name: str
    times: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    n: int
    metadata: dict = field(default_factory=dict)

    @classmethod
    def from_samples(cls, name, times, samples, metadata=None):
        """Build from a (realizations, len(times)) sample matrix."""
        samples = np.asarray(samples, dtype=float)
        times = np.asarray(times, dtype=float)
        if samples.ndim != 2 or samples.shape[1] != times.size:
            raise ValueError("samples must be (realizations, len(times))")
        n = samples.shape[0]
        mean = samples.mean(axis=0)
        if n > 1:
            stderr = samples.std(axis=0, ddof=1) / np.sqrt(n)
        else:
            stderr = np.zeros_like(mean)
        return cls(name=name, times=times, mean=mean, stderr=stderr, n=n,
                   metadata=dict(metadata or {}))

    def to_rows(self) -> list[dict]:
        return [{"t": float(t), "mean": float(m), "stderr": float(s),
                 "n": self.n, "observable": self.name}
                for t, m, s in zip(self.times, self.mean, self.stderr)]
