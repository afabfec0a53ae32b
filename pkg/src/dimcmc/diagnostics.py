"""Chain summaries: ESS, batch-means standard errors, HPD intervals.

Multivariate chains are summarized component-wise. The autocorrelation sum
in the ESS is truncated at the first non-positive lag, which keeps the
estimate deterministic and at most the sample count.
"""

import json
from dataclasses import dataclass, field

import numpy as np


def ess(samples) -> float:
    """N / (1 + 2 sum of leading positive autocorrelations)."""
    x = np.asarray(samples, dtype=np.float64).reshape(-1)
    n = len(x)
    if n < 10:
        raise ValueError("need at least 10 samples for an ESS estimate")
    x = x - x.mean()
    var = np.dot(x, x) / n
    if var == 0:
        raise ValueError("autocorrelation of a constant sequence is undefined")
    nfft = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(x, nfft)
    acov = np.fft.irfft(f * np.conj(f), nfft)[:n].real / n
    rho = acov / acov[0]
    total = 0.0
    for k in range(1, n):
        if rho[k] <= 0:
            break
        total += rho[k]
    return float(n / (1.0 + 2.0 * total))


def batch_means_mcse(samples) -> float:
    """Batch-means Monte Carlo standard error with sqrt(N) batches of sqrt(N)."""
    x = np.asarray(samples, dtype=np.float64).reshape(-1)
    n = len(x)
    if n < 100:
        raise ValueError("need at least 100 samples for batch means")
    b = int(np.floor(np.sqrt(n)))
    a = b
    means = x[: a * b].reshape(a, b).mean(axis=1)
    return float(means.std(ddof=1) / np.sqrt(a))


def hpd_interval(samples, level: float = 0.95):
    """Shortest contiguous interval of sorted samples holding ceil(level*N) points."""
    x = np.sort(np.asarray(samples, dtype=np.float64).reshape(-1))
    n = len(x)
    if n < 100:
        raise ValueError("need at least 100 samples for an HPD interval")
    if not (0.0 < level < 1.0):
        raise ValueError("level must lie in (0, 1)")
    w = min(int(np.ceil(level * n)), n)
    widths = x[w - 1 :] - x[: n - w + 1]
    k = int(np.argmin(widths))
    return float(x[k]), float(x[k + w - 1])


@dataclass
class ChainSummary:
    """Per-component posterior summaries plus run-level cost figures."""

    mean: list
    sd: list
    hpd: list
    ess: list
    mcse: list
    acceptance: float
    wall_time: float
    ess_per_sec: list
    algorithm: str = ""
    n_samples: int = 0
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "n_samples": self.n_samples,
            "mean": self.mean,
            "sd": self.sd,
            "hpd": self.hpd,
            "ess": self.ess,
            "mcse": self.mcse,
            "acceptance": self.acceptance,
            "wall_time": self.wall_time,
            "ess_per_sec": self.ess_per_sec,
            "meta": self.meta,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def csv_header(self) -> str:
        cols = []
        for k in range(len(self.mean)):
            p = f"theta_{k+1}"
            cols += [f"{p}_mean", f"{p}_sd", f"{p}_hpd_lo", f"{p}_hpd_hi",
                     f"{p}_ess", f"{p}_mcse"]
        return ",".join(["algorithm", "n_samples"] + cols
                        + ["acceptance", "wall_time", "min_ess_per_sec"])

    def csv_row(self) -> str:
        vals = [self.algorithm, str(self.n_samples)]
        for k in range(len(self.mean)):
            vals += [repr(self.mean[k]), repr(self.sd[k]),
                     repr(self.hpd[k][0]), repr(self.hpd[k][1]),
                     repr(self.ess[k]), repr(self.mcse[k])]
        vals += [repr(self.acceptance), repr(self.wall_time), repr(min(self.ess_per_sec))]
        return ",".join(vals)


def summarize(trace) -> ChainSummary:
    """Component-wise summary of a ChainTrace."""
    samples = np.atleast_2d(trace.samples)
    if samples.shape[0] == 0:
        raise ValueError("cannot summarize an empty trace")
    dim = samples.shape[1]
    means, sds, hpds, esss, mcses, rates = [], [], [], [], [], []
    for k in range(dim):
        x = samples[:, k]
        means.append(float(x.mean()))
        sds.append(float(x.std(ddof=1)) if len(x) > 1 else 0.0)
        hpds.append(hpd_interval(x))
        esss.append(ess(x))
        mcses.append(batch_means_mcse(x))
    wall = trace.wall_time
    return ChainSummary(
        mean=means, sd=sds, hpd=hpds, ess=esss, mcse=mcses,
        acceptance=trace.acceptance_rate, wall_time=wall,
        ess_per_sec=[e / wall if wall > 0 else float("inf") for e in esss],
        algorithm=trace.algorithm, n_samples=samples.shape[0],
        meta=dict(trace.meta),
    )
