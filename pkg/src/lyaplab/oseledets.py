"""The cocycle engine: QR-reorthonormalized holonomy products driven by
geodesic codings, averaged over random geodesics into a Lyapunov spectrum.

Normalization: internally everything is a growth rate per unit curvature -1
arc length; the 'minus4' reporting convention multiplies by 2 (the metric
of curvature -4 halves lengths), which puts the uniformizing rank-2
representation at lambda_1 = 1.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .fuchsian import iter_crossings
from .hypgeo import HPoint, UnitTangent

FRAME_OVERFLOW = 1e120


class NumericCocycleError(ArithmeticError):
    def __init__(self, msg, step=None):
        super().__init__(msg)
        self.step = step


class InsufficientDataError(RuntimeError):
    pass


@dataclass(frozen=True)
class RunConfig:
    T: float
    samples: int
    seed: int
    qr_interval: int = 8
    normalization: str = "minus4"
    random_base: bool = False
    burn_in: float = None  # None: min(50, T/10); frame-alignment transient

    def __post_init__(self):
        if self.T <= 0:
            raise ValueError("T must be positive")
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if self.qr_interval < 1:
            raise ValueError("qr_interval must be >= 1")
        if self.normalization not in ("minus4", "minus1"):
            raise ValueError("normalization must be minus4|minus1")
        if self.burn_in is None:
            object.__setattr__(self, "burn_in", min(50.0, self.T / 10.0))
        if not 0 <= self.burn_in < self.T:
            raise ValueError("burn_in must lie in [0, T)")


class CocycleAccumulator:
    """Orthonormal frame + accumulated log R diagonals.

    advance() multiplies a holonomy matrix onto the frame; every
    qr_interval steps (or on overflow risk) the frame is re-orthonormalized
    by a positive-diagonal QR and the log of the diagonal accumulates.
    """

    def __init__(self, n, complex_field=False, qr_interval=8):
        self.frame = np.eye(n, dtype=complex if complex_field else float)
        self.log_diag = np.zeros(n)
        self.steps = 0
        self.elapsed_length = 0.0
        self.qr_interval = qr_interval
        self._pending = 0

    def advance(self, m):
        self.frame = m @ self.frame
        self.steps += 1
        self._pending += 1
        if self._pending >= self.qr_interval or \
                np.abs(self.frame).max() > FRAME_OVERFLOW:
            self.flush()
        return self

    def flush(self):
        if self._pending == 0:
            return
        q, r = np.linalg.qr(self.frame)
        d = np.abs(np.diagonal(r))
        if not np.all(np.isfinite(d)) or np.any(d == 0.0):
            raise NumericCocycleError("cocycle frame degenerated", step=self.steps)
        ph = np.diagonal(r) / d
        self.frame = q * ph  # positive-diagonal convention
        self.log_diag += np.log(d)
        self._pending = 0

    def finalize(self):
        self.flush()
        return self.log_diag.copy()


def advance(acc, m):
    """Functional alias for CocycleAccumulator.advance."""
    return acc.advance(m)


def run_sample(dom, rep, ut, T, qr_interval=8, normalization="minus4",
               burn_in=0.0):
    """Exponent vector (sorted nonincreasing) from one geodesic of length T.

    Between crossings the constant norm is flat, so the cocycle is exactly
    the product of the crossing holonomies; the rate divides by flow time.
    A positive burn_in discards the log increments before that time, where
    the frame is still aligning to the Oseledets flag (an O(1/T) bias of
    the plain time average); sums and the zero-sum law are unaffected.
    """
    acc = CocycleAccumulator(rep.n, rep.is_complex, qr_interval)
    base_log = np.zeros(rep.n)
    t_base = 0.0
    t_last = 0.0
    for t, g, _ in iter_crossings(dom, ut, T):
        acc.advance(rep.generator_image(g))
        t_last = t
        if burn_in > 0.0 and t <= burn_in:
            acc.flush()
            base_log = acc.log_diag.copy()
            t_base = t
    log = acc.finalize() - base_log
    acc.elapsed_length = T
    if burn_in > 0.0:
        # both window ends at crossing epochs: the log accrues only at
        # crossings, so pairing it with a time span ending mid-gap would
        # bias the rate by the mean residual gap over T
        if t_last <= t_base:
            return np.zeros(rep.n)
        lam = np.sort(log)[::-1] / (t_last - t_base)
    else:
        lam = np.sort(log)[::-1] / T
    if normalization == "minus4":
        lam = 2.0 * lam
    return lam


@dataclass(frozen=True)
class SpectrumEstimate:
    """Lyapunov spectrum with per-exponent standard errors.

    values are sorted nonincreasing in the requested normalization;
    sample_values holds the per-sample vectors (samples x n) for
    downstream combined-error computations.
    """

    values: np.ndarray
    stderr: np.ndarray
    samples: int
    normalization_tag: str
    label: str = ""
    T: float = 0.0
    seed: int = 0
    sample_values: np.ndarray = field(default=None, repr=False)
    caveat: str = ""


def _sample_base(dom, rng, max_tries=20000):
    x0, x1, y0, y1 = dom.bounding_box()
    for _ in range(max_tries):
        x = rng.uniform(x0, x1)
        u = rng.uniform(0.0, 1.0)
        # hyperbolic area density 1/y^2 on [y0, y1]
        y = 1.0 / (1.0 / y0 - u * (1.0 / y0 - 1.0 / y1))
        if dom.contains(HPoint(x, y)):
            return HPoint(x, y)
    raise RuntimeError("rejection sampling failed to land in the domain")


def estimate_spectrum(dom, rep, config):
    """Monte-Carlo spectrum: one long geodesic per sample, averaged.

    Per-sample RNG streams are derived as default_rng([seed, index]), so
    the estimate is bit-identical for a fixed config regardless of how
    samples would be partitioned across workers; results merge in sample
    index order.
    """
    rows = []
    failures = []
    for i in range(config.samples):
        rng = np.random.default_rng([config.seed, i])
        angle = rng.uniform(0.0, 2.0 * math.pi)
        base = _sample_base(dom, rng) if config.random_base else dom.interior_point
        ut = UnitTangent(base, angle)
        try:
            rows.append(run_sample(dom, rep, ut, config.T,
                                   config.qr_interval, config.normalization,
                                   config.burn_in))
        except (ArithmeticError, RuntimeError) as exc:  # keep sampling
            failures.append((i, repr(exc)))
    if len(rows) < 2:
        raise InsufficientDataError(
            f"only {len(rows)} successful samples; failures: {failures[:3]}"
        )
    sample_values = np.vstack(rows)
    values = sample_values.mean(axis=0)
    stderr = sample_values.std(axis=0, ddof=1) / math.sqrt(len(rows))
    return SpectrumEstimate(
        values=values,
        stderr=stderr,
        samples=len(rows),
        normalization_tag=config.normalization,
        label=rep.label,
        T=config.T,
        seed=config.seed,
        sample_values=sample_values,
    )


@dataclass(frozen=True)
class WedgeCheck:
    wedge_top: float
    wedge_stderr: float
    partial_sum: float
    partial_stderr: float
    discrepancy: float
    combined_stderr: float


def wedge_crosscheck(dom, rep, k, config):
    """Compare lambda_1 of wedge^k(rep) with the k-th partial sum of rep.

    The top exponent of the exterior power is the sum of the first k
    exponents of the original cocycle; both sides are estimated with the
    same config and the discrepancy reported in combined-stderr units.
    """
    from .linrep import ext_power

    base = estimate_spectrum(dom, rep, config)
    wedge = estimate_spectrum(dom, ext_power(rep, k), config)
    partial_samples = base.sample_values[:, :k].sum(axis=1)
    partial = partial_samples.mean()
    partial_se = partial_samples.std(ddof=1) / math.sqrt(len(partial_samples))
    top = wedge.values[0]
    top_se = wedge.stderr[0]
    combined = math.hypot(partial_se, top_se)
    return WedgeCheck(
        wedge_top=top,
        wedge_stderr=top_se,
        partial_sum=partial,
        partial_stderr=partial_se,
        discrepancy=top - partial,
        combined_stderr=combined,
    )


def random_walk_spectrum(rep, steps, samples, seed):
    """Exponents of i.i.d. uniform products over the symmetric generator set.

    Reported per step, NOT per geodesic length: the stationary measure of
    this walk is not the geodesic one, so the values are comparable to the
    flow spectrum only through their zero/nonzero pattern.
    """
    rows = []
    m = rep.num_generators
    for i in range(samples):
        rng = np.random.default_rng([seed, i])
        acc = CocycleAccumulator(rep.n, rep.is_complex, qr_interval=8)
        draws = rng.integers(0, 2 * m, size=steps)
        for d in draws:
            s = int(d) + 1
            acc.advance(rep.generator_image(s if s <= m else m - s))
        rows.append(np.sort(acc.finalize())[::-1] / steps)
    sample_values = np.vstack(rows)
    stderr = (
        sample_values.std(axis=0, ddof=1) / math.sqrt(samples)
        if samples > 1
        else np.zeros(rep.n)
    )
    return SpectrumEstimate(
        values=sample_values.mean(axis=0),
        stderr=stderr,
        samples=samples,
        normalization_tag="per-step",
        label=rep.label,
        T=float(steps),
        seed=seed,
        sample_values=sample_values,
        caveat="random-walk exponents; only the zero/nonzero pattern is "
               "comparable to geodesic-flow exponents",
    )


def spectrum_csv(est):
    """CSV per the schema label,i,lambda,stderr,samples,T,seed,normalization."""
    lines = ["label,i,lambda,stderr,samples,T,seed,normalization"]
    for i, (lam, se) in enumerate(zip(est.values, est.stderr), start=1):
        lines.append(
            f"{est.label},{i},{lam:.12g},{se:.12g},{est.samples},"
            f"{est.T:.12g},{est.seed},{est.normalization_tag}"
        )
    return "\n".join(lines) + "\n"
