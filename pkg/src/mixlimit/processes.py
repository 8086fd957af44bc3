"""Generators of mixing (and deliberately non-mixing) sequences.

Each family has a known long-run variance, so the norming sequences
a_n = 1/sqrt(n v_inf), b_n = -a_n n mean make the normalized partial
sums a_n S_n + b_n converge to a standard normal.  That ground truth is
what the blocking diagnostics are checked against.

Families:
  iid              independent draws from the innovation law
  ar1              X_k = phi X_{k-1} + eps_k, started at stationarity
  ma_q             X_k = sum_i w_i eps_{k-i}, pre-sampled so the path is
                   stationary from index 1
  markov_function  f(Y_k) for a finite-state chain Y
  constant         a deterministic constant (degenerate; rejected by
                   norming_for)
"""

from __future__ import annotations

import hashlib
import io
import json
from dataclasses import dataclass, field

import numpy as np
import scipy.stats

from . import rngstreams
from .mixing import AlphaProfile, MarkovChainSpec, alpha_bound_geometric

FAMILIES = ("iid", "ar1", "ma_q", "markov_function", "constant")
_AR1_INIT_TOL = 1e-16


@dataclass(frozen=True)
class InnovationLaw:
    """Innovation distribution for iid/ar1/ma_q: "normal", "uniform" or
    "rademacher", parametrized by mean and standard deviation."""

    name: str = "normal"
    mean: float = 0.0
    std: float = 1.0

    def __post_init__(self):
        if self.name not in ("normal", "uniform", "rademacher"):
            raise ValueError(f"unknown innovation law {self.name!r}")
        if self.std < 0:
            raise ValueError("innovation std must be nonnegative")

    def sample(self, rng: np.random.Generator, shape) -> np.ndarray:
        if self.name == "normal":
            z = rng.standard_normal(shape)
        elif self.name == "uniform":
            z = (rng.random(shape) - 0.5) * np.sqrt(12.0)
        else:
            z = rng.integers(0, 2, shape) * 2.0 - 1.0
        return self.mean + self.std * z

    @property
    def variance(self) -> float:
        return self.std ** 2


@dataclass(frozen=True)
class ProcessSpec:
    family: str
    phi: float = 0.0
    weights: tuple = ()
    innovations: InnovationLaw = field(default_factory=InnovationLaw)
    chain: MarkovChainSpec | None = None
    state_values: tuple | None = None
    value: float = 0.0
    dimension: int = 1

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown process family {self.family!r}")
        if self.family == "ar1" and not abs(self.phi) < 1:
            raise ValueError(f"ar1 requires |phi| < 1, got {self.phi}")
        if self.family == "ma_q":
            if len(self.weights) == 0:
                raise ValueError("ma_q requires at least one weight")
            object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if self.family == "markov_function" and self.chain is None:
            raise ValueError("markov_function requires a chain spec")
        if self.dimension < 1:
            raise ValueError("dimension must be >= 1")
        if self.dimension > 1 and self.family not in ("iid", "constant"):
            raise ValueError(f"family {self.family!r} only supports dimension 1")

    def describe(self) -> dict:
        d = {"family": self.family, "dimension": self.dimension}
        if self.family == "ar1":
            d["phi"] = self.phi
        if self.family == "ma_q":
            d["weights"] = list(self.weights)
        if self.family in ("iid", "ar1", "ma_q"):
            d["innovations"] = {
                "name": self.innovations.name,
                "mean": self.innovations.mean,
                "std": self.innovations.std,
            }
        if self.family == "markov_function":
            d["chain"] = {
                "states": self.chain.states.tolist(),
                "transition": self.chain.transition.tolist(),
                "initial": self.chain.initial.tolist(),
            }
            d["state_values"] = list(self.mapped_values())
        if self.family == "constant":
            d["value"] = self.value
        return d

    def mapped_values(self) -> np.ndarray:
        if self.state_values is not None:
            return np.asarray(self.state_values, dtype=float)
        return self.chain.states

    def spec_hash(self) -> str:
        blob = json.dumps(self.describe(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass(frozen=True)
class SamplePath:
    """One realization X_1..X_N, values shape (N,) for d=1 else (N, d)."""

    values: np.ndarray
    spec_hash: str
    seed: int

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return self.values.shape[0]

    def to_csv(self, fh) -> None:
        """Two-column CSV (index, value); one value column per dimension."""
        v = self.values
        if v.ndim == 1:
            fh.write("index,value\n")
            for i, x in enumerate(v, start=1):
                fh.write(f"{i},{float(x)!r}\n")
        else:
            cols = ",".join(f"value_{k}" for k in range(v.shape[1]))
            fh.write(f"index,{cols}\n")
            for i, row in enumerate(v, start=1):
                fh.write(f"{i}," + ",".join(repr(float(x)) for x in row) + "\n")

    def to_csv_string(self) -> str:
        buf = io.StringIO()
        self.to_csv(buf)
        return buf.getvalue()


@dataclass(frozen=True)
class NormingSequences:
    """Scaling a(n) > 0 and centering b(n) with a closed-form provenance."""

    a: object                   # callable n -> positive float (vectorizable)
    b: object                   # callable n -> float
    provenance: str

    def a_values(self, ns) -> np.ndarray:
        ns = np.asarray(ns)
        try:
            out = np.asarray(self.a(ns), dtype=float)
            if out.shape == ns.shape:
                return out
        except (TypeError, ValueError):
            pass
        return np.array([float(self.a(int(n))) for n in ns.ravel()]).reshape(ns.shape)

    def b_values(self, ns) -> np.ndarray:
        ns = np.asarray(ns)
        try:
            out = np.asarray(self.b(ns), dtype=float)
            if out.shape == ns.shape:
                return out
        except (TypeError, ValueError):
            pass
        return np.array([float(self.b(int(n))) for n in ns.ravel()]).reshape(ns.shape)


@dataclass(frozen=True)
class Step1Report:
    """Numeric check of a(n) -> 0, a(n+1)/a(n) -> 1 and vanishing drift."""

    a_tail_ratio: float        # a(n_max) / a(1)
    ratio_gap: float           # |a(n_max)/a(n_max - 1) - 1|
    drift_tail: float          # |b(n_max) - b(n_max - 1) a(n_max)/a(n_max - 1)|
    a_vanishes: bool
    ratio_converges: bool
    drift_vanishes: bool

    @property
    def passed(self) -> bool:
        return self.a_vanishes and self.ratio_converges and self.drift_vanishes


def _simulate_innovations(spec: ProcessSpec, rng, reps: int, n: int) -> np.ndarray:
    return spec.innovations.sample(rng, (reps, n))


def simulate_many(spec: ProcessSpec, n: int, reps: int, seed: int, label: str = "path") -> np.ndarray:
    """(reps, n) matrix of independent paths; deterministic in (spec, n, reps, seed).

    Rows are replication streams of a single Philox stream keyed by
    (seed, label, spec hash); column k within a row is time index k.
    """
    if n < 1 or reps < 1:
        raise ValueError("n and reps must be positive")
    rng = rngstreams.stream(seed, label, spec.spec_hash())
    fam = spec.family
    if fam == "constant":
        if spec.dimension > 1:
            return np.full((reps, n, spec.dimension), spec.value, dtype=float)
        return np.full((reps, n), spec.value, dtype=float)
    if fam == "iid":
        if spec.dimension > 1:
            return spec.innovations.sample(rng, (reps, n, spec.dimension))
        return _simulate_innovations(spec, rng, reps, n)
    if fam == "ar1":
        phi, law = spec.phi, spec.innovations
        if phi == 0.0:
            return _simulate_innovations(spec, rng, reps, n)
        burn = int(np.ceil(np.log(_AR1_INIT_TOL) / np.log(abs(phi))))
        eps = law.sample(rng, (reps, burn + n))
        mean_stat = law.mean / (1.0 - phi)
        # truncated moving-average start centered at the exact stationary mean
        powers = phi ** np.arange(burn - 1, -1, -1)
        x0 = mean_stat + (eps[:, :burn] - law.mean) @ powers
        out = np.empty((reps, n))
        prev = x0
        for k in range(n):
            prev = phi * prev + eps[:, burn + k]
            out[:, k] = prev
        return out
    if fam == "ma_q":
        w = np.asarray(spec.weights)
        q = len(w) - 1
        eps = _simulate_innovations(spec, rng, reps, n + q)
        out = np.zeros((reps, n))
        for i, wi in enumerate(w):
            out += wi * eps[:, q - i : q - i + n]
        return out
    # markov_function
    chain = spec.chain
    vals = spec.mapped_values()
    kmax = chain.n_states - 1
    cum = np.cumsum(chain.transition, axis=1)
    u = rng.random((reps, n))
    states = np.empty((reps, n), dtype=np.intp)
    states[:, 0] = np.minimum(
        np.searchsorted(np.cumsum(chain.initial), u[:, 0], side="right"), kmax
    )
    for k in range(1, n):
        rows = cum[states[:, k - 1]]
        states[:, k] = np.minimum((u[:, k, None] > rows).sum(axis=1), kmax)
    return vals[states]


def generate_path(spec: ProcessSpec, n: int, seed: int) -> SamplePath:
    """One path X_1..X_N; bit-identical for identical (spec, N, seed)."""
    vals = simulate_many(spec, n, 1, seed)[0]
    return SamplePath(values=vals, spec_hash=spec.spec_hash(), seed=seed)


def long_run_variance(spec: ProcessSpec) -> float:
    """v_inf = lim Var(S_n)/n, in closed form per family."""
    law = spec.innovations
    if spec.family == "constant":
        return 0.0
    if spec.family == "iid":
        return law.variance
    if spec.family == "ar1":
        return law.variance / (1.0 - spec.phi) ** 2
    if spec.family == "ma_q":
        return float(np.sum(spec.weights)) ** 2 * law.variance
    # markov_function: 2 <f_bar, h>_pi - <f_bar, f_bar>_pi with
    # h solving the Poisson equation (I - P + 1 pi) h = f_bar
    chain = spec.chain
    pi = chain.stationary()
    lam2 = _second_eigenvalue_modulus(chain)
    if lam2 >= 1.0 - 1e-9:
        raise ValueError("markov_function norming requires an ergodic chain")
    f = spec.mapped_values()
    fbar = f - pi @ f
    k = chain.n_states
    h = np.linalg.solve(np.eye(k) - chain.transition + np.outer(np.ones(k), pi), fbar)
    return float(pi @ (2.0 * fbar * h - fbar ** 2))


def _second_eigenvalue_modulus(chain: MarkovChainSpec) -> float:
    ev = np.sort(np.abs(np.linalg.eigvals(chain.transition)))
    return float(ev[-2]) if len(ev) > 1 else 0.0


def process_mean(spec: ProcessSpec) -> float:
    law = spec.innovations
    if spec.family == "constant":
        return spec.value
    if spec.family == "iid":
        return law.mean
    if spec.family == "ar1":
        return law.mean / (1.0 - spec.phi)
    if spec.family == "ma_q":
        return float(np.sum(spec.weights)) * law.mean
    pi = spec.chain.stationary()
    return float(pi @ spec.mapped_values())


def norming_for(spec: ProcessSpec) -> NormingSequences:
    """a(n) = 1/sqrt(n v_inf), b(n) = -a(n) n mean.

    Rejects specs with vanishing long-run variance: those have a
    degenerate limit and no non-degenerate norming exists.
    """
    v = long_run_variance(spec)
    if v <= 0.0:
        raise ValueError(
            f"degenerate spec: long-run variance {v!r} is not positive, "
            "no non-degenerate norming exists"
        )
    mean = process_mean(spec)
    a = lambda n: 1.0 / np.sqrt(np.asarray(n, dtype=float) * v)
    b = lambda n: -np.asarray(n, dtype=float) * mean / np.sqrt(np.asarray(n, dtype=float) * v)
    prov = (
        f"a(n) = (n * v_inf)^(-1/2), b(n) = -a(n) n mean "
        f"with v_inf = {v!r}, mean = {mean!r} [{spec.family}]"
    )
    return NormingSequences(a=a, b=b, provenance=prov)


def validate_norming(
    norming: NormingSequences,
    n_max: int,
    a_decay_factor: float = 0.1,
    ratio_tol: float = 0.01,
    drift_tol: float = 0.01,
) -> Step1Report:
    """Check the norming-sequence regularity needed for scale comparison:
    a(n) -> 0, a(n+1)/a(n) -> 1, b(n+1) - b(n) a(n+1)/a(n) -> 0."""
    if n_max < 10:
        raise ValueError("n_max must be at least 10")
    ns = np.arange(1, n_max + 1)
    a = norming.a_values(ns)
    b = norming.b_values(ns)
    if np.any(a <= 0):
        raise ValueError("a(n) must be positive")
    ratio = a[-1] / a[-2]
    drift = abs(b[-1] - b[-2] * ratio)
    return Step1Report(
        a_tail_ratio=float(a[-1] / a[0]),
        ratio_gap=float(abs(ratio - 1.0)),
        drift_tail=float(drift),
        a_vanishes=bool(a[-1] < a_decay_factor * a[0]),
        ratio_converges=bool(abs(ratio - 1.0) < ratio_tol),
        drift_vanishes=bool(drift < drift_tol),
    )


def marginal_abs_tail(spec: ProcessSpec):
    """t -> an upper envelope of max_k P(|X_k| >= t), for use as the
    infinitesimality tail of the triangular array.

    For the stationary families the marginal is time-invariant, so the
    max over k collapses.  Gaussian innovations give the exact normal
    tail; bounded innovations (uniform, rademacher) give a step envelope
    at the support bound; markov_function and constant are exact over
    their finite support.  Any upper envelope is admissible: the level
    search only ever selects a larger (still valid) delta.
    """
    fam = spec.family
    law = spec.innovations
    if fam in ("iid", "ar1", "ma_q") and law.name in ("uniform", "rademacher"):
        eps_bound = abs(law.mean) + law.std * (np.sqrt(3.0) if law.name == "uniform" else 1.0)
        if fam == "iid":
            bound = eps_bound
        elif fam == "ar1":
            bound = eps_bound / (1.0 - abs(spec.phi))
        else:
            bound = eps_bound * float(np.sum(np.abs(spec.weights)))
        return lambda t: np.where(np.asarray(t, dtype=float) <= bound, 1.0, 0.0)
    if fam in ("iid", "ar1", "ma_q") and law.name == "normal":
        if fam == "iid":
            m, sd = law.mean, law.std
        elif fam == "ar1":
            m = law.mean / (1.0 - spec.phi)
            sd = law.std / np.sqrt(1.0 - spec.phi ** 2)
        else:
            w = np.asarray(spec.weights)
            m = law.mean * w.sum()
            sd = law.std * np.sqrt(np.sum(w ** 2))

        def tail(t):
            t = np.asarray(t, dtype=float)
            if sd == 0.0:
                return np.where(t <= abs(m), 1.0, 0.0)
            return scipy.stats.norm.sf((t - m) / sd) + scipy.stats.norm.cdf((-t - m) / sd)

        return tail
    if fam == "constant":
        v = abs(spec.value)
        return lambda t: np.where(np.asarray(t, dtype=float) <= v, 1.0, 0.0)
    if fam == "markov_function":
        # per-state mass envelope m(s) = sup_k P(Y_k = s); the induced tail
        # dominates max_k P(|X_k| >= t), which is what the delta search needs
        chain = spec.chain
        vals = np.abs(spec.mapped_values())
        dist = chain.initial.copy()
        envelope = dist.copy()
        for _ in range(10_000):
            nxt = dist @ chain.transition
            envelope = np.maximum(envelope, nxt)
            if np.abs(nxt - dist).sum() < 1e-13:
                break
            dist = nxt

        def tail(t):
            t = np.asarray(t, dtype=float)
            sup_mass = np.array(
                [envelope[vals >= ti].sum() if np.any(vals >= ti) else 0.0
                 for ti in np.atleast_1d(t)]
            )
            return sup_mass.reshape(t.shape) if t.shape else float(sup_mass[0])

        return tail
    raise ValueError(
        f"no closed-form marginal tail for family {fam!r} with "
        f"{law.name!r} innovations; use a Monte Carlo tail estimator"
    )


def monte_carlo_abs_tail(spec: ProcessSpec, n_paths: int = 4096, horizon: int = 64, seed: int = 0):
    """Empirical fallback for marginal_abs_tail, from simulated marginals."""
    paths = simulate_many(spec, horizon, n_paths, seed, label="tail-probe")
    flat = np.sort(np.abs(paths).ravel())

    def tail(t):
        t = np.asarray(t, dtype=float)
        return 1.0 - np.searchsorted(flat, t, side="left") / flat.size

    return tail


def analytic_alpha_profile(spec: ProcessSpec, n_list) -> AlphaProfile:
    """Known mixing-rate metadata per family, as an upper envelope.

    iid and constant sequences have coefficient 0; an MA(q) is
    q-dependent so the coefficient vanishes beyond lag q; a stationary
    Gaussian AR(1) has maximal correlation phi^n between past and
    future, hence alpha(n) <= phi^n / 4; markov_function inherits the
    Doeblin envelope of its chain.
    """
    n_list = [int(n) for n in n_list]
    fam = spec.family
    if fam in ("iid", "constant"):
        vals = tuple((n, 0.0) for n in n_list)
        return AlphaProfile(vals, kind="analytic-bound", meta=f"{fam}: independent")
    if fam == "ma_q":
        q = len(spec.weights) - 1
        vals = tuple((n, 0.0 if n > q else 0.25) for n in n_list)
        return AlphaProfile(vals, kind="analytic-bound", meta=f"ma_q: {q}-dependent")
    if fam == "ar1":
        if spec.innovations.name != "normal":
            # no decay certificate is claimed for non-gaussian AR(1)
            vals = tuple((n, 0.25) for n in n_list)
            return AlphaProfile(vals, kind="analytic-bound", meta="ar1 non-gaussian: trivial 1/4")
        vals = tuple((n, min(0.25, 0.25 * abs(spec.phi) ** n)) for n in n_list)
        meta = "gaussian ar1: maximal correlation phi^n, alpha(n) <= phi^n/4"
        return AlphaProfile(vals, kind="analytic-bound", meta=meta)
    return alpha_bound_geometric(spec.chain, n_list)


def limit_cdf(spec: ProcessSpec):
    """cdf of the weak limit of a_n S_n + b_n under norming_for: N(0, 1)."""
    if long_run_variance(spec) <= 0.0:
        raise ValueError("degenerate spec has no non-degenerate limit")
    return scipy.stats.norm.cdf
