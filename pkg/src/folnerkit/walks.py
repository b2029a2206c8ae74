"""Random walks: drift, cautiousness, return probabilities and Dirichlet eigenvalues.

Monte Carlo work is split into fixed-size blocks of trials. Block b draws
from ``SeedSequence(master_seed).spawn(...)[b]`` and blocks are reduced in
order, so results do not depend on how many threads run the blocks.
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .core import Ball, Group, GroupSpec, ball
from .errors import CertificateError, DegenerateInputError, ResourceError, StructuralError
from .wreath import WreathGroup

RESIDUAL_TOL = 1e-9
DENSE_LIMIT = 2000


@dataclass(frozen=True)
class Measure:
    """Uniform on the symmetric generators, optionally lazy: stay put with probability alpha."""

    alpha: Fraction = Fraction(0)

    def __post_init__(self):
        a = Fraction(self.alpha)
        if not 0 <= a < 1:
            raise DegenerateInputError("laziness alpha must lie in [0, 1)")
        object.__setattr__(self, "alpha", a)

    @classmethod
    def parse(cls, text: str | None) -> "Measure":
        if text in (None, "", "uniform"):
            return cls()
        if text.startswith("lazy"):
            _, _, a = text.partition(":")
            return cls(Fraction(a) if a else Fraction(1, 2))
        raise StructuralError(f"unknown measure {text!r}; use 'uniform' or 'lazy:alpha'")

    def __str__(self):
        return "uniform" if self.alpha == 0 else f"lazy:{self.alpha}"

    def weights(self, G: Group) -> list[tuple[object, Fraction]]:
        gens = [g for _, g in G.symmetric_generators]
        step = (1 - self.alpha) / len(gens)
        out = [(g, step) for g in gens]
        if self.alpha:
            out.append((G.identity, self.alpha))
        return out


@dataclass(frozen=True)
class WalkConfig:
    group: GroupSpec
    times: tuple
    trials: int
    master_seed: int = 0
    measure: Measure = Measure()
    cautious_c: tuple = (1.0,)
    block_size: int = 1000

    def __post_init__(self):
        times = tuple(sorted(set(int(t) for t in self.times)))
        if not times or times[0] < 0:
            raise DegenerateInputError("times must be non-negative and non-empty")
        if self.trials < 1:
            raise DegenerateInputError("trials must be >= 1")
        if self.block_size < 1:
            raise DegenerateInputError("block_size must be >= 1")
        object.__setattr__(self, "times", times)

    @property
    def horizon(self) -> int:
        return self.times[-1]


@dataclass
class WalkStats:
    config: WalkConfig
    drift: dict  # n -> (mean |W_n|, standard error)
    cautious: dict  # (n, c) -> P(max_{k<=n} |W_k| <= c sqrt(n))
    endpoint: dict  # (n, c) -> P(|W_n| <= c sqrt(n))
    return_prob: dict = field(default_factory=dict)  # n -> (estimate, halfwidth or 0, method)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "drift_mean", "drift_se", "cautious_c", "cautious_p", "return_p", "method"])
        for n in self.config.times:
            mean, se = self.drift[n]
            rp = self.return_prob.get(n)
            for c in self.config.cautious_c:
                w.writerow([n, repr(mean), repr(se), repr(float(c)), repr(self.cautious[(n, c)]),
                            "" if rp is None else repr(float(rp[0])), "" if rp is None else rp[2]])
        return buf.getvalue()


# ---------------------------------------------------------------------------
# block machinery
# ---------------------------------------------------------------------------


def _block_sizes(trials: int, block: int) -> list[int]:
    full, rest = divmod(trials, block)
    return [block] * full + ([rest] if rest else [])


def _run_blocks(fn: Callable, trials: int, block: int, seed: int, threads: int):
    """Yield block results in block order; at most ``threads`` blocks are in flight."""
    sizes = _block_sizes(trials, block)
    seeds = np.random.SeedSequence(seed).spawn(len(sizes))
    jobs = list(zip(sizes, seeds))
    if threads <= 1:
        for n, s in jobs:
            yield fn(n, s)
        return
    with ThreadPoolExecutor(max_workers=threads) as ex:
        for start in range(0, len(jobs), threads):
            yield from ex.map(lambda job: fn(*job), jobs[start:start + threads])


class _Acc:
    """Per-block partial sums, merged in block order."""

    def __init__(self, times, cs):
        self.times, self.cs = times, cs
        self.n = 0
        self.s1 = {t: 0.0 for t in times}
        self.s2 = {t: 0.0 for t in times}
        self.caut = {(t, c): 0 for t in times for c in cs}
        self.end = {(t, c): 0 for t in times for c in cs}

    def add_block(self, n, lengths: dict, maxes: dict):
        self.n += n
        for t in self.times:
            L = lengths[t].astype(np.float64)
            self.s1[t] += float(L.sum())
            self.s2[t] += float((L * L).sum())
            for c in self.cs:
                bound = c * math.sqrt(t)
                self.caut[(t, c)] += int((maxes[t] <= bound).sum())
                self.end[(t, c)] += int((lengths[t] <= bound).sum())

    def stats(self, config) -> WalkStats:
        drift, caut, end = {}, {}, {}
        N = self.n
        for t in self.times:
            mean = self.s1[t] / N
            var = max(self.s2[t] / N - mean * mean, 0.0)
            drift[t] = (mean, math.sqrt(var / N) if N > 1 else 0.0)
            for c in self.cs:
                caut[(t, c)] = self.caut[(t, c)] / N
                end[(t, c)] = self.end[(t, c)] / N
        return WalkStats(config, drift, caut, end)


# ---------------------------------------------------------------------------
# fast paths
# ---------------------------------------------------------------------------


def _is_line(G: Group) -> bool:
    return isinstance(G, WreathGroup) and G.d == 1 and set(G.generator_labels) == {"t"}


def _is_lamplighter(G: Group) -> bool:
    return (isinstance(G, WreathGroup) and G.d == 1 and G.p == 2
            and set(G.generator_labels) == {"t", "b"})


LINE_CHUNK = 1024


def _line_block(config: WalkConfig):
    times = config.times
    horizon = config.horizon
    alpha = float(config.measure.alpha)

    def run(n, seed):
        rng = np.random.default_rng(seed)
        lengths, maxes = {}, {}
        pos = np.zeros(n, dtype=np.int64)
        runmax = np.zeros(n, dtype=np.int64)
        if 0 in times:
            lengths[0] = maxes[0] = np.zeros(n, dtype=np.int64)
        for start in range(0, horizon, LINE_CHUNK):
            width = min(LINE_CHUNK, horizon - start)
            u = rng.random((n, width))
            steps = np.where(u < alpha, 0, np.where(u < alpha + (1 - alpha) / 2, 1, -1))
            path = pos[:, None] + np.cumsum(steps, axis=1)
            dist = np.abs(path)
            cmax = np.maximum(np.maximum.accumulate(dist, axis=1), runmax[:, None])
            for t in times:
                if start < t <= start + width:
                    lengths[t] = dist[:, t - start - 1].copy()
                    maxes[t] = cmax[:, t - start - 1].copy()
            pos = path[:, -1].copy()
            runmax = cmax[:, -1].copy()
        return n, lengths, maxes

    return run


def _lamplighter_block(config: WalkConfig, want_state: bool = False):
    """Simple random walk on Z wr Z/2 with generators t, t^-1, b (and optional laziness)."""
    times = set(config.times)
    horizon = config.horizon
    alpha = float(config.measure.alpha)

    def run(n, seed):
        rng = np.random.default_rng(seed)
        W = 2 * horizon + 3
        off = horizon + 1
        lamps = np.zeros((n, W), dtype=bool)
        pos = np.zeros(n, dtype=np.int64)
        lit = np.zeros(n, dtype=np.int64)
        lo = np.full(n, np.iinfo(np.int64).max)  # min lit lamp (sentinel when none)
        hi = np.full(n, np.iinfo(np.int64).min)
        rows = np.arange(n)
        runmax = np.zeros(n, dtype=np.int64)
        lengths, maxes, states = {}, {}, {}

        def length():
            has = lit > 0
            L = np.minimum(np.where(has, lo, 0), np.minimum(pos, 0))
            R = np.maximum(np.where(has, hi, 0), np.maximum(pos, 0))
            return lit + 2 * (R - L) - np.abs(pos)

        if 0 in times:
            lengths[0] = maxes[0] = np.zeros(n, dtype=np.int64)
            if want_state:
                states[0] = [b"" for _ in range(n)]
        step_p = (1 - alpha) / 3
        for k in range(1, horizon + 1):
            u = rng.random(n)
            move_r = (u >= alpha) & (u < alpha + step_p)
            move_l = (u >= alpha + step_p) & (u < alpha + 2 * step_p)
            toggle = u >= alpha + 2 * step_p
            pos += move_r.astype(np.int64) - move_l.astype(np.int64)
            if toggle.any():
                r = rows[toggle]
                p = pos[toggle]
                col = p + off
                was = lamps[r, col]
                lamps[r, col] = ~was
                on = ~was
                lit[r] += np.where(on, 1, -1)
                # switched on: extend extremes
                ron, pon = r[on], p[on]
                lo[ron] = np.minimum(lo[ron], pon)
                hi[ron] = np.maximum(hi[ron], pon)
                # switched off at an extreme: rescan that row
                roff, poff = r[~on], p[~on]
                for rr, pp in zip(roff.tolist(), poff.tolist()):
                    if lit[rr] == 0:
                        lo[rr] = np.iinfo(np.int64).max
                        hi[rr] = np.iinfo(np.int64).min
                        continue
                    if pp == lo[rr] or pp == hi[rr]:
                        idx = np.flatnonzero(lamps[rr])
                        lo[rr] = idx[0] - off
                        hi[rr] = idx[-1] - off
            cur = length()
            np.maximum(runmax, cur, out=runmax)
            if k in times:
                lengths[k] = cur.copy()
                maxes[k] = runmax.copy()
                if want_state:
                    states[k] = [pos[i].tobytes() + np.packbits(lamps[i]).tobytes() for i in range(n)]
        if want_state:
            return n, lengths, maxes, states
        return n, lengths, maxes

    return run


def _generic_block(config: WalkConfig, G: Group, B: Ball, want_state: bool = False):
    weights = config.measure.weights(G)
    elems = [g for g, _ in weights]
    probs = np.array([float(w) for _, w in weights])
    probs /= probs.sum()
    times = set(config.times)
    horizon = config.horizon

    def run(n, seed):
        rng = np.random.default_rng(seed)
        draws = rng.choice(len(elems), size=(n, horizon), p=probs) if horizon else np.zeros((n, 0), int)
        lengths = {t: np.zeros(n, dtype=np.int64) for t in times}
        maxes = {t: np.zeros(n, dtype=np.int64) for t in times}
        states = {t: [None] * n for t in times}
        for i in range(n):
            x = G.identity
            mx = 0
            if 0 in times:
                states[0][i] = x
            for k in range(1, horizon + 1):
                x = G._multiply(x, elems[draws[i, k - 1]])
                L = B.members.get(x)
                if L is None:
                    raise ResourceError(
                        f"walk left the precomputed ball of radius {B.radius} at step {k}; "
                        f"largest feasible horizon is {B.radius}", layer=B.radius)
                mx = max(mx, L)
                if k in times:
                    lengths[k][i] = L
                    maxes[k][i] = mx
                    states[k][i] = x
        if want_state:
            return n, lengths, maxes, states
        return n, lengths, maxes

    return run


def _runner(config: WalkConfig, G: Group, want_state=False, budget: int = 2_000_000):
    if _is_line(G) and not want_state:
        return _line_block(config)
    if _is_lamplighter(G):
        return _lamplighter_block(config, want_state)
    try:
        B = ball(G, config.horizon, budget)
    except ResourceError as exc:
        raise ResourceError(f"length oracle unavailable at horizon {config.horizon}: {exc}",
                            layer=exc.layer) from exc
    return _generic_block(config, G, B, want_state)


def simulate(config: WalkConfig, threads: int = 1) -> WalkStats:
    """Monte Carlo drift and cautiousness; identical output for any ``threads``."""
    G = config.group.build()
    run = _runner(config, G)
    acc = _Acc(config.times, tuple(config.cautious_c))
    for n, lengths, maxes in _run_blocks(run, config.trials, config.block_size,
                                         config.master_seed, threads):
        acc.add_block(n, lengths, maxes)
    return acc.stats(config)


def log_slope(ns: Sequence[float], ys: Sequence[float]) -> float:
    """Least-squares slope of log y against log n."""
    x = np.log(np.asarray(ns, dtype=float))
    y = np.log(np.asarray(ys, dtype=float))
    return float(np.polyfit(x, y, 1)[0])


# ---------------------------------------------------------------------------
# return probabilities
# ---------------------------------------------------------------------------


def return_probability_exact(G: Group, n: int, measure: Measure = Measure(),
                             budget: int = 2_000_000) -> Fraction:
    """mu^(2n)(e) by exact convolution with integer walk counts."""
    if n < 0:
        raise DegenerateInputError("n must be >= 0")
    weights = measure.weights(G)
    den = math.lcm(*(w.denominator for _, w in weights))
    iw = [(g, int(w * den)) for g, w in weights]
    # walk to time n from e, then mu^(2n)(e) = sum_x mu^n(x) mu^n(x^-1) = sum_x mu^n(x)^2 (symmetric mu)
    dist = {G.identity: 1}
    for step in range(n):
        nxt: dict = {}
        for x, c in dist.items():
            for g, w in iw:
                y = G._multiply(x, g)
                nxt[y] = nxt.get(y, 0) + c * w
        dist = nxt
        if len(dist) > budget:
            raise ResourceError(f"support exceeded {budget} at step {step + 1}", layer=step + 1)
    total = sum(c * c for c in dist.values())
    return Fraction(total, den ** (2 * n))


def return_probability_mc(config: WalkConfig, n: int, threads: int = 1) -> tuple[float, float]:
    """Collision estimate of mu^(2n)(e) = P(two independent n-step walks meet); (estimate, 95% halfwidth).

    Within each block, every pair of walks is compared; the block means are
    averaged and their spread gives the interval.
    """
    G = config.group.build()
    cfg = WalkConfig(config.group, (n,), config.trials, config.master_seed, config.measure,
                     config.cautious_c, config.block_size)
    if _is_line(G):
        run = _line_state_block(cfg)
    else:
        run = _runner(cfg, G, want_state=True)
    ests = []
    for res in _run_blocks(run, cfg.trials, cfg.block_size, cfg.master_seed, threads):
        states = res[3][n]
        counts: dict = {}
        for s in states:
            counts[s] = counts.get(s, 0) + 1
        m = len(states)
        if m < 2:
            continue
        pairs = sum(c * (c - 1) // 2 for c in counts.values())
        ests.append(pairs / (m * (m - 1) / 2))
    if not ests:
        raise DegenerateInputError("need at least one block with two trials")
    arr = np.array(ests)
    half = 1.96 * arr.std(ddof=1) / math.sqrt(len(arr)) if len(arr) > 1 else float("inf")
    return float(arr.mean()), float(half)


def _line_state_block(config: WalkConfig):
    alpha = float(config.measure.alpha)
    n_steps = config.horizon

    def run(n, seed):
        rng = np.random.default_rng(seed)
        u = rng.random((n, n_steps))
        steps = np.where(u < alpha, 0, np.where(u < alpha + (1 - alpha) / 2, 1, -1))
        end = steps.sum(axis=1) if n_steps else np.zeros(n, dtype=np.int64)
        return n, None, None, {n_steps: end.tolist()}

    return run


def return_probability(G: Group, n_list, measure: Measure = Measure(), mode: str = "exact",
                       trials: int = 20000, seed: int = 0, threads: int = 1) -> dict:
    """n -> (estimate, halfwidth, method) with method 'exact' or 'mc'."""
    out = {}
    for n in n_list:
        if n == 0:
            out[n] = (Fraction(1), 0.0, "exact")
        elif mode == "exact":
            out[n] = (return_probability_exact(G, n, measure), 0.0, "exact")
        else:
            cfg = WalkConfig(G.spec, (n,), trials, seed, measure, block_size=max(2, trials // 20))
            est, half = return_probability_mc(cfg, n, threads)
            out[n] = (est, half, "mc")
    return out


# ---------------------------------------------------------------------------
# Dirichlet eigenvalues
# ---------------------------------------------------------------------------


@dataclass
class SpectralReport:
    r: int
    ball_size: int
    lam: float
    residual: float
    phi: np.ndarray
    index: dict
    measure: Measure
    operator: sp.csr_matrix

    def survival_lower(self, n: int) -> float:
        return (1.0 - self.lam) ** n


def dirichlet_operator(G: Group, B: Ball, measure: Measure) -> tuple[sp.csr_matrix, dict]:
    """P restricted to the ball: P[x, y] = mu(x^-1 y) for x, y in B."""
    index = {x: i for i, x in enumerate(sorted(B.members, key=lambda v: (B.members[v], repr(v))))}
    rows, cols, vals = [], [], []
    for x, i in index.items():
        for g, w in measure.weights(G):
            y = G._multiply(x, g)
            j = index.get(y)
            if j is not None:
                rows.append(i)
                cols.append(j)
                vals.append(float(w))
    n = len(index)
    P = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    P.sum_duplicates()
    return P, index


def dirichlet_lambda(G: Group, r: int, measure: Measure = Measure(), budget: int = 2_000_000) -> SpectralReport:
    """Smallest eigenvalue of I - P with Dirichlet condition outside B(e, r)."""
    if r < 0:
        raise DegenerateInputError("r must be >= 0")
    B = ball(G, r, budget)
    P, index = dirichlet_operator(G, B, measure)
    n = P.shape[0]
    if n == 1:
        mu = float(P[0, 0])
        phi = np.ones(1)
    elif n < DENSE_LIMIT:
        w, v = np.linalg.eigh(P.toarray())
        mu, phi = float(w[-1]), v[:, -1]
    else:
        w, v = spla.eigsh(P, k=1, which="LA", tol=1e-13, maxiter=100000)
        mu, phi = float(w[0]), v[:, 0]
    phi = phi / np.linalg.norm(phi)
    if phi.sum() < 0:
        phi = -phi
    lam = 1.0 - mu
    residual = float(np.linalg.norm((phi - P @ phi) - lam * phi))
    if residual > RESIDUAL_TOL:
        raise CertificateError(f"eigen-residual {residual:.3e} exceeds {RESIDUAL_TOL}")
    if phi.min() < -1e-9:
        raise CertificateError("Dirichlet ground state is not of one sign")
    return SpectralReport(r, n, lam, residual, np.clip(phi, 0.0, None), index, measure, P)


@dataclass(frozen=True)
class SurvivalReport:
    r: int
    n: int
    log_stay: float
    log_lower: float

    @property
    def stay_probability(self) -> float:
        return math.exp(self.log_stay)

    @property
    def lower_bound(self) -> float:
        return math.exp(self.log_lower)

    @property
    def ok(self) -> bool:
        # slack covers the eigenpair residual accumulated over n steps
        return self.log_stay >= self.log_lower - (1e-9 + self.n * RESIDUAL_TOL)


def survival_bound_check(G: Group, r: int, n: int, measure: Measure = Measure(),
                         report: SpectralReport | None = None) -> SurvivalReport:
    """Exact stay-in-ball probability from the ground-state maximizer against (1 - lambda)^n.

    The distribution is rescaled every step and compared in log space, so
    long horizons do not underflow.
    """
    if n < 0:
        raise DegenerateInputError("n must be >= 0")
    if n > 10_000:
        raise ResourceError("n is capped at 10^4", layer=10_000)
    rep = report or dirichlet_lambda(G, r, measure)
    start = int(np.argmax(rep.phi))
    u = np.zeros(rep.ball_size)
    u[start] = 1.0
    PT = rep.operator.T.tocsr()
    log_scale = 0.0
    for _ in range(n):
        u = PT @ u
        mass = float(u.sum())
        if mass == 0.0:
            log_scale = -math.inf
            break
        u /= mass
        log_scale += math.log(mass)
    log_lower = n * math.log1p(-rep.lam) if rep.lam < 1 else (0.0 if n == 0 else -math.inf)
    out = SurvivalReport(r, n, log_scale, log_lower)
    if not out.ok:
        raise CertificateError(f"log stay probability {log_scale} < n log(1 - lambda) = {log_lower}")
    return out


@dataclass(frozen=True)
class FloorReport:
    values: dict  # r -> lambda r^2
    minimum: float

    @property
    def ok(self) -> bool:
        return self.minimum > 0


def csc_lambda_floor_check(G: Group, r_list, measure: Measure = Measure()) -> FloorReport:
    vals = {r: dirichlet_lambda(G, r, measure).lam * r * r for r in r_list}
    rep = FloorReport(vals, min(vals.values()))
    if not rep.ok:
        raise CertificateError(f"lambda r^2 not bounded below: {vals}")
    return rep


def spectral_csv(reports: Sequence[SpectralReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["r", "ball_size", "lambda"])
    for rep in reports:
        w.writerow([rep.r, rep.ball_size, repr(rep.lam)])
    return buf.getvalue()
