"""Posterior analytics and the posterior-process sampler.

After n distinct observations the posterior mean measure is
w_n P_0 + (1 - w_n) P_n with w_n = (n+1) delta_n, and posterior second
moments are governed by nine constant sequences (products of set
probabilities under the prior).  Raw values grow like n!, so everything
is carried as the normalized ratios to a_n = n! delta_{n-1} ... delta_1,
which stay in [0, 1]; the raw recursions survive only as a small-n
cross-check oracle.  The posterior process itself is sampled exactly via
ordered geometric index gaps and tilted stick-fraction updates.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .mixing import BetaMixing, update_mixing
from .rng import ATOMS_CHANNEL, MATCH_CHANNEL, WEIGHTS_CHANNEL, stream
from .stickprior import DEFAULT_EPSILON, DEFAULT_MAX_STICKS, StickRealization

__all__ = [
    "TiedDataError",
    "InternalConsistencyError",
    "Dataset",
    "PosteriorConstants",
    "PosteriorDraw",
    "constants",
    "constants_raw",
    "nd_ratio_telescoped",
    "gg_ratio_telescoped",
    "posterior_mean",
    "posterior_measure",
    "posterior_second_moment",
    "tie_doubleton",
    "prob_distinct",
    "log_prob_distinct",
    "weight_asymptotics",
    "beta_weight_gamma_form",
    "sample_posterior_indexes",
    "sample_posterior_process",
    "posterior_functional_draws",
]


class TiedDataError(ValueError):
    """Data multiplicity pattern not supported by the requested operation."""


class InternalConsistencyError(RuntimeError):
    """An identity that must hold numerically was violated."""


@dataclass(frozen=True)
class Dataset:
    """Observed points with an explicit multiplicity structure.

    Ties are a modelling statement here, not a floating-point accident:
    either all points are pairwise distinct (``tie is None``) or exactly
    one pair, named by ``tie``, is equal.
    """

    points: tuple
    tie: tuple | None = None

    def __post_init__(self):
        pts = tuple(float(p) for p in self.points)
        object.__setattr__(self, "points", pts)
        n = len(pts)
        if self.tie is None:
            if len(set(pts)) != n:
                raise TiedDataError(
                    "points contain ties; declare the doubleton explicitly")
        else:
            i, j = self.tie
            if not (0 <= i < j < n):
                raise TiedDataError("tie must name two valid indexes i < j")
            if pts[i] != pts[j]:
                raise TiedDataError("tied points must be exactly equal")
            rest = pts[:j] + pts[j + 1:]
            if len(set(rest)) != n - 1:
                raise TiedDataError(
                    "only a single doubleton tie is supported")
            object.__setattr__(self, "tie", (int(i), int(j)))

    @classmethod
    def distinct(cls, points):
        return cls(points=tuple(points))

    @classmethod
    def doubleton(cls, points, i, j):
        return cls(points=tuple(points), tie=(i, j))

    @property
    def n(self):
        return len(self.points)

    @property
    def is_tied(self):
        return self.tie is not None


@dataclass(frozen=True)
class PosteriorConstants:
    """Normalized posterior constant ratios for sample size n.

    All fields except ``log_a`` are ratios against a_n:
    ``nb_over_a = 1 - w`` and ``c_over_a = w`` are exact identities;
    ``f_over_a = i_over_a = c_next_over_a = a_next2_over_a`` equals
    (n+2)(n+1) delta_{n+1} delta_n.
    """

    n: int
    w: float
    log_a: float
    nb_over_a: float
    c_over_a: float
    nd_over_a: float
    gg_over_a: float            # n (n-1) g_n / a_n
    e_over_a: float
    f_over_a: float
    h_over_a: float
    i_over_a: float
    b_next_over_a: float        # b_{n+1} / a_n
    c_next_over_a: float        # c_{n+1} / a_n
    a_next2_over_a: float       # a_{n+2} / a_n

    def full_space_identity(self):
        """nd/a + n(n-1)g/a + (2n+1) b_{n+1}/a + c_{n+1}/a; equals 1."""
        return (self.nd_over_a + self.gg_over_a
                + (2 * self.n + 1) * self.b_next_over_a + self.c_next_over_a)

    def partition_identity(self, simplex):
        """Second-moment reconstruction over a partition; equals 1.

        ``simplex`` is any probability vector of length n.
        """
        p = np.asarray(simplex, dtype=float)
        if p.size != self.n or abs(p.sum() - 1.0) > 1e-9:
            raise ValueError("need a probability vector of length n")
        s2 = float(np.dot(p, p))
        return (self.nd_over_a + self.e_over_a + self.f_over_a * s2
                + self.gg_over_a + 2.0 * (self.n - 1) * self.h_over_a
                + self.i_over_a * (1.0 - s2))

    def as_dict(self):
        return {
            "n": self.n,
            "w_n": self.w,
            "log_a_n": self.log_a,
            "nb_over_a": self.nb_over_a,
            "c_over_a": self.c_over_a,
            "nd_over_a": self.nd_over_a,
            "n_nminus1_g_over_a": self.gg_over_a,
            "e_over_a": self.e_over_a,
            "f_over_a": self.f_over_a,
            "h_over_a": self.h_over_a,
            "i_over_a": self.i_over_a,
            "b_next_over_a": self.b_next_over_a,
            "c_next_over_a": self.c_next_over_a,
            "a_next2_over_a": self.a_next2_over_a,
        }


def _normalized_ratios(mixing, n):
    """d/a, e/a, g/a, h/a, i/a for 1..n via the ratio-space recursions.

    Dividing the raw recursions by a_m and using a_{m-1}/a_m = 1/w_{m-1}
    keeps every quantity O(1); nothing factorial is ever materialized.
    """
    M = mixing.product_moment
    omm = mixing.one_minus_m0
    w = [mixing.prior_weight(j) for j in range(n + 2)]
    rd = np.zeros(n + 1)
    re = np.zeros(n + 1)
    rg = np.zeros(n + 1)
    rh = np.zeros(n + 1)
    ri = np.zeros(n + 1)
    b1 = M(2, 0) / omm(2)
    rd[1] = M(3, 0) / omm(3)
    re[1] = 3.0 * (M(2, 1) + M(1, 2) * b1) / omm(3)
    for m in range(2, n + 1):
        q = omm(m + 2)
        wm1 = w[m - 1]
        m1 = M(1, m + 1)
        rd[m] = (M(3, m - 1) + (m - 1) * m1 * rd[m - 1]) / (q * wm1)
        re[m] = (3.0 * M(2, m) + 3.0 * m1 * (1.0 - w[m]) / m
                 + (m - 1) * m1 * re[m - 1] / wm1) / q
        rg[m] = (2.0 * M(2, m) * (1.0 - wm1) / (m - 1)
                 + (m - 2) * m1 * rg[m - 1]) / (q * wm1)
        rh[m] = (M(2, m) + 2.0 * m1 * (1.0 - w[m]) / m
                 + (m - 2) * m1 * rh[m - 1] / wm1) / q
        ri[m] = (4.0 * m1 * w[m] + (m - 2) * m1 * ri[m - 1] / wm1) / q
    return w, rd, re, rg, rh, ri


def log_prob_distinct(mixing, n):
    """log Pr(first n observations distinct) = log n! + sum log delta_j."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return float(gammaln(n + 1)
                 + math.fsum(math.log(mixing.delta(j)) for j in range(1, n)))


def prob_distinct(mixing, n):
    """Pr(D_n), the prior probability that n observations are all distinct."""
    return math.exp(log_prob_distinct(mixing, n))


def constants(mixing, n):
    """All normalized posterior constant ratios for sample size n >= 1."""
    if n < 1:
        raise ValueError("n must be >= 1")
    w, rd, re, rg, rh, ri = _normalized_ratios(mixing, n)
    f_over_a = (n + 2.0) * (n + 1.0) * mixing.delta(n + 1) * mixing.delta(n)
    return PosteriorConstants(
        n=int(n),
        w=w[n],
        log_a=log_prob_distinct(mixing, n),
        nb_over_a=1.0 - w[n],
        c_over_a=w[n],
        nd_over_a=n * rd[n],
        gg_over_a=n * (n - 1.0) * rg[n],
        e_over_a=re[n],
        f_over_a=f_over_a,
        h_over_a=rh[n],
        i_over_a=ri[n] if n >= 2 else f_over_a,
        b_next_over_a=w[n] * (1.0 - w[n + 1]) / (n + 1.0),
        c_next_over_a=w[n] * w[n + 1],
        a_next2_over_a=w[n] * w[n + 1],
    )


def constants_raw(mixing, n):
    """Raw constant sequences by the unnormalized recursions, n <= 20.

    Cross-check oracle only: the values contain n!-type factors and the
    intermediate ratios degrade or overflow well before n = 100.
    Returns dict of arrays indexed 0..n (index 0/1 unused where undefined).
    """
    if n > 20:
        raise ValueError("raw recursions are a small-n oracle; use constants()")
    M = mixing.product_moment
    omm = mixing.one_minus_m0
    out = {k: np.full(n + 3, np.nan) for k in "abcdefghi"}
    a = out["a"]
    a[0] = 1.0
    for m in range(1, n + 3):
        a[m] = math.factorial(m) * np.prod([mixing.delta(j) for j in range(1, m)])
    b, c = out["b"], out["c"]
    b[1] = M(2, 0) / omm(2)
    c[1] = 2.0 * M(1, 1) / omm(2)
    for m in range(2, n + 2):
        b[m] = (M(2, m - 1) * a[m - 1] + (m - 1) * M(1, m) * b[m - 1]) / omm(m + 1)
        c[m] = (2.0 * M(1, m) * a[m] + (m - 1) * M(1, m) * c[m - 1]) / omm(m + 1)
    d, e, f = out["d"], out["e"], out["f"]
    d[1] = M(3, 0) / omm(3)
    e[1] = 3.0 * (M(2, 1) + M(1, 2) * b[1]) / omm(3)
    f[1] = 3.0 * M(1, 2) * c[1] / omm(3)
    for m in range(2, n + 1):
        q = omm(m + 2)
        d[m] = (M(3, m - 1) * a[m - 1] + (m - 1) * M(1, m + 1) * d[m - 1]) / q
        e[m] = (3.0 * M(2, m) * a[m] + 3.0 * M(1, m + 1) * b[m]
                + (m - 1) * M(1, m + 1) * e[m - 1]) / q
        f[m] = (3.0 * M(1, m + 1) * c[m] + (m - 1) * M(1, m + 1) * f[m - 1]) / q
    g, h, i_ = out["g"], out["h"], out["i"]
    if n >= 2:
        g[2] = 2.0 * M(2, 2) * b[1] / omm(4)
        h[2] = (M(2, 2) * c[1] + 2.0 * M(1, 3) * b[2]) / omm(4)
        i_[2] = 4.0 * M(1, 3) * c[2] / omm(4)
    for m in range(3, n + 1):
        q = omm(m + 2)
        g[m] = (2.0 * M(2, m) * b[m - 1] + (m - 2) * M(1, m + 1) * g[m - 1]) / q
        h[m] = (M(2, m) * c[m - 1] + 2.0 * M(1, m + 1) * b[m]
                + (m - 2) * M(1, m + 1) * h[m - 1]) / q
        i_[m] = (4.0 * M(1, m + 1) * c[m] + (m - 2) * M(1, m + 1) * i_[m - 1]) / q
    return out


def nd_ratio_telescoped(mixing, n):
    """n d_n / a_n by the telescoped closed form.

    nd/a = delta_{n+1} delta_n sum_{j=0}^{n-1}
           [M(3,j)/(1-M(0,j+3))] / (delta_j delta_{j+1} delta_{j+2}).
    """
    delta = [mixing.delta(j) for j in range(n + 2)]
    acc = math.fsum(
        mixing.product_moment(3, j) / mixing.one_minus_m0(j + 3)
        / (delta[j] * delta[j + 1] * delta[j + 2])
        for j in range(n))
    return delta[n + 1] * delta[n] * acc


def gg_ratio_telescoped(mixing, n):
    """n (n-1) g_n / a_n via the eta_j sum."""
    delta = [mixing.delta(j) for j in range(n + 2)]
    w = [mixing.prior_weight(j) for j in range(n)]
    acc = math.fsum(
        2.0 * mixing.product_moment(2, j + 1) * (1.0 - w[j])
        / mixing.one_minus_m0(j + 3)
        / (delta[j] * delta[j + 1] * delta[j + 2])
        for j in range(1, n))
    return delta[n + 1] * delta[n] * acc


# ---------------------------------------------------------------------------
# posterior mean and variance of random means
# ---------------------------------------------------------------------------

def _require_distinct(data):
    if data.is_tied:
        raise TiedDataError(
            "data contain a doubleton tie; use tie_doubleton for this case")


def posterior_mean(mixing, base, data):
    """E(theta | data) = w_n theta_0 + (1 - w_n) mean g(x_i).

    Needs an atom-free base and all-distinct data; n = 0 returns the
    prior mean.
    """
    _require_distinct(data)
    if not base.atom_free:
        raise ValueError("posterior formulas require an atom-free base measure")
    theta0 = base.mean
    if data.n == 0:
        return theta0
    w = mixing.prior_weight(data.n)
    gbar = float(np.mean(base.apply(np.asarray(data.points))))
    return w * theta0 + (1.0 - w) * gbar


def posterior_measure(mixing, data):
    """Decomposition of the posterior mean measure for distinct data."""
    _require_distinct(data)
    if data.n == 0:
        return {"w_n": 1.0, "outside_factor": 1.0, "atom_mass": 0.0}
    w = mixing.prior_weight(data.n)
    return {"w_n": w, "outside_factor": w,
            "atom_mass": (1.0 - w) / data.n}


def posterior_second_moment(mixing, base, data):
    """E(theta^2 | data) and the posterior variance of the random mean.

    Collects the normalized-constant expression

        (n^2 g/a) theta_n^2 + 2 (n b_{n+1}/a) theta_n theta_0
        + (a_{n+2}/a) theta_0^2 + (b_{n+1}/a) int g^2 dP_0
        + ((n d - n g)/a) int g^2 dP_n.
    """
    _require_distinct(data)
    if not base.atom_free:
        raise ValueError("posterior formulas require an atom-free base measure")
    n = data.n
    theta0 = base.mean
    if n == 0:
        from .moments import central_moment as prior_central
        var = prior_central(mixing, base, 2)
        return {"second_moment": var + theta0 * theta0, "variance": var}
    pc = constants(mixing, n)
    gx = np.asarray(base.apply(np.asarray(data.points)), dtype=float)
    theta_n = float(np.mean(gx))
    g2_pn = float(np.mean(gx * gx))
    g2_p0 = base.second_raw_moment()
    if n >= 2:
        ng_over_a = pc.gg_over_a / (n - 1.0)
        n2g_over_a = pc.gg_over_a + ng_over_a
    else:
        ng_over_a = 0.0
        n2g_over_a = 0.0
    second = (n2g_over_a * theta_n ** 2
              + 2.0 * n * pc.b_next_over_a * theta_n * theta0
              + pc.a_next2_over_a * theta0 ** 2
              + pc.b_next_over_a * g2_p0
              + (pc.nd_over_a - ng_over_a) * g2_pn)
    mean = pc.w * theta0 + (1.0 - pc.w) * theta_n
    var = second - mean * mean
    if var < -1e-9:
        raise InternalConsistencyError(
            f"posterior variance {var:.3e} below the -1e-9 floor")
    return {"second_moment": second, "variance": max(var, 0.0)}


def tie_doubleton(mixing, data):
    """Posterior mass layout when exactly one pair of points coincides.

    Outside the data the posterior mean measure is (b_n / b_{n-1}) P_0;
    the tied point carries d_{n-1}/b_{n-1} and each of the n-2 remaining
    points carries g_{n-1}/b_{n-1}.
    """
    if not data.is_tied:
        raise TiedDataError("tie_doubleton needs a dataset with a doubleton tie")
    n = data.n
    m = n - 1
    w, rd, _, rg, _, _ = _normalized_ratios(mixing, m)
    w_m, w_n = w[m], mixing.prior_weight(n)
    # b_n/b_{n-1} via b_k = a_k (1 - w_k)/k and a_m/a_{m+1}... kept in ratio space
    outside = w_m * (1.0 - w_n) * m / (n * (1.0 - w_m))
    double_mass = rd[m] * m / (1.0 - w_m)
    single_mass = rg[m] * m / (1.0 - w_m) if m >= 2 else 0.0
    return {
        "n": n,
        "outside_mass_factor": outside,
        "double_point_mass": double_mass,
        "single_point_mass": single_mass,
        "total": outside + double_mass + (n - 2) * single_mass,
    }


# ---------------------------------------------------------------------------
# how fast the prior is forgotten
# ---------------------------------------------------------------------------

def beta_weight_gamma_form(a, b, n):
    """w_n for Beta(a, b) sticks through the Gamma-function closed form.

    Deliberately a different computational route from the delta-sequence
    path, for cross-checks.
    """
    big = math.exp(gammaln(a + b + n + 1) - gammaln(b + n + 1) - gammaln(a + b))
    return (n + 1.0) / (n + b) * (a / math.gamma(b)) / (big - 1.0 / math.gamma(b))


def weight_asymptotics(a, b, n_grid):
    """Decay of u_n = (n+1) E B (1-B)^n for Beta(a, b) sticks.

    Returns the exact values on the grid, the least-squares slope of
    log u_n on log n (the decay exponent, -a), and the constant estimated
    as the average of n^a u_n over the largest decade; the constant's
    analytic value is a Gamma(a+b)/Gamma(b).
    """
    if a <= 0 or b <= 0:
        raise ValueError("a, b must be positive")
    n = np.asarray(n_grid, dtype=float)
    if n.size < 2 or n.max() / n.min() < 100.0:
        raise ValueError("n_grid must span at least two decades")
    if a == round(a) and a <= 20:
        # integer a: the Gamma ratio telescopes, avoiding the ~1e-9
        # relative error of huge log-gamma differences
        k = int(round(a))
        front = (n + 1.0) * a * math.prod(b + t for t in range(k))
        denom = np.ones_like(n)
        for t in range(k + 1):
            denom *= b + n + t
        u = front / denom
        log_u = np.log(u)
    else:
        log_u = (np.log(n + 1.0) + math.log(a) + gammaln(a + b) - gammaln(b)
                 + gammaln(b + n) - gammaln(a + b + n + 1.0))
        u = np.exp(log_u)
    slope, intercept = np.polyfit(np.log(n), log_u, 1)
    top = n >= n.max() / 10.0
    constant = float(np.mean(n[top] ** a * u[top]))
    theory = a * math.exp(gammaln(a + b) - gammaln(b))
    return {"n": n, "u": u, "slope": float(slope),
            "intercept": float(intercept), "constant": constant,
            "theory_constant": theory}


# ---------------------------------------------------------------------------
# sampling the posterior process
# ---------------------------------------------------------------------------

@dataclass
class PosteriorDraw:
    """One draw from the posterior process given distinct data."""

    ordered_indexes: np.ndarray
    pinned: dict
    realization: StickRealization

    def to_csv(self, path, extra_comments=()):
        """Realization CSV with a pinned-data annotation column."""
        real = self.realization
        lines = [f"# remainder={real.remainder:.17g}",
                 f"# truncation_level={real.truncation_level}",
                 f"# cap_reached={str(real.cap_reached).lower()}"]
        lines.extend(extra_comments)
        lines.append("weight,atom,pinned")
        for k, (wgt, atom) in enumerate(zip(real.weights, real.atoms), start=1):
            flag = 1 if k in self.pinned else 0
            lines.append(f"{wgt:.17g},{atom:.17g},{flag}")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")


def _gap_probabilities(mixing, n):
    # gap k has success probability 1 - M(0, n-k+1), k = 1..n
    return np.array([mixing.one_minus_m0(m) for m in range(n, 0, -1)])


def sample_posterior_indexes(mixing, n, seed=0, count=None):
    """Ordered posterior stick indexes J_(1) < ... < J_(n).

    The gaps are independent geometric variables on {1, 2, ...} with
    success probabilities 1 - M(0, n), ..., 1 - M(0, 1).  Returns shape
    (n,) or (count, n).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = stream(seed, WEIGHTS_CHANNEL)
    p = _gap_probabilities(mixing, n)
    if count is None:
        return np.cumsum(rng.geometric(p))
    gaps = rng.geometric(p[None, :], size=(int(count), n))
    return np.cumsum(gaps, axis=1)


def sample_posterior_process(mixing, base, data, epsilon=DEFAULT_EPSILON,
                             seed=0, max_sticks=DEFAULT_MAX_STICKS):
    """One exact posterior-process draw given all-distinct data.

    Data points are matched to the ordered indexes by a uniform random
    permutation; stick fractions at index k are drawn from H tilted by
    (hits at k, survivors past k), and beyond the largest pinned index
    the fractions revert to H.
    """
    _require_distinct(data)
    if data.n == 0:
        raise ValueError("posterior sampling needs at least one observation")
    if not base.atom_free:
        raise ValueError("posterior sampling requires an atom-free base measure")
    n = data.n
    rng_w = stream(seed, WEIGHTS_CHANNEL)
    rng_a = stream(seed, ATOMS_CHANNEL)
    rng_m = stream(seed, MATCH_CHANNEL)
    idx = np.cumsum(rng_w.geometric(_gap_probabilities(mixing, n)))
    perm = rng_m.permutation(n)
    pinned = {int(idx[perm[i]]): float(data.points[i]) for i in range(n)}
    j_max = int(idx[-1])
    fractions = np.empty(0)
    chunks = []
    remainder = 1.0
    for k in range(1, j_max + 1):
        hits = 1 if k in pinned else 0
        survivors = int(np.sum(idx >= k))
        tilted = update_mixing(mixing, hits, survivors - hits)
        bk = float(tilted.sample(rng_w))
        chunks.append(bk)
        remainder *= 1.0 - bk
    capped = False
    count = j_max
    while remainder >= epsilon:
        if count >= max_sticks:
            capped = True
            break
        bk = float(mixing.sample(rng_w))
        chunks.append(bk)
        remainder *= 1.0 - bk
        count += 1
    fractions = np.asarray(chunks)
    survivor = np.concatenate([[1.0], np.cumprod(1.0 - fractions)[:-1]])
    weights = survivor * fractions
    atoms = np.atleast_1d(base.sample_xi(rng_a, fractions.size)).astype(float)
    for k, value in pinned.items():
        atoms[k - 1] = value
    realization = StickRealization(weights=weights, atoms=atoms,
                                   remainder=float(remainder),
                                   fractions=fractions, cap_reached=capped)
    return PosteriorDraw(ordered_indexes=idx, pinned=pinned,
                         realization=realization)


def posterior_functional_draws(mixing, base, data, count, epsilon=1e-10,
                               seed=0, track_point=None,
                               max_sticks=DEFAULT_MAX_STICKS):
    """Monte Carlo draws of int g dP under the posterior.

    Returns a dict with ``means`` (sum gamma'_k g(xi'_k) per draw) and,
    when ``track_point`` names a data index, ``point_mass`` (the stick
    weight pinned to that observation).  Beta mixing uses a replicate-
    vectorized path; other mixings fall back to the per-draw sampler.
    """
    _require_distinct(data)
    if data.n == 0:
        raise ValueError("posterior sampling needs at least one observation")
    n = data.n
    if not isinstance(mixing, BetaMixing):
        means = np.empty(count)
        pmass = np.empty(count) if track_point is not None else None
        from .rng import child_seed
        for r in range(count):
            draw = sample_posterior_process(mixing, base, data,
                                            epsilon=epsilon,
                                            seed=child_seed(seed, f"draw{r}"),
                                            max_sticks=max_sticks)
            real = draw.realization
            means[r] = real.mean_of(base.apply)
            if pmass is not None:
                tracked = float(data.points[track_point])
                k = next(k for k, v in draw.pinned.items() if v == tracked)
                pmass[r] = real.weights[k - 1]
        out = {"means": means, "cap_reached": False}
        if pmass is not None:
            out["point_mass"] = pmass
        return out

    a, b = mixing.a, mixing.b
    rng_w = stream(seed, WEIGHTS_CHANNEL)
    rng_a = stream(seed, ATOMS_CHANNEL)
    rng_m = stream(seed, MATCH_CHANNEL)
    rows = np.arange(count)
    p = _gap_probabilities(mixing, n)
    idx = np.cumsum(rng_w.geometric(p[None, :], size=(count, n)), axis=1)
    perm = rng_m.permuted(np.tile(np.arange(n), (count, 1)), axis=1)
    g_data = np.asarray(base.apply(np.asarray(data.points)), dtype=float)
    inv = np.argsort(perm, axis=1)
    g_at_pos = g_data[inv]          # g value pinned at ordered position
    track_k = None
    point_mass = None
    if track_point is not None:
        track_k = idx[rows, perm[:, track_point]]
        point_mass = np.zeros(count)

    totals = np.zeros(count)
    remainder = np.ones(count)
    ptr = np.zeros(count, dtype=np.int64)
    k = 0
    capped = False
    while (remainder >= epsilon).any() or (ptr < n).any():
        k += 1
        if k > max_sticks:
            capped = True
            break
        pos = np.minimum(ptr, n - 1)
        matched = (ptr < n) & (idx[rows, pos] == k)
        survivors = n - ptr
        hits = matched.astype(np.int64)
        bk = rng_w.beta(a + hits, b + survivors - hits)
        gamma_k = remainder * bk
        fresh = np.asarray(base.sample_y(rng_a, count), dtype=float)
        y = np.where(matched, g_at_pos[rows, pos], fresh)
        totals += gamma_k * y
        if track_k is not None:
            here = track_k == k
            point_mass = np.where(here, gamma_k, point_mass)
        remainder = remainder * (1.0 - bk)
        ptr = ptr + hits
    out = {"means": totals, "remainder": remainder, "cap_reached": capped}
    if point_mass is not None:
        out["point_mass"] = point_mass
    return out
