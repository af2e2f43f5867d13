"""Sampling the prior process: stick realizations, chains, and MC helpers.

The random measure is built as gamma_1 = B_1, gamma_2 = (1-B_1) B_2, ...
with i.i.d. fractions B_j from the mixing distribution and i.i.d. atoms
from the base measure.  Realizations are truncated when the remainder
mass prod(1 - B_j) falls below epsilon; the remainder is always reported,
never silently redistributed, so sum(weights) + remainder stays an
identity.  Weights and atoms come from independent substreams of one
seed, which keeps weight draws invariant under a change of base measure.
"""

import math
from dataclasses import dataclass

import numpy as np

from .rng import weight_and_atom_streams

__all__ = [
    "StickRealization",
    "TruncationCapError",
    "sample_sticks",
    "sample_process",
    "mean_chain",
    "sample_mean_draws",
    "sample_distinct_flags",
]

DEFAULT_EPSILON = 1e-12
DEFAULT_MAX_STICKS = 10 ** 6
_BLOCK = 64


class TruncationCapError(RuntimeError):
    """Stick cap reached before the remainder dropped below epsilon."""


@dataclass
class StickRealization:
    """Truncated stick-breaking realization with explicit remainder mass."""

    weights: np.ndarray
    atoms: np.ndarray | None
    remainder: float
    fractions: np.ndarray | None = None
    cap_reached: bool = False

    @property
    def truncation_level(self):
        return int(self.weights.size)

    def total_mass(self):
        """sum of weights plus remainder; equals 1 by construction."""
        return math.fsum(self.weights) + self.remainder

    def mean_of(self, g):
        """Truncated random mean sum gamma_j g(atom_j)."""
        if self.atoms is None:
            raise ValueError("realization has no atoms")
        return float(np.dot(self.weights, g(self.atoms)))

    def set_probability(self, lo, hi):
        """Mass given to [lo, hi) by the truncated measure."""
        if self.atoms is None:
            raise ValueError("realization has no atoms")
        inside = (self.atoms >= lo) & (self.atoms < hi)
        return float(self.weights[inside].sum())

    def to_csv(self, path, extra_comments=()):
        """Write `weight,atom` rows; remainder and level go in comments."""
        lines = [f"# remainder={self.remainder:.17g}",
                 f"# truncation_level={self.truncation_level}",
                 f"# cap_reached={str(self.cap_reached).lower()}"]
        lines.extend(extra_comments)
        lines.append("weight,atom")
        atoms = (self.atoms if self.atoms is not None
                 else np.full(self.weights.size, np.nan))
        for wgt, atom in zip(self.weights, atoms):
            lines.append(f"{wgt:.17g},{atom:.17g}")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")


def _draw_fractions(mixing, rng, epsilon, max_sticks):
    """Draw B_j blocks until the running remainder drops below epsilon."""
    blocks = []
    remainder = 1.0
    count = 0
    while remainder >= epsilon and count < max_sticks:
        block = np.atleast_1d(mixing.sample(rng, min(_BLOCK, max_sticks - count)))
        partial = remainder * np.cumprod(1.0 - block)
        stop = np.nonzero(partial < epsilon)[0]
        if stop.size:
            cut = stop[0] + 1
            blocks.append(block[:cut])
            remainder = float(partial[cut - 1])
            count += cut
            break
        blocks.append(block)
        remainder = float(partial[-1])
        count += block.size
    fractions = np.concatenate(blocks) if blocks else np.empty(0)
    return fractions, remainder, remainder >= epsilon


def sample_sticks(mixing, epsilon=DEFAULT_EPSILON, seed=0,
                  max_sticks=DEFAULT_MAX_STICKS, keep_fractions=True):
    """Weights-only realization; deterministic given the seed.

    Hitting the cap with remainder >= epsilon flags the realization rather
    than failing, so callers can decide whether the bias is tolerable.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    rng_w, _ = weight_and_atom_streams(seed)
    fractions, remainder, capped = _draw_fractions(mixing, rng_w, epsilon, max_sticks)
    survivor = np.concatenate([[1.0], np.cumprod(1.0 - fractions)[:-1]])
    weights = survivor * fractions
    return StickRealization(weights=weights, atoms=None, remainder=remainder,
                            fractions=fractions if keep_fractions else None,
                            cap_reached=capped)


def sample_process(mixing, base, epsilon=DEFAULT_EPSILON, seed=0,
                   max_sticks=DEFAULT_MAX_STICKS, keep_fractions=True):
    """Full realization: sticks plus i.i.d. atoms from the base measure."""
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    rng_w, rng_a = weight_and_atom_streams(seed)
    fractions, remainder, capped = _draw_fractions(mixing, rng_w, epsilon, max_sticks)
    survivor = np.concatenate([[1.0], np.cumprod(1.0 - fractions)[:-1]])
    weights = survivor * fractions
    atoms = np.atleast_1d(base.sample_xi(rng_a, weights.size))
    return StickRealization(weights=weights, atoms=atoms, remainder=remainder,
                            fractions=fractions if keep_fractions else None,
                            cap_reached=capped)


def mean_chain(mixing, base, steps, burn_in=0, seed=0):
    """Markov chain theta_k = B_k Y_k + (1-B_k) theta_{k-1}.

    The equilibrium law is that of the prior random mean int g dP.
    Returns the post-burn-in trajectory.
    """
    if not steps > burn_in >= 0:
        raise ValueError("need steps > burn_in >= 0")
    rng_w, rng_a = weight_and_atom_streams(seed)
    fractions = np.atleast_1d(mixing.sample(rng_w, steps))
    ys = np.atleast_1d(base.sample_y(rng_a, steps))
    out = np.empty(steps)
    theta = ys[0]
    for k in range(steps):
        theta = fractions[k] * ys[k] + (1.0 - fractions[k]) * theta
        out[k] = theta
    return out[burn_in:]


def sample_mean_draws(mixing, base, count, epsilon=1e-10, seed=0,
                      max_sticks=DEFAULT_MAX_STICKS):
    """Independent truncated draws of the random mean sum gamma_j g(xi_j).

    Vectorized over replicates: each round draws one more stick for every
    replicate whose remainder is still >= epsilon.  Indicator transforms
    make this a draw of the set probability P(A).
    """
    rng_w, rng_a = weight_and_atom_streams(seed)
    total = np.zeros(count)
    remainder = np.ones(count)
    active = np.ones(count, dtype=bool)
    rounds = 0
    while active.any():
        n_act = int(active.sum())
        fractions = np.atleast_1d(mixing.sample(rng_w, n_act))
        ys = np.atleast_1d(base.sample_y(rng_a, n_act))
        total[active] += remainder[active] * fractions * ys
        remainder[active] *= 1.0 - fractions
        active[active] = remainder[active] >= epsilon
        rounds += 1
        if rounds >= max_sticks:
            raise TruncationCapError(
                f"{int(active.sum())} replicates still above epsilon after "
                f"{rounds} sticks")
    return total


def sample_distinct_flags(mixing, n, count, epsilon=DEFAULT_EPSILON, seed=0,
                          max_sticks=DEFAULT_MAX_STICKS):
    """For each replicate, whether n observations from one prior draw are distinct.

    Observations pick atoms with probabilities gamma_j; with an atom-free
    base, ties happen exactly when two picks share a stick index, so only
    the indexes are simulated.
    """
    rng_w, rng_a = weight_and_atom_streams(seed)
    u = rng_a.random((count, n))
    idx = np.full((count, n), -1, dtype=np.int64)
    cum = np.zeros(count)
    remainder = np.ones(count)
    k = 0
    while (idx < 0).any():
        k += 1
        if k > max_sticks:
            raise TruncationCapError("observation indexes unresolved at the stick cap")
        fractions = np.atleast_1d(mixing.sample(rng_w, count))
        new_cum = cum + remainder * fractions
        hit = (u > cum[:, None]) & (u <= new_cum[:, None]) & (idx < 0)
        idx[hit] = k
        cum = new_cum
        remainder *= 1.0 - fractions
    srt = np.sort(idx, axis=1)
    return np.all(np.diff(srt, axis=1) != 0, axis=1)
