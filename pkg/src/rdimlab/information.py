"""Shannon entropy, mutual information, and the inequalities used as test oracles.

Everything is in bits (log base 2).  The convention 0*log(0) = 0 is applied
throughout by restricting sums to the support.
"""

from __future__ import annotations

import numpy as np

from .metricspace import Distribution, JointDistribution

CHAIN_TOL = 1e-10


class InfeasibleWitnessError(ValueError):
    """Witness function fails the feasibility integral for some reproduction point."""


def _plog2p(p: np.ndarray) -> np.ndarray:
    out = np.zeros_like(p)
    mask = p > 0
    out[mask] = p[mask] * np.log2(p[mask])
    return out


def entropy_bits(probs: np.ndarray) -> float:
    """Entropy of a raw probability array of any shape."""
    return float(-_plog2p(np.asarray(probs, dtype=float)).sum())


def shannon_entropy(p: Distribution) -> float:
    """H(p) = -sum p log2 p, between 0 and log2 |support|."""
    return entropy_bits(p.probs)


def binary_entropy(x: float) -> float:
    """h2(x) for x in [0,1]."""
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return float(-x * np.log2(x) - (1 - x) * np.log2(1 - x))


def mutual_information(j: JointDistribution) -> float:
    """I(X;Y) = H(X) + H(Y) - H(X,Y) for a two-axis joint."""
    if j.ndim != 2:
        raise ValueError("mutual_information expects a two-axis joint")
    p = j.probs
    return entropy_bits(p.sum(axis=1)) + entropy_bits(p.sum(axis=0)) - entropy_bits(p)


def mutual_information_xy(probs: np.ndarray) -> float:
    """Same as mutual_information but on a raw matrix (no validation)."""
    p = np.asarray(probs, dtype=float)
    return entropy_bits(p.sum(axis=1)) + entropy_bits(p.sum(axis=0)) - entropy_bits(p)


def conditional_mutual_information(t: JointDistribution) -> float:
    """I(X;Y|Z) = sum_z P(z) I(X;Y | Z=z) for a three-axis joint (X,Y,Z).

    Slices with P(z) = 0 contribute nothing.  The chain rule
    I(X;(Y,Z)) = I(X;Z) + I(X;Y|Z) holds within 1e-10 and is exercised in
    the test suite.
    """
    if t.ndim != 3:
        raise ValueError("conditional_mutual_information expects a three-axis joint")
    p = t.probs
    pz = p.sum(axis=(0, 1))
    total = 0.0
    for z in range(p.shape[2]):
        if pz[z] <= 0:
            continue
        total += pz[z] * mutual_information_xy(p[:, :, z] / pz[z])
    return float(total)


def sample_markov_triple(seed: int, sizes: tuple) -> JointDistribution:
    """Random joint of the form P(x) P(y|x) P(z|y), reproducible from seed.

    By construction X -> Y -> Z is a Markov chain, so I(X;Z|Y) = 0 and the
    data-processing inequality I(X;Z) <= I(X;Y) holds.
    """
    nx, ny, nz = sizes
    if min(sizes) < 1:
        raise ValueError("sizes must be at least 1")
    rng = np.random.default_rng(seed)
    px = rng.random(nx) + 1e-3
    px /= px.sum()
    py_x = rng.random((nx, ny)) + 1e-3
    py_x /= py_x.sum(axis=1, keepdims=True)
    pz_y = rng.random((ny, nz)) + 1e-3
    pz_y /= pz_y.sum(axis=1, keepdims=True)
    joint = px[:, None, None] * py_x[:, :, None] * pz_y[None, :, :]
    return JointDistribution(joint)


def markov_chain_gaps(t: JointDistribution) -> tuple:
    """(DPI slack, conditional-independence residual) for a triple joint.

    Returns (I(X;Y) - I(X;Z), I(X;Z|Y)); both are >= 0 for a Markov chain
    X -> Y -> Z.
    """
    p = t.probs
    i_xy = mutual_information_xy(p.sum(axis=2))
    i_xz = mutual_information_xy(p.sum(axis=1))
    i_xz_y = conditional_mutual_information(
        JointDistribution(np.transpose(p, (0, 2, 1))))
    return i_xy - i_xz, i_xz_y


def variational_mi_lower_bound(mu: Distribution, rho: np.ndarray, lam,
                               a: float, eps: float) -> float:
    """Witness-based lower bound on I(X;Y) for channels with E rho(X,Y) < eps.

    Requires the feasibility condition
        sum_x lam(x) 2^(-a rho(x,y)) mu(x) <= 1   for every y,
    verified here with tolerance 1e-12; then returns
        -a*eps + sum_x mu(x) log2 lam(x),
    which lower-bounds the mutual information of every admissible channel.
    """
    if a < 0:
        raise ValueError("slope a must be nonnegative")
    if eps <= 0:
        raise ValueError("eps must be positive")
    rho = np.asarray(rho, dtype=float)
    lam = np.broadcast_to(np.asarray(lam, dtype=float), (mu.size,))
    if (lam < 0).any():
        raise InfeasibleWitnessError("witness must be nonnegative")
    integrals = (lam * mu.probs) @ np.exp2(-a * rho)
    worst = int(np.argmax(integrals))
    margin = float(integrals[worst] - 1.0)
    if margin > 1e-12:
        raise InfeasibleWitnessError(
            f"witness infeasible at reproduction index {worst}: integral exceeds 1 by {margin:.3e}")
    support = mu.probs > 0
    if (lam[support] <= 0).any():
        return float("-inf")
    return float(-a * eps + np.sum(mu.probs[support] * np.log2(lam[support])))


def best_exponential_witness_bound(mu: Distribution, rho: np.ndarray, eps: float,
                                   a_grid=None) -> tuple:
    """1-D search over the slope a with the largest feasible constant witness.

    For each a the best constant witness is lam = 1 / max_y sum_x mu(x) 2^(-a rho(x,y)).
    Returns (best bound, best a).
    """
    if a_grid is None:
        a_grid = np.linspace(0.0, 30.0, 3001)
    rho = np.asarray(rho, dtype=float)
    best = (-np.inf, 0.0)
    for a in np.asarray(a_grid, dtype=float):
        integrals = mu.probs @ np.exp2(-a * rho)
        lam = 1.0 / integrals.max()
        bound = -a * eps + np.log2(lam)
        if bound > best[0]:
            best = (float(bound), float(a))
    return best
