"""Generalized defective 2-edge coloring through balanced orientations.

Edge ``(u, v)`` with ``u`` in U is red iff it ends up oriented U -> V.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import UsageError
from .graph import Bipartition, Graph
from .orientation import OrientationResult, beta_art, compute_balanced_orientation
from .graph import compute_stats
from .sim import RoundMetrics
from .verify import Verdict, check_defective_2ec, red_blue_neighbors

__all__ = ["DefectiveSpec", "DefectiveResult", "eta_from_lambda", "eta_vector", "defective_2ec", "check_defective_2ec"]


@dataclass(frozen=True)
class DefectiveSpec:
    lam: tuple
    eps: Fraction
    beta: Fraction

    def __post_init__(self):
        lam = tuple(Fraction(x) for x in self.lam)
        if any(not (0 <= x <= 1) for x in lam):
            raise UsageError("lambda values must lie in [0, 1]")
        if Fraction(self.eps) < 0 or Fraction(self.beta) < 0:
            raise UsageError("eps and beta must be non-negative")
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "eps", Fraction(self.eps))
        object.__setattr__(self, "beta", Fraction(self.beta))


def _eta(lam: Fraction, du: int, dv: int, de: int, eps: Fraction, beta: Fraction) -> Fraction:
    return 1 - 2 * lam - (1 - lam) * du + lam * dv + eps * (lam - Fraction(1, 2)) * de + (2 * lam - 1) * beta


def eta_from_lambda(g: Graph, bip: Bipartition, e: int, spec: DefectiveSpec) -> Fraction:
    """Orientation parameter of edge ``e`` for the target split ``lambda_e``."""
    us, vs = bip.oriented_edges(g)
    e = g.check_edge(e)
    u, v = int(us[e]), int(vs[e])
    de = int(g.deg[u] + g.deg[v] - 2)
    return _eta(spec.lam[e], int(g.deg[u]), int(g.deg[v]), de, spec.eps, spec.beta)


def eta_vector(g: Graph, bip: Bipartition, spec: DefectiveSpec) -> list:
    us, vs = bip.oriented_edges(g)
    du, dv = g.deg[us].tolist(), g.deg[vs].tolist()
    memo = {}
    out = []
    for lam, a, b in zip(spec.lam, du, dv):
        key = (lam, a, b)
        if key not in memo:
            memo[key] = _eta(lam, a, b, a + b - 2, spec.eps, spec.beta)
        out.append(memo[key])
    return out


@dataclass
class DefectiveResult:
    red: np.ndarray
    beta: int  # beta of the orientation; the asserted additive defect term is 2 * beta
    orientation: OrientationResult
    metrics: RoundMetrics
    max_ratio: float  # max over edges of defect / (share * deg(e) + 1), reported only

    def verdict(self, g: Graph, lam, eps) -> Verdict:
        return check_defective_2ec(g, lam, eps, 2 * self.beta, self.red)


def defective_2ec(
    g: Graph,
    bip: Bipartition,
    lam,
    eps,
    eta_beta=None,
    metrics: RoundMetrics | None = None,
) -> DefectiveResult:
    """Red/blue split meeting the (1+eps, 2*beta)-relaxed defect bounds.

    ``eta_beta`` is the beta used inside the orientation parameters; it defaults to
    the orientation's own constant so that the reduction applies verbatim.
    """
    bip.require(g)
    eps = Fraction(eps)
    if not (0 < eps <= 1):
        raise UsageError("eps must lie in (0, 1]")
    if len(lam) != g.m:
        raise UsageError("one lambda per edge")
    beta = beta_art(compute_stats(g).bar_delta, eps)
    spec = DefectiveSpec(tuple(lam), eps, beta if eta_beta is None else eta_beta)
    eta = eta_vector(g, bip, spec)
    met = RoundMetrics()
    ori = compute_balanced_orientation(g, bip, eta, eps, metrics=met)
    red = ori.u_to_v.copy()
    ratio = 0.0
    if g.m:
        rn, bn = red_blue_neighbors(g, red)
        lam_f = np.array([float(x) for x in spec.lam])
        share = np.where(red, lam_f, 1 - lam_f)
        defect = np.where(red, rn, bn)
        ratio = float(np.max(defect / (share * g.edge_degrees() + 1)))
    if metrics is not None:
        metrics.then(met)
    return DefectiveResult(red, beta, ori, met, ratio)
