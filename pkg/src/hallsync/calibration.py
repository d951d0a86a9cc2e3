"""Empirical constants for the shell-norm inequalities.

The dyadic-shell estimates used by the synchronization analysis hold with
dimensionless constants that the analysis never pins down.  This module
measures them on ensembles of seeded random fields so that regression tests
can assert the constants stay within a fixed factor of the recorded pilot
values.  The pilot numbers below were produced by ``python -m
hallsync.calibration`` at the seeds and trial counts shown and are frozen
here on purpose: recomputing them must land within a factor of two.
"""

from __future__ import annotations

import numpy as np

from .grid import Grid, SpectralField, l2_norm
from .lp import (
    bernstein_ratio,
    build_partition,
    commutator_convection,
    commutator_convection_bound,
    commutator_hall,
    commutator_hall_bound,
    project,
)

__all__ = [
    "bernstein_pilot",
    "commutator_pilot",
    "PILOT_BERNSTEIN",
    "PILOT_COMMUTATOR",
]

# max of ||f_q||_r / (lambda_q^{3(1/r-1/s)} ||f_q||_s) over 200 single-shell
# fields per grid; seed 2024; keys are (n, r, s) with s = inf encoded as 0.0
PILOT_BERNSTEIN = {
    (32, 2.0, 0.0): 0.5447,
    (32, 2.5, 0.0): 0.5601,
    (32, 2.0, 4.0): 0.9182,
    (64, 2.0, 0.0): 0.5637,
    (64, 2.5, 0.0): 0.5786,
    (64, 2.0, 4.0): 0.9153,
}

# max of ||commutator||_2 / bound over 100 trials at n = 32, seed 7171
PILOT_COMMUTATOR = {
    "convection": 4.0159,
    "hall": 4.2664,
}


def _random_shell_field(grid, part, rng, q):
    """Divergence-agnostic random field confined to shell q."""
    vals = rng.standard_normal((grid.n,) * 3 + (3,))
    import scipy.fft as sfft

    c = sfft.fftn(vals, axes=(0, 1, 2)) / grid.n ** 3
    c *= grid.dealias_mask[..., None]
    return project(SpectralField(grid, c), q, part)


def bernstein_pilot(n: int, trials: int = 200, seed: int = 2024) -> dict:
    """Max frequency-localized norm-comparison ratio per (r, s) pair."""
    grid = Grid(n)
    part = build_partition(grid)
    rng = np.random.default_rng(seed)
    pairs = [(2.0, np.inf), (2.5, np.inf), (2.0, 4.0)]
    out = {p: 0.0 for p in pairs}
    shells = [q for q in part.shells() if q >= 0]
    for _ in range(trials):
        q = int(rng.choice(shells))
        f = _random_shell_field(grid, part, rng, q)
        for r, s in pairs:
            out[(r, s)] = max(out[(r, s)], bernstein_ratio(f, q, r, s, part))
    return {(n, r, 0.0 if np.isinf(s) else s): v for (r, s), v in out.items()}


def commutator_pilot(n: int = 32, trials: int = 100, seed: int = 7171) -> dict:
    """Max measured-over-bound ratio for both transport commutators."""
    grid = Grid(n)
    part = build_partition(grid)
    rng = np.random.default_rng(seed)
    shells = [q for q in part.shells() if q >= 1]
    worst = {"convection": 0.0, "hall": 0.0}
    for _ in range(trials):
        q = int(rng.choice(shells))
        p = int(np.clip(q + rng.integers(-1, 2), 1, part.q_max))
        a = _random_shell_field(grid, part, rng, int(rng.integers(-1, p - 1)))
        vp = _random_shell_field(grid, part, rng, p)
        bound = commutator_convection_bound(a, vp, p, part)
        if bound > 0:
            lhs = l2_norm(commutator_convection(q, a, vp, p, part))
            worst["convection"] = max(worst["convection"], lhs / bound)
        bound = commutator_hall_bound(a, vp, p, part)
        if bound > 0:
            lhs = l2_norm(commutator_hall(q, a, vp, p, part))
            worst["hall"] = max(worst["hall"], lhs / bound)
    return worst


def main() -> None:
    for n in (32, 64):
        for key, val in sorted(bernstein_pilot(n).items()):
            print(f"bernstein n={key[0]} r={key[1]} s={key[2] or 'inf'}: "
                  f"{val:.4f}")
    for name, val in commutator_pilot().items():
        print(f"commutator {name}: {val:.4f}")


if __name__ == "__main__":
    main()
