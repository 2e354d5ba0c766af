"""Oracle-backed property suites run by ``verify-suite``.

Each suite returns how many random instances passed. Tolerances are the
ones the acceptance tests use; the containment and comparison checks
need about 8000 nodes per unit time to stay under their ``1e-7``
relative slack on saturating data.
"""

import numpy as np

from .gronwall import classic_bound, general_bound, two_sided_envelope
from .linsys import norm_envelope
from .oracle import (
    RandomInstanceSpec,
    discrete_equality_case,
    equality_case,
    generate_instances,
    generate_linear_systems,
)
from .riccati import build_comparison, relative_slack, verify_comparison
from .signal import Signal

TIGHTNESS_RTOL = 1e-4
REDUCTION_ATOL = 1e-12
A_FLOOR = -1e-9


def _instances(seed, count, grid):
    spec = RandomInstanceSpec(seed=seed, count=count, horizon=grid.t1 - grid.t0, n=grid.n)
    return generate_instances(spec)


def lemma2_tightness(problems):
    ok = 0
    for p in problems:
        u = equality_case(p).values
        ok += bool(np.all(np.abs(general_bound(p) - u) <= TIGHTNESS_RTOL * np.abs(u)))
    return ok


def lemma1_reduction(problems):
    ok = 0
    zero = Signal.constant(0.0)
    for p in problems:
        q = type(p)(p.c, p.v, zero, p.grid)
        ok += bool(np.all(np.abs(general_bound(q) - classic_bound(q)) <= REDUCTION_ATOL))
    return ok


def envelope_containment(problems):
    ok = 0
    for p in problems:
        u = equality_case(p).values
        env = two_sided_envelope(p.c, p.v, p.f, p.grid)
        ok += bool(
            np.all(u <= env.upper + relative_slack(env.upper))
            and np.all(env.lower - relative_slack(env.lower) <= u)
        )
    return ok


def comparison_pipeline(problems):
    ok = 0
    for p in problems:
        con = build_comparison(p, discrete_equality_case(p).values)
        ok += bool(np.all(con.A.samples >= A_FLOOR) and verify_comparison(con.y, con.x).holds)
    return ok


def linsys_containment(seed, count, grid):
    systems = generate_linear_systems(seed, count, horizon=grid.t1 - grid.t0, n=grid.n)
    return sum(norm_envelope(s).contained for s in systems)


def run_suites(seed, count, grid):
    """``[(name, passed, total), ...]`` for every suite."""
    problems = _instances(seed, count, grid)
    return [
        ("lemma2-tightness", lemma2_tightness(problems), count),
        ("lemma1-reduction", lemma1_reduction(problems), count),
        ("envelope-containment", envelope_containment(problems), count),
        ("comparison-pipeline", comparison_pipeline(problems), count),
        ("linsys-containment", linsys_containment(seed, count, grid), count),
    ]
