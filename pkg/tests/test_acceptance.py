"""
Acceptance criteria, one test per criterion.

Each test runs the matching verification suite (the same code behind
``bregproj verify``), prints one PASS/FAIL line and records it for the
summary printed at the end of the pytest run.
"""

import pytest

from bregproj.suites import run_suite
from conftest import ACCEPTANCE_LINES

# criterion -> (suite, runtime limit in seconds or None, short description)
CRITERIA = {
    1: ("conjugacy", 60.0, "Fenchel-Young, gradient inverse and finite differences"),
    2: ("identities", 60.0, "five divergence identities"),
    3: ("pythagorean", 300.0, "left and right pythagorean inequalities"),
    4: ("oracle", None, "projections against grid and first-order oracles"),
    5: ("alber", None, "Alber decomposition against cones and subspaces"),
    6: ("cyclic", None, "Dykstra and naive KL cyclic projections"),
    7: ("operators", None, "resolvents, prox coherence, quasinonexpansiveness"),
    8: ("spectral", None, "spectral divergences"),
    9: ("embeddings", None, "Mazur, D_gamma, Lozanovskii, channels"),
    10: ("holder", 600.0, "Hoelder exponents of projections and embeddings"),
    11: ("moduli", None, "moduli of convexity and smoothness"),
    12: ("quasigauge", None, "conjugate-integral lemma"),
}


def _line(k, rep, limit, ok):
    parts = [f"{c.name}={c.value:.3g}{c.relation}{c.limit:.3g}{'' if c.passed else ' (FAIL)'}"
             for c in rep.checks]
    rt = f"runtime {rep.runtime:.1f}s" + (f"<={limit:.0f}s" if limit else "")
    status = "PASS" if ok else "FAIL"
    return f"criterion {k:2d} [{rep.suite}] {status}: " + "; ".join(parts) + f"; {rt}"


@pytest.mark.slow
@pytest.mark.parametrize("k", sorted(CRITERIA))
def test_criterion(k):
    suite, limit, _ = CRITERIA[k]
    rep = run_suite(suite, seed=0)
    in_time = limit is None or rep.runtime <= limit
    ok = rep.passed and in_time
    line = _line(k, rep, limit, ok)
    ACCEPTANCE_LINES[k] = line
    print(line)
    failed = [c.name + (f" [{c.note}]" if c.note else "") for c in rep.failures]
    assert rep.passed, f"failed checks: {failed}"
    assert in_time, f"runtime {rep.runtime:.1f}s exceeds {limit}s"
