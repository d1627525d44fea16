import numpy as np
import pytest

from bregproj.errors import ValidationError
from bregproj.suites import HOLDER_CASES, SUITES, Check, SuiteReport, catalog, run_suite


def test_check_relations_and_nan():
    assert Check("a", 1e-9, 1e-8).passed
    assert not Check("a", 1e-7, 1e-8).passed
    assert Check("b", -1e-10, -1e-9, ">=").passed
    assert not Check("c", float("nan"), 1.0).passed


def test_report_collects_failures():
    rep = SuiteReport("demo", 0)
    rep.add("ok", 0.0, 1.0)
    rep.add("bad", 2.0, 1.0)
    assert not rep.passed and [c.name for c in rep.failures] == ["bad"]
    d = rep.to_dict()
    assert d["suite"] == "demo" and len(d["checks"]) == 2


def test_catalog_covers_every_kind():
    kinds = {label.split("/")[0] for label, _ in catalog(np.random.default_rng(0))}
    assert kinds == {"gauge", "power_sum", "kl", "burg", "fermi_dirac", "alpha_family",
                     "squared_pnorm", "quadratic", "spectral_lift"}


def test_suite_registry():
    expected = {"identities", "conjugacy", "pythagorean", "alber", "cyclic", "spectral",
                "embeddings", "moduli", "holder", "quasigauge", "operators"}
    assert expected <= set(SUITES)
    assert set(HOLDER_CASES) == {"hilbert-halfspace", "lp-left-beta025", "mazur-l1"}


def test_run_suite_validation():
    with pytest.raises(ValidationError):
        run_suite("nope")
    with pytest.raises(ValidationError):
        run_suite("cyclic", case="mazur-l1")


def test_suites_are_deterministic():
    a = run_suite("embeddings", seed=5)
    b = run_suite("embeddings", seed=5)
    assert [c.value for c in a.checks] == [c.value for c in b.checks]
