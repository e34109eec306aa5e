import pytest

from configdensity.verify import CHECKS, inject_fault, verify_suite


def test_fast_suite_passes():
    reports, code = verify_suite("fast")
    assert code == 0 and len(reports) >= 12
    assert all(r.passed for r in reports)
    assert {name for name, (_, level) in CHECKS.items() if level == "fast"} == {r.name for r in reports}


@pytest.mark.parametrize("fault, broken", [
    ("j0_sign_flip", {"circle_transform_j0", "j0_reference"}),
    ("nu_hat_scale", {"nu_hat_closed_form", "ray_average_identity"}),
])
def test_injected_fault_is_caught(fault, broken):
    only = sorted(broken | {"parseval"})
    with inject_fault(fault):
        reports, code = verify_suite("fast", only=only)
    assert code == 1
    failed = {r.name for r in reports if not r.passed}
    assert broken <= failed and "parseval" not in failed


def test_fault_scope_is_local():
    with inject_fault("j0_sign_flip"):
        pass
    reports, code = verify_suite("fast", only=["j0_reference"])
    assert code == 0


def test_unknown_names():
    with pytest.raises(ValueError):
        with inject_fault("bogus"):
            pass
    with pytest.raises(ValueError):
        verify_suite("fast", only=["bogus"])
    with pytest.raises(ValueError):
        verify_suite("medium")


def test_report_lines():
    reports, _ = verify_suite("fast", only=["moment_constant_bound", "parseval"])
    lines = {r.name: r.line() for r in reports}
    assert lines["moment_constant_bound"].startswith("[PASS] moment_constant_bound:")
    assert "==" in lines["parseval"]
