"""Verification-suite runner: pass on a correct build, bite on mutations."""

import numpy as np

from infclip import verify_all


def test_quick_suite_passes_on_correct_build():
    report = verify_all(level="quick")
    assert report.passed
    names = {c.name for c in report.checks}
    assert {"clip.per_sample_bound", "clip.second_moment", "clip.clipping_bias",
            "clip.iw_identity", "tsallis.simplex_preservation",
            "tsallis.dual_residual", "sphere.inner_product", "sphere.jensen_norm",
            "zeroth.moment_bound", "envs.mean_certification",
            "envs.moment_certification", "rng.determinism"} <= names


def test_broken_clip_is_detected():
    def off_by_factor(draws, level):
        return np.sign(draws) * np.minimum(np.abs(draws), 3.0 * level)

    report = verify_all(level="quick", _broken_clip=off_by_factor)
    clip_checks = [c for c in report.checks if c.name.startswith("clip.")]
    assert any(not c.passed for c in clip_checks)
    assert not report.passed


def test_report_round_trips_to_json():
    import json

    report = verify_all(level="quick")
    blob = json.dumps(report.to_dict())
    back = json.loads(blob)
    assert back["passed"] is True
    assert back["level"] == "quick"


def test_rejects_unknown_level():
    import pytest

    with pytest.raises(ValueError):
        verify_all(level="paranoid")
