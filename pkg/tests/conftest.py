"""Shared fixtures and helpers for the test suite."""

from __future__ import annotations

import math

import pytest

from bbdrag import DrudeSphere, LorentzOscillator, Ohmic, TopHat

# One representative of each polarizability family, used wherever a test
# sweeps "all four models".  Scales are chosen so every observable is
# O(0.01..100) at unit temperatures: resonances near the thermal peak,
# O(1) oscillator strengths.
REFERENCE_MODELS = (
    LorentzOscillator(alpha0=1.0, omega0=2.0, gamma=0.5),
    DrudeSphere(radius=1.0, omega_p=2.0, nu=0.5),
    TopHat(amplitude=1.0, omega1=0.5, omega2=1.5),
    Ohmic(slope=1.0, omega_c=5.0),
)


def rel_diff(a: float, b: float) -> float:
    """|a - b| / max(|a|, |b|), with 0/0 -> 0."""
    scale = max(abs(a), abs(b))
    if scale == 0.0:
        return 0.0
    return abs(a - b) / scale


def model_label(model) -> str:
    return type(model).__name__


@pytest.fixture(scope="session")
def reference_models():
    return REFERENCE_MODELS


def assert_close(actual: float, expected: float, rel: float, what: str) -> None:
    d = rel_diff(actual, expected)
    assert d <= rel, (
        f"{what}: {actual!r} vs {expected!r} differ by rel {d:.3e} > {rel:.1e}"
    )


PI = math.pi
