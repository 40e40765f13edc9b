import numpy as np
import pytest
from hypothesis import given, strategies as st

from spinclock import units


def test_reference_constants():
    assert units.KELVIN_PER_CM == pytest.approx(1.4387769, rel=1e-7)
    assert units.GHZ_PER_KELVIN == pytest.approx(20.836619, rel=1e-6)
    assert units.MUB_OVER_KB == pytest.approx(0.67171382, rel=1e-7)


def test_tunnel_gap_in_ghz_is_the_converted_value():
    # 2.9 cm^-1 converts to 86.9 GHz, not 83.5 GHz
    ghz = units.from_kelvin(units.to_kelvin(2.9, "cm-1"), "GHz")
    assert ghz == pytest.approx(86.94, abs=0.01)


@given(st.floats(-1e4, 1e4, allow_nan=False))
def test_cm_round_trip(x):
    assert units.kelvin_to_cm(units.cm_to_kelvin(x)) == pytest.approx(x, rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("unit", ["K", "mK", "cm-1", "GHz"])
def test_every_unit_round_trips(unit):
    assert units.from_kelvin(units.to_kelvin(3.7, unit), unit) == pytest.approx(3.7, rel=1e-12)


def test_unknown_unit():
    with pytest.raises(units.UnitError):
        units.to_kelvin(1.0, "eV-ish")
