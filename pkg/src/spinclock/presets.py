"""Parameter sets for the molecules studied.

Only values measured or fitted for the compounds are stored as fact;
anything filled in to make a model complete is listed under `assumed`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .spincore import Hyperfine, SpinSystem
from .units import KELVIN_PER_CM

#: Intermolecular Ising coupling (cm^-1) and effective moment of the ground doublet.
J_INTER_CM = -0.035
M_EFF = 1.5
#: Lattice Debye temperature (K).
THETA_DEBYE = 72.0


@dataclass(frozen=True)
class Preset:
    name: str
    S: float
    D_cm: float
    E_cm: float
    g: float
    assumed: tuple = ()
    hyperfine_mK: float = 0.0
    I: float = 0.0
    axis_deg: float = 0.0
    tip: float = 0.0
    extra: dict = field(default_factory=dict)

    @property
    def system(self) -> SpinSystem:
        """Electronic spin Hamiltonian (no nuclear spin)."""
        return SpinSystem(self.S, self.D_cm * KELVIN_PER_CM, self.E_cm * KELVIN_PER_CM, self.g)

    def with_hyperfine(self) -> SpinSystem:
        if not self.hyperfine_mK:
            return self.system
        return self.system.replace(hyperfine=Hyperfine(self.hyperfine_mK * 1e-3, self.I))

    def to_dict(self):
        return {
            "name": self.name, "S": self.S, "D": {"value": self.D_cm, "unit": "cm-1"},
            "E": {"value": self.E_cm, "unit": "cm-1"}, "g": self.g, "tip": self.tip,
            "axis_deg": self.axis_deg, "hyperfine_mK": self.hyperfine_mK, "I": self.I,
            "assumed": list(self.assumed), **self.extra,
        }


PRESETS = {
    # easy-axis S = 1 with a 2.9 cm^-1 tunnel gap; only E is pinned by the data
    "complex1": Preset("complex1", 1.0, -100.0, 1.45, 2.2, assumed=("D", "g")),
    # Kramers S = 3/2 analogue with a 7/2 nuclear spin
    "complex2": Preset("complex2", 1.5, -8.31, 0.0, 2.2, assumed=("g",), hyperfine_mK=14.0, I=3.5),
    "complex4": Preset(
        "complex4", 1.0, -2.71, 0.105, 2.16, axis_deg=52.6, tip=1e-4,
        extra={"magnetization_branches": [{"D": -2.96, "E": 0.06}, {"D": 2.11, "E": 0.09}]},
    ),
}


def get(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
