"""Vehicle sizing arithmetic and a reduced octocopter hover simulator.

Sizing: a component mass table and the per-rotor thrust rule
T = 2*w*s/n (kilograms-force), where w is total mass in kg, n the rotor
count, and s a safety multiplier >= 1.

Simulation: roll/pitch only, about hover. Eight rotors on a ring carry the
weight; a point-mass arm swings around and torques the body; the fuzzy
stabilizer redistributes rotor thrust with zero-sum deltas. Semi-implicit
Euler keeps the undamped attitude dynamics bounded and reproducible.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import BadRotorCount, ConfigInvalid, ParseError, SubUnitySafetyFactor
from .fuzzy import (
    N_ROTORS,
    ROTOR_AZIMUTHS_DEG,
    arm_compensation_deltas,
    tilt_compensation_deltas,
)

GRAVITY = 9.80665  # m/s^2, standard


@dataclass(frozen=True)
class MassEntry:
    name: str
    grams: float
    count: int

    def __post_init__(self):
        if self.grams < 0:
            raise ValueError(f"{self.name!r}: negative mass {self.grams}")
        if self.count < 1:
            raise ValueError(f"{self.name!r}: count {self.count} below 1")


@dataclass(frozen=True)
class MassTable:
    entries: tuple

    def total_grams(self) -> float:
        return total_mass(self)

    def total_kg(self) -> float:
        return total_mass(self) / 1000.0


def total_mass(table: MassTable) -> float:
    """Sum of unit mass times piece count, in grams."""
    return sum(e.grams * e.count for e in table.entries)


def load_mass_table(source) -> MassTable:
    """Parse a name,grams,count CSV from a path, text, or file object."""
    if isinstance(source, (str, Path)) and "\n" not in str(source):
        text = Path(source).read_text()
    elif isinstance(source, str):
        text = source
    else:
        text = source.read()
    reader = csv.reader(io.StringIO(text))
    rows = [(i, row) for i, row in enumerate(reader, start=1) if row and any(c.strip() for c in row)]
    if not rows:
        raise ParseError("missing name,grams,count header", row=1)
    header_row, header = rows[0]
    if [c.strip().lower() for c in header] != ["name", "grams", "count"]:
        raise ParseError(f"expected header name,grams,count, got {header}", row=header_row)
    entries = []
    for line_no, row in rows[1:]:
        if len(row) != 3:
            raise ParseError(f"expected 3 columns, got {len(row)}", row=line_no)
        name = row[0].strip()
        try:
            grams = float(row[1])
            count = int(row[2])
        except ValueError as exc:
            raise ParseError(str(exc), row=line_no) from exc
        try:
            entries.append(MassEntry(name, grams, count))
        except ValueError as exc:
            raise ParseError(str(exc), row=line_no) from exc
    return MassTable(tuple(entries))


def default_mass_table() -> MassTable:
    """Component masses of the reference vehicle, shipped in assets/table1.csv."""
    text = resources.files("aerobot.assets").joinpath("table1.csv").read_text()
    return load_mass_table(text)


@dataclass(frozen=True)
class ThrustSpec:
    """Inputs of the per-rotor thrust rule."""

    total_weight_kg: float
    rotors: int
    safety_factor: float = 1.2

    def __post_init__(self):
        if self.total_weight_kg < 0:
            raise ValueError(f"weight {self.total_weight_kg} kg is negative")
        if self.rotors not in (4, 6, 8):
            raise BadRotorCount(f"rotor count {self.rotors} not in (4, 6, 8)")
        if self.safety_factor < 1.0:
            # a sub-unity margin would size rotors below hover weight
            raise SubUnitySafetyFactor(f"safety factor {self.safety_factor} < 1")


def thrust_per_rotor(spec: ThrustSpec) -> float:
    """Required thrust per rotor in kilograms-force: T = 2*w*s/n."""
    return 2.0 * spec.total_weight_kg * spec.safety_factor / spec.rotors


def kgf_to_newtons(kgf: float) -> float:
    return kgf * GRAVITY


# Hover simulation -----------------------------------------------------------

@dataclass(frozen=True)
class HoverState:
    """One trace sample: attitude, rates, rotor thrusts, and arm pose."""

    t: float
    roll: float
    pitch: float
    roll_rate: float
    pitch_rate: float
    rotor_thrusts: tuple
    arm_azimuth: float
    arm_extension: float


@dataclass(frozen=True)
class SimConfig:
    vehicle_mass_kg: float = 32.019
    rotor_radius_m: float = 0.5
    inertia_kgm2: float = 0.8  # roll and pitch alike
    arm_mass_kg: float = 0.94
    arm_reach_m: float = 0.6
    dt_s: float = 0.001
    duration_s: float = 10.0
    controller: bool = True
    # (time_s, azimuth_deg, extension) keyframes, linearly interpolated
    arm_trajectory: tuple = field(default_factory=lambda: ((0.0, 0.0, 1.0), (10.0, 360.0, 1.0)))

    def __post_init__(self):
        if self.vehicle_mass_kg <= 0 or self.rotor_radius_m <= 0 or self.inertia_kgm2 <= 0:
            raise ConfigInvalid("mass, rotor radius, and inertia must be positive")
        if self.arm_mass_kg < 0 or self.arm_reach_m < 0:
            raise ConfigInvalid("arm mass and reach cannot be negative")
        if self.dt_s <= 0:
            raise ConfigInvalid(f"time step {self.dt_s} must be positive")
        if self.duration_s < self.dt_s:
            raise ConfigInvalid("duration shorter than one step")
        if not self.arm_trajectory:
            raise ConfigInvalid("arm trajectory needs at least one keyframe")
        times = [k[0] for k in self.arm_trajectory]
        if any(b < a for a, b in zip(times, times[1:])):
            raise ConfigInvalid("keyframe times must be non-decreasing")
        for t, _, ext in self.arm_trajectory:
            if not 0.0 <= ext <= 1.0:
                raise ConfigInvalid(f"extension {ext} at t={t} outside [0, 1]")

    @classmethod
    def from_json(cls, text: str) -> "SimConfig":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"bad JSON: {exc}") from exc
        if "arm_trajectory" in doc:
            doc["arm_trajectory"] = tuple(tuple(k) for k in doc["arm_trajectory"])
        try:
            return cls(**doc)
        except TypeError as exc:
            raise ParseError(f"bad simulation config: {exc}") from exc

    def to_json(self) -> str:
        doc = dict(self.__dict__)
        doc["arm_trajectory"] = [list(k) for k in self.arm_trajectory]
        return json.dumps(doc, indent=2)


def _interp_trajectory(cfg: SimConfig, times: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    keys = np.array([k[0] for k in cfg.arm_trajectory])
    azimuths = np.array([k[1] for k in cfg.arm_trajectory])
    extensions = np.array([k[2] for k in cfg.arm_trajectory])
    return np.interp(times, keys, azimuths), np.interp(times, keys, extensions)


def simulate_hover(cfg: SimConfig) -> list[HoverState]:
    """Integrate the reduced attitude model and record every step.

    Torques: rotor thrusts at ring positions plus the gravity torque of the
    arm point mass at its interpolated pose. Baseline thrusts hold hover
    (their sum is m*g); with the controller on, the fuzzy zero-sum deltas
    ride on top, so the sum is preserved at every step.
    """
    n_steps = int(round(cfg.duration_s / cfg.dt_s))
    times = np.arange(n_steps) * cfg.dt_s
    azimuths, extensions = _interp_trajectory(cfg, times)

    rad = np.deg2rad(np.asarray(ROTOR_AZIMUTHS_DEG))
    rotor_x = cfg.rotor_radius_m * np.cos(rad)
    rotor_y = cfg.rotor_radius_m * np.sin(rad)
    hover_thrust = cfg.vehicle_mass_kg * GRAVITY / N_ROTORS
    arm_torque_scale = cfg.arm_mass_kg * GRAVITY * cfg.arm_reach_m

    # the arm part of the controller depends only on the known trajectory
    arm_deltas = arm_compensation_deltas(azimuths, extensions) if cfg.controller else None

    roll = pitch = roll_rate = pitch_rate = 0.0
    trace = []
    for k in range(n_steps):
        azimuth = float(azimuths[k])
        extension = float(extensions[k])
        if cfg.controller:
            thrusts = hover_thrust + arm_deltas[k] + tilt_compensation_deltas(roll, pitch)
        else:
            thrusts = np.full(N_ROTORS, hover_thrust)
        trace.append(HoverState(float(times[k]), roll, pitch, roll_rate, pitch_rate,
                                tuple(float(f) for f in thrusts), azimuth, extension))

        theta = math.radians(azimuth)
        lever = extension * arm_torque_scale
        torque_x = float(thrusts @ rotor_y) - lever * math.sin(theta)
        torque_y = -float(thrusts @ rotor_x) + lever * math.cos(theta)

        roll_rate += cfg.dt_s * torque_x / cfg.inertia_kgm2
        pitch_rate += cfg.dt_s * torque_y / cfg.inertia_kgm2
        roll += cfg.dt_s * roll_rate
        pitch += cfg.dt_s * pitch_rate
    return trace


def max_tilt(trace: list[HoverState]) -> float:
    """Largest |roll| or |pitch| over a trace, radians."""
    return max(max(abs(s.roll), abs(s.pitch)) for s in trace)


def trace_to_csv(trace: list[HoverState]) -> str:
    header = ("t,roll,pitch,roll_rate,pitch_rate,"
              + ",".join(f"thrust_{i}" for i in range(N_ROTORS))
              + ",arm_azimuth,arm_extension")
    rows = [header]
    for s in trace:
        thrust_cols = ",".join(repr(f) for f in s.rotor_thrusts)
        rows.append(f"{s.t!r},{s.roll!r},{s.pitch!r},{s.roll_rate!r},{s.pitch_rate!r},"
                    f"{thrust_cols},{s.arm_azimuth!r},{s.arm_extension!r}")
    return "\n".join(rows) + "\n"
