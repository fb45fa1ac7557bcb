"""Mamdani fuzzy inference and the two controllers built on it.

The engine uses min for AND, clipped consequents aggregated by max, and
centroid defuzzification over a uniform sample grid. On top of it sit the
pesticide-dosing controller (green density in, liters out) and the
octocopter stabilizer that redistributes rotor thrust against the torque
of the moving robot arm, mirroring every boost as an equal cut on the
opposite rotor so total lift never changes.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .errors import NoRuleFired, ParseError

N_ROTORS = 8
ROTOR_AZIMUTHS_DEG = tuple(45.0 * i for i in range(N_ROTORS))


@dataclass(frozen=True)
class MembershipFunction:
    """Triangular (3 points) or trapezoidal (4 points) membership."""

    points: tuple

    def __post_init__(self):
        if len(self.points) not in (3, 4):
            raise ValueError(f"need 3 or 4 breakpoints, got {len(self.points)}")
        if any(b < a for a, b in zip(self.points, self.points[1:])):
            raise ValueError(f"breakpoints must be non-decreasing: {self.points}")

    @classmethod
    def triangle(cls, a: float, b: float, c: float) -> "MembershipFunction":
        return cls((float(a), float(b), float(c)))

    @classmethod
    def trapezoid(cls, a: float, b: float, c: float, d: float) -> "MembershipFunction":
        return cls((float(a), float(b), float(c), float(d)))

    def _abcd(self):
        if len(self.points) == 3:
            a, b, c = self.points
            return a, b, b, c
        return self.points

    def __call__(self, x):
        a, b, c, d = self._abcd()
        x = np.asarray(x, dtype=np.float64)
        out = np.zeros_like(x)
        if b > a:
            rising = (x > a) & (x < b)
            out = np.where(rising, (x - a) / (b - a), out)
        out = np.where((x >= b) & (x <= c), 1.0, out)
        if d > c:
            falling = (x > c) & (x < d)
            out = np.where(falling, (d - x) / (d - c), out)
        return out if out.ndim else float(out)


@dataclass(frozen=True)
class FuzzyVariable:
    """Named universe with at least two labeled membership sets."""

    name: str
    universe: tuple
    sets: dict

    def __post_init__(self):
        lo, hi = self.universe
        if not lo < hi:
            raise ValueError(f"universe {self.universe} is empty")
        if len(self.sets) < 2:
            raise ValueError(f"variable {self.name!r} needs >= 2 labels")
        for label, mf in self.sets.items():
            if mf.points[0] < lo or mf.points[-1] > hi:
                raise ValueError(f"{self.name}.{label} breakpoints leave the universe")

    def clamp(self, x):
        lo, hi = self.universe
        return np.clip(x, lo, hi)


@dataclass(frozen=True)
class Rule:
    """AND-combined (variable, label) antecedents implying one output label."""

    antecedents: tuple
    consequent: tuple


class FuzzySystem:
    """Immutable rulebase; consequent curves are pre-sampled at construction."""

    def __init__(self, inputs, outputs, rules, samples: int = 201):
        if samples < 51:
            raise ValueError(f"samples {samples} below 51")
        self.inputs = {v.name: v for v in inputs}
        self.outputs = {v.name: v for v in outputs}
        self.rules = tuple(rules)
        self.samples = samples
        for rule in self.rules:
            for var, label in rule.antecedents:
                if var not in self.inputs or label not in self.inputs[var].sets:
                    raise ValueError(f"unknown antecedent {var}.{label}")
            var, label = rule.consequent
            if var not in self.outputs or label not in self.outputs[var].sets:
                raise ValueError(f"unknown consequent {var}.{label}")
        self._grids = {}
        self._curves = {}
        for name, var in self.outputs.items():
            lo, hi = var.universe
            ys = np.linspace(lo, hi, samples)
            self._grids[name] = ys
            for label, mf in var.sets.items():
                self._curves[(name, label)] = mf(ys)


def fuzzify(variable: FuzzyVariable, x: float) -> dict:
    """Degree of membership per label, with x clamped into the universe."""
    cx = variable.clamp(float(x))
    return {label: float(mf(cx)) for label, mf in variable.sets.items()}


def _infer_batch(system: FuzzySystem, values: dict) -> dict:
    """Mamdani inference over aligned input arrays; returns crisp arrays."""
    arrays = {}
    batch = None
    for name, var in system.inputs.items():
        if name not in values:
            raise ValueError(f"missing input {name!r}")
        arr = np.atleast_1d(np.asarray(values[name], dtype=np.float64))
        arrays[name] = var.clamp(arr)
        if batch is None:
            batch = arr.shape[0]
        elif arr.shape[0] != batch:
            raise ValueError("input arrays must share one length")

    degrees = []
    for rule in system.rules:
        deg = np.ones(batch)
        for var, label in rule.antecedents:
            deg = np.minimum(deg, system.inputs[var].sets[label](arrays[var]))
        degrees.append(deg)

    crisp = {}
    for name in system.outputs:
        ys = system._grids[name]
        agg = np.zeros((batch, system.samples))
        for rule, deg in zip(system.rules, degrees):
            if rule.consequent[0] != name:
                continue
            curve = system._curves[(name, rule.consequent[1])]
            np.maximum(agg, np.minimum(deg[:, None], curve[None, :]), out=agg)
        mass = agg.sum(axis=1)
        if np.any(mass == 0.0):
            raise NoRuleFired(f"no rule fired for output {name!r}")
        crisp[name] = (agg @ ys) / mass
    return crisp


def infer(system: FuzzySystem, values: dict) -> dict:
    """Crisp centroid output per output variable for one set of crisp inputs."""
    batch = _infer_batch(system, {k: [v] for k, v in values.items()})
    return {name: float(arr[0]) for name, arr in batch.items()}


# JSON definition ------------------------------------------------------------

FUZZY_FORMAT = "aerobot-fuzzy"
_FORMAT_VERSION = 1


def _mf_to_doc(mf: MembershipFunction) -> dict:
    shape = "triangle" if len(mf.points) == 3 else "trapezoid"
    return {"shape": shape, "points": list(mf.points)}


def _var_to_doc(var: FuzzyVariable) -> dict:
    return {
        "name": var.name,
        "universe": list(var.universe),
        "sets": {label: _mf_to_doc(mf) for label, mf in var.sets.items()},
    }


def system_to_json(system: FuzzySystem) -> str:
    doc = {
        "format": FUZZY_FORMAT,
        "version": _FORMAT_VERSION,
        "samples": system.samples,
        "inputs": [_var_to_doc(v) for v in system.inputs.values()],
        "outputs": [_var_to_doc(v) for v in system.outputs.values()],
        "rules": [
            {"if": [list(a) for a in r.antecedents], "then": list(r.consequent)}
            for r in system.rules
        ],
    }
    return json.dumps(doc, indent=2)


def _var_from_doc(doc: dict) -> FuzzyVariable:
    sets = {}
    for label, mf_doc in doc["sets"].items():
        points = tuple(float(p) for p in mf_doc["points"])
        expected = {"triangle": 3, "trapezoid": 4}.get(mf_doc.get("shape"))
        if expected is None or len(points) != expected:
            raise ParseError(f"set {label!r} has bad shape/points")
        sets[label] = MembershipFunction(points)
    return FuzzyVariable(doc["name"], tuple(doc["universe"]), sets)


def system_from_json(text: str) -> FuzzySystem:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"bad JSON: {exc}") from exc
    if doc.get("format") != FUZZY_FORMAT or doc.get("version") != _FORMAT_VERSION:
        raise ParseError(f"not a {FUZZY_FORMAT} v{_FORMAT_VERSION} document")
    try:
        inputs = [_var_from_doc(d) for d in doc["inputs"]]
        outputs = [_var_from_doc(d) for d in doc["outputs"]]
        rules = [
            Rule(tuple((v, l) for v, l in r["if"]), tuple(r["then"]))
            for r in doc["rules"]
        ]
        return FuzzySystem(inputs, outputs, rules, samples=doc.get("samples", 201))
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad fuzzy system document: {exc}") from exc


# Pesticide dosing -----------------------------------------------------------

_dosing_system = None


def default_dosing_system() -> FuzzySystem:
    """Dosing rulebase shipped in assets/dosing.json (replaceable by file)."""
    global _dosing_system
    if _dosing_system is None:
        text = resources.files("aerobot.assets").joinpath("dosing.json").read_text()
        _dosing_system = system_from_json(text)
    return _dosing_system


def pesticide_dose(density: float, system: FuzzySystem | None = None) -> float:
    """Liters of pesticide per unit area for a given green-cover fraction."""
    if not 0.0 <= density <= 1.0:
        raise ValueError(f"density {density} outside [0, 1]")
    sys_ = system if system is not None else default_dosing_system()
    return infer(sys_, {"green_density": density})["dose"]


# Octocopter stabilizer --------------------------------------------------------

# Magnitude universes are calibrated so a fully extended arm aligned with a
# rotor is met by a counter-torque close to its own gravity torque under the
# default simulator parameters (0.94 kg at 0.6 m on a 0.5 m rotor ring).
_ARM_DELTA_MAX_N = 5.0
_TILT_DELTA_MAX_N = 4.2
_TILT_UNIVERSE_RAD = 0.5

_arm_system = None
_tilt_system = None


def _proximity_variable() -> FuzzyVariable:
    return FuzzyVariable("proximity", (0.0, 180.0), {
        "near": MembershipFunction.triangle(0.0, 0.0, 112.5),
        "far": MembershipFunction.triangle(67.5, 180.0, 180.0),
    })


def _lift_variable(name: str, top: float, apex: float, halfwidth: float) -> FuzzyVariable:
    return FuzzyVariable(name, (0.0, top), {
        # the degenerate "none" spike keeps its centroid at exactly zero
        "none": MembershipFunction.triangle(0.0, 0.0, 0.0),
        "boost": MembershipFunction.triangle(apex - halfwidth, apex, apex + halfwidth),
    })


def arm_compensation_system() -> FuzzySystem:
    """Rotor lift boost from arm proximity (near/far) and extension (short/long)."""
    global _arm_system
    if _arm_system is None:
        proximity = _proximity_variable()
        extension = FuzzyVariable("extension", (0.0, 1.0), {
            "short": MembershipFunction.triangle(0.0, 0.0, 1.0),
            "long": MembershipFunction.triangle(0.0, 1.0, 1.0),
        })
        lift = _lift_variable("lift", _ARM_DELTA_MAX_N, 2.3, 2.0)
        rules = (
            Rule((("proximity", "near"), ("extension", "long")), ("lift", "boost")),
            Rule((("proximity", "near"), ("extension", "short")), ("lift", "none")),
            Rule((("proximity", "far"), ("extension", "long")), ("lift", "none")),
            Rule((("proximity", "far"), ("extension", "short")), ("lift", "none")),
        )
        _arm_system = FuzzySystem([proximity, extension], [lift], rules)
    return _arm_system


def tilt_compensation_system() -> FuzzySystem:
    """Rotor lift boost from tilt magnitude (flat/tilted) and correction proximity."""
    global _tilt_system
    if _tilt_system is None:
        proximity = _proximity_variable()
        tilt = FuzzyVariable("tilt", (0.0, _TILT_UNIVERSE_RAD), {
            "flat": MembershipFunction.triangle(0.0, 0.0, 0.06),
            "tilted": MembershipFunction.trapezoid(0.03, 0.12, 0.5, 0.5),
        })
        lift = _lift_variable("lift", _TILT_DELTA_MAX_N, 2.0, 2.0)
        rules = (
            Rule((("proximity", "near"), ("tilt", "tilted")), ("lift", "boost")),
            Rule((("proximity", "near"), ("tilt", "flat")), ("lift", "none")),
            Rule((("proximity", "far"), ("tilt", "tilted")), ("lift", "none")),
            Rule((("proximity", "far"), ("tilt", "flat")), ("lift", "none")),
        )
        _tilt_system = FuzzySystem([proximity, tilt], [lift], rules)
    return _tilt_system


def _angular_distance(azimuths_deg: np.ndarray) -> np.ndarray:
    """Unsigned angle in [0, 180] between each azimuth and each rotor, (B, 8)."""
    diff = np.abs((azimuths_deg[:, None] - np.asarray(ROTOR_AZIMUTHS_DEG)[None, :]) % 360.0)
    return np.where(diff > 180.0, 360.0 - diff, diff)


def _antisymmetric(magnitudes: np.ndarray) -> np.ndarray:
    """Per row, rotor i+4 gets the exact negation of rotor i's delta."""
    half = N_ROTORS // 2
    diff = magnitudes[:, :half] - magnitudes[:, half:]
    return np.concatenate([diff, -diff], axis=1)


_CHUNK_ROWS = 16384  # caps the (rows, samples) aggregation matrix


def arm_compensation_deltas(azimuths_deg, extensions) -> np.ndarray:
    """Zero-sum deltas (B, 8) for a series of arm poses."""
    az = np.atleast_1d(np.asarray(azimuths_deg, dtype=np.float64)) % 360.0
    ext = np.atleast_1d(np.asarray(extensions, dtype=np.float64))
    if az.shape != ext.shape:
        raise ValueError("azimuths and extensions must align")
    if np.any(ext < 0.0) or np.any(ext > 1.0):
        raise ValueError("extension outside [0, 1]")
    system = arm_compensation_system()
    proximity = _angular_distance(az).reshape(-1)
    extension = np.repeat(ext, N_ROTORS)
    mags = np.empty_like(proximity)
    for start in range(0, proximity.shape[0], _CHUNK_ROWS):
        stop = start + _CHUNK_ROWS
        mags[start:stop] = _infer_batch(system, {
            "proximity": proximity[start:stop],
            "extension": extension[start:stop],
        })["lift"]
    return _antisymmetric(mags.reshape(-1, N_ROTORS))


def tilt_compensation_deltas(roll: float, pitch: float) -> np.ndarray:
    """Zero-sum deltas (8,) boosting the rotors whose lift opposes the tilt."""
    magnitude = math.hypot(roll, pitch)
    if magnitude == 0.0:
        return np.zeros(N_ROTORS)
    correction_az = math.degrees(math.atan2(-roll, pitch)) % 360.0
    mags = _infer_batch(tilt_compensation_system(), {
        "proximity": _angular_distance(np.array([correction_az])).reshape(-1),
        "tilt": np.full(N_ROTORS, magnitude),
    })["lift"]
    return _antisymmetric(mags.reshape(1, N_ROTORS))[0]


def stabilizer_deltas(arm_azimuth_deg: float, arm_extension: float,
                      tilt_error: tuple = (0.0, 0.0)) -> np.ndarray:
    """Per-rotor thrust deltas (N) opposing the arm torque and tilt error.

    Rotors overlapping the arm azimuth are boosted, their opposite rotors cut
    by the same amount, so the eight deltas sum to exactly zero. The tilt
    correction is built the same way around the azimuth whose boost produces
    a torque opposing (roll, pitch).
    """
    deltas = arm_compensation_deltas([arm_azimuth_deg], [arm_extension])[0]
    roll, pitch = float(tilt_error[0]), float(tilt_error[1])
    if roll != 0.0 or pitch != 0.0:
        deltas = deltas + tilt_compensation_deltas(roll, pitch)
    return deltas


def deltas_csv(deltas) -> str:
    rows = ["rotor_index,delta"]
    rows += [f"{i},{float(d)!r}" for i, d in enumerate(deltas)]
    return "\n".join(rows) + "\n"
