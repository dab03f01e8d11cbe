"""Resource functions m(x) on [0, 1] and the hypothesis classifier (M0)-(M3)."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .errors import DomainError

__all__ = [
    "PRESETS",
    "ResourceProfile",
    "ConditionReport",
    "Witness",
    "eval_resource",
    "eval_resource_derivative",
    "positive_part",
    "classify_conditions",
]

_TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class _Preset:
    value: Callable
    derivative: Callable
    params: tuple[str, ...]
    defaults: dict = field(default_factory=dict)


PRESETS: dict[str, _Preset] = {
    "constant": _Preset(
        lambda x, c: c + 0.0 * x,
        lambda x, c: 0.0 * x,
        ("c",),
    ),
    "linear": _Preset(
        lambda x, a, b: a + b * x,
        lambda x, a, b: b + 0.0 * x,
        ("a", "b"),
        {"a": 0.0, "b": 1.0},
    ),
    "sine_offset": _Preset(
        lambda x, c, A: c + A * np.sin(_TWO_PI * x),
        lambda x, c, A: _TWO_PI * A * np.cos(_TWO_PI * x),
        ("c", "A"),
    ),
    "cosine_offset": _Preset(
        lambda x, c, A: c + A * np.cos(np.pi * x),
        lambda x, c, A: -np.pi * A * np.sin(np.pi * x),
        ("c", "A"),
    ),
    "single_peak": _Preset(
        lambda x, c, A: c + A * np.sin(np.pi * x),
        lambda x, c, A: np.pi * A * np.cos(np.pi * x),
        ("c", "A"),
        {"c": 0.0, "A": 1.0},
    ),
    "shifted_ramp": _Preset(
        lambda x, s: x - s,
        lambda x, s: 1.0 + 0.0 * x,
        ("s",),
    ),
}


@dataclass(frozen=True)
class ResourceProfile:
    """A C^1 resource function on the closed unit interval.

    Either a named preset with real parameters, or a sampled profile given by
    node values and node derivatives joined by cubic Hermite interpolation.
    Instances are callable and vectorised: ``profile(x)`` returns m(x).
    """

    kind: str
    params: tuple[tuple[str, float], ...] = ()
    nodes: Optional[tuple[float, ...]] = None
    values: Optional[tuple[float, ...]] = None
    slopes: Optional[tuple[float, ...]] = None

    def __post_init__(self):
        if self.kind == "sampled":
            if self.nodes is None or self.values is None or self.slopes is None:
                raise ValueError("sampled profile needs nodes, values and slopes")
            xs = np.asarray(self.nodes, dtype=float)
            if not (len(xs) == len(self.values) == len(self.slopes)) or len(xs) < 2:
                raise ValueError("sampled profile needs >= 2 matching (x, m, m') triples")
            if np.any(np.diff(xs) <= 0) or xs[0] != 0.0 or xs[-1] != 1.0:
                raise ValueError("sampled nodes must increase strictly from 0 to 1")
            if not (np.all(np.isfinite(self.values)) and np.all(np.isfinite(self.slopes))):
                raise ValueError("sampled values must be finite")
        elif self.kind in PRESETS:
            preset = PRESETS[self.kind]
            given = dict(self.params)
            unknown = set(given) - set(preset.params)
            missing = set(preset.params) - set(given)
            if unknown or missing:
                raise ValueError(
                    f"preset {self.kind!r} takes parameters {preset.params}; "
                    f"unknown={sorted(unknown)} missing={sorted(missing)}"
                )
            if not all(np.isfinite(v) for v in given.values()):
                raise ValueError("preset parameters must be finite")
        else:
            raise ValueError(f"unknown resource kind {self.kind!r}")

    # constructors -------------------------------------------------------
    @classmethod
    def preset(cls, name: str, **params: float) -> "ResourceProfile":
        if name not in PRESETS:
            raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
        full = {**PRESETS[name].defaults, **params}
        order = PRESETS[name].params
        return cls(name, tuple((k, float(full[k])) for k in order if k in full)
                   + tuple((k, float(v)) for k, v in full.items() if k not in order))

    @classmethod
    def constant(cls, c: float = 1.0):
        return cls.preset("constant", c=c)

    @classmethod
    def linear(cls, a: float = 0.0, b: float = 1.0):
        return cls.preset("linear", a=a, b=b)

    @classmethod
    def sine_offset(cls, c: float, A: float):
        return cls.preset("sine_offset", c=c, A=A)

    @classmethod
    def cosine_offset(cls, c: float, A: float):
        return cls.preset("cosine_offset", c=c, A=A)

    @classmethod
    def single_peak(cls, c: float = 0.0, A: float = 1.0):
        return cls.preset("single_peak", c=c, A=A)

    @classmethod
    def shifted_ramp(cls, s: float):
        return cls.preset("shifted_ramp", s=s)

    @classmethod
    def sampled(cls, nodes, values, slopes) -> "ResourceProfile":
        return cls(
            "sampled",
            nodes=tuple(float(v) for v in nodes),
            values=tuple(float(v) for v in values),
            slopes=tuple(float(v) for v in slopes),
        )

    # evaluation ---------------------------------------------------------
    @property
    def param_dict(self) -> dict[str, float]:
        return dict(self.params)

    def _spline(self) -> CubicHermiteSpline:
        return CubicHermiteSpline(
            np.asarray(self.nodes), np.asarray(self.values), np.asarray(self.slopes)
        )

    def __call__(self, x):
        x = _check_domain(x)
        if self.kind == "sampled":
            out = self._spline()(x)
        else:
            out = PRESETS[self.kind].value(x, **self.param_dict)
        return _like(out, x)

    def derivative(self, x):
        x = _check_domain(x)
        if self.kind == "sampled":
            out = self._spline().derivative()(x)
        else:
            out = PRESETS[self.kind].derivative(x, **self.param_dict)
        return _like(out, x)

    def scaled(self, factor: float) -> "ResourceProfile":
        """Return ``factor * m`` as a sampled-free profile where possible."""
        p = self.param_dict
        if self.kind == "constant":
            return ResourceProfile.constant(factor * p["c"])
        if self.kind == "linear":
            return ResourceProfile.linear(factor * p["a"], factor * p["b"])
        if self.kind in ("sine_offset", "cosine_offset", "single_peak"):
            return ResourceProfile.preset(self.kind, c=factor * p["c"], A=factor * p["A"])
        if self.kind == "sampled":
            return ResourceProfile.sampled(
                self.nodes, [factor * v for v in self.values], [factor * v for v in self.slopes]
            )
        # shifted ramp has no amplitude parameter; fall back to a dense Hermite copy
        xs = np.linspace(0.0, 1.0, 257)
        return ResourceProfile.sampled(xs, factor * self(xs), factor * self.derivative(xs))

    def describe(self) -> str:
        if self.kind == "sampled":
            return f"sampled[{len(self.nodes)} nodes]"
        args = ", ".join(f"{k}={v:g}" for k, v in self.params)
        return f"{self.kind}({args})"


def _check_domain(x):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise DomainError(f"resource evaluated outside [0, 1]: {x!r}")
    return arr


def _like(out, x):
    out = np.asarray(out, dtype=float)
    if out.shape != x.shape:
        out = np.broadcast_to(out, x.shape).copy()
    return float(out) if out.ndim == 0 else out


def eval_resource(profile: ResourceProfile, x):
    return profile(x)


def eval_resource_derivative(profile: ResourceProfile, x):
    return profile.derivative(x)


def positive_part(values):
    """m^+ = max(m, 0), elementwise."""
    return np.maximum(values, 0.0)


@dataclass(frozen=True)
class Witness:
    """A sample point (and the values there) demonstrating a failed condition."""

    x: float
    values: dict


@dataclass(frozen=True)
class ConditionReport:
    m0: bool
    mean: float
    m1: bool
    m_max: float
    m_min: float
    m2: bool
    m2_direction: Optional[str]
    m3: bool
    peak: Optional[float]
    witnesses: dict = field(default_factory=dict)

    @property
    def nonconstant(self) -> bool:
        return self.m_max - self.m_min > 1e-12 * (1.0 + max(abs(self.m_max), abs(self.m_min)))

    def as_dict(self) -> dict:
        return {
            "m0": self.m0,
            "mean": self.mean,
            "m1": self.m1,
            "max": self.m_max,
            "min": self.m_min,
            "m2": self.m2,
            "m2_direction": self.m2_direction,
            "m3": self.m3,
            "peak": self.peak,
            "witnesses": {
                k: {"x": w.x, **{n: float(v) for n, v in w.values.items()}}
                for k, w in sorted(self.witnesses.items())
            },
        }


def classify_conditions(profile: ResourceProfile, samples: int = 4097) -> ConditionReport:
    """Decide which of (M0)-(M3) hold for ``profile`` on a dense uniform sampling."""
    if samples < 64:
        raise ValueError("classification needs at least 64 samples")
    x = np.linspace(0.0, 1.0, samples)
    m = np.asarray(profile(x))
    dm = np.asarray(profile.derivative(x))
    scale = float(np.max(np.abs(m)))
    witnesses = {}

    w = np.full(samples, 1.0 / (samples - 1))
    w[0] = w[-1] = 0.5 / (samples - 1)
    mean = float(w @ m)
    m_max, m_min = float(m.max()), float(m.min())
    i_max, i_min = int(m.argmax()), int(m.argmin())

    # (M0): C^1 holds by construction for every supported kind
    tol_const = 1e-12 * (1.0 + scale)
    nonconstant = m_max - m_min > tol_const
    m0 = nonconstant and mean >= -1e-12
    if not m0:
        if not nonconstant:
            witnesses["m0"] = Witness(0.0, {"range": m_max - m_min})
        else:
            witnesses["m0"] = Witness(float(x[i_min]), {"mean": mean})

    # (M1)
    m1 = m_min > 0.0 and m_max <= 2.0 * m_min + 1e-12 * m_max
    if not m1:
        if m_min <= 0.0:
            witnesses["m1"] = Witness(float(x[i_min]), {"m": m_min})
        else:
            witnesses["m1"] = Witness(float(x[i_max]), {"max": m_max, "two_min": 2.0 * m_min})

    # (M2): non-strict monotonicity of m^+
    mp = positive_part(m)
    steps = np.diff(mp)
    tol_mono = 1e-12 * (1.0 + scale)
    up = bool(np.all(steps >= -tol_mono))
    down = bool(np.all(steps <= tol_mono))
    if up:
        m2, direction = True, "non-decreasing"
    elif down:
        m2, direction = True, "non-increasing"
    else:
        m2, direction = False, None
        j_up, j_dn = int(steps.argmax()), int(steps.argmin())
        j = max(j_up, j_dn)
        witnesses["m2"] = Witness(
            float(x[j]),
            {"rise_at": float(x[j_up]), "rise": float(steps[j_up]),
             "fall_at": float(x[j_dn]), "fall": float(steps[j_dn])},
        )

    # (M3): m' > 0 on [0, rho), m' < 0 on (rho, 1], a single strict sign change
    m3, peak, bad = _single_peak(x, dm)
    if not m3:
        witnesses["m3"] = Witness(float(x[bad]), {"dm": float(dm[bad])})

    return ConditionReport(
        m0=bool(m0), mean=mean, m1=bool(m1), m_max=m_max, m_min=m_min,
        m2=m2, m2_direction=direction, m3=m3, peak=peak, witnesses=witnesses,
    )


def _single_peak(x, dm):
    tol = 1e-12 * (1.0 + float(np.max(np.abs(dm))))
    sign = np.where(dm > tol, 1, np.where(dm < -tol, -1, 0))
    if sign[0] != 1:
        return False, None, 0
    if sign[-1] != -1:
        return False, None, len(x) - 1
    first_nonpos = int(np.argmax(sign != 1))
    rest = sign[first_nonpos:]
    zeros = 0
    while zeros < len(rest) and rest[zeros] == 0:
        zeros += 1
    if zeros > 1:  # plateau at the peak
        return False, None, first_nonpos
    tail = rest[zeros:]
    if np.any(tail != -1):
        return False, None, first_nonpos + zeros + int(np.argmax(tail != -1))
    if zeros == 1:
        return True, float(x[first_nonpos]), None
    i = first_nonpos - 1
    x0, x1, d0, d1 = x[i], x[i + 1], dm[i], dm[i + 1]
    return True, float(x0 - d0 * (x1 - x0) / (d1 - d0)), None
