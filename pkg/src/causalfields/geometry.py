"""Metric models and lattices for 1+1 dimensional spacetimes.

The metric is ds^2 = b(t,x) dt^2 - a(t,x)^2 dx^2 on a spatial circle of
circumference `length`, with b > 0 and a > 0 (signature +,-). Time runs over
[t_min, t_max] with nt inclusive samples; space is the half-open circle with
nx samples x_j = j*dx.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConfigurationError

TWO_PI = 2.0 * math.pi


def smoothstep(s):
    """Quintic smoothstep: 0 for s <= 0, 1 for s >= 1, C^2 in between."""
    s = np.clip(np.asarray(s, dtype=float), 0.0, 1.0)
    return s ** 3 * (10.0 - 15.0 * s + 6.0 * s ** 2)


def bump_profile(s):
    """C^2 bump on [0, 1]: 0 at the ends, 1 at the center, 0 outside."""
    s = np.asarray(s, dtype=float)
    up = smoothstep(2.0 * s)
    down = smoothstep(2.0 * (1.0 - s))
    return np.where(s < 0.5, up, down) * (s > 0.0) * (s < 1.0)


@dataclass(frozen=True, eq=False)
class MetricModel:
    """A metric given by callables a(t, x), b(t, x) broadcasting over grids.

    flat_bands lists (t_lo, t_hi, a_const) time bands on which a == a_const
    and b == 1, used by the state construction to pick a reference Cauchy
    slice; the first entry is the preferred band.
    """

    name: str
    a_fn: Callable
    b_fn: Callable
    t_min: float
    t_max: float
    length: float
    flat_bands: tuple = ()
    params: dict = field(default_factory=dict)

    def a(self, t, x):
        return np.broadcast_arrays(np.asarray(self.a_fn(t, x), dtype=float), t)[0]

    def b(self, t, x):
        return np.broadcast_arrays(np.asarray(self.b_fn(t, x), dtype=float), t)[0]


def minkowski(length=TWO_PI, t_min=-3.0, t_max=3.0):
    """Flat cylinder: a = b = 1."""
    return MetricModel(
        name="minkowski",
        a_fn=lambda t, x: np.ones_like(np.asarray(t, dtype=float) + np.asarray(x, dtype=float)),
        b_fn=lambda t, x: np.ones_like(np.asarray(t, dtype=float) + np.asarray(x, dtype=float)),
        t_min=float(t_min),
        t_max=float(t_max),
        length=float(length),
        flat_bands=((float(t_min), float(t_max), 1.0),),
        params={"length": float(length)},
    )


def sandwich(amplitude=0.35, t_past=0.9, t_fut=2.1, t_min=0.0, t_max=3.0,
             length=TWO_PI, base_scale=1.0, ripple=0.0):
    """Flat-curved-flat cylinder: a = base*(1 + amplitude*bump(t))*(1 + ripple*cos).

    Curvature is confined to t in (t_past, t_fut); both outer bands are exactly
    flat. ripple adds x dependence (pure gauge for b == 1 but it exercises
    position-dependent lightcones); flat bands are only declared when
    ripple == 0.
    """
    if not (t_min < t_past < t_fut < t_max):
        raise ConfigurationError(
            f"need t_min < t_past < t_fut < t_max, got {t_min}, {t_past}, {t_fut}, {t_max}"
        )
    if amplitude <= -1.0:
        raise ConfigurationError(f"amplitude must exceed -1, got {amplitude}")
    span = t_fut - t_past
    le = float(length)

    def a_fn(t, x):
        t = np.asarray(t, dtype=float)
        x = np.asarray(x, dtype=float)
        prof = bump_profile((t - t_past) / span)
        return base_scale * (1.0 + amplitude * prof) * (1.0 + ripple * np.cos(TWO_PI * x / le))

    def b_fn(t, x):
        return np.ones_like(np.asarray(t, dtype=float) + np.asarray(x, dtype=float))

    bands = ()
    if ripple == 0.0:
        bands = (
            (float(t_min), float(t_past), float(base_scale)),
            (float(t_fut), float(t_max), float(base_scale)),
        )
    return MetricModel(
        name="sandwich",
        a_fn=a_fn,
        b_fn=b_fn,
        t_min=float(t_min),
        t_max=float(t_max),
        length=le,
        flat_bands=bands,
        params={
            "amplitude": float(amplitude),
            "t_past": float(t_past),
            "t_fut": float(t_fut),
            "base_scale": float(base_scale),
            "ripple": float(ripple),
        },
    )


def generic_model(name, a_fn, b_fn, t_min, t_max, length, flat_bands=(), params=None):
    """Wrap arbitrary coefficient callables (used by tests and deformations)."""
    return MetricModel(
        name=name,
        a_fn=a_fn,
        b_fn=b_fn,
        t_min=float(t_min),
        t_max=float(t_max),
        length=float(length),
        flat_bands=tuple(flat_bands),
        params=dict(params or {}),
    )


@dataclass(frozen=True)
class Lattice:
    """Uniform grid: nt inclusive time rows, nx periodic columns."""

    nt: int
    nx: int
    dt: float
    dx: float
    t_min: float
    length: float

    @property
    def t_max(self):
        return self.t_min + self.dt * (self.nt - 1)

    def times(self):
        return self.t_min + self.dt * np.arange(self.nt)

    def xs(self):
        return self.dx * np.arange(self.nx)

    def grids(self):
        return np.meshgrid(self.times(), self.xs(), indexing="ij")

    def t_of(self, i):
        return self.t_min + self.dt * i

    def x_of(self, j):
        return self.dx * (j % self.nx)

    def row_of(self, t):
        i = int(round((t - self.t_min) / self.dt))
        if i < 0 or i >= self.nt:
            raise ConfigurationError(f"time {t} outside lattice [{self.t_min}, {self.t_max}]")
        return i

    def col_of(self, x):
        return int(round((x % self.length) / self.dx)) % self.nx


def build_lattice(model, nt, nx, cfl_factor=1.0):
    """Build a lattice for `model`, enforcing dt <= cfl_factor*dx*min(a/sqrt(b)).

    Raises ConfigurationError naming the limiting site when the bound fails.
    """
    nt = int(nt)
    nx = int(nx)
    if nt < 4 or nx < 4:
        raise ConfigurationError(f"lattice too small: nt={nt}, nx={nx}")
    dt = (model.t_max - model.t_min) / (nt - 1)
    dx = model.length / nx
    lat = Lattice(nt=nt, nx=nx, dt=dt, dx=dx, t_min=model.t_min, length=model.length)
    a, b = sample_metric(model, lat)
    speed = np.sqrt(b) / a
    smax = float(speed.max())
    limit = cfl_factor * dx / smax
    if dt > limit * (1.0 + 1e-12):
        i, j = np.unravel_index(int(np.argmax(speed)), speed.shape)
        raise ConfigurationError(
            f"dt={dt:.6g} exceeds stability bound {limit:.6g} "
            f"(fastest lightcone at t={lat.t_of(i):.6g}, x={lat.x_of(j):.6g}); "
            f"increase nt or decrease nx"
        )
    return lat


def sample_metric(model, lattice):
    """Sample (a, b) on the lattice grid; validates positivity."""
    tt, xx = lattice.grids()
    a = model.a(tt, xx)
    b = model.b(tt, xx)
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise ConfigurationError("metric coefficients are not finite on the lattice")
    if a.min() <= 0 or b.min() <= 0:
        raise ConfigurationError("metric coefficients must be positive")
    return a, b


def lightcone_slopes(model, t, x):
    """Coordinate slopes dx/dt = +-sqrt(b)/a of the null directions at (t, x)."""
    a = model.a(np.asarray(t, dtype=float), np.asarray(x, dtype=float))
    b = model.b(np.asarray(t, dtype=float), np.asarray(x, dtype=float))
    s = np.sqrt(b) / a
    return s, -s


def ricci_scalar(model, lattice):
    """Ricci scalar sampled on the lattice by centered second differences.

    R = -2 a_tt/(a b) + a_t b_t/(a b^2) + b_xx/(a^2 b)
        - b_x^2/(2 a^2 b^2) - a_x b_x/(a^3 b)

    The two boundary time rows copy their nearest interior row (the stencil
    needs a one-row margin); x is periodic.
    """
    a, b = sample_metric(model, lattice)
    dt = lattice.dt
    dx = lattice.dx

    def d_x(f):
        return (np.roll(f, -1, axis=1) - np.roll(f, 1, axis=1)) / (2.0 * dx)

    def d_xx(f):
        return (np.roll(f, -1, axis=1) - 2.0 * f + np.roll(f, 1, axis=1)) / dx ** 2

    a_x = d_x(a)
    b_x = d_x(b)
    b_xx = d_xx(b)

    R = np.zeros_like(a)
    ai = a[1:-1]
    bi = b[1:-1]
    a_t = (a[2:] - a[:-2]) / (2.0 * dt)
    b_t = (b[2:] - b[:-2]) / (2.0 * dt)
    a_tt = (a[2:] - 2.0 * a[1:-1] + a[:-2]) / dt ** 2
    R[1:-1] = (
        -2.0 * a_tt / (ai * bi)
        + a_t * b_t / (ai * bi ** 2)
        + b_xx[1:-1] / (ai ** 2 * bi)
        - b_x[1:-1] ** 2 / (2.0 * ai ** 2 * bi ** 2)
        - a_x[1:-1] * b_x[1:-1] / (ai ** 3 * bi)
    )
    R[0] = R[1]
    R[-1] = R[-2]
    return R
