"""INI-backed harness configuration.

One flat dataclass per run; sections group related knobs. Unknown keys are
rejected so a typo cannot silently fall back to a default.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, fields

import numpy as np

from ..errors import ConfigurationError
from ..geometry import build_lattice, bump_profile, generic_model, minkowski, sandwich


def _gated_ripple_model(cfg):
    """Sandwich with x-dependent lightcones inside the curved band.

    The ripple factor is gated by the same time profile as the amplitude, so
    the outer bands stay exactly flat and the quasifree construction still
    has an honest flat Cauchy surface.
    """
    span = cfg.t_future - cfg.t_past
    two_pi = 2.0 * np.pi

    def a_fn(t, x):
        t = np.asarray(t, dtype=float)
        x = np.asarray(x, dtype=float)
        prof = bump_profile((t - cfg.t_past) / span)
        ripple = 1.0 + 0.3 * np.cos(two_pi * x / cfg.length)
        return 1.0 + cfg.amplitude * prof * ripple

    def b_fn(t, x):
        return np.ones_like(np.asarray(t, dtype=float) + np.asarray(x, dtype=float))

    return generic_model(
        name="gated-ripple",
        a_fn=a_fn,
        b_fn=b_fn,
        t_min=cfg.t_min,
        t_max=cfg.t_max,
        length=cfg.length,
        flat_bands=((cfg.t_min, cfg.t_past, 1.0), (cfg.t_future, cfg.t_max, 1.0)),
        params={"amplitude": cfg.amplitude, "ripple": 0.3},
    )


@dataclass
class HarnessConfig:
    # [model]
    model_kind: str = "sandwich"
    amplitude: float = 0.35
    t_past: float = 0.9
    t_future: float = 2.1
    length: float = 6.283185307179586
    t_min: float = 0.0
    t_max: float = 3.0
    # [lattice]
    nt: int = 193
    nx: int = 384
    cfl_factor: float = 0.98
    # [field]
    mass: float = 1.0
    # [basis]
    n_functions: int = 6
    basis_seed: int = 7
    basis_width: float = 0.45
    # [deformation]
    t_sigma1: float = 1.6
    t_sigma2: float = 1.9
    t_sigma: float = 2.2
    gamma_margin: float = 1.05
    lapse_floor: float = 1.0
    tamper: float = 0.0
    # [atlas]
    u_half: float = 0.6
    u_rows: int = 3
    w_pad: float = 0.9
    uhat_half: float = 1.16
    what_half: float = 1.37
    uhat_shrink: float = 1.0
    # [state]
    n_modes: int = 6
    fock_cutoff: int = 3
    # [dirac]
    dirac_mass: float = 1.0
    dirac_n_basis: int = 4
    # [tolerances]
    tol_scale: float = 1.0
    pairing_tol: float = 1e-6
    ccr_tol: float = 1e-9
    car_tol: float = 1e-9
    # [run]
    seed: int = 20240811
    # [sabotage]
    sabotage: str = "none"

    def __post_init__(self):
        if self.model_kind not in ("sandwich", "minkowski", "generic"):
            raise ConfigurationError(f"unknown model kind {self.model_kind!r}")
        if self.sabotage not in ("none", "f_not_zero_on_nplus", "uhat_shrunk"):
            raise ConfigurationError(f"unknown sabotage mode {self.sabotage!r}")
        if self.nt < 8 or self.nx < 8:
            raise ConfigurationError("lattice too small")
        if self.tol_scale <= 0:
            raise ConfigurationError("tol_scale must be positive")

    def model(self):
        if self.model_kind == "minkowski":
            return minkowski(length=self.length, t_min=self.t_min, t_max=self.t_max)
        if self.model_kind == "generic":
            return _gated_ripple_model(self)
        return sandwich(
            amplitude=self.amplitude,
            t_past=self.t_past,
            t_fut=self.t_future,
            length=self.length,
            t_min=self.t_min,
            t_max=self.t_max,
        )

    def lattice(self, model=None):
        model = model if model is not None else self.model()
        return build_lattice(model, self.nt, self.nx, cfl_factor=self.cfl_factor)

    def deformation_params(self):
        p = {
            "t_sigma1": self.t_sigma1,
            "t_sigma2": self.t_sigma2,
            "t_sigma": self.t_sigma,
            "gamma_margin": self.gamma_margin,
            "lapse_floor": self.lapse_floor,
            "tamper": self.tamper,
        }
        if self.sabotage == "f_not_zero_on_nplus" and self.tamper == 0.0:
            p["tamper"] = 0.05
        return p

    def atlas_params(self):
        p = {
            "u_half": self.u_half,
            "u_rows": self.u_rows,
            "w_pad": self.w_pad,
            "uhat_half": self.uhat_half,
            "what_half": self.what_half,
            "uhat_shrink": self.uhat_shrink,
        }
        if self.sabotage == "uhat_shrunk" and self.uhat_shrink == 1.0:
            p["uhat_shrink"] = 0.2
        return p


_SECTIONS = {
    "model": ("model_kind", "amplitude", "t_past", "t_future", "length", "t_min", "t_max"),
    "lattice": ("nt", "nx", "cfl_factor"),
    "field": ("mass",),
    "basis": ("n_functions", "basis_seed", "basis_width"),
    "deformation": ("t_sigma1", "t_sigma2", "t_sigma", "gamma_margin", "lapse_floor", "tamper"),
    "atlas": ("u_half", "u_rows", "w_pad", "uhat_half", "what_half", "uhat_shrink"),
    "state": ("n_modes", "fock_cutoff"),
    "dirac": ("dirac_mass", "dirac_n_basis"),
    "tolerances": ("tol_scale", "pairing_tol", "ccr_tol", "car_tol"),
    "run": ("seed",),
    "sabotage": ("sabotage",),
}

_FIELD_TYPES = {f.name: f.type for f in fields(HarnessConfig)}


def _parse_value(name, raw):
    kind = _FIELD_TYPES[name]
    if kind == "int":
        return int(raw)
    if kind == "float":
        return float(raw)
    return raw


def default_config():
    return HarnessConfig()


def load_config(path):
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigurationError(f"cannot read config file {path!r}")
    kwargs = {}
    for section in parser.sections():
        if section not in _SECTIONS:
            raise ConfigurationError(f"unknown config section [{section}]")
        allowed = _SECTIONS[section]
        for key, raw in parser.items(section):
            if key not in allowed:
                raise ConfigurationError(f"unknown key {key!r} in section [{section}]")
            try:
                kwargs[key] = _parse_value(key, raw)
            except ValueError as exc:
                raise ConfigurationError(f"bad value for {key!r}: {raw!r}") from exc
    return HarnessConfig(**kwargs)


def write_config(cfg, path):
    parser = configparser.ConfigParser()
    for section, keys in _SECTIONS.items():
        parser[section] = {k: str(getattr(cfg, k)) for k in keys}
    with open(path, "w") as fh:
        parser.write(fh)
