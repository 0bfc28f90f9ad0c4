"""Scenario configuration, random topologies and channel realizations.

All quantities downstream of this module are linear (watt, metre); dBm and
dB only appear in :class:`SystemConfig` constructors and the config file.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

__all__ = [
    "ConfigError",
    "TopologyError",
    "SystemConfig",
    "Topology",
    "ChannelSet",
    "PairChannels",
    "dbm_to_watt",
    "watt_to_dbm",
    "db_to_linear",
    "make_rng",
    "sample_topology",
    "sample_channels",
    "load_config",
    "config_to_dict",
    "config_from_dict",
]

MAX_PLACEMENT_RETRIES = 10_000


class ConfigError(ValueError):
    pass


class TopologyError(RuntimeError):
    """Random placement could not satisfy the geometry constraints."""


def dbm_to_watt(x):
    if np.ndim(x):
        return 10.0 ** ((np.asarray(x, dtype=float) - 30.0) / 10.0)
    return 10.0 ** ((float(x) - 30.0) / 10.0)


def watt_to_dbm(x):
    return 10.0 * np.log10(x) + 30.0


def db_to_linear(x):
    return 10.0 ** (np.asarray(x, dtype=float) / 10.0)


def make_rng(seed) -> np.random.Generator:
    """A fresh single-owner random stream. ``seed`` may be an int or SeedSequence."""
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class SystemConfig:
    """Scenario constants. Powers are in watt, distances in metre.

    ``cu_power_cap`` and ``d2d_power_cap`` may be given as scalars; they are
    broadcast to per-user tuples of length ``num_cus`` / ``num_d2d``. The
    defaults are the standard scenario: M=K=6, N=10, B=E=4, V=1 Hz,
    N0=-100 dBm, P=Q=20 dBm, 500 m cell.
    """

    num_cus: int = 6
    num_d2d: int = 10
    num_rbs: int | None = None
    bs_antennas: int = 4
    eve_antennas: int = 4
    bandwidth: float = 1.0
    noise_power: float = 1e-13
    cu_power_cap: tuple = 0.1
    d2d_power_cap: tuple = 0.1
    cell_radius: float = 500.0
    d2d_max_dist: float = 50.0
    path_loss_exponent: float = 3.7
    shadowing_std: float = 8.0
    min_link_dist: float = 1.0

    def __post_init__(self):
        set_ = object.__setattr__
        if self.num_rbs is None:
            set_(self, "num_rbs", self.num_cus)
        set_(self, "cu_power_cap", _broadcast_caps(self.cu_power_cap, self.num_cus, "cu_power_cap"))
        set_(self, "d2d_power_cap", _broadcast_caps(self.d2d_power_cap, self.num_d2d, "d2d_power_cap"))
        self.validate()

    def validate(self):
        if self.num_cus < 1:
            raise ConfigError("num_cus must be >= 1")
        if self.num_d2d < 0:
            raise ConfigError("num_d2d must be >= 0")
        if self.bs_antennas < 1 or self.eve_antennas < 1:
            raise ConfigError("antenna counts must be >= 1")
        if self.num_rbs != self.num_cus:
            raise ConfigError(f"fully loaded network requires num_rbs == num_cus, got {self.num_rbs} != {self.num_cus}")
        if not (self.bandwidth > 0 and self.noise_power > 0):
            raise ConfigError("bandwidth and noise_power must be positive")
        for name in ("cu_power_cap", "d2d_power_cap"):
            caps = getattr(self, name)
            if any(not (np.isfinite(c) and c > 0) for c in caps):
                raise ConfigError(f"{name} entries must be finite and positive")
        if not (0 < self.min_link_dist < self.d2d_max_dist <= self.cell_radius):
            raise ConfigError("need 0 < min_link_dist < d2d_max_dist <= cell_radius")
        if not self.path_loss_exponent > 0 or self.shadowing_std < 0:
            raise ConfigError("path_loss_exponent must be > 0 and shadowing_std >= 0")

    def with_power_dbm(self, p_dbm: float) -> "SystemConfig":
        """Equal caps P_m = Q_n = P for every CU and D2D transmitter."""
        p = dbm_to_watt(p_dbm)
        return dataclasses.replace(self, cu_power_cap=p, d2d_power_cap=p)

    def with_counts(self, num_cus: int | None = None, num_d2d: int | None = None) -> "SystemConfig":
        """Change M (K follows) and/or N, keeping per-user caps if they are uniform."""
        m = self.num_cus if num_cus is None else num_cus
        n = self.num_d2d if num_d2d is None else num_d2d
        return dataclasses.replace(
            self,
            num_cus=m,
            num_rbs=m,
            num_d2d=n,
            cu_power_cap=_resize_caps(self.cu_power_cap, m, "cu_power_cap"),
            d2d_power_cap=_resize_caps(self.d2d_power_cap, n, "d2d_power_cap"),
        )

    @property
    def P(self) -> np.ndarray:
        return np.asarray(self.cu_power_cap, dtype=float)

    @property
    def Q(self) -> np.ndarray:
        return np.asarray(self.d2d_power_cap, dtype=float)


def _broadcast_caps(value, n, name):
    arr = np.atleast_1d(np.asarray(value, dtype=float))
    if arr.size == 1:
        return tuple(float(arr[0]) for _ in range(n))
    if arr.size != n:
        raise ConfigError(f"{name} has {arr.size} entries, expected {n}")
    return tuple(float(v) for v in arr)


def _resize_caps(caps, n, name):
    if not caps:
        # empty population carries no cap; fall back to the field default
        return SystemConfig.__dataclass_fields__[name].default
    if len(set(caps)) == 1:
        return caps[0]
    if len(caps) == n:
        return caps
    raise ConfigError(f"non-uniform {name} cannot be resized to {n} users")


# -- config file ------------------------------------------------------------

# key -> (SystemConfig field, converter from file units)
_CONFIG_KEYS = {
    "num_cus": ("num_cus", int),
    "num_d2d": ("num_d2d", int),
    "num_rbs": ("num_rbs", int),
    "bs_antennas": ("bs_antennas", int),
    "eve_antennas": ("eve_antennas", int),
    "bandwidth_hz": ("bandwidth", float),
    "noise_power_dbm": ("noise_power", dbm_to_watt),
    "cu_power_dbm": ("cu_power_cap", dbm_to_watt),
    "d2d_power_dbm": ("d2d_power_cap", dbm_to_watt),
    "cell_radius_m": ("cell_radius", float),
    "d2d_max_dist_m": ("d2d_max_dist", float),
    "path_loss_exponent": ("path_loss_exponent", float),
    "shadowing_std_db": ("shadowing_std", float),
    "min_link_dist_m": ("min_link_dist", float),
}


def config_from_dict(data: dict) -> SystemConfig:
    """Build a config from file-unit keys (dBm, dB, m, Hz). Unknown keys are rejected."""
    unknown = set(data) - set(_CONFIG_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    kwargs = {}
    for key, value in data.items():
        name, conv = _CONFIG_KEYS[key]
        if isinstance(value, (list, tuple)):
            value = tuple(float(conv(v)) for v in value)
        else:
            value = conv(value)
        kwargs[name] = value
    return SystemConfig(**kwargs)


def config_to_dict(cfg: SystemConfig) -> dict:
    out = {}
    for key, (name, conv) in _CONFIG_KEYS.items():
        value = getattr(cfg, name)
        if conv is dbm_to_watt:
            if isinstance(value, tuple):
                if not value:
                    continue
                vals = [float(watt_to_dbm(v)) for v in value]
                value = vals[0] if len(set(vals)) == 1 else vals
            else:
                value = float(watt_to_dbm(value))
        out[key] = value
    return out


def load_config(path) -> SystemConfig:
    """Read a YAML (or JSON) key-value config file; missing keys take the defaults."""
    text = Path(path).read_text()
    data = yaml.safe_load(text) or {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a mapping at top level")
    return config_from_dict(data)


# -- geometry ---------------------------------------------------------------

@dataclass(frozen=True)
class Topology:
    bs_pos: np.ndarray
    eve_pos: np.ndarray
    cu_pos: np.ndarray
    d2d_tx_pos: np.ndarray
    d2d_rx_pos: np.ndarray


def _uniform_disk(rng, n, radius):
    r = radius * np.sqrt(rng.random(n))
    theta = 2.0 * np.pi * rng.random(n)
    return np.column_stack((r * np.cos(theta), r * np.sin(theta)))


def _place(rng, n, radius, avoid, min_dist):
    """Uniform points in the disk, each at least ``min_dist`` from every point in ``avoid``."""
    pts = _uniform_disk(rng, n, radius)
    for _ in range(MAX_PLACEMENT_RETRIES):
        d = np.linalg.norm(pts[:, None, :] - avoid[None, :, :], axis=-1)
        bad = np.any(d < min_dist, axis=1)
        if not bad.any():
            return pts
        pts[bad] = _uniform_disk(rng, int(bad.sum()), radius)
    raise TopologyError("could not place users away from BS/eavesdropper")


def sample_topology(cfg: SystemConfig, rng: np.random.Generator) -> Topology:
    """Drop the eavesdropper, CUs and D2D pairs uniformly in the cell.

    Each D2D receiver sits at a uniform angle and a uniform distance in
    ``[min_link_dist, d2d_max_dist]`` from its transmitter; receivers that
    fall outside the cell are redrawn.
    """
    bs = np.zeros(2)
    eve = _place(rng, 1, cfg.cell_radius, bs[None], cfg.min_link_dist)[0]
    anchors = np.vstack((bs, eve))
    cu = _place(rng, cfg.num_cus, cfg.cell_radius, anchors, cfg.min_link_dist)
    tx = _place(rng, cfg.num_d2d, cfg.cell_radius, anchors, cfg.min_link_dist)

    rx = np.empty_like(tx)
    todo = np.ones(cfg.num_d2d, dtype=bool)
    for _ in range(MAX_PLACEMENT_RETRIES):
        k = int(todo.sum())
        if k == 0:
            break
        dist = rng.uniform(cfg.min_link_dist, cfg.d2d_max_dist, k)
        ang = 2.0 * np.pi * rng.random(k)
        rx[todo] = tx[todo] + np.column_stack((dist * np.cos(ang), dist * np.sin(ang)))
        todo &= np.linalg.norm(rx, axis=1) > cfg.cell_radius
    else:
        raise TopologyError("could not place D2D receivers inside the cell")

    return Topology(bs_pos=bs, eve_pos=eve, cu_pos=cu, d2d_tx_pos=tx, d2d_rx_pos=rx)


# -- channels ---------------------------------------------------------------

class PairChannels(tuple):
    """(g_mb, g_me, h_nb, h_ne) for one CU-D2D pair on one RB (or a stack of them)."""

    __slots__ = ()

    def __new__(cls, g_mb, g_me, h_nb, h_ne):
        return super().__new__(cls, (g_mb, g_me, h_nb, h_ne))

    g_mb = property(lambda self: self[0])
    g_me = property(lambda self: self[1])
    h_nb = property(lambda self: self[2])
    h_ne = property(lambda self: self[3])


@dataclass(frozen=True)
class ChannelSet:
    """Complex channel vectors indexed [user, rb, antenna].

    g_mb: (M, K, B), g_me: (M, K, E), h_nb: (N, K, B), h_ne: (N, K, E).
    """

    g_mb: np.ndarray
    g_me: np.ndarray
    h_nb: np.ndarray
    h_ne: np.ndarray

    def pair(self, m: int, n: int | None, k: int) -> PairChannels:
        if n is None:
            zb = np.zeros(self.g_mb.shape[-1], dtype=complex)
            ze = np.zeros(self.g_me.shape[-1], dtype=complex)
            return PairChannels(self.g_mb[m, k], self.g_me[m, k], zb, ze)
        return PairChannels(self.g_mb[m, k], self.g_me[m, k], self.h_nb[n, k], self.h_ne[n, k])


def _large_scale(cfg, d, n_rb, rng):
    d = np.maximum(d, cfg.min_link_dist)
    shadow_db = rng.normal(0.0, cfg.shadowing_std, size=(d.size, n_rb))
    return d[:, None] ** (-cfg.path_loss_exponent) * 10.0 ** (shadow_db / 10.0)


def _fading(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def _link(cfg, d, n_ant, rng):
    gain = _large_scale(cfg, d, cfg.num_rbs, rng)
    h = _fading(rng, gain.shape + (n_ant,))
    # redraw all-zero vectors (measure-zero event, kept for the invariant)
    for _ in range(MAX_PLACEMENT_RETRIES):
        zero = ~np.any(h != 0, axis=-1)
        if not zero.any():
            break
        h[zero] = _fading(rng, (int(zero.sum()), n_ant))
    return np.sqrt(gain)[..., None] * h


def sample_channels(cfg: SystemConfig, topo: Topology, rng: np.random.Generator) -> ChannelSet:
    """Path loss ``d^-alpha`` times log-normal shadowing times Rayleigh fading.

    Shadowing and fading are drawn independently for every link and RB.
    """
    def dist(a, b):
        return np.linalg.norm(np.atleast_2d(a) - b, axis=-1)

    return ChannelSet(
        g_mb=_link(cfg, dist(topo.bs_pos, topo.cu_pos), cfg.bs_antennas, rng),
        g_me=_link(cfg, dist(topo.eve_pos, topo.cu_pos), cfg.eve_antennas, rng),
        h_nb=_link(cfg, dist(topo.bs_pos, topo.d2d_tx_pos), cfg.bs_antennas, rng),
        h_ne=_link(cfg, dist(topo.eve_pos, topo.d2d_tx_pos), cfg.eve_antennas, rng),
    )
