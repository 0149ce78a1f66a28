"""Spatially correlated channel model for a RIS-assisted key-generation link.

Geometry: a multi-antenna base station (Alice), a single-antenna user (Bob),
a reflecting surface with N passive elements, and a K-antenna eavesdropper
(Eve) near Bob.  Every channel is correlated Rayleigh with a Kronecker
structure: exponential Toeplitz correlation across the base-station planar
array, sinc (isotropic-scattering) correlation across the surface, and a
Bessel-J0^2 cross-correlation between Bob's channel and each Eve antenna
depending on their separation in wavelengths.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, fields

import numpy as np
from scipy.linalg import toeplitz
from scipy.special import j0


class ConfigError(ValueError):
    """Raised when a scenario config file or object fails validation."""


def dbm_to_watts(x_dbm):
    return 10.0 ** ((np.asarray(x_dbm, dtype=float) - 30.0) / 10.0)


def db_to_linear(x_db):
    return 10.0 ** (np.asarray(x_db, dtype=float) / 10.0)


@dataclass
class ScenarioConfig:
    """Full description of one simulation scenario.

    Positions are metres, powers watts (config files carry dBm/dB and are
    converted once at load time).  Array shapes are (horizontal, vertical)
    element counts; the base station has ``n_bs = bs_shape[0] * bs_shape[1]``
    antennas and the surface ``n_ris`` elements.
    """

    alice_pos: tuple = (5.0, 0.0, 20.0)
    bob_pos: tuple = (3.0, 100.0, 0.0)
    ris_pos: tuple = (0.0, 60.0, 2.0)
    bs_shape: tuple = (5, 3)
    ris_shape: tuple = (5, 4)
    bs_corr: float = 0.3
    ris_spacing_wavelengths: float = 0.25
    wavelength_m: float = 0.125
    eve_count: int = 10
    eve_radius_m: float = 5.0
    power_alice_w: float = 0.1
    power_bob_w: float = 0.1
    noise_power_w: float = 1e-11
    ref_gain: float = 1e-3
    pl_exp_alice_bob: float = 4.0
    pl_exp_alice_ris: float = 3.5
    pl_exp_ris_bob: float = 2.0
    pl_exp_alice_eve: float = 4.0
    pl_exp_ris_eve: float = 2.0
    amplitude_pathloss: bool = True
    bsum_tol: float = 1e-4
    bsum_max_iters: int = 200
    inner_tol: float = 1e-6
    inner_max_iters: int = 2000
    trials: int = 50
    seed: int = 1234
    probe_rounds: int = 10000
    methods: tuple = ("optimized", "iid_ris", "no_ris")
    sweep_power_dbm: tuple = ()
    sweep_ris_shapes: tuple = ()
    sweep_bs_shapes: tuple = ()
    sweep_eve_radius_m: tuple = ()

    @property
    def n_bs(self):
        return int(self.bs_shape[0] * self.bs_shape[1])

    @property
    def n_ris(self):
        return int(self.ris_shape[0] * self.ris_shape[1])

    def validate(self):
        if min(self.bs_shape) < 1 or min(self.ris_shape) < 1:
            raise ConfigError("array shapes must have positive element counts")
        if not 0.0 <= self.bs_corr < 1.0:
            raise ConfigError("bs_corr must lie in [0, 1)")
        if self.eve_count < 1:
            raise ConfigError("eve_count must be at least 1")
        if self.eve_radius_m < 0:
            raise ConfigError("eve_radius_m must be non-negative")
        for name in ("power_alice_w", "power_bob_w", "noise_power_w",
                     "ref_gain", "wavelength_m", "ris_spacing_wavelengths"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if self.bsum_tol <= 0 or self.inner_tol <= 0:
            raise ConfigError("solver tolerances must be positive")
        if self.bsum_max_iters < 1 or self.inner_max_iters < 1:
            raise ConfigError("solver iteration caps must be at least 1")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if self.probe_rounds < 2:
            raise ConfigError("probe_rounds must be at least 2")
        return self


# Config-file keys holding dB/dBm quantities and the linear field they map to.
_DB_KEYS = {
    "power_alice_dbm": "power_alice_w",
    "power_bob_dbm": "power_bob_w",
    "noise_dbm": "noise_power_w",
    "ref_gain_db": "ref_gain",
}

_TUPLE3_KEYS = {"alice_pos", "bob_pos", "ris_pos"}
_SHAPE_KEYS = {"bs_shape", "ris_shape"}
_SHAPE_LIST_KEYS = {"sweep_ris_shapes", "sweep_bs_shapes"}
_FLOAT_LIST_KEYS = {"sweep_power_dbm", "sweep_eve_radius_m"}
_STR_LIST_KEYS = {"methods"}
_INT_KEYS = {"eve_count", "bsum_max_iters", "inner_max_iters", "trials",
             "seed", "probe_rounds"}
_BOOL_KEYS = {"amplitude_pathloss"}


def _parse_shape(text):
    parts = text.lower().replace("*", "x").split("x")
    if len(parts) != 2:
        raise ConfigError(f"expected a HxV shape, got {text!r}")
    try:
        return (int(parts[0]), int(parts[1]))
    except ValueError as exc:
        raise ConfigError(f"bad shape {text!r}") from exc


def parse_config_values(text):
    """Parse flat ``key = value`` lines into a dict of config fields.

    Unknown keys and malformed values raise ConfigError.  dBm/dB keys are
    converted to linear units here and nowhere else.
    """
    known = {f.name for f in fields(ScenarioConfig)}
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key in _DB_KEYS:
            conv = dbm_to_watts if key.endswith("_dbm") else db_to_linear
            try:
                values[_DB_KEYS[key]] = float(conv(float(val)))
            except ValueError as exc:
                raise ConfigError(f"line {lineno}: bad number {val!r}") from exc
            continue
        if key not in known:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            if key in _TUPLE3_KEYS:
                parts = [float(p) for p in val.split(",")]
                if len(parts) != 3:
                    raise ConfigError(f"line {lineno}: {key} needs 3 coordinates")
                values[key] = tuple(parts)
            elif key in _SHAPE_KEYS:
                values[key] = _parse_shape(val)
            elif key in _SHAPE_LIST_KEYS:
                values[key] = tuple(_parse_shape(p) for p in val.split(",") if p.strip())
            elif key in _FLOAT_LIST_KEYS:
                values[key] = tuple(float(p) for p in val.split(",") if p.strip())
            elif key in _STR_LIST_KEYS:
                values[key] = tuple(p.strip() for p in val.split(",") if p.strip())
            elif key in _INT_KEYS:
                values[key] = int(val)
            elif key in _BOOL_KEYS:
                low = val.lower()
                if low not in ("true", "false", "1", "0", "yes", "no"):
                    raise ConfigError(f"line {lineno}: bad boolean {val!r}")
                values[key] = low in ("true", "1", "yes")
            else:
                values[key] = float(val)
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value {val!r} for {key}") from exc
    return values


def parse_config_text(text, base=None):
    """Build a validated ScenarioConfig from config text, optionally layered
    on top of a dict of default overrides."""
    values = dict(base) if base else {}
    values.update(parse_config_values(text))
    return ScenarioConfig(**values).validate()


def load_config(path, base=None):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read(), base=base)


def config_hash(config):
    """Stable hash of the resolved config, for run manifests."""
    items = []
    for f in sorted(fields(config), key=lambda f: f.name):
        items.append(f"{f.name}={getattr(config, f.name)!r}")
    return hashlib.sha256("\n".join(items).encode()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# correlation matrices


def exp_corr_matrix(n, rho):
    """Exponential Toeplitz correlation, entry (i, j) = rho^|i-j|."""
    if n < 1:
        raise ValueError("n must be positive")
    return toeplitz(rho ** np.arange(n)).astype(float)


def bs_correlation(shape, rho):
    """Planar-array correlation as the Kronecker product of the horizontal
    and vertical exponential factors (horizontal-major element order)."""
    n_h, n_v = shape
    return np.kron(exp_corr_matrix(n_h, rho), exp_corr_matrix(n_v, rho))


def ris_element_positions(shape, spacing_m):
    """Element coordinates of the surface's planar grid, horizontal-major
    (vertical index fastest), in its own y-z plane.  Returns (N, 2)."""
    n_h, n_v = shape
    idx_h, idx_v = np.meshgrid(np.arange(n_h), np.arange(n_v), indexing="ij")
    return np.column_stack([idx_h.ravel(), idx_v.ravel()]) * spacing_m


def ris_correlation(shape, spacing_m, wavelength_m):
    """Isotropic-scattering correlation sinc(2 d / lambda) between surface
    elements at distance d (np.sinc already includes the pi factors)."""
    pos = ris_element_positions(shape, spacing_m)
    dist = np.linalg.norm(pos[:, None, :] - pos[None, :, :], axis=-1)
    return np.sinc(2.0 * dist / wavelength_m)


def eve_cross_correlation(distance_m, wavelength_m):
    """Channel-gain correlation [J0(2 pi d / lambda)]^2 between two antennas
    separated by d in an isotropic scattering field."""
    return j0(2.0 * np.pi * np.asarray(distance_m, dtype=float) / wavelength_m) ** 2


def path_loss_gain(distance_m, exponent, ref_gain, amplitude=True):
    """Large-scale channel-variance factor at the given distance.

    ``amplitude=True`` uses sqrt(ref_gain * d^-alpha); ``False`` uses the
    conventional power-law ref_gain * d^-alpha.
    """
    g = ref_gain * np.asarray(distance_m, dtype=float) ** (-float(exponent))
    return np.sqrt(g) if amplitude else g


def _psd_sqrt(mat, name="matrix"):
    vals, vecs = np.linalg.eigh(mat)
    if vals.min() < -1e-8 * max(vals.max(), 1.0):
        raise ValueError(f"{name} is not positive semidefinite "
                         f"(min eigenvalue {vals.min():.3e})")
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.conj().T


# ---------------------------------------------------------------------------
# assembled statistics


@dataclass
class CorrelationSet:
    """Second-order statistics of one scenario draw.

    ``cross_ris[k]`` is the effective surface-side cross matrix
    (R_ris_sqrt @ C_k @ R_ris_sqrt) o R_ris for the cross-covariance C_k
    between Eve antenna k's and Bob's normalized surface channels, without
    the path-loss weights; ``cross_bs[k]`` the analogous base-station-side
    matrix.  ``rho_eve[k]`` holds the scalar model's coefficient (NaN when a
    caller installed general cross matrices).
    """

    bs_corr: np.ndarray
    ris_corr: np.ndarray
    beta_ab: float
    beta_ar: float
    beta_rb: float
    beta_ae: np.ndarray
    beta_re: np.ndarray
    rho_eve: np.ndarray
    power_alice: float
    power_bob: float
    noise_power: float
    cross_ris: np.ndarray = None
    cross_bs: np.ndarray = None
    bs_corr_sqrt: np.ndarray = field(default=None, repr=False)
    ris_corr_sqrt: np.ndarray = field(default=None, repr=False)
    ris_had: np.ndarray = field(default=None, repr=False)
    eve_positions: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        self.bs_corr = np.asarray(self.bs_corr)
        self.ris_corr = np.asarray(self.ris_corr)
        self.beta_ae = np.atleast_1d(np.asarray(self.beta_ae, dtype=float))
        self.beta_re = np.atleast_1d(np.asarray(self.beta_re, dtype=float))
        self.rho_eve = np.atleast_1d(np.asarray(self.rho_eve, dtype=float))
        if self.bs_corr_sqrt is None:
            self.bs_corr_sqrt = _psd_sqrt(self.bs_corr, "bs_corr")
        if self.ris_corr_sqrt is None:
            self.ris_corr_sqrt = _psd_sqrt(self.ris_corr, "ris_corr")
        if self.ris_had is None:
            self.ris_had = self.ris_corr * self.ris_corr
        if self.cross_ris is None:
            self.cross_ris = self.rho_eve[:, None, None] * self.ris_had[None, :, :]
        else:
            self.cross_ris = np.asarray(self.cross_ris)
        if self.cross_bs is None:
            self.cross_bs = self.rho_eve[:, None, None] * self.bs_corr[None, :, :]
        else:
            self.cross_bs = np.asarray(self.cross_bs)

    @property
    def n_bs(self):
        return self.bs_corr.shape[0]

    @property
    def n_ris(self):
        return self.ris_corr.shape[0]

    @property
    def n_eve(self):
        return self.beta_ae.shape[0]

    @property
    def beta_cascade(self):
        """Two-hop variance weight on the reciprocal surface path."""
        return self.beta_ar * self.beta_rb

    @property
    def beta_cascade_eve(self):
        return self.beta_ar * self.beta_re

    def scalar_cross_model(self):
        """True when the Eve cross matrices are the scalar rho_k model."""
        return not np.any(np.isnan(self.rho_eve))


def draw_eve_positions(config, rng):
    """Uniform placement of Eve's antennas in a disc of radius eve_radius_m
    around Bob at Bob's height."""
    r = config.eve_radius_m * np.sqrt(rng.uniform(size=config.eve_count))
    theta = rng.uniform(0.0, 2.0 * np.pi, size=config.eve_count)
    bob = np.asarray(config.bob_pos)
    pos = np.tile(bob, (config.eve_count, 1))
    pos[:, 0] += r * np.cos(theta)
    pos[:, 1] += r * np.sin(theta)
    pos[:, 2] = bob[2]
    return pos


def build_correlations(config, rng):
    """Assemble a CorrelationSet for one Monte-Carlo trial.

    The only randomness is Eve's placement; everything else is determined
    by the config.
    """
    config.validate()
    alice = np.asarray(config.alice_pos)
    bob = np.asarray(config.bob_pos)
    ris = np.asarray(config.ris_pos)
    eve = draw_eve_positions(config, rng)

    d_ab = np.linalg.norm(alice - bob)
    d_ar = np.linalg.norm(alice - ris)
    d_rb = np.linalg.norm(ris - bob)
    d_ae = np.linalg.norm(eve - alice, axis=1)
    d_re = np.linalg.norm(eve - ris, axis=1)
    d_be = np.linalg.norm(eve - bob, axis=1)

    amp = config.amplitude_pathloss
    return CorrelationSet(
        bs_corr=bs_correlation(config.bs_shape, config.bs_corr),
        ris_corr=ris_correlation(
            config.ris_shape,
            config.ris_spacing_wavelengths * config.wavelength_m,
            config.wavelength_m,
        ),
        beta_ab=float(path_loss_gain(d_ab, config.pl_exp_alice_bob, config.ref_gain, amp)),
        beta_ar=float(path_loss_gain(d_ar, config.pl_exp_alice_ris, config.ref_gain, amp)),
        beta_rb=float(path_loss_gain(d_rb, config.pl_exp_ris_bob, config.ref_gain, amp)),
        beta_ae=path_loss_gain(d_ae, config.pl_exp_alice_eve, config.ref_gain, amp),
        beta_re=path_loss_gain(d_re, config.pl_exp_ris_eve, config.ref_gain, amp),
        rho_eve=eve_cross_correlation(d_be, config.wavelength_m),
        power_alice=config.power_alice_w,
        power_bob=config.power_bob_w,
        noise_power=config.noise_power_w,
        eve_positions=eve,
    )


# ---------------------------------------------------------------------------
# sampling


def _cn(rng, *shape):
    """I.i.d. unit-variance circular complex Gaussians."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


@dataclass
class ChannelRealization:
    """One small-scale fading draw: base-station/surface cascade, direct
    links, and Eve's correlated copies."""

    g_ar: np.ndarray      # (M, N) Alice->surface two-hop factor
    h_rb: np.ndarray      # (N,)  surface->Bob
    h_ab: np.ndarray      # (M,)  Alice->Bob direct
    h_re: np.ndarray      # (K, N) surface->Eve antennas
    h_ae: np.ndarray      # (K, M) Alice->Eve direct


def sample_channels(corr, rng):
    """Draw one ChannelRealization consistent with the correlation set.

    Eve's normalized channels are generated from Bob's so that
    E{conj(h~_re,k) h~_rb^T} = rho_k I and E{h~_ab conj(h~_ae,k)^T} = rho_k I.
    Only the scalar cross model is supported for sampling.
    """
    if not corr.scalar_cross_model():
        raise NotImplementedError("sampling requires the scalar Eve cross model")
    m, n, k = corr.n_bs, corr.n_ris, corr.n_eve

    h_mat = _cn(rng, m, n)
    g_ar = np.sqrt(corr.beta_ar) * corr.bs_corr_sqrt @ h_mat @ corr.ris_corr_sqrt

    tilde_rb = _cn(rng, n)
    tilde_ab = _cn(rng, m)
    h_rb = np.sqrt(corr.beta_rb) * corr.ris_corr_sqrt @ tilde_rb
    h_ab = np.sqrt(corr.beta_ab) * corr.bs_corr_sqrt @ tilde_ab

    rho = corr.rho_eve[:, None]
    mix = np.sqrt(np.clip(1.0 - rho ** 2, 0.0, None))
    tilde_re = np.conj(rho * np.conj(tilde_rb)[None, :] + mix * _cn(rng, k, n))
    tilde_ae = rho * tilde_ab[None, :] + mix * _cn(rng, k, m)
    h_re = np.sqrt(corr.beta_re)[:, None] * tilde_re @ corr.ris_corr_sqrt
    h_ae = np.sqrt(corr.beta_ae)[:, None] * tilde_ae @ corr.bs_corr_sqrt
    return ChannelRealization(g_ar, h_rb, h_ab, h_re, h_ae)


def simulate_probing(corr, w, v, rng, rounds, chunk=65536):
    """Simulate probing rounds and return the three observation sequences.

    Per round the channel and the noises are drawn fresh.  Returns
    (alice, bob, eve) with shapes (rounds,), (rounds,), (rounds, K):
    Alice's combined uplink estimate, Bob's downlink estimate, and Eve's
    downlink estimates.
    """
    w = np.asarray(w, dtype=complex)
    v = np.asarray(v, dtype=complex)
    m, n, k = corr.n_bs, corr.n_ris, corr.n_eve
    sig = np.sqrt(corr.noise_power)
    out_a = np.empty(rounds, dtype=complex)
    out_b = np.empty(rounds, dtype=complex)
    out_e = np.empty((rounds, k), dtype=complex)

    if not corr.scalar_cross_model():
        raise NotImplementedError("sampling requires the scalar Eve cross model")
    rho = corr.rho_eve[None, :, None]
    mix = np.sqrt(np.clip(1.0 - corr.rho_eve ** 2, 0.0, None))[None, :, None]

    done = 0
    while done < rounds:
        b = min(chunk, rounds - done)
        h_mat = _cn(rng, b, m, n)
        tilde_rb = _cn(rng, b, n)
        tilde_ab = _cn(rng, b, m)
        tilde_re = np.conj(rho * np.conj(tilde_rb)[:, None, :] + mix * _cn(rng, b, k, n))
        tilde_ae = rho * tilde_ab[:, None, :] + mix * _cn(rng, b, k, m)

        # w^T G per round, with G the two-hop base-station/surface channel;
        # both ends' reciprocal scalars are bilinear forms in it
        g_chain = np.sqrt(corr.beta_ar) * (
            (corr.bs_corr_sqrt @ h_mat) @ corr.ris_corr_sqrt)
        wg = np.einsum("bmn,m->bn", g_chain, w)
        h_rb = np.sqrt(corr.beta_rb) * tilde_rb @ corr.ris_corr_sqrt
        h_ab = np.sqrt(corr.beta_ab) * tilde_ab @ corr.bs_corr_sqrt
        shared = np.sum(wg * (v * h_rb), axis=1) + h_ab @ w

        h_re = np.sqrt(corr.beta_re)[None, :, None] * tilde_re @ corr.ris_corr_sqrt
        h_ae = np.sqrt(corr.beta_ae)[None, :, None] * tilde_ae @ corr.bs_corr_sqrt
        eve_recip = np.einsum("bkn,bn->bk", v[None, None, :] * h_re, wg)
        eve_direct = h_ae @ w

        sl = slice(done, done + b)
        out_a[sl] = (np.sqrt(corr.power_bob) * shared
                     + _cn(rng, b, m) @ w * sig)
        out_b[sl] = shared + sig * _cn(rng, b)
        out_e[sl] = eve_recip + eve_direct + sig * _cn(rng, b, k)
        done += b
    return out_a, out_b, out_e
