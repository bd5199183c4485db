"""Non-feedback rates: the mutual-information-rate integral for stationary
Gaussian inputs, flat-input limit sweeps, and band-limited water-filling
against the channel's noise spectral density.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .channel import ChannelParams, noise_sdf
from .errors import DegenerateNoise
from .roots import bracketed_root

QUAD_TOL = 1e-10
TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class InputSpectrum:
    """Piecewise-constant input spectral density.

    bands is a sequence of ((lo, hi), density) pairs with nonnegative
    densities and pairwise-disjoint intervals; total_power = sum of
    density * (hi - lo).
    """

    bands: tuple[tuple[tuple[float, float], float], ...]
    total_power: float = field(init=False)

    def __init__(self, bands) -> None:
        norm = []
        for (lo, hi), density in bands:
            lo = float(lo)
            hi = float(hi)
            density = float(density)
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise ValueError(f"invalid interval ({lo}, {hi})")
            if not (math.isfinite(density) and density >= 0.0):
                raise ValueError("densities must be finite and nonnegative")
            norm.append(((lo, hi), density))
        norm.sort(key=lambda b: b[0][0])
        for i in range(1, len(norm)):
            if norm[i][0][0] < norm[i - 1][0][1]:
                raise ValueError("intervals must be pairwise disjoint")
        object.__setattr__(self, "bands", tuple(norm))
        power = sum(d * (hi - lo) for (lo, hi), d in norm)
        object.__setattr__(self, "total_power", power)

    @staticmethod
    def two_sided_flat(offset: float, width: float, density: float) -> "InputSpectrum":
        """Density on [-offset-width/2, -offset] and [offset, offset+width/2]."""
        half = width / 2.0
        return InputSpectrum(
            [((-offset - half, -offset), density), ((offset, offset + half), density)]
        )


def pinsker_rate(spectrum: InputSpectrum, params: ChannelParams) -> float:
    """(1/4pi) * integral of log(1 + S_x/S_z) over the input support.

    The noise density vanishes only at x=0 (when lam = -kappa); the log
    singularity there is integrable and the quadrature splits at the origin.
    """
    total = 0.0
    noise_root = params.lam == -params.kappa
    for (lo, hi), density in spectrum.bands:
        if density == 0.0:
            continue
        if noise_root and lo <= 0.0 <= hi and hi > lo:
            if lo == 0.0 or hi == 0.0:
                pieces = [(lo, hi)]
            else:
                pieces = [(lo, 0.0), (0.0, hi)]
        else:
            pieces = [(lo, hi)]
        for a, b in pieces:
            def integrand(x: float) -> float:
                sz = noise_sdf(params, x)
                if sz == 0.0:
                    raise DegenerateNoise(
                        "noise spectral density vanishes inside the input support"
                    )
                return math.log1p(density / sz)

            val, _err = quad(integrand, a, b, epsabs=QUAD_TOL, epsrel=QUAD_TOL, limit=200)
            total += val
    return total / (4.0 * math.pi)


def flat_input_limit_sweep(params: ChannelParams, n_values, k_values) -> list[tuple[float, float, float, float]]:
    """Rates of two-sided flat inputs of total width n pushed out to offset k.

    Each row is (n, k, rate, analytic_limit) with analytic_limit the k -> inf
    value (n/4pi) log(1 + 2 pi P / n); rates carry total power params.power
    split as density P/n over the two bands.
    """
    rows = []
    power = params.power
    for n in n_values:
        n = float(n)
        if n <= 0:
            raise ValueError("band widths must be positive")
        analytic = (n / (4.0 * math.pi)) * math.log1p(TWO_PI * power / n)
        for k in k_values:
            k = float(k)
            if k < 0:
                raise ValueError("offsets must be nonnegative")
            spec = InputSpectrum.two_sided_flat(k, n, power / n)
            rows.append((n, k, pinsker_rate(spec, params), analytic))
    return rows


def _noise_antiderivative(params: ChannelParams, x: float) -> float:
    """Closed-form integral of the noise density from 0 to x."""
    kappa = params.kappa
    c = params.lam + kappa
    return (x + ((c * c - kappa * kappa) / kappa) * math.atan(x / kappa)) / TWO_PI


def _wet_boundary(params: ChannelParams, level: float, band: float) -> tuple[float, float]:
    """Wet subset of [0, band] where S_z <= level, as an interval (a, b).

    The density is monotone in |x| (increasing when |lam+kappa| < kappa,
    decreasing when > kappa, constant when equal), so the wet set on the
    half-line is a single interval anchored at 0 or at the band edge.
    """
    kappa = params.kappa
    c = abs(params.lam + kappa)
    s0 = noise_sdf(params, 0.0)
    s_edge = noise_sdf(params, band)
    if c == kappa:
        return (0.0, band) if level >= s0 else (0.0, 0.0)
    denom = 1.0 - TWO_PI * level
    if c < kappa:
        if level <= s0:
            return (0.0, 0.0)
        if level >= s_edge:
            return (0.0, band)
        x = math.sqrt((TWO_PI * level * kappa * kappa - c * c) / denom)
        return (0.0, min(x, band))
    if level <= s_edge:
        return (band, band)
    if level >= s0:
        return (0.0, band)
    x = math.sqrt((TWO_PI * level * kappa * kappa - c * c) / denom)
    return (min(x, band), band)


def _wet_power(params: ChannelParams, level: float, band: float) -> float:
    """Power absorbed at `level` over [-band, band]: integral of (level - S_z)+."""
    a, b = _wet_boundary(params, level, band)
    if b <= a:
        return 0.0
    filled = level * (b - a) - (
        _noise_antiderivative(params, b) - _noise_antiderivative(params, a)
    )
    return 2.0 * max(filled, 0.0)


def waterfill_bandlimited(params: ChannelParams, band: float, power: float) -> tuple[float, float]:
    """Water-filling level and rate on the band [-W, W].

    Finds the level A with integral of (A - S_z)+ over [-W, W] equal to
    `power` (monotone in A, so the root is bracketed between the band minimum
    of S_z and min + power/(2W) + max), then evaluates the rate
    (1/4pi) integral of log(max(A/S_z, 1)).
    """
    if not (math.isfinite(band) and band > 0):
        raise ValueError("band must be positive and finite")
    if not (math.isfinite(power) and power >= 0):
        raise ValueError("power must be nonnegative and finite")
    s0 = noise_sdf(params, 0.0)
    s_edge = noise_sdf(params, band)
    s_min, s_max = min(s0, s_edge), max(s0, s_edge)
    if power == 0.0:
        return s_min, 0.0
    level = bracketed_root(
        lambda a: _wet_power(params, a, band) - power,
        s_min,
        s_min + power / (2.0 * band) + s_max,
    )
    a, b = _wet_boundary(params, level, band)
    if b <= a:
        return level, 0.0

    def integrand(x: float) -> float:
        return math.log(level / noise_sdf(params, x))

    lo = a
    pieces = []
    if params.lam == -params.kappa and lo == 0.0:
        # integrable log singularity at the origin; keep it at an endpoint
        pieces.append((0.0, min(b, 1e-3)))
        lo = min(b, 1e-3)
    if b > lo:
        pieces.append((lo, b))
    rate = 0.0
    for x0, x1 in pieces:
        val, _err = quad(integrand, x0, x1, epsabs=QUAD_TOL, epsrel=QUAD_TOL, limit=200)
        rate += val
    return level, rate / TWO_PI


def p_max(params: ChannelParams, cross_check: bool = False) -> float:
    """Total water the noise well holds below the flat floor 1/(2 pi).

    Equals (kappa^2 - (kappa+lam)^2)/(2 kappa); positive exactly in the
    ColoredGain regime, where it bounds the power for which the filled band
    stays finite.  With cross_check=True the closed form is verified against
    direct quadrature of (1/2pi - S_z).
    """
    kappa = params.kappa
    c = params.lam + kappa
    value = (kappa * kappa - c * c) / (2.0 * kappa)
    if cross_check:
        integral, _err = quad(
            lambda x: 1.0 / TWO_PI - noise_sdf(params, x),
            0.0,
            np.inf,
            epsabs=QUAD_TOL,
            limit=400,
        )
        if abs(2.0 * integral - value) > 1e-7 * max(1.0, abs(value)):
            raise ArithmeticError(
                f"water-volume quadrature {2.0 * integral} disagrees with closed form {value}"
            )
    return value
