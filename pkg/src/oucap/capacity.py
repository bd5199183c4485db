"""Closed-form feedback capacity and its discrete-time limit experiment.

Two independent routes to the same number:

* ``feedback_capacity_closed_form`` — the capacity of the colored channel is
  the unique positive root of P(x+kappa)^2 = 2x(x+|kappa+lam|)^2; white-
  equivalent parameters give P/2 exactly.
* ``discrete_limit_sweep`` — sample the channel at step delta, reduce it to a
  stationary ARMA(1,1) noise model, solve that model's quartic capacity
  equation, and divide by delta.  As delta -> 0 the rates converge to the
  closed form at first order in delta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .channel import CapacityResult, ChannelParams, Regime, Route, classify_regime
from .errors import InvalidArma
from .roots import bracketed_root


@dataclass(frozen=True)
class ArmaParams:
    """Stationary ARMA(1,1) noise model with per-symbol power budget.

    The noise is N_k = phi*N_{k-1} + U_k + theta*U_{k-1} with unit-variance
    innovations; |phi| < 1 is required for stationarity.
    """

    phi: float
    theta: float
    power: float

    def __post_init__(self) -> None:
        if not abs(self.phi) < 1.0:
            raise InvalidArma(f"|phi| must be < 1, got phi={self.phi}")
        if self.power < 0:
            raise InvalidArma(f"power must be nonnegative, got {self.power}")


@dataclass(frozen=True)
class DeltaSweep:
    """Rates C_FB(P*delta)/delta along a decreasing sequence of steps."""

    deltas: tuple
    rates: tuple
    extrapolated: float

    def __post_init__(self) -> None:
        if len(self.deltas) != len(self.rates):
            raise ValueError("deltas and rates must have equal length")
        if not all(math.isfinite(r) for r in self.rates):
            raise ValueError("all rates must be finite")


def _cubic_residual(x: float, params: ChannelParams) -> float:
    c = abs(params.kappa + params.lam)
    return (params.power * (x + params.kappa) ** 2
            - 2.0 * x * (x + c) ** 2)


def feedback_capacity_closed_form(params: ChannelParams) -> CapacityResult:
    """Feedback capacity in nats per unit time, closed-form route.

    White-equivalent regime: P/2 with zero residual.  Colored-gain regime:
    the unique positive root of P(x+kappa)^2 = 2x(x+|kappa+lam|)^2, located
    by bracketed Brent iteration on [0, 10*max(P, kappa, 1)]; the stored
    residual is the defining polynomial evaluated at the root.
    """
    if classify_regime(params) is Regime.WHITE_EQUIVALENT:
        return CapacityResult(value=params.power / 2.0,
                              route=Route.CLOSED_FORM, residual=0.0)
    if params.power == 0.0:
        return CapacityResult(value=0.0, route=Route.CLOSED_FORM, residual=0.0)
    hi = 10.0 * max(params.power, params.kappa, 1.0)
    x0 = bracketed_root(lambda x: _cubic_residual(x, params), 0.0, hi)
    return CapacityResult(value=x0, route=Route.CLOSED_FORM,
                          residual=abs(_cubic_residual(x0, params)))


def _sgn(x: float) -> float:
    if x > 0.0:
        return 1.0
    if x < 0.0:
        return -1.0
    return 0.0


def _quartic_residual(x: float, arma: ArmaParams) -> float:
    """Cleared-denominator capacity polynomial for the ARMA(1,1) model.

    Negative at x -> 0+ and positive at x = 1 (for power > 0), so bisection
    on (0, 1) is always bracketed.  (1-x^2) is evaluated as (1-x)(1+x): the
    root sits within O(delta) of 1 in the small-step limit and the factored
    form keeps full precision there.
    """
    P = arma.power
    one_minus_x2 = (1.0 - x) * (1.0 + x)
    if abs(arma.theta) <= 1.0:
        s = _sgn(arma.phi - arma.theta)
        lhs = P * x * x * (1.0 + s * arma.phi * x) ** 2
        rhs = one_minus_x2 * (1.0 + s * arma.theta * x) ** 2
    else:
        s = _sgn(arma.phi - 1.0 / arma.theta)
        lhs = P * x * x * (1.0 + s * arma.phi * x) ** 2
        rhs = one_minus_x2 * (arma.theta + s * x) ** 2
    return lhs - rhs


def solve_arma_quartic(arma: ArmaParams) -> tuple[float, float]:
    """Root x0 in (0, 1] of the ARMA(1,1) capacity polynomial, and the
    capacity cap = -(1/2) ln(x0^2) in nats per symbol.

    The branch with |theta| <= 1 solves
    P x^2 = (1-x^2)(1+s*theta*x)^2/(1+s*phi*x)^2 with s = sgn(phi-theta);
    for |theta| > 1 the moving-average factor is replaced by (theta+s*x)
    with s = sgn(phi-1/theta).  sgn(0)=0 collapses phi=theta to the
    memoryless P x^2 = 1-x^2.
    """
    if arma.power == 0.0:
        return 1.0, 0.0
    # denominators (1+s*phi*x) never vanish on (0,1] since |phi|<1, so the
    # cleared polynomial has the same root; bracket is [~0, 1].
    x0 = bracketed_root(lambda x: _quartic_residual(x, arma), 1e-300, 1.0)
    cap = -math.log(x0)
    return x0, cap


def arma_from_step(params: ChannelParams, delta: float) -> ArmaParams:
    """ARMA(1,1) reduction of the channel sampled at step delta.

    phi = -e^{-kappa*delta}, theta = lam/kappa - (lam/kappa + 1)e^{-kappa*delta},
    per-symbol power P*delta.
    """
    if delta <= 0:
        raise ValueError(f"delta must be positive, got {delta}")
    e = math.exp(-params.kappa * delta)
    ratio = params.lam / params.kappa
    return ArmaParams(phi=-e, theta=ratio - (ratio + 1.0) * e,
                      power=params.power * delta)


def discrete_limit_sweep(params: ChannelParams,
                         deltas: Sequence[float]) -> DeltaSweep:
    """Per-unit-time rates cap(delta)/delta along a decreasing delta sequence.

    extrapolated is the two-point Richardson value from the last two
    entries, assuming a first-order error expansion rate(delta) =
    limit + c*delta + o(delta); the raw final rate is also retained in
    rates[-1] for callers that prefer not to rely on that assumption.
    """
    ds = [float(d) for d in deltas]
    if any(d <= 0 for d in ds):
        raise ValueError("all deltas must be positive")
    if any(b >= a for a, b in zip(ds, ds[1:])):
        raise ValueError("deltas must be strictly decreasing")
    rates = []
    for d in ds:
        _, cap = solve_arma_quartic(arma_from_step(params, d))
        rates.append(cap / d)
    if len(ds) >= 2:
        d1, d2 = ds[-2], ds[-1]
        r1, r2 = rates[-2], rates[-1]
        extrapolated = (d1 * r2 - d2 * r1) / (d1 - d2)
    else:
        extrapolated = rates[-1]
    return DeltaSweep(deltas=tuple(ds), rates=tuple(rates),
                      extrapolated=extrapolated)


def discrete_limit_capacity(params: ChannelParams,
                            deltas: Sequence[float]) -> CapacityResult:
    """CapacityResult wrapper around discrete_limit_sweep.

    value is the Richardson-extrapolated limit; residual is the spread
    |extrapolated - rates[-1]|, an honest first-order error estimate.
    """
    sweep = discrete_limit_sweep(params, deltas)
    value = max(sweep.extrapolated, 0.0)
    return CapacityResult(value=value, route=Route.DISCRETE_LIMIT,
                          residual=abs(sweep.extrapolated - sweep.rates[-1]))


DEFAULT_SWEEP_DELTAS = tuple(0.1 * (10.0 ** (-0.25)) ** i for i in range(13))
"""Geometric sweep from 1e-1 down to 1e-4 (13 points, ratio 10^(1/4))."""
