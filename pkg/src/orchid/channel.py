"""Radio propagation: elevation-dependent probabilistic LoS/NLoS air-to-ground
path loss, shadowed log-distance terrestrial path loss, and SNR arithmetic.

All functions accept scalars or NumPy arrays (broadcasting) and work in dB
domain unless stated otherwise.
"""

from __future__ import annotations

import numpy as np

from .config import ChannelParams


def db_to_linear(x_db):
    return 10.0 ** (np.asarray(x_db, dtype=float) / 10.0)


def linear_to_db(x_lin):
    return 10.0 * np.log10(np.asarray(x_lin, dtype=float))


def dbm_to_watt(p_dbm):
    return 10.0 ** ((np.asarray(p_dbm, dtype=float) - 30.0) / 10.0)


def mw_to_dbm(p_mw):
    return 10.0 * np.log10(np.asarray(p_mw, dtype=float))


def elevation_angle(uav_pos, user_pos) -> float:
    """Elevation angle in degrees seen from a ground user toward a UAV.

    Computed as (180/pi) * arcsin(z / d3d) with the user at ground level.
    Raises ValueError when the 3D distance is zero.
    """
    uav_pos = np.asarray(uav_pos, dtype=float)
    user_pos = np.asarray(user_pos, dtype=float)
    dx = uav_pos[..., 0] - user_pos[..., 0]
    dy = uav_pos[..., 1] - user_pos[..., 1]
    z = uav_pos[..., 2]
    d3d = np.sqrt(dx * dx + dy * dy + z * z)
    if np.any(d3d == 0.0):
        raise ValueError("elevation angle undefined at zero distance")
    return np.degrees(np.arcsin(z / d3d))


def los_probability(theta_deg, params: ChannelParams):
    """Sigmoid LoS probability 1 / (1 + a*exp(-b*(theta - a)))."""
    a, b = params.s_curve_a, params.s_curve_b
    theta_deg = np.asarray(theta_deg, dtype=float)
    return 1.0 / (1.0 + a * np.exp(-b * (theta_deg - a)))


def fspl_db(distance_m, params: ChannelParams):
    """Free-space path loss 20log10(d) + 20log10(fc) + 20log10(4pi/c).

    The two frequency terms are folded into one constant so that the d = 1 m
    value equals 20log10(fc*4pi/c) exactly.
    """
    distance_m = np.asarray(distance_m, dtype=float)
    if np.any(distance_m <= 0.0):
        raise ValueError("path loss undefined at non-positive distance")
    const = 20.0 * np.log10(
        params.carrier_hz * 4.0 * np.pi / params.lightspeed_mps)
    return 20.0 * np.log10(distance_m) + const


def a2g_pathloss(uav_pos, user_pos, params: ChannelParams):
    """Probability-weighted air-to-ground path loss in dB.

    P_los * (FSPL + eta_los) + (1 - P_los) * (FSPL + eta_nlos), with the LoS
    probability evaluated at the link elevation angle.
    """
    uav_pos = np.asarray(uav_pos, dtype=float)
    user_pos = np.asarray(user_pos, dtype=float)
    dx = uav_pos[..., 0] - user_pos[..., 0]
    dy = uav_pos[..., 1] - user_pos[..., 1]
    z = uav_pos[..., 2]
    d3d = np.sqrt(dx * dx + dy * dy + z * z)
    if np.any(d3d == 0.0):
        raise ValueError("path loss undefined at zero distance")
    theta = np.degrees(np.arcsin(z / d3d))
    p_los = los_probability(theta, params)
    base = fspl_db(d3d, params)
    return base + p_los * params.excess_loss_los_db + (1.0 - p_los) * params.excess_loss_nlos_db


def gbs_pathloss(gbs_pos, user_pos, shadow_db, params: ChannelParams):
    """Shadowed log-distance terrestrial path loss in dB.

    20log10(4pi*fc/c) + 10*gamma*log10(d3d) + shadow_db. The shadowing draw
    is supplied by the caller (zero-mean Gaussian, std shadow_sigma_db,
    frozen per link per episode).
    """
    gbs_pos = np.asarray(gbs_pos, dtype=float)
    user_pos = np.asarray(user_pos, dtype=float)
    dx = gbs_pos[..., 0] - user_pos[..., 0]
    dy = gbs_pos[..., 1] - user_pos[..., 1]
    z = gbs_pos[..., 2]
    d3d = np.sqrt(dx * dx + dy * dy + z * z)
    if np.any(d3d == 0.0):
        raise ValueError("path loss undefined at zero distance")
    ref = 20.0 * np.log10(4.0 * np.pi * params.carrier_hz / params.lightspeed_mps)
    return ref + 10.0 * params.pathloss_exponent * np.log10(d3d) + np.asarray(shadow_db, dtype=float)


def noise_power_dbm(bandwidth_hz: float, params: ChannelParams) -> float:
    """Thermal noise power over the receiver bandwidth, in dBm."""
    if bandwidth_hz <= 0:
        raise ValueError("bandwidth must be positive")
    return params.noise_density_dbm_hz + 10.0 * np.log10(bandwidth_hz)


def snr_db(tx_power_dbm, pathloss_db, params: ChannelParams, bandwidth_hz: float):
    """Link SNR in dB: P + G_tx + G_rx - L - N."""
    noise = noise_power_dbm(bandwidth_hz, params)
    return (
        np.asarray(tx_power_dbm, dtype=float)
        + params.tx_gain_db
        + params.rx_gain_db
        - np.asarray(pathloss_db, dtype=float)
        - noise
    )


def snr_linear(tx_power_dbm, pathloss_db, params: ChannelParams, bandwidth_hz: float):
    return db_to_linear(snr_db(tx_power_dbm, pathloss_db, params, bandwidth_hz))
