"""User association and congestion-aware rates.

Association follows max-RSSI and is total: every fleet-tier user gets a
serving UAV, ties to the lowest index. Coverage is decided separately by
the SNR threshold. The shared sub-band is split equally among a UAV's
associated users, so rates fall as load grows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _core
from .channel import db_to_linear, mw_to_dbm
from .config import ChannelParams


@dataclass
class AssociationState:
    """Binary association (one serving UAV per user) plus load accounting."""

    assoc: np.ndarray        # (N, M) binary matrix
    serving: np.ndarray      # (M,) serving UAV index
    loads: np.ndarray        # (N,) association counts
    snr_db: np.ndarray       # (M,) serving-link SNR
    served_set: np.ndarray   # indices of users with positive rate


def _snapshot(uav_positions, tx_powers_dbm, users, params: ChannelParams,
              bandwidth_hz: float, snr_threshold_db: float = 0.0):
    const = _core.radio_constants(params, bandwidth_hz, snr_threshold_db,
                                  min_separation_m=0.0)
    gbs_dummy = np.array([0.0, 0.0, 1.0])
    return _core.radio_snapshot(
        np.ascontiguousarray(uav_positions, dtype=np.float64),
        np.ascontiguousarray(tx_powers_dbm, dtype=np.float64),
        np.ascontiguousarray(users, dtype=np.float64),
        gbs_dummy, const)


def associate_max_rssi(uav_positions, tx_powers_dbm, users,
                       params: ChannelParams,
                       bandwidth_hz: float = 10e6) -> AssociationState:
    """Associate each user with the UAV of strongest received signal."""
    uav_positions = np.asarray(uav_positions, dtype=float)
    if uav_positions.shape[0] < 1:
        raise ValueError("at least one UAV is required")
    serving, snr, rates, _, loads, _, _, _, _ = _snapshot(
        uav_positions, tx_powers_dbm, users, params, bandwidth_hz)
    m = serving.shape[0]
    assoc = np.zeros((uav_positions.shape[0], m), dtype=np.int8)
    assoc[serving, np.arange(m)] = 1
    return AssociationState(
        assoc=assoc,
        serving=serving,
        loads=loads,
        snr_db=snr,
        served_set=np.flatnonzero(rates > 0.0),
    )


def user_rates(state: AssociationState, bandwidth_hz: float) -> np.ndarray:
    """Per-user achievable rate B / K_n * log2(1 + snr) in bits/s.

    Computed from the association state directly; the fused kernel output is
    cross-checked against this composition in the test suite.
    """
    k = state.loads[state.serving].astype(float)
    snr_lin = db_to_linear(state.snr_db)
    return bandwidth_hz / k * np.log2(1.0 + snr_lin)


def coverage_mask(snr_db, threshold_db: float) -> np.ndarray:
    """A user counts as covered iff its serving-link SNR >= threshold."""
    return np.asarray(snr_db, dtype=float) >= threshold_db


def powers_mw_to_dbm(powers_mw) -> np.ndarray:
    return np.asarray(mw_to_dbm(powers_mw), dtype=float)
