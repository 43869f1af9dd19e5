"""Pure-NumPy radio kernels. Reference lane for the compiled extension and
the fallback selected at import when the extension is unavailable.

One fused snapshot call per environment step computes every per-link
quantity: probabilistic A2G losses, max-RSSI association, congestion-shared
rates, the coverage mask, per-UAV loads, nearest-user distances, pairwise
separation violations, and the LoS-forced backhaul SNR toward the GBS.
"""

from __future__ import annotations

import numpy as np

LOG2_10TH = np.log(10.0) / (10.0 * np.log(2.0))  # log2(10**(x/10)) = x * this


def radio_constants(channel, bandwidth_hz: float, snr_threshold_db: float,
                    min_separation_m: float) -> tuple:
    """Flatten ChannelParams into the scalar tuple the kernels consume."""
    fspl_const = 20.0 * np.log10(
        channel.carrier_hz * 4.0 * np.pi / channel.lightspeed_mps)
    noise_dbm = channel.noise_density_dbm_hz + 10.0 * np.log10(bandwidth_hz)
    gains_db = channel.tx_gain_db + channel.rx_gain_db
    return (
        float(channel.s_curve_a),
        float(channel.s_curve_b),
        float(channel.excess_loss_los_db),
        float(channel.excess_loss_nlos_db),
        float(fspl_const),
        float(gains_db),
        float(noise_dbm),
        float(bandwidth_hz),
        float(snr_threshold_db),
        float(min_separation_m),
    )


def radio_snapshot(uav_pos, tx_dbm, users, gbs_pos, consts):
    """Evaluate the radio state of the fleet for one time slot.

    Returns (assoc, snr_db, rates, covered, loads, served, min_user_dist,
    collisions, backhaul_snr_db). Ties in RSSI resolve to the lowest UAV
    index. ``served`` counts only users meeting the SNR threshold.
    """
    (a, b, eta_los, eta_nlos, fspl_const, gains_db, noise_dbm,
     bandwidth, snr_req, d_min) = consts
    uav_pos = np.asarray(uav_pos, dtype=np.float64)
    users = np.asarray(users, dtype=np.float64)
    tx_dbm = np.asarray(tx_dbm, dtype=np.float64)
    n = uav_pos.shape[0]
    m = users.shape[0]

    if m > 0:
        diff = uav_pos[:, None, :2] - users[None, :, :]
        z = uav_pos[:, 2][:, None]
        d3d = np.sqrt(np.sum(diff * diff, axis=2) + z * z)
        sin_theta = np.clip(z / d3d, -1.0, 1.0)
        theta = np.degrees(np.arcsin(sin_theta))
        p_los = 1.0 / (1.0 + a * np.exp(-b * (theta - a)))
        loss = (20.0 * np.log10(d3d) + fspl_const
                + p_los * eta_los + (1.0 - p_los) * eta_nlos)
        rssi = tx_dbm[:, None] + gains_db - loss
        assoc = np.argmax(rssi, axis=0)
        cols = np.arange(m)
        snr = rssi[assoc, cols] - noise_dbm
        loads = np.bincount(assoc, minlength=n).astype(np.int64)
        covered = snr >= snr_req
        served = np.bincount(assoc[covered], minlength=n).astype(np.int64)
        k_per_user = loads[assoc].astype(np.float64)
        rates = bandwidth / k_per_user * np.log2(1.0 + 10.0 ** (snr / 10.0))
        min_user_dist = np.min(d3d, axis=1)
    else:
        assoc = np.zeros(0, dtype=np.int64)
        snr = np.zeros(0)
        rates = np.zeros(0)
        covered = np.zeros(0, dtype=bool)
        loads = np.zeros(n, dtype=np.int64)
        served = np.zeros(n, dtype=np.int64)
        min_user_dist = np.full(n, np.inf)

    pdiff = uav_pos[:, None, :] - uav_pos[None, :, :]
    pdist = np.sqrt(np.sum(pdiff * pdiff, axis=2))
    close = pdist < d_min
    np.fill_diagonal(close, False)
    collisions = close.sum(axis=1).astype(np.int64)

    gdiff = uav_pos - np.asarray(gbs_pos, dtype=np.float64)[None, :]
    gdist = np.sqrt(np.sum(gdiff * gdiff, axis=1))
    bh_loss = 20.0 * np.log10(gdist) + fspl_const + eta_los
    backhaul_snr = tx_dbm + gains_db - bh_loss - noise_dbm

    return (assoc.astype(np.int64), snr, rates, covered, loads, served,
            min_user_dist, collisions, backhaul_snr)
