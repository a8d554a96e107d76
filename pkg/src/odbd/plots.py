"""Figure rendering for the CLI report paths.

Every command that writes delimited output can also drop a PNG next to
it: track overlays in angular and delay-Doppler space, residual
summaries, and detection SNR charts.
"""
import numpy as np
import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def _overlay_panels(truth, sims, labels):
    fig, (ax_ang, ax_dd) = plt.subplots(1, 2, figsize=(10, 4.2))
    ax_ang.plot(np.degrees(truth.alpha), np.degrees(truth.delta),
                "k-", lw=2, label="truth")
    ax_dd.plot(truth.rho / 1e3, truth.rhod / 1e3, "k-", lw=2, label="truth")
    for track, label in zip(sims, labels):
        ax_ang.plot(np.degrees(track.alpha), np.degrees(track.delta),
                    "--", lw=1.2, label=label)
        ax_dd.plot(track.rho / 1e3, track.rhod / 1e3, "--", lw=1.2, label=label)
    ax_ang.set_xlabel("topocentric right ascension [deg]")
    ax_ang.set_ylabel("topocentric declination [deg]")
    ax_ang.set_title("angular space")
    ax_dd.set_xlabel("slant range [km]")
    ax_dd.set_ylabel("range rate [km/s]")
    ax_dd.set_title("delay-Doppler space")
    ax_ang.legend(fontsize=8)
    fig.tight_layout()
    return fig


def save_track_overlay(path, truth, sims=(), labels=None):
    """Two-panel overlay of a truth track and simulated tracks."""
    if labels is None:
        labels = [f"sim {k}" for k in range(len(sims))]
    fig = _overlay_panels(truth, sims, labels)
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_residuals(path, times, residuals):
    """Residual time series per measurement channel.

    Args:
        path: Output PNG path.
        times: Overlap time grid (s).
        residuals: Mapping of channel label -> (values, unit label).
    """
    n = len(residuals)
    fig, axes = plt.subplots(n, 1, figsize=(7, 1.9 * n), sharex=True)
    if n == 1:
        axes = [axes]
    for ax, (name, (values, unit)) in zip(axes, residuals.items()):
        ax.plot(times, values, lw=1.2)
        ax.set_ylabel(f"{name} [{unit}]", fontsize=8)
        ax.axhline(0.0, color="k", lw=0.5)
    axes[-1].set_xlabel("time [s]")
    fig.suptitle("track residuals")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_detections(path, detections, threshold_db):
    """Detection SNRs against the threshold, strongest first."""
    fig, ax = plt.subplots(figsize=(7, 3.5))
    if detections:
        snrs = [d["snr_db"] for d in detections]
        ax.bar(range(len(snrs)), snrs, color="tab:blue")
    ax.axhline(threshold_db, color="tab:red", lw=1.0, ls="--",
               label=f"threshold {threshold_db:g} dB")
    ax.set_xlabel("detection rank")
    ax.set_ylabel("SNR [dB]")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
