"""Optional matplotlib figures written next to the CSV and pixmap outputs."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def save_plane_figure(path, buf=None, spec=None, curves=(), points=(), title: str = "",
                      dpi: int = 120) -> None:
    """Image of a window of the plane with optional polylines and marked points.

    ``curves`` is a sequence of ``(polyline, colour)``; ``points`` of
    ``(z, label)``.
    """
    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    if buf is not None:
        ax.imshow(buf.pixels, extent=(spec.x_min, spec.x_max, spec.y_min, spec.y_max),
                  interpolation="nearest", origin="upper")
    for line, colour in curves:
        line = np.asarray(line)
        ax.plot(line.real, line.imag, color=colour, lw=0.8)
    for z, label in points:
        ax.plot([z.real], [z.imag], "o", ms=4, mfc="none", mec="orange")
        if label:
            ax.annotate(label, (z.real, z.imag), xytext=(4, 4), textcoords="offset points",
                        color="orange", fontsize=8)
    if spec is not None:
        ax.set_xlim(spec.x_min, spec.x_max)
        ax.set_ylim(spec.y_min, spec.y_max)
    ax.set_aspect("equal")
    ax.set_xlabel("Re")
    ax.set_ylabel("Im")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=dpi, metadata={"Software": None})
    plt.close(fig)


def save_profile_figure(path, profile, title: str = "") -> None:
    fig, ax = plt.subplots(figsize=(6.4, 3.6))
    ax.plot(profile.angles, profile.radii, lw=0.8)
    ax.set_xlabel("phi")
    ax.set_ylabel("b(phi)")
    ax.set_xlim(0, 2 * np.pi)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)
