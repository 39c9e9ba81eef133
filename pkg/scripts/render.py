# scripts/render.py
"""SVG picture of the characteristic foliation on a meridional disc."""

import io
import warnings

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from beltrami_scope.disc_index import project_to_disc  # noqa: E402
from beltrami_scope.fields import VectorField  # noqa: E402
from beltrami_scope.geometry import MeridionalDisc, MetricField  # noqa: E402
from beltrami_scope.reports import SlkResult  # noqa: E402

_STYLE = {
    "svg.hashsalt": "beltrami-scope",
    "svg.fonttype": "none",
    "font.family": "DejaVu Sans",
}
_MARKERS = {"elliptic": "o", "hyperbolic": "X", "higher-order": "D", "unclassified": "s"}
_SIGMA_COLORS = {1: "#c0392b", -1: "#2471a3", 0: "#7f8c8d"}


def _foliation_grid(field: VectorField, disc: MeridionalDisc, g: MetricField, resolution: int):
    axis = np.linspace(-1.0, 1.0, resolution)
    uu, vv = np.meshgrid(axis, axis)
    inside = uu**2 + vv**2 <= 1.0
    planar = np.zeros(uu.shape + (2,))
    F = project_to_disc(field, disc, g)
    planar[inside] = F(np.column_stack((uu[inside], vv[inside])))
    # leaves of the characteristic foliation follow the +90 degree rotation of X_D
    rot_u = np.ma.masked_where(~inside, -planar[..., 1])
    rot_v = np.ma.masked_where(~inside, planar[..., 0])
    return axis, rot_u, rot_v


def render_disc(
    field: VectorField,
    disc: MeridionalDisc,
    g: MetricField,
    slk: SlkResult,
    index: int | None,
    resolution: int = 48,
) -> str:
    """Streamlines of the disc foliation with (Ind, sigma) glyphs; returns the SVG text."""
    disc = disc.with_orientation(slk.orientation)
    with warnings.catch_warnings(record=True) as caught, plt.rc_context(_STYLE):
        warnings.simplefilter("always")
        axis, rot_u, rot_v = _foliation_grid(field, disc, g, resolution)
        fig, ax = plt.subplots(figsize=(6.0, 6.0))
        ax.streamplot(axis, axis, rot_u, rot_v, density=1.4, color="#555555", linewidth=0.7, arrowsize=0.8)

        t = np.linspace(0.0, 2.0 * np.pi, 361)
        ax.plot(np.cos(t), np.sin(t), color="black", linewidth=1.2)
        ax.annotate(
            "",
            xy=(1.0, 0.12 * slk.orientation),
            xytext=(1.0, 0.0),
            arrowprops={"arrowstyle": "-|>", "color": "black", "linewidth": 1.5},
        )

        for record in slk.records:
            u, v = record.uv
            ax.plot(
                u,
                v,
                marker=_MARKERS[record.kind],
                markersize=9,
                color=_SIGMA_COLORS.get(record.sigma, "#7f8c8d"),
                linestyle="none",
            )
            ax.annotate(
                f"({record.poincare_index:+d}, {'+' if record.sigma > 0 else '-'})",
                (u, v),
                textcoords="offset points",
                xytext=(6, 6),
                fontsize=8,
            )

        index_text = "n/a" if index is None else str(index)
        ax.plot([], [], " ", label=f"slk = {slk.slk}")
        ax.plot([], [], " ", label=f"index = {index_text}")
        ax.plot([], [], " ", label=f"rest points = {len(slk.records)}")
        ax.legend(loc="upper right", frameon=True, fontsize=8)
        ax.set_xlim(-1.1, 1.1)
        ax.set_ylim(-1.1, 1.1)
        ax.set_aspect("equal")
        ax.set_xlabel("u")
        ax.set_ylabel("v")

        buffer = io.StringIO()
        fig.savefig(buffer, format="svg", metadata={"Date": None})
        plt.close(fig)

    svg = buffer.getvalue()
    notes = "".join(f"<!-- warning: {str(w.message).replace('--', '-')} -->\n" for w in caught)
    if notes:
        head, _, body = svg.partition("\n")
        svg = f"{head}\n{notes}{body}"
    return svg
