"""Minimal SVG 1.1 writers for 2-D scatter plots and density heatmaps."""

import numpy as np

from .datasets import SCALE_EPS
from .mixture import mixture_log_pdf

PALETTE = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
           "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"]

# a few viridis stops, linearly interpolated
_VIRIDIS = np.array([
    [68, 1, 84], [59, 82, 139], [33, 145, 140], [94, 201, 98], [253, 231, 37],
], dtype=float)

SIZE = 480
PAD = 10


def colormap(t):
    """Map values in [0, 1] to hex colours."""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0) * (len(_VIRIDIS) - 1)
    k = np.minimum(t.astype(int), len(_VIRIDIS) - 2)
    frac = (t - k)[..., None]
    rgb = np.rint(_VIRIDIS[k] * (1 - frac) + _VIRIDIS[k + 1] * frac).astype(int)
    return ["#%02x%02x%02x" % tuple(c) for c in rgb.reshape(-1, 3)]


def _xy(p):
    # unit square to canvas, y axis up
    return PAD + p[0] * SIZE, PAD + (1.0 - p[1]) * SIZE


def _document(body, title):
    w = SIZE + 2 * PAD
    return (f'<?xml version="1.0" encoding="UTF-8"?>\n'
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{w}" '
            f'viewBox="0 0 {w} {w}">\n<title>{title}</title>\n'
            f'<rect x="{PAD}" y="{PAD}" width="{SIZE}" height="{SIZE}" fill="white" '
            f'stroke="black"/>\n' + "\n".join(body) + "\n</svg>\n")


def _circle(p, fill, r=2.0):
    x, y = _xy(p)
    return f'<circle cx="{x:.2f}" cy="{y:.2f}" r="{r}" fill="{fill}"/>'


def scatter(points, labels, title="clusters"):
    body = [_circle(p, PALETTE[int(c) % len(PALETTE)]) for p, c in zip(points, labels)]
    return _document(body, title)


def density_grid(model, n=200, eps=SCALE_EPS):
    """Cell-centre coordinates and mixture density over ``(eps, 1 - eps)^2``.

    Returns ``(centres, values)`` with ``values[i, j]`` the density at
    ``(centres[j], centres[i])``.
    """
    edges = np.linspace(eps, 1.0 - eps, n + 1)
    centres = 0.5 * (edges[:-1] + edges[1:])
    gx, gy = np.meshgrid(centres, centres)
    pts = np.column_stack([gx.ravel(), gy.ravel()])
    return centres, np.exp(mixture_log_pdf(model, pts)).reshape(n, n)


def heatmap(model, n=200, title="density"):
    centres, values = density_grid(model, n)
    top = np.quantile(values, 0.99)
    colors = colormap(values / top if top > 0 else values)
    cell = SIZE / n
    body = []
    for i in range(n):
        for j in range(n):
            x = PAD + j * cell
            y = PAD + (n - 1 - i) * cell
            body.append(f'<rect x="{x:.2f}" y="{y:.2f}" width="{cell + 0.05:.2f}" '
                        f'height="{cell + 0.05:.2f}" fill="{colors[i * n + j]}"/>')
    return _document(body, title)


def distance_plot(points, distances, ref_index, title="KL distance"):
    d = np.asarray(distances, dtype=float)
    top = d.max()
    colors = colormap(d / top if top > 0 else d)
    body = [_circle(p, c) for p, c in zip(points, colors)]
    body.append(_circle(points[ref_index], "red", r=5.0))
    return _document(body, title)
