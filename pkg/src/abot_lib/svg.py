# SPDX-FileCopyrightText: Copyright (c) 2025 NVIDIA CORPORATION & AFFILIATES. All rights reserved.
# SPDX-License-Identifier: Apache-2.0

"""Static SVG drawings of planar currents and transport networks."""

import logging
import xml.etree.ElementTree as ET
from typing import Optional, Sequence

import numpy as np

from .anisotropy import BranchingFunction
from .currents import PolyhedralOneCurrent, canonicalize
from .errors import UnsupportedDimensionError

logger = logging.getLogger(__name__)

CANVAS = 400.0
MARGIN = 20.0
MAX_STROKE = 8.0
MIN_STROKE = 0.75
POSITIVE_COLOR = "#1f4e79"
NEGATIVE_COLOR = "#b03a2e"
SOURCE_COLOR = "#c0392b"
TARGET_COLOR = "#2471a3"
STEINER_COLOR = "#222222"


def _fmt(x: float) -> str:
    return f"{x:.4f}"


class _Frame:
    """Maps data coordinates into the square canvas, y axis pointing up."""

    def __init__(self, points: np.ndarray):
        if points.size == 0:
            points = np.zeros((1, 2))
        lo = points.min(axis=0)
        hi = points.max(axis=0)
        span = float(max(np.max(hi - lo), 1e-12))
        self.lo = lo
        self.scale = (CANVAS - 2 * MARGIN) / span

    def __call__(self, p) -> tuple:
        x = MARGIN + (p[0] - self.lo[0]) * self.scale
        y = CANVAS - MARGIN - (p[1] - self.lo[1]) * self.scale
        return _fmt(x), _fmt(y)


def _svg_root() -> ET.Element:
    return ET.Element('svg', {
        'xmlns': 'http://www.w3.org/2000/svg',
        'width': _fmt(CANVAS),
        'height': _fmt(CANVAS),
        'viewBox': f"0 0 {_fmt(CANVAS)} {_fmt(CANVAS)}",
    })


def _draw_edges(root: ET.Element, frame: _Frame, C: PolyhedralOneCurrent, H: BranchingFunction) -> None:
    if len(C) == 0:
        return
    weights = H.evaluate(C.theta)
    top = float(np.max(weights)) or 1.0
    group = ET.SubElement(root, 'g', {'stroke-linecap': 'round', 'fill': 'none'})
    for a, b, theta, w in zip(C.A, C.B, C.theta, weights):
        x1, y1 = frame(a)
        x2, y2 = frame(b)
        ET.SubElement(group, 'line', {
            'x1': x1, 'y1': y1, 'x2': x2, 'y2': y2,
            'stroke': POSITIVE_COLOR if theta > 0 else NEGATIVE_COLOR,
            'stroke-width': _fmt(max(MIN_STROKE, MAX_STROKE * float(w) / top)),
        })


def _draw_points(root: ET.Element, frame: _Frame, points: np.ndarray, color: str, radius: float,
                 css_class: str) -> None:
    group = ET.SubElement(root, 'g', {'class': css_class, 'fill': color})
    for p in points:
        cx, cy = frame(p)
        ET.SubElement(group, 'circle', {'cx': cx, 'cy': cy, 'r': _fmt(radius)})


def _to_string(root: ET.Element) -> str:
    ET.indent(root)
    return ET.tostring(root, encoding='unicode') + "\n"


def render_current(P: PolyhedralOneCurrent, H: BranchingFunction, title: Optional[str] = None) -> str:
    """
    Draw a planar current: stroke width proportional to H(|theta|), color by the sign of
    theta along the canonical orientation.

    Raises:
        UnsupportedDimensionError: If the current is not planar
    """
    C = canonicalize(P)
    if len(C) and C.dim != 2:
        raise UnsupportedDimensionError(f"Only planar currents can be drawn, got dimension {C.dim}")
    root = _svg_root()
    if title:
        ET.SubElement(root, 'title').text = title
    frame = _Frame(np.concatenate([C.A, C.B]) if len(C) else np.zeros((0, 2)))
    _draw_edges(root, frame, C, H)
    return _to_string(root)


def render_network(current: PolyhedralOneCurrent, H: BranchingFunction, sources: np.ndarray, targets: np.ndarray,
                   steiner: Sequence[Sequence[float]] = (), title: Optional[str] = None) -> str:
    """Draw a transport network with its sources, targets and Steiner points."""
    C = canonicalize(current)
    sources = np.asarray(sources, dtype=float).reshape(-1, 2) if np.size(sources) else np.zeros((0, 2))
    targets = np.asarray(targets, dtype=float).reshape(-1, 2) if np.size(targets) else np.zeros((0, 2))
    steiner = np.asarray(steiner, dtype=float).reshape(-1, 2) if np.size(steiner) else np.zeros((0, 2))
    if sources.shape[1] != 2 or (len(C) and C.dim != 2):
        raise UnsupportedDimensionError("Only planar networks can be drawn")

    root = _svg_root()
    if title:
        ET.SubElement(root, 'title').text = title
    parts = [sources, targets, steiner] + ([C.A, C.B] if len(C) else [])
    frame = _Frame(np.concatenate(parts))
    _draw_edges(root, frame, C, H)
    _draw_points(root, frame, sources, SOURCE_COLOR, 5.0, 'sources')
    _draw_points(root, frame, targets, TARGET_COLOR, 5.0, 'targets')
    if steiner.shape[0]:
        _draw_points(root, frame, steiner, STEINER_COLOR, 3.0, 'steiner')
    return _to_string(root)
