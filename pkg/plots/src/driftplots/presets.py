"""Figure presets mapping experiment output directories to rendered images.

A preset scans ``in_dir`` for panel subdirectories named ``<preset>-<panel>``
(the layout the experiment harness writes) and renders one image per panel:
``fig1`` draws prediction traces from the run-0 stream and results, the
cumulative-error presets draw summary curves with the bound line.
"""

from __future__ import annotations

import os
from typing import Dict, List

from .figures import FigureSpec, SchemaError, render

# preset name -> figure kind; log axes follow the underlying data layout
PRESET_KINDS: Dict[str, str] = {
    "fig1": "traces",
    "fig2": "cum-error",
    "fig3": "cum-error",
    "fig4": "cum-error",
}


def preset_names() -> List[str]:
    return sorted(PRESET_KINDS)


def _panel_dirs(name: str, in_dir: str) -> List[str]:
    if not os.path.isdir(in_dir):
        raise FileNotFoundError(f"input directory does not exist: {in_dir}")
    prefix = f"{name}-"
    found = sorted(
        entry
        for entry in os.listdir(in_dir)
        if entry.startswith(prefix) and os.path.isdir(os.path.join(in_dir, entry))
    )
    if not found:
        raise SchemaError(
            f"no panel directories matching {prefix}* under {in_dir!r}; "
            f"run the matching experiment preset first"
        )
    return found


def run_preset(name: str, in_dir: str, out_dir: str) -> List[str]:
    """Render every panel of a preset; returns the written image paths."""
    if name not in PRESET_KINDS:
        raise SchemaError(
            f"unknown plots preset {name!r}; available: {', '.join(preset_names())}"
        )
    kind = PRESET_KINDS[name]
    written = []
    for panel in _panel_dirs(name, in_dir):
        panel_dir = os.path.join(in_dir, panel)
        output = os.path.join(out_dir, f"{panel}.png")
        if kind == "cum-error":
            inputs = [os.path.join(panel_dir, "summary.csv")]
        else:
            inputs = [
                os.path.join(panel_dir, "stream_run0.csv"),
                os.path.join(panel_dir, "results.csv"),
            ]
        written.append(render(FigureSpec(kind=kind, inputs=inputs, output=output)))
    return written
