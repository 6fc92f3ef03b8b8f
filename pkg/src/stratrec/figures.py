"""Matplotlib renderings of analysis results, written to files.

Used by the CLI report path: figures land next to the delimited exports so a
run directory is self-contained.
"""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .pipeline import AnalysisRecord


def similarity_heatmap(record: AnalysisRecord, path: str | Path) -> Path:
    """Parameter-by-heuristic similarity grid."""
    doc = record.matrix_document
    cells = np.array(doc["cells"], dtype=float)
    fig, ax = plt.subplots(figsize=(max(6.0, 0.28 * cells.shape[1]), 3.6))
    image = ax.imshow(cells, aspect="auto", cmap="viridis", vmin=-1.0, vmax=1.0)
    ax.set_yticks(range(len(doc["rows"])), labels=doc["rows"], fontsize=7)
    ax.set_xticks(range(len(doc["cols"])), labels=[str(c) for c in doc["cols"]], fontsize=6, rotation=90)
    ax.set_xlabel("heuristic")
    ax.set_title(f"Similarity matrix ({doc['framework_id']} x {doc['heuristic_set_id']})")
    fig.colorbar(image, ax=ax, label="cosine similarity")
    return _save(fig, path)


def distribution_bars(
    param_ids: Sequence[str],
    weights: Sequence[float],
    path: str | Path,
    title: str = "Discovered parameter distribution",
    expert_weights: Sequence[float] | None = None,
) -> Path:
    """Per-heuristic parameter weighting, optionally overlaid with expert values."""
    x = np.arange(len(param_ids))
    fig, ax = plt.subplots(figsize=(7.0, 3.4))
    width = 0.38 if expert_weights is not None else 0.6
    ax.bar(x - (width / 2 if expert_weights is not None else 0), weights, width, label="system")
    if expert_weights is not None:
        ax.bar(x + width / 2, expert_weights, width, label="expert", alpha=0.8)
        ax.legend()
    ax.set_xticks(x, labels=param_ids, rotation=25, ha="right", fontsize=8)
    ax.set_ylabel("weight")
    ax.set_title(title)
    return _save(fig, path)


def ranking_chart(
    rows: Sequence[Mapping],
    path: str | Path,
    title: str = "Ranked heuristics",
    score_label: str = "score",
    top_n: int = 10,
) -> Path:
    """Horizontal bars for the top-ranked heuristics of one actor."""
    rows = list(rows)[:top_n]
    labels = [str(r.get("name", r["heuristic_id"])) for r in rows][::-1]
    scores = [float(r["score"]) for r in rows][::-1]
    fig, ax = plt.subplots(figsize=(7.0, 0.42 * max(len(rows), 3) + 1.2))
    ax.barh(np.arange(len(rows)), scores, color="tab:blue")
    ax.set_yticks(np.arange(len(rows)), labels=labels, fontsize=8)
    ax.set_xlabel(score_label)
    ax.set_title(title)
    for i, s in enumerate(scores):
        ax.text(s, i, f" {s:.3f}", va="center", fontsize=7)
    return _save(fig, path)


def render_all(record: AnalysisRecord, heuristic_names: Mapping, out_dir: str | Path) -> list[Path]:
    """Write the standard figure set for a record; returns written paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = [similarity_heatmap(record, out / "similarity_heatmap.png")]
    doc = record.matrix_document
    for actor in record.actors:
        rows = [
            {**r, "name": heuristic_names.get(r["heuristic_id"], str(r["heuristic_id"])), "score": r.get("score")}
            for r in (actor.alignment or actor.recommendations)
        ]
        if actor.alignment:
            rows = [{**r, "score": r.get("raw", r.get("score"))} for r in rows]
        if rows:
            written.append(
                ranking_chart(
                    rows,
                    out / f"ranking_{_slug(actor.actor_id)}.png",
                    title=f"Top heuristics for {actor.actor_id}",
                    score_label="alignment score" if actor.alignment else "match score",
                )
            )
            top_id = str(rows[0]["heuristic_id"])
            weights = doc.get("distributions", {}).get(top_id)
            if weights:
                written.append(
                    distribution_bars(
                        doc["rows"],
                        weights,
                        out / f"distribution_{_slug(actor.actor_id)}_{top_id}.png",
                        title=f"Distribution of heuristic {top_id} (top match, {actor.actor_id})",
                    )
                )
    return written


def _slug(text: str) -> str:
    return "".join(c if c.isalnum() else "-" for c in text).strip("-").lower() or "actor"


def _save(fig, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path
