"""Page snapshot bundles: the offline stand-in for a live browser tab.

A bundle is a directory holding ``page.html`` plus ``meta.json``
({"url", "title", "captured_at"}) and optionally ``layout.json``, a sidecar
of render-time boxes captured by a real browser (array of
{"path", "x", "y", "w", "h", "visible"}). Ordered snapshot sequences are
described by a ``sequence.json`` manifest of bundle-relative paths.

Snapshots are immutable after load; mutating operations elsewhere always
produce a new Snapshot.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional
from urllib.parse import urlparse

from . import dom
from .errors import BundleIoError, EmptySequence, MalformedMeta, MissingFile

EPOCH = "1970-01-01T00:00:00Z"


@dataclass(frozen=True)
class LayoutBox:
    x: float
    y: float
    w: float
    h: float
    visible: bool = True

    def __post_init__(self) -> None:
        if self.w < 0 or self.h < 0:
            raise ValueError("layout box dimensions must be non-negative")

    @property
    def zero_area(self) -> bool:
        return self.w == 0 or self.h == 0


@dataclass
class Snapshot:
    html: str
    url: str
    title: str
    captured_at: str = EPOCH
    layout: Optional[dict[str, LayoutBox]] = None
    dropped_layout: int = field(default=0, compare=False)
    _tree: Optional[dom.Document] = field(
        default=None, repr=False, compare=False
    )

    @property
    def ref(self) -> str:
        """Content-derived identifier; equal snapshots share a ref."""
        digest = hashlib.sha256()
        digest.update(self.url.encode("utf-8"))
        digest.update(b"\x1f")
        digest.update(self.html.encode("utf-8"))
        return "sha256:" + digest.hexdigest()[:24]

    def tree(self) -> dom.Document:
        if self._tree is None:
            self._tree = dom.parse_html(self.html)
        return self._tree


def _validate_url(url: str) -> None:
    parsed = urlparse(url)
    if not parsed.scheme:
        raise MalformedMeta(f"url is not absolute: {url!r}")


def build_snapshot(html: str, url: str, title: str, captured_at: str = EPOCH,
                   layout_entries: Optional[list[dict]] = None) -> Snapshot:
    """Validate raw capture data into a Snapshot.

    Layout entries whose path does not resolve in the parsed tree (or whose
    box is malformed) are dropped; the count lands in ``dropped_layout``.
    """
    _validate_url(url)
    tree = dom.parse_html(html)  # raises UnparseableHtml on empty documents

    layout: Optional[dict[str, LayoutBox]] = None
    dropped = 0
    if layout_entries is not None:
        layout = {}
        for entry in layout_entries:
            path = entry.get("path") if isinstance(entry, dict) else None
            try:
                box = LayoutBox(
                    x=float(entry["x"]),
                    y=float(entry["y"]),
                    w=float(entry["w"]),
                    h=float(entry["h"]),
                    visible=bool(entry.get("visible", True)),
                )
            except (KeyError, TypeError, ValueError):
                dropped += 1
                continue
            if not isinstance(path, str) or dom.resolve_path(tree, path) is None:
                dropped += 1
                continue
            layout[path] = box

    return Snapshot(
        html=html,
        url=url,
        title=title,
        captured_at=captured_at,
        layout=layout,
        dropped_layout=dropped,
        _tree=tree,
    )


def load_snapshot(bundle_dir: Path | str) -> Snapshot:
    """Load and validate one bundle directory."""
    bundle = Path(bundle_dir)
    page = bundle / "page.html"
    meta_file = bundle / "meta.json"
    if not page.is_file():
        raise MissingFile(str(page))
    if not meta_file.is_file():
        raise MissingFile(str(meta_file))

    html = page.read_text(encoding="utf-8")
    try:
        meta = json.loads(meta_file.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise MalformedMeta(f"meta.json is not valid JSON: {exc}") from exc
    if not isinstance(meta, dict) or "url" not in meta or "title" not in meta:
        raise MalformedMeta("meta.json must provide url and title")

    layout_entries: Optional[list[dict]] = None
    layout_file = bundle / "layout.json"
    if layout_file.is_file():
        layout_entries = json.loads(layout_file.read_text(encoding="utf-8"))

    return build_snapshot(
        html=html,
        url=str(meta["url"]),
        title=str(meta["title"]),
        captured_at=str(meta.get("captured_at", EPOCH)),
        layout_entries=layout_entries,
    )


def save_snapshot(snapshot: Snapshot, bundle_dir: Path | str) -> Path:
    """Write a bundle; round-trips through load_snapshot field-equal."""
    bundle = Path(bundle_dir)
    try:
        bundle.mkdir(parents=True, exist_ok=True)
        (bundle / "page.html").write_text(snapshot.html, encoding="utf-8")
        meta = {
            "url": snapshot.url,
            "title": snapshot.title,
            "captured_at": snapshot.captured_at,
        }
        (bundle / "meta.json").write_text(
            json.dumps(meta, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
        )
        if snapshot.layout is not None:
            entries = [
                {"path": path, "x": box.x, "y": box.y, "w": box.w, "h": box.h,
                 "visible": box.visible}
                for path, box in snapshot.layout.items()
            ]
            (bundle / "layout.json").write_text(
                json.dumps(entries, ensure_ascii=False, indent=2) + "\n",
                encoding="utf-8",
            )
    except OSError as exc:
        raise BundleIoError(f"cannot write bundle {bundle}: {exc}") from exc
    return bundle


def load_sequence(manifest: Path | str) -> list[Snapshot]:
    """Load an ordered snapshot sequence from a sequence.json manifest."""
    manifest_path = Path(manifest)
    if manifest_path.is_dir():
        manifest_path = manifest_path / "sequence.json"
    if not manifest_path.is_file():
        raise MissingFile(str(manifest_path))
    entries = json.loads(manifest_path.read_text(encoding="utf-8"))
    if not isinstance(entries, list) or not entries:
        raise EmptySequence(str(manifest_path))
    base = manifest_path.parent
    snapshots = []
    for i, rel in enumerate(entries):
        try:
            snapshots.append(load_snapshot(base / rel))
        except Exception as exc:
            raise type(exc)(f"sequence entry {i} ({rel}): {exc}") from exc
    return snapshots
