import json
from pathlib import Path

import pytest

from pageguide.gateway import ChatResponse, Gateway
from pageguide.snapshots import Snapshot


class ScriptedGateway(Gateway):
    """Gateway double returning canned response texts in call order."""

    def __init__(self, texts):
        super().__init__(mode="passthrough", api_key="scripted")
        self._texts = list(texts)
        self.requests = []

    def complete(self, request):
        self.requests.append(request)
        if not self._texts:
            raise AssertionError("scripted gateway exhausted")
        return ChatResponse(self._texts.pop(0), self.model, 1, "live")


def make_bundle(dirpath: Path, html: str, url: str = "https://a.test/",
                title: str = "A", layout: list | None = None,
                captured_at: str = "2026-01-01T00:00:00Z") -> Path:
    dirpath.mkdir(parents=True, exist_ok=True)
    (dirpath / "page.html").write_text(html, encoding="utf-8")
    (dirpath / "meta.json").write_text(
        json.dumps({"url": url, "title": title, "captured_at": captured_at}),
        encoding="utf-8",
    )
    if layout is not None:
        (dirpath / "layout.json").write_text(json.dumps(layout), encoding="utf-8")
    return dirpath


def snap(html: str, url: str = "https://a.test/", title: str = "A") -> Snapshot:
    return Snapshot(html=html, url=url, title=title)


@pytest.fixture
def two_element_page() -> Snapshot:
    return snap("<html><body><p>hi</p><button>Go</button></body></html>")
