import json
import os

import pytest

from pageguide import dom
from pageguide.errors import BundleIoError, EmptySequence, MalformedMeta, MissingFile
from pageguide.snapshots import LayoutBox, Snapshot, load_sequence, load_snapshot, save_snapshot

from conftest import make_bundle


def test_load_minimal_bundle(tmp_path):
    make_bundle(tmp_path / "b", "<html><body><p>hi</p></body></html>")
    s = load_snapshot(tmp_path / "b")
    assert s.url == "https://a.test/"
    assert s.title == "A"
    paragraphs = [el for el in dom.iter_elements(s.tree()) if el.tag == "p"]
    assert len(paragraphs) == 1


def test_missing_meta(tmp_path):
    d = tmp_path / "b"
    d.mkdir()
    (d / "page.html").write_text("<body><p>x</p></body>", encoding="utf-8")
    with pytest.raises(MissingFile):
        load_snapshot(d)


def test_missing_page(tmp_path):
    d = tmp_path / "b"
    d.mkdir()
    (d / "meta.json").write_text('{"url":"https://a.test/","title":"A"}')
    with pytest.raises(MissingFile):
        load_snapshot(d)


def test_meta_without_url_or_title(tmp_path):
    make_bundle(tmp_path / "b", "<body><p>x</p></body>")
    (tmp_path / "b" / "meta.json").write_text('{"title":"A"}')
    with pytest.raises(MalformedMeta):
        load_snapshot(tmp_path / "b")


def test_relative_url_rejected(tmp_path):
    make_bundle(tmp_path / "b", "<body><p>x</p></body>", url="/relative/only")
    with pytest.raises(MalformedMeta):
        load_snapshot(tmp_path / "b")


def test_dangling_layout_entry_dropped(tmp_path):
    layout = [
        {"path": "html:0/body:0/p:0", "x": 0, "y": 0, "w": 100, "h": 20, "visible": True},
        {"path": "html:0/body:0/table:7", "x": 0, "y": 0, "w": 1, "h": 1, "visible": True},
    ]
    make_bundle(tmp_path / "b", "<html><body><p>hi</p></body></html>", layout=layout)
    s = load_snapshot(tmp_path / "b")
    assert s.dropped_layout == 1
    assert set(s.layout) == {"html:0/body:0/p:0"}


def test_round_trip_field_equal(tmp_path):
    make_bundle(tmp_path / "b", "<html><body><p>hi</p></body></html>")
    s = load_snapshot(tmp_path / "b")
    out = save_snapshot(s, tmp_path / "copy")
    assert load_snapshot(out) == s


def test_round_trip_preserves_layout_keys(tmp_path):
    s = Snapshot(
        html="<html><body><p>hi</p><p>bye</p></body></html>",
        url="https://a.test/",
        title="A",
        layout={
            "html:0/body:0/p:0": LayoutBox(0, 0, 50, 20),
            "html:0/body:0/p:1": LayoutBox(0, 20, 50, 20),
        },
    )
    save_snapshot(s, tmp_path / "b")
    entries = json.loads((tmp_path / "b" / "layout.json").read_text())
    assert {e["path"] for e in entries} == set(s.layout)
    assert load_snapshot(tmp_path / "b") == s


def test_save_load_save_meta_byte_identical(tmp_path):
    make_bundle(tmp_path / "b", "<body><p>x</p></body>")
    s = load_snapshot(tmp_path / "b")
    save_snapshot(s, tmp_path / "c1")
    save_snapshot(load_snapshot(tmp_path / "c1"), tmp_path / "c2")
    assert (tmp_path / "c1" / "meta.json").read_bytes() == (tmp_path / "c2" / "meta.json").read_bytes()


def test_unwritable_directory(tmp_path):
    if os.geteuid() == 0:
        pytest.skip("running as root; permission bits are not enforced")
    target = tmp_path / "ro"
    target.mkdir()
    target.chmod(0o500)
    s = Snapshot(html="<body><p>x</p></body>", url="https://a.test/", title="A")
    with pytest.raises(BundleIoError):
        save_snapshot(s, target / "nested")


def test_save_over_file_is_io_error(tmp_path):
    blocker = tmp_path / "blocked"
    blocker.write_text("not a directory")
    s = Snapshot(html="<body><p>x</p></body>", url="https://a.test/", title="A")
    with pytest.raises(BundleIoError):
        save_snapshot(s, blocker)


def test_load_determinism(tmp_path):
    make_bundle(tmp_path / "b", "<html><body><p>hi</p></body></html>")
    assert load_snapshot(tmp_path / "b") == load_snapshot(tmp_path / "b")


def test_ref_depends_on_content():
    a = Snapshot(html="<body><p>x</p></body>", url="https://a.test/", title="A")
    b = Snapshot(html="<body><p>x</p></body>", url="https://a.test/", title="A")
    c = Snapshot(html="<body><p>y</p></body>", url="https://a.test/", title="A")
    assert a.ref == b.ref
    assert a.ref != c.ref


def _write_sequence(tmp_path, names):
    for name in names:
        make_bundle(tmp_path / name, f"<html><body><p>{name}</p></body></html>",
                    url=f"https://a.test/{name}")
    (tmp_path / "sequence.json").write_text(json.dumps(names))
    return tmp_path / "sequence.json"


def test_load_sequence_in_order(tmp_path):
    manifest = _write_sequence(tmp_path, ["s0", "s1", "s2"])
    snaps = load_sequence(manifest)
    assert [s.url for s in snaps] == [
        "https://a.test/s0", "https://a.test/s1", "https://a.test/s2"]


def test_load_sequence_accepts_directory(tmp_path):
    _write_sequence(tmp_path, ["s0"])
    assert len(load_sequence(tmp_path)) == 1


def test_empty_sequence(tmp_path):
    (tmp_path / "sequence.json").write_text("[]")
    with pytest.raises(EmptySequence):
        load_sequence(tmp_path / "sequence.json")


def test_sequence_error_names_failing_index(tmp_path):
    manifest = _write_sequence(tmp_path, ["s0", "s1", "s2"])
    (tmp_path / "s1" / "meta.json").unlink()
    with pytest.raises(MissingFile, match="entry 1"):
        load_sequence(manifest)
