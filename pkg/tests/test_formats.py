import json
import re
from pathlib import Path

import numpy as np
import pytest

from billboard_salience.core import (
    BoundingBox,
    Detection,
    FixationPoint,
    FixationSet,
    ManifestEntry,
    RasterImage,
    SaliencyMap,
)
from billboard_salience.errors import (
    ConfidenceOutOfRange,
    DuplicateImageId,
    FormatError,
    InvalidBox,
    MissingFile,
    ParseError,
    UnsupportedMagic,
)
from billboard_salience.formats.gaze import load_gaze, write_gaze
from billboard_salience.formats.manifest import load_manifest, write_manifest
from billboard_salience.formats.maps import SALF_HEADER, decode_salf, encode_salf, read_map, write_map
from billboard_salience.formats.netpbm import decode_netpbm, encode_netpbm, read_image, write_image
from billboard_salience.formats.regions import (
    load_annotations,
    load_detections,
    write_annotations,
    write_detections,
)
from billboard_salience.formats.report import (
    Aggregates,
    EvaluationReport,
    ImageResult,
    ReportMetadata,
    read_report,
    recompute_aggregates,
    write_report,
)
from billboard_salience.formats.threshold import method_slug, read_threshold, threshold_path, write_threshold
from billboard_salience.significance import RegionScore, SignificanceThreshold


class TestNetpbm:
    def test_p6_image(self, tmp_path, rng):
        samples = rng.integers(0, 256, size=(5, 7, 3))
        path = tmp_path / "img.ppm"
        path.write_bytes(encode_netpbm(samples))
        image = read_image(path)
        assert (image.width, image.height, image.channels) == (7, 5, 3)
        np.testing.assert_allclose(image.pixels, samples / 255.0)

    def test_sixteen_bit(self, rng):
        samples = rng.integers(0, 65536, size=(3, 4))
        decoded, maxval = decode_netpbm(encode_netpbm(samples, maxval=65535))
        assert maxval == 65535
        np.testing.assert_array_equal(decoded, samples)

    def test_header_comments(self):
        data = b"P5\n# made by hand\n2 1\n# maxval next\n255\n\x00\xff"
        samples, maxval = decode_netpbm(data)
        np.testing.assert_array_equal(samples, [[0, 255]])
        assert maxval == 255

    def test_write_read_image(self, tmp_path):
        image = RasterImage(np.array([[0.0, 0.5], [1.0, 0.25]]))
        path = tmp_path / "img.pgm"
        write_image(image, path)
        np.testing.assert_allclose(read_image(path).pixels, image.pixels, atol=1 / 510 + 1e-12)

    def test_read_error_carries_path(self, tmp_path):
        path = tmp_path / "bad.pgm"
        path.write_bytes(b"P5\n2 2\n255\n\x00")
        with pytest.raises(FormatError) as excinfo:
            read_image(path)
        assert excinfo.value.path == str(path)
        assert str(path) in str(excinfo.value)
        assert str(excinfo.value).count(f"byte {excinfo.value.offset}:") == 1


class TestMaps:
    def test_salf_bit_exact(self, tmp_path, rng):
        values = rng.random((9, 13)).astype(np.float32).astype(np.float64)
        path = tmp_path / "m.salf"
        write_map(SaliencyMap(values), path)
        restored = read_map(path)
        np.testing.assert_array_equal(restored.values, values)

        again = tmp_path / "again.salf"
        write_map(restored, again)
        assert again.read_bytes() == path.read_bytes()

    def test_pgm_within_half_step(self, tmp_path, rng):
        values = rng.random((6, 6))
        values[0, 0], values[0, 1] = 0.0, 1.0
        path = tmp_path / "m.pgm"
        write_map(SaliencyMap(values, normalized=True), path)
        np.testing.assert_allclose(read_map(path).values, values, atol=1 / 510 + 1e-12)

    def test_pgm_quantization(self, tmp_path):
        path = tmp_path / "m.pgm"
        write_map(SaliencyMap(np.array([[0.0, 0.5, 1.0]]), normalized=True), path)
        samples, _ = decode_netpbm(path.read_bytes())
        np.testing.assert_array_equal(samples, [[0, 128, 255]])

    def test_pgm_requires_normalized(self, tmp_path):
        with pytest.raises(ValueError):
            write_map(SaliencyMap(np.array([[0.0, 3.0]])), tmp_path / "m.pgm")

    def test_unknown_extension(self, tmp_path):
        with pytest.raises(FormatError):
            write_map(SaliencyMap(np.zeros((1, 1))), tmp_path / "m.png")

    def test_normalized_flag_inferred(self, tmp_path):
        path = tmp_path / "m.salf"
        write_map(SaliencyMap(np.array([[0.0, 0.5, 1.0]]), normalized=True), path)
        assert read_map(path).normalized
        write_map(SaliencyMap(np.array([[0.2, 0.5]])), path)
        assert not read_map(path).normalized


def _salf(width, height, values=None, version=1):
    payload = np.zeros(width * height, dtype="<f4") if values is None else np.asarray(values, dtype="<f4")
    return SALF_HEADER.pack(b"SALF", version, width, height) + payload.tobytes()


BINARY_CORRUPTIONS = [
    ("netpbm bad magic", decode_netpbm, b"P3\n1 1\n255\n0", UnsupportedMagic),
    ("netpbm truncated header", decode_netpbm, b"P5\n4", FormatError),
    ("netpbm non-numeric width", decode_netpbm, b"P5\nx 2\n255\n\x00\x00", FormatError),
    ("netpbm zero width", decode_netpbm, b"P5\n0 2\n255\n", FormatError),
    ("netpbm maxval too large", decode_netpbm, b"P5\n1 1\n70000\n\x00\x00", FormatError),
    ("netpbm no raster separator", decode_netpbm, b"P5 1 1 255", FormatError),
    ("netpbm truncated raster", decode_netpbm, b"P6\n2 2\n255\n\x00\x00\x00", FormatError),
    ("netpbm sample above maxval", decode_netpbm, b"P5\n2 1\n100\n\x05\xc8", FormatError),
    ("salf truncated header", decode_salf, b"SALF\x01\x00", FormatError),
    ("salf bad magic", decode_salf, b"SALX" + b"\x00" * 12, UnsupportedMagic),
    ("salf bad version", decode_salf, _salf(1, 1, version=7), FormatError),
    ("salf short payload", decode_salf, _salf(2, 2)[:-1], FormatError),
    ("salf non-finite", decode_salf, _salf(2, 1, [0.0, np.nan]), FormatError),
]


class TestBinaryCorruption:
    @pytest.mark.parametrize("name,decode,data,error", BINARY_CORRUPTIONS, ids=[c[0] for c in BINARY_CORRUPTIONS])
    def test_located_error(self, name, decode, data, error):
        with pytest.raises(error) as excinfo:
            decode(data)
        assert excinfo.value.offset is not None

    def test_sample_offset(self):
        with pytest.raises(FormatError) as excinfo:
            decode_netpbm(b"P5\n2 1\n100\n\x05\xc8")
        assert excinfo.value.offset == 12

    def test_non_finite_offset(self):
        with pytest.raises(FormatError) as excinfo:
            decode_salf(_salf(2, 1, [0.0, np.inf]))
        assert excinfo.value.offset == SALF_HEADER.size + 4


class TestRegions:
    def test_annotations(self, tmp_path):
        path = tmp_path / "a.boxes"
        path.write_text("# x y w h\n120 80 300 150\n\n10.5 2.4 3 4\n")
        boxes = load_annotations(path, "img")
        assert boxes == [BoundingBox(120, 80, 300, 150, "img"), BoundingBox(11, 2, 3, 4, "img")]

    def test_empty_files(self, tmp_path):
        path = tmp_path / "empty"
        path.write_text("")
        assert load_annotations(path, "img") == []
        assert load_detections(path, "img") == []

    def test_detections(self, tmp_path):
        path = tmp_path / "d.dets"
        path.write_text("120 80 300 150 0.93\n")
        assert load_detections(path, "img") == [Detection(BoundingBox(120, 80, 300, 150, "img"), 0.93)]

    def test_writers_round_trip(self, tmp_path):
        boxes = [BoundingBox(1, 2, 3, 4, "img"), BoundingBox(0, 0, 9, 9, "img")]
        dets = [Detection(boxes[0], 0.123456789), Detection(boxes[1], 1.0)]
        write_annotations(boxes, tmp_path / "a.boxes")
        write_detections(dets, tmp_path / "d.dets")
        assert load_annotations(tmp_path / "a.boxes", "img") == boxes
        assert load_detections(tmp_path / "d.dets", "img") == dets

    @pytest.mark.parametrize("loader,text,error,line,field", [
        (load_annotations, "1 2 0 4\n", InvalidBox, 1, "w"),
        (load_annotations, "1 2 3 -4\n", InvalidBox, 1, "h"),
        (load_annotations, "1 2 3\n", ParseError, 1, None),
        (load_annotations, "\n1 2 three 4\n", ParseError, 2, "w"),
        (load_annotations, "1 inf 3 4\n", ParseError, 1, "y"),
        (load_detections, "1 2 3 4 1.5\n", ConfidenceOutOfRange, 1, "confidence"),
        (load_detections, "1 2 3 4\n", ParseError, 1, None),
    ])
    def test_located_errors(self, tmp_path, loader, text, error, line, field):
        path = tmp_path / "rows"
        path.write_text(text)
        with pytest.raises(error) as excinfo:
            loader(path, "img")
        assert excinfo.value.line == line
        assert excinfo.value.field == field


class TestGaze:
    def test_header_only(self, tmp_path):
        path = tmp_path / "g.gaze"
        path.write_text("x,y\n")
        assert len(load_gaze(path, "img")) == 0

    def test_rows(self, tmp_path):
        path = tmp_path / "g.gaze"
        path.write_text("x,y,timestamp_ms\n960.5,540.0,10\n100,200,\n")
        fixations = load_gaze(path, "img")
        assert fixations.points == (
            FixationPoint(960.5, 540.0, timestamp_ms=10.0),
            FixationPoint(100.0, 200.0),
        )

    def test_write_round_trip(self, tmp_path):
        fixations = FixationSet("img", [FixationPoint(1.25, 2.5, 0.0, 120.0), FixationPoint(3.0, 4.0)])
        path = tmp_path / "g.gaze"
        write_gaze(fixations, path)
        assert load_gaze(path, "img") == fixations

    @pytest.mark.parametrize("text,line,field", [
        ("x,y\nabc,2\n", 2, "x"),
        ("x\n1\n", 1, "y"),
        ("x,y,pupil\n1,2,3\n", 1, "pupil"),
        ("x,y,timestamp_ms\n1,2,-5\n", 2, "timestamp_ms"),
        ("x,y\n1,2\n3,4,5\n", 3, None),
        ("x,y\n1,\n", 2, "y"),
        ("", 1, None),
    ])
    def test_located_errors(self, tmp_path, text, line, field):
        path = tmp_path / "g.gaze"
        path.write_text(text)
        with pytest.raises(ParseError) as excinfo:
            load_gaze(path, "img")
        assert excinfo.value.line == line
        assert excinfo.value.field == field


class TestManifest:
    def _files(self, root, names):
        for name in names:
            (root / name).write_text("")

    def test_empty_manifest(self, tmp_path):
        path = tmp_path / "m.manifest"
        path.write_text("")
        assert len(load_manifest(path)) == 0

    def test_one_entry_per_split(self, tmp_path):
        self._files(tmp_path, ["a.pgm", "a.boxes", "b.pgm", "b.boxes", "c.pgm", "c.boxes", "c.gaze"])
        entries = [
            ManifestEntry("a", str(tmp_path / "a.pgm"), str(tmp_path / "a.boxes"), "train"),
            ManifestEntry("b", str(tmp_path / "b.pgm"), str(tmp_path / "b.boxes"), "val"),
            ManifestEntry("c", str(tmp_path / "c.pgm"), str(tmp_path / "c.boxes"), "test",
                          gaze_ref=str(tmp_path / "c.gaze")),
        ]
        path = tmp_path / "m.manifest"
        write_manifest(entries, path)
        assert '"image": "a.pgm"' in path.read_text()
        manifest = load_manifest(path)
        assert [len(manifest.split(s)) for s in ("train", "val", "test")] == [1, 1, 1]
        assert manifest.entries == tuple(
            ManifestEntry(e.image_id, str((tmp_path / e.image_path).resolve()),
                          str((tmp_path / e.annotation_ref).resolve()), e.split,
                          gaze_ref=str((tmp_path / e.gaze_ref).resolve()) if e.gaze_ref else None)
            for e in entries
        )

    def test_missing_file(self, tmp_path):
        self._files(tmp_path, ["a.boxes"])
        path = tmp_path / "m.manifest"
        path.write_text(json.dumps({"image_id": "a", "image": "a.pgm", "annotations": "a.boxes", "split": "test"}))
        with pytest.raises(MissingFile) as excinfo:
            load_manifest(path)
        assert excinfo.value.path.endswith("a.pgm")

    def test_missing_manifest(self, tmp_path):
        with pytest.raises(MissingFile):
            load_manifest(tmp_path / "nope.manifest")

    @pytest.mark.parametrize("record,error,field", [
        ({"image_id": "a", "image": "a.pgm", "annotations": "a.boxes"}, ParseError, "split"),
        ({"image_id": "a", "image": "a.pgm", "annotations": "a.boxes", "split": "dev"}, ParseError, "split"),
        ({"image_id": "a", "image": "a.pgm", "annotations": "a.boxes", "split": "test", "x": 1}, ParseError, "x"),
        ({"image_id": "", "image": "a.pgm", "annotations": "a.boxes", "split": "test"}, ParseError, "image_id"),
    ])
    def test_invalid_records(self, tmp_path, record, error, field):
        self._files(tmp_path, ["a.pgm", "a.boxes"])
        path = tmp_path / "m.manifest"
        path.write_text("# header comment\n" + json.dumps(record) + "\n")
        with pytest.raises(error) as excinfo:
            load_manifest(path)
        assert excinfo.value.line == 2
        assert excinfo.value.field == field

    def test_duplicate_image_id(self, tmp_path):
        self._files(tmp_path, ["a.pgm", "a.boxes"])
        record = json.dumps({"image_id": "a", "image": "a.pgm", "annotations": "a.boxes", "split": "test"})
        path = tmp_path / "m.manifest"
        path.write_text(record + "\n" + record + "\n")
        with pytest.raises(DuplicateImageId) as excinfo:
            load_manifest(path)
        assert excinfo.value.line == 2

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "m.manifest"
        path.write_text("{not json\n")
        with pytest.raises(ParseError) as excinfo:
            load_manifest(path)
        assert excinfo.value.line == 1


class TestThreshold:
    def test_round_trip(self, tmp_path):
        threshold = SignificanceThreshold(0.41612345, 17, "calibrated:train", "spectral-residual")
        path = threshold_path(tmp_path, "spectral-residual")
        write_threshold(threshold, path)
        assert read_threshold(path) == threshold

    def test_slug(self):
        assert method_slug("spectral-residual") == "spectral-residual"
        assert re.fullmatch(r"external-unisal-[0-9a-f]{8}", method_slug("external:/runs/unisal/"))
        assert method_slug("external:/runs/unisal/") == method_slug("external:/runs/unisal")
        assert re.fullmatch(r"external-maps-[0-9a-f]{8}\.threshold", threshold_path("out", "external:maps").name)

    def test_slug_distinguishes_same_directory_name(self):
        first = method_slug("external:/runA/maps")
        second = method_slug("external:/runB/maps")
        assert first.startswith("external-maps-") and second.startswith("external-maps-")
        assert first != second

    @pytest.mark.parametrize("text,field", [
        ("value=0.4\nn_regions=2\nsource=override\n", "method"),
        ("value=abc\nn_regions=2\nsource=override\nmethod=m\n", "value"),
        ("value=1.4\nn_regions=2\nsource=override\nmethod=m\n", "value"),
        ("value=0.4\nn_regions=-2\nsource=override\nmethod=m\n", "n_regions"),
        ("value=0.4\ncolour=red\n", "colour"),
    ])
    def test_invalid(self, tmp_path, text, field):
        path = tmp_path / "t.threshold"
        path.write_text(text)
        with pytest.raises(ParseError) as excinfo:
            read_threshold(path)
        assert excinfo.value.field == field


def _report(per_image, sections=None):
    sections = sections or {"saliency": "ok", "significance": "ok", "detection": "ok"}
    aggregates = recompute_aggregates(per_image, base=Aggregates(ap50=0.5, ap50_95=0.25, threshold=0.4),
                                      sections=sections)
    metadata = ReportMetadata(tool_version="0.1.0", method_id="spectral-residual", created_at="2024-01-01T00:00:00+00:00",
                              threshold_source="override")
    return EvaluationReport(metadata, sections, aggregates, per_image, ("calibration: example",))


class TestReport:
    def _rows(self):
        box = BoundingBox(1, 2, 3, 4, "a")
        return (
            ImageResult("a", auc=0.8, nss=1.5, regions=(RegionScore("a", box, 0.7, True, False),)),
            ImageResult("b", auc=0.6, nss=None, regions=(RegionScore("b", BoundingBox(0, 0, 2, 2, "b"), 0.1, False, False),),
                        errors=("b: nss: ZeroVariance: constant",)),
        )

    def test_round_trip(self, tmp_path):
        report = _report(self._rows())
        path = tmp_path / "r.report"
        write_report(report, path)
        assert read_report(path) == report

    def test_key_order(self, tmp_path):
        path = tmp_path / "r.report"
        write_report(_report(self._rows()), path)
        assert list(json.loads(path.read_text())) == ["metadata", "sections", "aggregates", "per_image", "errors"]

    def test_aggregates_recomputed(self):
        aggregates = _report(self._rows()).aggregates
        assert aggregates.mean_auc == pytest.approx(0.7)
        assert aggregates.mean_nss == 1.5
        assert (aggregates.tp, aggregates.tn, aggregates.fp, aggregates.fn) == (0, 1, 1, 0)
        assert aggregates.accuracy == 0.5
        assert aggregates.sensitivity is None
        assert aggregates.ap50 == 0.5

    def test_empty_dataset(self):
        aggregates = recompute_aggregates([])
        assert aggregates == Aggregates()

    def test_skipped_sections_stay_null(self):
        sections = {"saliency": "skipped: missing input", "significance": "skipped: missing input", "detection": "ok"}
        aggregates = _report(self._rows(), sections).aggregates
        assert aggregates.mean_auc is None and aggregates.accuracy is None

    def test_all_errors(self):
        report = _report(self._rows())
        assert report.all_errors == ("calibration: example", "b: nss: ZeroVariance: constant")

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "r.report"
        path.write_text("{")
        with pytest.raises(ParseError):
            read_report(path)

    def test_missing_section(self, tmp_path):
        path = tmp_path / "r.report"
        path.write_text(json.dumps({"metadata": {}, "sections": {}}))
        with pytest.raises(ParseError):
            read_report(path)


# Each body holds a Latin-1 byte on its second line.
TEXT_CORRUPTIONS = [
    ("annotations", lambda p: load_annotations(p, "img"), b"1 2 3 4\n5 6 7 8 \xe9\n"),
    ("detections", lambda p: load_detections(p, "img"), b"1 2 3 4 0.5\n\xff 6 7 8 0.5\n"),
    ("gaze", lambda p: load_gaze(p, "img"), b"x,y\n1,\xe92\n"),
    ("manifest", load_manifest, b"# images\n{\"image_id\": \"caf\xe9\"}\n"),
    ("threshold", read_threshold, b"value=0.4\nsource=\xe9\n"),
    ("report", read_report, b"{\n\"metadata\": \"\xe9\"}\n"),
]


class TestTextCorruption:
    @pytest.mark.parametrize("name,load,data", TEXT_CORRUPTIONS, ids=[c[0] for c in TEXT_CORRUPTIONS])
    def test_invalid_utf8_is_located(self, tmp_path, name, load, data):
        path = tmp_path / f"bad.{name}"
        path.write_bytes(data)
        with pytest.raises(ParseError) as excinfo:
            load(path)
        assert excinfo.value.line == 2
        assert Path(excinfo.value.path).resolve() == path.resolve()
        assert "invalid UTF-8" in str(excinfo.value)
