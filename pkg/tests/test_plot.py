import xml.etree.ElementTree as ET

import pytest

from hardycert.plot import sweep_svg

NS = "{http://www.w3.org/2000/svg}"


def rows(e1s, e2s, level=2):
    return [
        {"eps1": a, "eps2": b, "level": level, "value": 1 - 3 * a - 10 * b, "status": "optimal"}
        for b in e2s
        for a in e1s
    ]


class TestSweepSvg:
    def test_one_polyline_per_eps2(self):
        root = ET.fromstring(sweep_svg(rows([0, 0.01, 0.02], [0, 0.001])))
        assert len(root.findall(f"{NS}polyline")) == 2
        assert not root.findall(f"{NS}circle")

    def test_single_row_is_marker(self):
        root = ET.fromstring(sweep_svg(rows([0], [0])))
        assert len(root.findall(f"{NS}circle")) == 1
        assert not root.findall(f"{NS}polyline")

    def test_points_per_polyline(self):
        root = ET.fromstring(sweep_svg(rows([0, 0.01, 0.02, 0.03], [0])))
        pts = root.find(f"{NS}polyline").get("points").split()
        assert len(pts) == 4
        # value decreases with eps1, so the drawn y coordinate increases
        ys = [float(p.split(",")[1]) for p in pts]
        assert ys == sorted(ys)

    def test_labels_and_legend(self):
        text = sweep_svg(rows([0, 0.01], [0, 0.002]), title="bound")
        assert ">eps1<" in text and ">value<" in text and ">bound<" in text
        assert "eps2=0.002" in text

    def test_order_independent(self):
        r = rows([0, 0.01, 0.02], [0, 0.001])
        assert sweep_svg(r) == sweep_svg(list(reversed(r)))

    def test_deterministic(self):
        r = rows([0, 0.01, 0.02], [0, 0.001, 0.002])
        assert sweep_svg(r, source="a.csv") == sweep_svg(r, source="a.csv")

    def test_nonfinite_dropped(self):
        r = rows([0, 0.01], [0])
        r.append({"eps1": 0.02, "eps2": 0.0, "level": 2, "value": float("nan"), "status": "error"})
        assert "rows=2" in sweep_svg(r)

    def test_empty(self):
        with pytest.raises(ValueError):
            sweep_svg([])

    def test_escapes_title(self):
        ET.fromstring(sweep_svg(rows([0, 0.01], [0]), title="a < b & c"))
