import json

import numpy as np
import pytest

from walkscope.raster_io import BUILDING, ROAD, SIDEWALK
from walkscope.vectorize import (CrsMismatchError, TileExtent, VectorLayer,
                                 clip_layer, clip_ring, geotransform_for,
                                 load_extents, load_vector_layer,
                                 manifest_dimensions, polygon_area, rasterize,
                                 ring_area)

from conftest import convex_contains, convex_hull


def square(x0, y0, x1, y1):
    return [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]


class TestArea:
    def test_unit_square(self):
        assert ring_area(square(0, 0, 1, 1)) == 1.0

    def test_triangle(self):
        assert ring_area([(0, 0), (4, 0), (0, 3)]) == 6.0

    def test_orientation_independent(self):
        ccw = square(0, 0, 2, 3)
        assert ring_area(ccw) == ring_area(list(reversed(ccw))) == 6.0

    def test_donut(self):
        outer = square(0, 0, 10, 10)
        hole = square(4, 4, 6, 6)
        assert polygon_area([outer, hole]) == 96.0

    def test_empty(self):
        assert polygon_area([]) == 0.0


class TestClip:
    EXTENT = TileExtent(min_x=0, min_y=0, max_x=10, max_y=10, tile_id="t")

    def test_inside_unchanged(self):
        ring = square(2, 2, 5, 5)
        assert clip_ring(ring, self.EXTENT) == ring

    def test_crossing_left_edge(self):
        ring = square(-2, 1, 2, 3)
        out = clip_ring(ring, self.EXTENT)
        assert set(out) == {(0, 1), (2, 1), (2, 3), (0, 3)}
        assert ring_area(out) == 4.0

    def test_outside_empty(self):
        assert clip_ring(square(-5, -5, -1, -1), self.EXTENT) == []

    def test_corner_overlap_area(self):
        out = clip_ring(square(8, 8, 13, 13), self.EXTENT)
        assert ring_area(out) == 4.0

    def test_layer_drops_empty_features(self):
        layer = VectorLayer(features=[
            (([square(-5, -5, -1, -1)]), SIDEWALK),
            (([square(1, 1, 3, 3)]), ROAD),
        ], crs_id="")
        out = clip_layer(layer, self.EXTENT)
        assert len(out.features) == 1
        assert out.features[0][1] == ROAD

    def test_layer_keeps_holes(self):
        layer = VectorLayer(features=[
            ([square(1, 1, 9, 9), square(4, 4, 6, 6)], SIDEWALK),
        ], crs_id="")
        out = clip_layer(layer, self.EXTENT)
        (rings, _), = out.features
        assert len(rings) == 2

    def test_crs_mismatch(self):
        layer = VectorLayer(features=[], crs_id="epsg:1")
        ext = TileExtent(min_x=0, min_y=0, max_x=1, max_y=1, tile_id="t",
                         crs_id="epsg:2")
        with pytest.raises(CrsMismatchError):
            clip_layer(layer, ext)

    def test_blank_crs_tolerated(self):
        layer = VectorLayer(features=[], crs_id="")
        ext = TileExtent(min_x=0, min_y=0, max_x=1, max_y=1, tile_id="t",
                         crs_id="epsg:2")
        clip_layer(layer, ext)


class TestExtent:
    def test_degenerate_rejected(self):
        with pytest.raises(ValueError):
            TileExtent(min_x=0, min_y=0, max_x=0, max_y=1, tile_id="t")
        with pytest.raises(ValueError):
            TileExtent(min_x=0, min_y=2, max_x=1, max_y=1, tile_id="t")

    def test_geotransform_for(self):
        ext = TileExtent(min_x=0, min_y=0, max_x=32, max_y=16, tile_id="t",
                         crs_id="epsg:3")
        gt = geotransform_for(ext, width=32, height=16)
        assert gt.origin_x == 0.0 and gt.origin_y == 16.0
        assert gt.pixel_size_x == 1.0 and gt.pixel_size_y == -1.0
        assert gt.crs_id == "epsg:3"
        # pixel (0, 0) center sits just inside the top-left corner
        assert gt.pixel_to_world(0, 0) == (0.5, 15.5)


class TestRasterize:
    EXTENT = TileExtent(min_x=0, min_y=0, max_x=16, max_y=16, tile_id="t")

    def layer(self, *features):
        return VectorLayer(features=list(features), crs_id="")

    def test_aligned_rect_pixel_count(self):
        tile = rasterize([self.layer(([square(2, 2, 5, 5)], SIDEWALK))],
                         self.EXTENT, 16, 16)
        assert int((tile.labels == SIDEWALK).sum()) == 9

    def test_half_open_coverage(self):
        # x in [0.5, 3.5) covers pixel columns 0..2 and not 3
        tile = rasterize([self.layer(([square(0.5, 12.5, 3.5, 15.5)], SIDEWALK))],
                         self.EXTENT, 16, 16)
        rows, cols = np.nonzero(tile.labels == SIDEWALK)
        assert set(cols) == {0, 1, 2}
        assert set(rows) == {1, 2, 3}

    @pytest.mark.parametrize("seed", range(25))
    def test_aligned_rect_area_identity(self, seed):
        rng = np.random.default_rng(seed)
        x0, y0 = (int(v) for v in rng.integers(0, 12, 2))
        w, h = (int(v) for v in rng.integers(1, 5, 2))
        tile = rasterize([self.layer(([square(x0, y0, x0 + w, y0 + h)], ROAD))],
                         self.EXTENT, 16, 16)
        assert int((tile.labels == ROAD).sum()) == w * h

    @pytest.mark.parametrize("seed", range(15))
    def test_convex_polygon_against_containment_oracle(self, seed):
        rng = np.random.default_rng(seed + 1000)
        pts = [(float(x), float(y)) for x, y in rng.uniform(1, 15, (8, 2))]
        hull = convex_hull(pts)
        if len(hull) < 3:
            return
        tile = rasterize([self.layer((([list(hull)]), SIDEWALK))],
                         self.EXTENT, 16, 16)
        gt = tile.geotransform
        checked = 0
        for r in range(16):
            for c in range(16):
                x, y = gt.pixel_to_world(r, c)
                want = convex_contains(hull, x, y, eps=1e-7)
                if want is None:
                    continue
                got = tile.labels[r, c] == SIDEWALK
                assert got == want, (seed, r, c, x, y)
                checked += 1
        assert checked > 200

    def test_priority_sidewalk_over_road_over_building(self):
        features = [
            ([square(0, 0, 16, 16)], BUILDING),
            ([square(4, 4, 12, 12)], ROAD),
            ([square(6, 6, 10, 10)], SIDEWALK),
        ]
        tile = rasterize([self.layer(*features)], self.EXTENT, 16, 16)
        assert int((tile.labels == SIDEWALK).sum()) == 16
        assert int((tile.labels == ROAD).sum()) == 64 - 16
        assert int((tile.labels == BUILDING).sum()) == 256 - 64

    def test_priority_holds_across_layers(self):
        road = self.layer(([square(0, 0, 16, 16)], ROAD))
        walk = self.layer(([square(2, 2, 6, 6)], SIDEWALK))
        # sidewalk wins regardless of layer order
        for layers in ([road, walk], [walk, road]):
            tile = rasterize(layers, self.EXTENT, 16, 16)
            assert int((tile.labels == SIDEWALK).sum()) == 16

    def test_hole_left_unburned(self):
        donut = ([square(2, 2, 10, 10), square(4, 4, 8, 8)], SIDEWALK)
        tile = rasterize([self.layer(donut)], self.EXTENT, 16, 16)
        assert int((tile.labels == SIDEWALK).sum()) == 64 - 16
        assert tile.labels[16 - 6, 5] == 0  # inside the hole

    def test_empty_layers_all_background(self):
        tile = rasterize([], self.EXTENT, 16, 16)
        assert not tile.labels.any()
        assert tile.tile_id == "t"

    def test_bad_dimensions(self):
        with pytest.raises(ValueError):
            rasterize([], self.EXTENT, 0, 16)


class TestLoaders:
    def geojson(self, tmp_path, features, crs_id="grid"):
        path = tmp_path / "layer.json"
        path.write_text(json.dumps({"crs_id": crs_id, "features": features}))
        return path

    def feature(self, ring, **properties):
        return {"geometry": {"type": "Polygon", "coordinates": [ring]},
                "properties": properties}

    def test_class_names_and_ids(self, tmp_path):
        path = self.geojson(tmp_path, [
            self.feature(square(0, 0, 1, 1), **{"class": "Sidewalk"}),
            self.feature(square(0, 0, 1, 1), **{"class": "road"}),
            self.feature(square(0, 0, 1, 1), **{"class": 1}),
        ])
        layer = load_vector_layer(path)
        assert [cid for _, cid in layer.features] == [SIDEWALK, ROAD, BUILDING]
        assert layer.crs_id == "grid"

    def test_unknown_class_name_rejected(self, tmp_path):
        path = self.geojson(tmp_path, [self.feature(square(0, 0, 1, 1),
                                                    **{"class": "canal"})])
        with pytest.raises(ValueError, match="canal"):
            load_vector_layer(path)

    def test_missing_class_property_rejected(self, tmp_path):
        path = self.geojson(tmp_path, [self.feature(square(0, 0, 1, 1))])
        with pytest.raises(ValueError):
            load_vector_layer(path)

    def test_custom_class_property(self, tmp_path):
        path = self.geojson(tmp_path, [self.feature(square(0, 0, 1, 1),
                                                    kind="sidewalk")])
        layer = load_vector_layer(path, class_property="kind")
        assert layer.features[0][1] == SIDEWALK

    def test_fixed_class_overrides(self, tmp_path):
        path = self.geojson(tmp_path, [self.feature(square(0, 0, 1, 1))])
        layer = load_vector_layer(path, fixed_class=ROAD)
        assert layer.features[0][1] == ROAD

    def test_multipolygon_expands(self, tmp_path):
        feat = {"geometry": {"type": "MultiPolygon",
                             "coordinates": [[square(0, 0, 1, 1)],
                                             [square(3, 3, 4, 4)]]},
                "properties": {"class": "road"}}
        layer = load_vector_layer(self.geojson(tmp_path, [feat]))
        assert len(layer.features) == 2

    def test_non_polygon_skipped(self, tmp_path):
        feat = {"geometry": {"type": "LineString",
                             "coordinates": [(0, 0), (1, 1)]},
                "properties": {"class": "road"}}
        layer = load_vector_layer(self.geojson(tmp_path, [feat]))
        assert layer.features == []

    def test_zero_area_outer_ring_dropped(self, tmp_path):
        path = self.geojson(tmp_path, [
            self.feature([(0, 0), (1, 1), (2, 2)], **{"class": "road"})])
        layer = load_vector_layer(path)
        assert layer.features == []

    def test_load_extents_orders_axes(self, tmp_path):
        path = tmp_path / "extents.json"
        path.write_text(json.dumps([{
            "tile_id": "a", "origin_x": 10.0, "origin_y": 20.0,
            "pixel_size_x": 0.5, "pixel_size_y": -0.5,
            "width": 32, "height": 16, "crs_id": "grid",
        }]))
        (ext,) = load_extents(path)
        assert (ext.min_x, ext.max_x) == (10.0, 26.0)
        assert (ext.min_y, ext.max_y) == (12.0, 20.0)
        assert ext.tile_id == "a" and ext.crs_id == "grid"
        assert manifest_dimensions(path) == {"a": (16, 32)}
