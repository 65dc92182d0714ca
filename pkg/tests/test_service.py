import numpy as np
import pytest
from fastapi.testclient import TestClient

from attnclust.cli import main
from attnclust.imageio import decode_pgm_mask, encode_ppm
from attnclust.service import create_app


def two_color_image(size=32, block=(10, 10, 12, 12)):
    img = np.zeros((size, size, 3), dtype=np.uint8)
    img[:, :] = (0, 0, 255)
    x, y, w, h = block
    img[y : y + h, x : x + w] = (255, 0, 0)
    return img


@pytest.fixture
def client(maxflow_warm):
    return TestClient(create_app())


def upload(client, img=None) -> str:
    img = two_color_image() if img is None else img
    resp = client.post("/sessions", content=encode_ppm(img))
    assert resp.status_code == 200
    return resp.json()["id"]


class TestSessionLifecycle:
    def test_create_and_echo_dimensions(self, client):
        sid = upload(client)
        state = client.get(f"/sessions/{sid}").json()
        assert (state["width"], state["height"]) == (32, 32)
        assert state["revision"] == 0
        assert state["has_mask"] is False

    def test_empty_body_rejected(self, client):
        resp = client.post("/sessions", content=b"")
        assert resp.status_code == 400
        assert resp.json()["error"] == "bad_image"

    def test_garbage_body_rejected(self, client):
        resp = client.post("/sessions", content=b"not an image at all")
        assert resp.status_code == 400

    def test_two_uploads_distinct_ids(self, client):
        assert upload(client) != upload(client)

    def test_unknown_session_404(self, client):
        assert client.get("/sessions/nope").status_code == 404
        assert client.post("/sessions/nope/bbox", json={"x": 1, "y": 1, "w": 2, "h": 2}).status_code == 404


class TestBbox:
    def test_valid_bbox_bumps_revision(self, client):
        sid = upload(client)
        resp = client.post(f"/sessions/{sid}/bbox", json={"x": 8, "y": 8, "w": 16, "h": 16})
        assert resp.status_code == 200
        assert resp.json()["revision"] == 1

    def test_full_image_bbox_rejected(self, client):
        sid = upload(client)
        resp = client.post(f"/sessions/{sid}/bbox", json={"x": 0, "y": 0, "w": 32, "h": 32})
        assert resp.status_code == 400
        assert "background" in resp.json()["detail"]

    def test_out_of_bounds_bbox_rejected(self, client):
        sid = upload(client)
        resp = client.post(f"/sessions/{sid}/bbox", json={"x": 20, "y": 20, "w": 30, "h": 5})
        assert resp.status_code == 400


class TestStrokes:
    def test_strokes_before_bbox_conflict(self, client):
        sid = upload(client)
        resp = client.post(
            f"/sessions/{sid}/strokes",
            json={"strokes": [{"kind": "bg", "points": [[1, 1]]}]},
        )
        assert resp.status_code == 409
        assert resp.json()["error"] == "ordering"

    def test_empty_stroke_list_still_bumps_revision(self, client):
        sid = upload(client)
        client.post(f"/sessions/{sid}/bbox", json={"x": 8, "y": 8, "w": 16, "h": 16})
        resp = client.post(f"/sessions/{sid}/strokes", json={"strokes": []})
        assert resp.status_code == 200
        assert resp.json()["revision"] == 2

    def test_out_of_bounds_stroke_rejected(self, client):
        sid = upload(client)
        client.post(f"/sessions/{sid}/bbox", json={"x": 8, "y": 8, "w": 16, "h": 16})
        resp = client.post(
            f"/sessions/{sid}/strokes",
            json={"strokes": [{"kind": "fg", "points": [[99, 1]]}]},
        )
        assert resp.status_code == 400

    def test_bg_stroke_pixels_end_background(self, client):
        sid = upload(client)
        client.post(f"/sessions/{sid}/bbox", json={"x": 8, "y": 8, "w": 16, "h": 16})
        client.post(
            f"/sessions/{sid}/strokes",
            json={"strokes": [{"kind": "bg", "points": [[9, 9], [9, 9]]}]},
        )
        client.post(f"/sessions/{sid}/iterate", json={"rounds": 3})
        mask = decode_pgm_mask(client.get(f"/sessions/{sid}/mask").content)
        assert not mask[9, 9]


class TestIterate:
    def test_iterate_before_bbox_conflict(self, client):
        sid = upload(client)
        resp = client.post(f"/sessions/{sid}/iterate", json={"rounds": 1})
        assert resp.status_code == 409

    def test_foreground_count_matches_block(self, client):
        sid = upload(client)
        client.post(f"/sessions/{sid}/bbox", json={"x": 8, "y": 8, "w": 16, "h": 16})
        resp = client.post(f"/sessions/{sid}/iterate", json={"rounds": 5})
        assert resp.status_code == 200
        assert resp.json()["foreground_pixels"] == 12 * 12

    def test_zero_rounds_noop_but_revision_bumps(self, client):
        sid = upload(client)
        client.post(f"/sessions/{sid}/bbox", json={"x": 8, "y": 8, "w": 16, "h": 16})
        r1 = client.post(f"/sessions/{sid}/iterate", json={"rounds": 0}).json()
        assert r1 == {"revision": 2, "foreground_pixels": 0}

    def test_mask_before_iterate_conflict(self, client):
        sid = upload(client)
        client.post(f"/sessions/{sid}/bbox", json={"x": 8, "y": 8, "w": 16, "h": 16})
        resp = client.get(f"/sessions/{sid}/mask")
        assert resp.status_code == 409
        assert resp.json()["error"] == "no_mask"

    def test_mask_is_strict_pgm(self, client):
        sid = upload(client)
        client.post(f"/sessions/{sid}/bbox", json={"x": 8, "y": 8, "w": 16, "h": 16})
        client.post(f"/sessions/{sid}/iterate", json={"rounds": 2})
        body = client.get(f"/sessions/{sid}/mask").content
        assert body.startswith(b"P5")
        payload = np.frombuffer(body.split(b"255\n", 1)[1], dtype=np.uint8)
        assert set(np.unique(payload)) <= {0, 255}

    def test_repeat_iterate_revisions_never_skip(self, client):
        sid = upload(client)
        revs = [client.post(f"/sessions/{sid}/bbox", json={"x": 8, "y": 8, "w": 16, "h": 16}).json()["revision"]]
        for _ in range(3):
            revs.append(client.post(f"/sessions/{sid}/iterate", json={"rounds": 1}).json()["revision"])
        assert revs == [1, 2, 3, 4]


class TestCliParity:
    def test_mask_bit_identical_to_batch_cli(self, client, tmp_path):
        img = two_color_image()
        sid = upload(client, img)
        seed = client.get(f"/sessions/{sid}").json()["seed"]
        client.post(f"/sessions/{sid}/bbox", json={"x": 8, "y": 8, "w": 16, "h": 16})
        client.post(
            f"/sessions/{sid}/strokes",
            json={"strokes": [{"kind": "fg", "points": [[14, 14], [17, 14]]}]},
        )
        client.post(f"/sessions/{sid}/iterate", json={"rounds": 2})
        client.post(f"/sessions/{sid}/iterate", json={"rounds": 1})
        http_mask = client.get(f"/sessions/{sid}/mask").content

        img_path = tmp_path / "img.ppm"
        img_path.write_bytes(encode_ppm(img))
        strokes_path = tmp_path / "strokes.txt"
        strokes_path.write_text("fg 14 14 17 14\n")
        out_path = tmp_path / "mask.pgm"
        code = main(
            ["grabcut", "--image", str(img_path), "--bbox", "8,8,16,16",
             "--strokes", str(strokes_path), "--out", str(out_path),
             "--iters", "3", "--seed", str(seed)]
        )
        assert code == 0
        assert out_path.read_bytes() == http_mask


def test_session_ttl_expiry(maxflow_warm):
    client = TestClient(create_app(ttl_seconds=0.0))
    sid = upload(client)
    import time

    time.sleep(0.01)
    assert client.get(f"/sessions/{sid}").status_code == 404


def test_static_ui_served_when_configured(tmp_path, maxflow_warm):
    (tmp_path / "index.html").write_text("<html><body>roi tool</body></html>")
    client = TestClient(create_app(ui_dir=str(tmp_path)))
    page = client.get("/")
    assert page.status_code == 200
    assert "roi tool" in page.text
    # API routes still win over the static mount
    assert client.post("/sessions", content=b"").status_code == 400


def test_concurrent_mutations_are_linearized(client):
    """Parallel iterate calls must yield unique, gapless revisions."""
    import concurrent.futures

    sid = upload(client)
    client.post(f"/sessions/{sid}/bbox", json={"x": 8, "y": 8, "w": 16, "h": 16})

    def bump(_):
        return client.post(f"/sessions/{sid}/iterate", json={"rounds": 0}).json()["revision"]

    with concurrent.futures.ThreadPoolExecutor(max_workers=8) as pool:
        revisions = sorted(pool.map(bump, range(16)))
    assert revisions == list(range(2, 18))
