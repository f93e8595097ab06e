import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from itafair import imaging
from itafair.errors import (
    DecodeError,
    InvalidKernelError,
    InvalidSideError,
    ZeroChannelError,
)


def solid(shape, rgb):
    img = np.empty((*shape, 3), dtype=np.uint8)
    img[:] = rgb
    return img


class TestIo:
    def test_png_round_trip(self, tmp_path):
        rng = np.random.default_rng(0)
        img = rng.integers(0, 256, (45, 60, 3), dtype=np.uint8)
        imaging.save_image(img, tmp_path / "x.png")
        assert np.array_equal(imaging.load_image(tmp_path / "x.png"), img)

    def test_jpeg_decodes(self, tmp_path):
        imaging.save_image(solid((600, 450), (180, 150, 130)), tmp_path / "x.jpg")
        out = imaging.load_image(tmp_path / "x.jpg")
        assert out.shape == (600, 450, 3)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            imaging.load_image(tmp_path / "absent.png")

    def test_truncated_jpeg(self, tmp_path):
        imaging.save_image(solid((64, 64), (130, 120, 110)), tmp_path / "x.jpg")
        data = (tmp_path / "x.jpg").read_bytes()
        (tmp_path / "bad.jpg").write_bytes(data[: len(data) // 2])
        with pytest.raises(DecodeError):
            imaging.load_image(tmp_path / "bad.jpg")

    def test_not_an_image(self, tmp_path):
        (tmp_path / "junk.png").write_bytes(b"definitely not a png")
        with pytest.raises(DecodeError):
            imaging.load_image(tmp_path / "junk.png")

    def test_mask_round_trip(self, tmp_path):
        rng = np.random.default_rng(1)
        mask = rng.random((30, 40)) > 0.5
        imaging.save_mask(mask, tmp_path / "m.png")
        assert np.array_equal(imaging.load_mask(tmp_path / "m.png"), mask)

    def test_missing_mask(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            imaging.load_mask(tmp_path / "absent.png")


class TestStandardize:
    def test_crop_offset_600x450(self):
        # 600 wide, 450 tall: crop keeps columns [75, 525)
        img = solid((450, 600), (0, 200, 0))
        img[:, :75] = (200, 0, 0)
        img[:, 525:] = (200, 0, 0)
        out = imaging.standardize_geometry(img, 200)
        assert out.shape == (200, 200, 3)
        assert np.all(out == np.array([0, 200, 0], np.uint8))

    def test_identity_when_already_target(self):
        rng = np.random.default_rng(2)
        img = rng.integers(0, 256, (200, 200, 3), dtype=np.uint8)
        assert np.array_equal(imaging.standardize_geometry(img, 200), img)

    def test_small_side_rejected(self):
        with pytest.raises(InvalidSideError):
            imaging.standardize_geometry(solid((100, 100), (1, 2, 3)), 10)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(41, 300), st.integers(41, 300), st.integers(40, 128))
    def test_output_square(self, h, w, side):
        img = solid((h, w), (10, 20, 30))
        out = imaging.standardize_geometry(img, side)
        assert out.shape == (side, side, 3)

    def test_mask_follows_same_geometry(self):
        mask = np.zeros((450, 600), dtype=bool)
        mask[:, 75:525] = True
        out = imaging.standardize_mask(mask, 200)
        assert out.shape == (200, 200)
        assert out.all()


class TestGreyWorld:
    def test_uniform_grey_unchanged(self):
        img = solid((20, 20), (77, 77, 77))
        assert np.array_equal(imaging.grey_world_balance(img), img)

    def test_forced_means(self):
        img = solid((16, 16), (120, 60, 60))
        out = imaging.grey_world_balance(img)
        assert out.reshape(-1, 3).mean(axis=0) == pytest.approx((80.0, 80.0, 80.0))

    def test_all_black_rejected(self):
        with pytest.raises(ZeroChannelError):
            imaging.grey_world_balance(solid((8, 8), (0, 0, 0)))

    def test_idempotent_up_to_rounding(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            # keep values away from the clamp so gains cannot saturate
            img = rng.integers(60, 160, (32, 32, 3), dtype=np.uint8)
            once = imaging.grey_world_balance(img)
            twice = imaging.grey_world_balance(once)
            assert np.abs(twice.astype(int) - once.astype(int)).max() <= 1


class TestBlackhat:
    def test_constant_image_empty_mask(self):
        assert not imaging.blackhat_hair_mask(solid((64, 64), (150, 140, 130))).any()

    def test_dark_stroke_detected(self):
        img = solid((200, 200), (200, 200, 200))
        img[30:170, 100:103] = (40, 35, 30)
        stroke = np.zeros((200, 200), dtype=bool)
        stroke[30:170, 100:103] = True
        mask = imaging.blackhat_hair_mask(img, 17, 10)
        assert mask[stroke].mean() >= 0.9
        assert mask[~stroke].mean() < 0.01

    def test_even_kernel_rejected(self):
        with pytest.raises(InvalidKernelError):
            imaging.blackhat_hair_mask(solid((32, 32), (5, 5, 5)), kernel_side=16)
        with pytest.raises(InvalidKernelError):
            imaging.blackhat_hair_mask(solid((32, 32), (5, 5, 5)), kernel_side=1)

    def test_offset_invariance(self):
        img = solid((120, 120), (170, 170, 170))
        img[20:100, 58:61] = (40, 40, 40)
        lifted = (img.astype(int) + 35).clip(0, 255).astype(np.uint8)
        a = imaging.blackhat_hair_mask(img, 17, 10)
        b = imaging.blackhat_hair_mask(lifted, 17, 10)
        assert np.array_equal(a, b)
