import numpy as np
import pytest

from tomokit.phantoms import (
    SHEPP_LOGAN_2D,
    SHEPP_LOGAN_3D,
    ball_phantom,
    disk_phantom,
    shepp_logan_2d,
    shepp_logan_3d,
)


def membership_value_2d(x, y, table=SHEPP_LOGAN_2D):
    """Independent oracle: sum of deltas of ellipses containing (x, y)."""
    total = 0.0
    for delta, a, b, x0, y0, phi_deg in table:
        phi = np.deg2rad(phi_deg)
        xr = (x - x0) * np.cos(phi) + (y - y0) * np.sin(phi)
        yr = -(x - x0) * np.sin(phi) + (y - y0) * np.cos(phi)
        if (xr / a) ** 2 + (yr / b) ** 2 <= 1.0:
            total += delta
    return total


def membership_value_3d(x, y, z, table=SHEPP_LOGAN_3D):
    total = 0.0
    for delta, a, b, c, x0, y0, z0, phi_deg in table:
        phi = np.deg2rad(phi_deg)
        xr = (x - x0) * np.cos(phi) + (y - y0) * np.sin(phi)
        yr = -(x - x0) * np.sin(phi) + (y - y0) * np.cos(phi)
        if (xr / a) ** 2 + (yr / b) ** 2 + ((z - z0) / c) ** 2 <= 1.0:
            total += delta
    return total


def test_background_outside_outer_ellipse_is_zero():
    img = shepp_logan_2d((128, 128)).data
    assert img[0, 0] == 0.0
    assert img[0, -1] == 0.0
    # the outer ellipse has semi-axis 0.69 in x: columns beyond |x|>0.7 are empty
    x = (np.arange(128) - 63.5) * (2 / 128)
    assert np.all(img[:, np.abs(x) > 0.71] == 0.0)


def test_values_match_membership_oracle_2d(rng):
    n = 256
    img = shepp_logan_2d((n, n)).data
    for _ in range(200):
        iy, ix = rng.integers(0, n, 2)
        x = (ix - (n - 1) / 2) * (2 / n)
        y = (iy - (n - 1) / 2) * (2 / n)
        assert img[iy, ix] == pytest.approx(membership_value_2d(x, y), abs=1e-12)


def test_values_match_membership_oracle_3d(rng):
    n = 64
    vol = shepp_logan_3d((n, n, n)).data
    for _ in range(100):
        iz, iy, ix = rng.integers(0, n, 3)
        x = (ix - (n - 1) / 2) * (2 / n)
        y = (iy - (n - 1) / 2) * (2 / n)
        z = (iz - (n - 1) / 2) * (2 / n)
        assert vol[iz, iy, ix] == pytest.approx(membership_value_3d(x, y, z), abs=1e-12)


def _mirrored_x(table_2d):
    """Mirror each ellipse about the x=0 axis: x0 -> -x0, phi -> -phi."""
    return tuple(
        (delta, a, b, -x0, y0, -phi) for (delta, a, b, x0, y0, phi) in table_2d
    )


def test_mirror_symmetry_of_symmetric_subset():
    # The standard table is not mirror-symmetric: the two tilted ellipses
    # differ in size and the two off-center bottom ellipses are not mirror
    # images either.  Exact symmetry holds (and is asserted) only for the
    # verified-symmetric subset: the unrotated ellipses centered on x = 0.
    subset = tuple(e for e in SHEPP_LOGAN_2D if e[3] == 0.0 and e[5] == 0.0)
    assert len(subset) == 6
    assert set(_mirrored_x(subset)) == set(subset)  # table-level verification

    n = 128
    x = (np.arange(n) - (n - 1) / 2) * (2 / n)
    y = x.copy()
    img = np.zeros((n, n))
    for delta, a, b, x0, y0, phi_deg in subset:
        phi = np.deg2rad(phi_deg)
        dx = x[np.newaxis, :] - x0
        dy = y[:, np.newaxis] - y0
        xr = dx * np.cos(phi) + dy * np.sin(phi)
        yr = -dx * np.sin(phi) + dy * np.cos(phi)
        img[(xr / a) ** 2 + (yr / b) ** 2 <= 1.0] += delta
    np.testing.assert_array_equal(img, img[:, ::-1])

    # and the full standard table is indeed not symmetric (documented quirk)
    full = shepp_logan_2d((n, n)).data
    assert not np.array_equal(full, full[:, ::-1])


def test_values_lie_in_partial_sum_range():
    img = shepp_logan_2d((128, 128)).data
    deltas = [e[0] for e in SHEPP_LOGAN_2D]
    lo = sum(d for d in deltas if d < 0) + max(deltas)  # cannot be inside 2-4 without 1
    hi = sum(d for d in deltas if d > 0)
    assert img.min() >= min(lo, 0.0)
    assert img.max() <= hi
    vol = shepp_logan_3d((32, 32, 32)).data
    assert vol.min() >= min(lo, 0.0) and vol.max() <= hi


def test_resolution_consistency_512_vs_256():
    hi = shepp_logan_2d((512, 512)).data
    lo = shepp_logan_2d((256, 256)).data
    down = hi.reshape(256, 2, 256, 2).mean(axis=(1, 3))
    assert np.mean(np.abs(down - lo)) < 0.02


def test_central_slice_of_3d_resembles_2d_layout():
    n = 128
    vol = shepp_logan_3d((n, n, n)).data
    central = vol[n // 2]
    img = shepp_logan_2d((n, n)).data
    # same outer structure: agreement over the vast majority of pixels
    assert np.mean(np.isclose(central, img, atol=1e-12)) > 0.9


def test_disk_phantom_basics():
    d = disk_phantom((64, 64), 10.0, 2.5, (1.0, 1.0))
    assert d.data[32, 32] == 2.5  # center voxel
    assert d.data[0, 0] == 0.0  # far corner: distance > radius
    assert d.data[32, 32 + 11] == 0.0


def test_disk_area_convergence():
    r = 40.0
    d = disk_phantom((256, 256), r, 1.0, (0.5, 0.5))
    area = d.data.sum() * 0.5 * 0.5
    assert area == pytest.approx(np.pi * r * r, rel=0.02)


def test_ball_phantom_basics():
    b = ball_phantom((32, 32, 32), 8.0, 1.0, (1.0, 1.0, 1.0))
    c = (32 - 1) // 2
    assert b.data[16, 16, 16] == 1.0
    assert b.data[0, 0, 0] == 0.0
    # volume convergence at modest resolution
    vol = b.data.sum()
    assert vol == pytest.approx(4 / 3 * np.pi * 8.0**3, rel=0.05)


def test_min_shape_rejected():
    with pytest.raises(ValueError):
        shepp_logan_2d((8, 128))
    with pytest.raises(ValueError):
        shepp_logan_3d((128, 128, 15))
