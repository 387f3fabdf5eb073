import numpy as np
import pytest

from cusumseg import BinaryMask, GrayImage, PhantomSpec, generate


def disk_data(w=128, h=128, cx=64.0, cy=64.0, r=40.0, lo=100.0, hi=300.0):
    yy, xx = np.mgrid[0:h, 0:w]
    inside = (xx - cx) ** 2 + (yy - cy) ** 2 <= r * r
    return np.where(inside, hi, lo), inside


@pytest.fixture(scope="session")
def disk_image():
    data, _ = disk_data()
    return GrayImage(data)


@pytest.fixture(scope="session")
def disk_truth():
    _, inside = disk_data()
    return BinaryMask(inside)


@pytest.fixture(scope="session")
def default_phantom():
    """(stack, ground truth) for the stock head phantom."""
    return generate(PhantomSpec())
