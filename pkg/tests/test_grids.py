import numpy as np
import pytest

import tlab


class TestRectangle:
    def test_rejects_degenerate_extents(self):
        with pytest.raises(ValueError):
            tlab.Rectangle(1.0, 1.0, 0.0, 1.0)
        with pytest.raises(ValueError):
            tlab.Rectangle(0.0, 1.0, 2.0, 1.0)
        with pytest.raises(ValueError):
            tlab.Rectangle(0.0, np.inf, 0.0, 1.0)


class TestGridFunction:
    def test_spacing_and_coordinates(self):
        u = tlab.GridFunction(tlab.Rectangle(-1.0, 1.0, 0.0, 4.0), np.zeros((5, 11)))
        assert u.nx == 11 and u.ny == 5
        assert u.h1 == pytest.approx(0.2)
        assert u.h2 == pytest.approx(1.0)
        assert u.x1()[0] == -1.0 and u.x1()[-1] == 1.0
        X1, X2 = u.mesh()
        assert X1.shape == (5, 11)
        assert X2[3, 0] == pytest.approx(3.0)

    def test_rejects_small_or_nonfinite(self):
        rect = tlab.Rectangle(0.0, 1.0, 0.0, 1.0)
        with pytest.raises(ValueError):
            tlab.GridFunction(rect, np.zeros((2, 5)))
        bad = np.zeros((4, 4))
        bad[1, 2] = np.nan
        with pytest.raises(ValueError):
            tlab.GridFunction(rect, bad)

    def test_values_are_immutable(self):
        u = tlab.GridFunction(tlab.Rectangle(0.0, 1.0, 0.0, 1.0), np.zeros((3, 3)))
        with pytest.raises(ValueError):
            u.values[0, 0] = 1.0

    def test_source_array_is_copied(self):
        src = np.zeros((3, 3))
        u = tlab.GridFunction(tlab.Rectangle(0.0, 1.0, 0.0, 1.0), src)
        src[0, 0] = 5.0
        assert u.values[0, 0] == 0.0
