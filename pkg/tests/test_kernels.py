import subprocess
import sys

import numpy as np
import pytest

from liglearn import _kernels_np, kernels

from _builders import random_game

try:
    from liglearn import _core
except ImportError:
    _core = None

needs_core = pytest.mark.skipif(_core is None,
                                reason="compiled core not built")


class TestBackendSelection:
    def test_backend_reported(self):
        assert kernels.BACKEND in ("compiled", "numpy")

    def test_env_var_forces_numpy(self):
        out = subprocess.run(
            [sys.executable, "-c",
             "import liglearn.kernels as k; print(k.BACKEND)"],
            capture_output=True, text=True, check=True,
            env={"PATH": "/usr/bin:/bin", "LIGLEARN_PURE_PYTHON": "1"})
        assert out.stdout.strip() == "numpy"


@needs_core
class TestParity:
    @pytest.mark.parametrize("seed", range(20))
    def test_equilibria_ids_match(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 11))
        g = random_game(rng, n, integer=bool(seed % 2))
        tol = 0.0 if seed % 2 else 1e-9
        a = _core.equilibria_ids(g.W, g.b, tol)
        b = _kernels_np.equilibria_ids(g.W, g.b, tol)
        assert np.array_equal(a, b)

    @pytest.mark.parametrize("seed", range(10))
    def test_hyperplane_hits_match(self, seed):
        rng = np.random.default_rng(seed)
        d = int(rng.integers(1, 12))
        w = rng.integers(-3, 4, d).astype(np.float64)
        b = float(rng.integers(-3, 4))
        assert (_core.hyperplane_hits(w, b, 0.0)
                == _kernels_np.hyperplane_hits(w, b, 0.0))

    def test_readonly_input_accepted(self, rng):
        # InfluenceGame freezes its arrays; the kernel must accept them
        g = random_game(rng, 5)
        assert not g.W.flags.writeable
        ids = kernels.equilibria_ids(g.W, g.b, 1e-9)
        assert ids.dtype == np.int64


class TestSemantics:
    def test_tie_accepted_at_zero_tol(self):
        # single player, w=0, b=0: both actions are weak best responses
        W = np.zeros((1, 1))
        ids = kernels.equilibria_ids(W, np.zeros(1), 0.0)
        assert list(ids) == [0, 1]

    def test_tol_is_weak(self):
        # x0 margin exactly -tol is kept
        W = np.zeros((1, 1))
        b = np.array([1e-9])
        ids = kernels.equilibria_ids(W, b, 1e-9)
        assert 1 in list(ids)
