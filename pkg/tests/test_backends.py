"""Compiled extension vs numpy fallback parity.

Statistics may differ by summation order, so they get a tight tolerance;
the reveal loop and full mask plans must agree exactly.
"""

import json
import os
import subprocess
import sys

import numpy as np
import pytest

from specmask import _kernels_py

compiled = pytest.importorskip(
    "specmask._kernels", reason="compiled extension not built"
)


class TestKernelParity:
    @pytest.mark.parametrize("metric", [_kernels_py.MAD, _kernels_py.STD, _kernels_py.ENERGY])
    def test_patch_stats(self, metric):
        rng = np.random.default_rng(0)
        for _ in range(20):
            ph = int(rng.integers(1, 6))
            pw = int(rng.integers(1, 6))
            fp = int(rng.integers(1, 8))
            tp = int(rng.integers(1, 8))
            data = np.ascontiguousarray(
                rng.normal(size=(fp * ph + 1, tp * pw + 2)) * 7.0
            )
            a = compiled.patch_stats(data, fp, tp, ph, pw, metric)
            b = _kernels_py.patch_stats(data, fp, tp, ph, pw, metric)
            np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12)

    def test_reveal_blocks_exact(self):
        rng = np.random.default_rng(1)
        for trial in range(50):
            fp = int(rng.integers(2, 12))
            tp = int(rng.integers(2, 12))
            n = int(rng.integers(1, 20))
            rows = rng.integers(0, fp, size=n).astype(np.int64)
            cols = rng.integers(0, tp, size=n).astype(np.int64)
            bh = int(rng.integers(1, 5))
            bw = int(rng.integers(1, 5))
            n_keep = int(rng.integers(1, fp * tp + 1))
            va = np.zeros((fp, tp), dtype=np.uint8)
            vb = np.zeros((fp, tp), dtype=np.uint8)
            ca, ua = compiled.reveal_blocks(va, rows, cols, bh, bw, n_keep, 0)
            cb, ub = _kernels_py.reveal_blocks(vb, rows, cols, bh, bw, n_keep, 0)
            assert (ca, ua) == (cb, ub)
            np.testing.assert_array_equal(va, vb)

    def test_metric_codes_match(self):
        assert (compiled.MAD, compiled.STD, compiled.ENERGY) == (
            _kernels_py.MAD,
            _kernels_py.STD,
            _kernels_py.ENERGY,
        )

    def test_fiedler_vector_matches_numpy(self):
        """The unblocked solver and numpy's eigh agree on the second-smallest
        eigenpair to rounding error (vector compared up to sign, only when
        the eigenvalue is well separated)."""
        rng = np.random.default_rng(2)
        for n in [2, 3, 5, 9, 17, 40, 80]:
            for _ in range(5):
                m = rng.normal(size=(n, n))
                a = np.ascontiguousarray((m + m.T) / 2.0)
                lam_c, vec_c = compiled.fiedler_vector(a)
                lam_p, vec_p = _kernels_py.fiedler_vector(a)
                assert abs(lam_c - lam_p) < 1e-10
                resid = np.linalg.norm(a @ vec_c - lam_c * vec_c)
                assert resid < 1e-10
                vals = np.linalg.eigvalsh(a)
                gap = abs(vals[1] - vals[0])
                if n > 2:
                    gap = min(gap, abs(vals[2] - vals[1]))
                if gap > 1e-8:
                    if np.dot(vec_c, vec_p) < 0:
                        vec_p = -vec_p
                    np.testing.assert_allclose(vec_c, vec_p, atol=1e-8)

    def test_fiedler_vector_near_degenerate_pair(self):
        """A two-cluster similarity graph with floor-level coupling has a
        Fiedler gap around 1e-12; the solver must still split the clusters."""
        n, half = 24, 12
        w = np.full((n, n), 1e-12)
        w[:half, :half] = 0.9
        w[half:, half:] = 0.9
        np.fill_diagonal(w, 1.0)
        deg = w.sum(axis=1)
        inv = 1.0 / np.sqrt(deg)
        lap = np.ascontiguousarray(np.eye(n) - (w * inv[:, None]) * inv[None, :])
        lam, vec = compiled.fiedler_vector(lap)
        assert 0.0 < lam < 1e-10
        assert np.linalg.norm(lap @ vec - lam * vec) < 1e-12
        first = np.sign(vec[:half])
        second = np.sign(vec[half:])
        assert (first == first[0]).all()
        assert (second == -first[0]).all()

    def test_fiedler_vector_rejects_bad_shapes(self):
        for backend in (compiled, _kernels_py):
            with pytest.raises(ValueError):
                backend.fiedler_vector(np.zeros((3, 4)))
            with pytest.raises(ValueError):
                backend.fiedler_vector(np.zeros((1, 1)))

    def test_kernels_accept_read_only_buffers(self):
        """Training pipelines hand over immutable arrays; the read paths
        must not demand writable memory."""
        rng = np.random.default_rng(3)
        data = np.ascontiguousarray(rng.normal(size=(8, 12)))
        data.setflags(write=False)
        a = compiled.patch_stats(data, 4, 4, 2, 3, compiled.MAD)
        b = _kernels_py.patch_stats(data, 4, 4, 2, 3, _kernels_py.MAD)
        np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12)

        m = rng.normal(size=(6, 6))
        sym = np.ascontiguousarray((m + m.T) / 2.0)
        sym.setflags(write=False)
        lam, vec = compiled.fiedler_vector(sym)
        assert np.linalg.norm(sym @ vec - lam * vec) < 1e-10


def plans_under_backend(backend):
    """Masked index lists for every strategy, computed in a subprocess with
    the requested backend forced."""
    script = """
import json, sys
import numpy as np
import specmask as sm

rng = np.random.default_rng(123)
spec = sm.Spectrogram(rng.normal(size=(32, 96)))
grid = sm.make_grid(spec, 4, 4)
out = {"backend": sm.BACKEND}
for config in (
    sm.RandomConfig(),
    sm.IbmConfig(block_h=3, block_w=2),
    sm.SgimConfig(hint_ratio=0.4),
    sm.DwmConfig(hint_ratio=0.4),
):
    plans = [sm.generate(config, spec, grid, seed).masked.tolist() for seed in range(8)]
    out[config.kind] = plans
json.dump(out, sys.stdout)
"""
    env = dict(os.environ, SPECMASK_BACKEND=backend)
    proc = subprocess.run(
        [sys.executable, "-c", script], capture_output=True, text=True, env=env
    )
    assert proc.returncode == 0, proc.stderr
    return json.loads(proc.stdout)


class TestPlanParity:
    def test_identical_plans_across_backends(self):
        a = plans_under_backend("compiled")
        b = plans_under_backend("python")
        assert a.pop("backend") == "compiled"
        assert b.pop("backend") == "python"
        assert a == b

    def test_backend_env_override(self):
        env = dict(os.environ, SPECMASK_BACKEND="python")
        proc = subprocess.run(
            [sys.executable, "-c", "import specmask; print(specmask.BACKEND)"],
            capture_output=True,
            text=True,
            env=env,
        )
        assert proc.stdout.strip() == "python"

    def test_backend_env_rejects_unknown_names(self):
        """A typo in the override aborts the import instead of silently
        falling back to whichever backend happens to be installed."""
        env = dict(os.environ, SPECMASK_BACKEND="pythn")
        proc = subprocess.run(
            [sys.executable, "-c", "import specmask"],
            capture_output=True,
            text=True,
            env=env,
        )
        assert proc.returncode != 0
        assert "SPECMASK_BACKEND" in proc.stderr
        assert "pythn" in proc.stderr
