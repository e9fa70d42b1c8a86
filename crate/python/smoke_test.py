#!/usr/bin/env python3
"""Smoke test for the morkit_py extension module.

Builds a small oscillator-chain model, reduces it, and checks the reduced
models against the full one. Run from the repository root after

    cargo build -p morkit-py
    cp target/debug/libmorkit_py.so python/morkit_py.so

or point PYTHONPATH at a directory containing morkit_py.so.
"""

import os
import sys
import tempfile

import numpy as np

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))
import morkit_py  # noqa: E402


def main() -> None:
    sys_full = morkit_py.SecondOrderSystem.som(30)
    assert sys_full.order == 91
    assert sys_full.num_inputs == 1 and sys_full.num_outputs == 1

    res = sys_full.reduce(8)
    assert res.converged, "reduction did not converge"
    assert res.iterations <= 100
    assert '"shift_history"' in res.report_json()

    omega = np.logspace(-2, 2, 50)
    sig_full = sys_full.sigma(omega)
    for rom in (res.position, res.velocity):
        assert rom.order == 8
        m, d, k, h, l = rom.matrices()
        assert m.shape == (8, 8) and h.shape == (8, 1) and l.shape == (1, 8)
        sig_rom = rom.sigma(omega)
        rel = np.max(np.abs(sig_full - sig_rom) / sig_full)
        print(f"{rom.level}: stable={rom.is_stable()} max rel sigma err={rel:.2e}")
        assert rel < 0.1, f"{rom.level} sweep error too large: {rel}"

    if res.velocity.is_stable():
        rel_h2 = sys_full.h2_error(res.velocity)
        print(f"velocity rel H2 error: {rel_h2:.2e}")
        assert rel_h2 < 0.1

    norm = sys_full.h2_norm()
    assert norm > 0.0
    print(f"full H2 norm: {norm:.6e}")

    # round-trip through dense constructor
    n = 4
    m = np.eye(n)
    d = 2.0 * np.eye(n)
    k = np.diag([2.0] * n) - np.diag([1.0] * (n - 1), 1) - np.diag([1.0] * (n - 1), -1)
    h = np.ones((n, 1))
    l = np.ones((1, n))
    toy = morkit_py.SecondOrderSystem(m, d, k, h, l)
    assert toy.order == n

    with tempfile.TemporaryDirectory() as tmp:
        res.save(tmp)
        files = sorted(os.listdir(tmp))
        assert "report.json" in files
        assert sum(f.endswith(".mtx") for f in files) == 10

    print("smoke test passed")


if __name__ == "__main__":
    main()
