#!/usr/bin/env python3
"""Smoke test for the qru_py extension module.

Builds nothing itself: run `cargo build -p qru-py` first, then execute this
script from the repository root (or anywhere — it locates the workspace
relative to its own path). The compiled cdylib is loaded directly from the
cargo target directory.
"""

import importlib.util
import math
import pathlib
import sys

ROOT = pathlib.Path(__file__).resolve().parent.parent


def load_module():
    candidates = []
    for profile in ("debug", "release"):
        d = ROOT / "target" / profile
        candidates += sorted(d.glob("libqru_py.so")) + sorted(d.glob("qru_py.so"))
    if not candidates:
        sys.exit("qru_py cdylib not found; run `cargo build -p qru-py` first")
    spec = importlib.util.spec_from_file_location("qru_py", candidates[0])
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    return module


def main():
    qru = load_module()

    names = qru.preset_names()
    assert names == ["oscillation", "wdbc", "mnist35"], names

    # Parameter counts: closed form vs published targets.
    expected = {"oscillation": (70, 72), "wdbc": (34, 35), "mnist35": (129, 132)}
    for name, counts in expected.items():
        assert qru.param_count(name) == counts, (name, qru.param_count(name))

    info = qru.describe("oscillation")
    assert info["total_qubits"] == 8 and info["hidden_dim"] == 10, info

    # Deterministic seeded initialization.
    p1 = qru.init_params("oscillation", seed=7)
    p2 = qru.init_params("oscillation", seed=7)
    assert p1 == p2 and len(p1) == 70

    # A zero-parameter cell on |0...0> leaves Z expectations at +1.
    outs, hidden = qru.forward_cell("oscillation", [0.0] * 70, [0.0])
    assert abs(outs[0] - 1.0) < 1e-12, outs
    assert all(abs(h - 1.0) < 1e-12 for h in hidden[:5]), hidden
    assert all(abs(h) < 1e-12 for h in hidden[5:]), hidden

    # Sequence outputs are expectation values, bounded by 1.
    steps = [[0.3], [-0.8], [0.5], [0.1]]
    per_step, final_hidden = qru.run_sequence("oscillation", p1, steps)
    assert len(per_step) == 4 and len(final_hidden) == 10
    assert all(abs(y[0]) <= 1.0 + 1e-12 for y in per_step)

    # Rollout starts from the last warmup prediction.
    preds = qru.self_feedback_rollout("oscillation", p1, [0.3, -0.8, 0.5, 0.1], 6)
    assert len(preds) == 6
    assert abs(preds[0] - per_step[-1][0]) < 1e-12

    # Loss + gradient agree with finite differences.
    targets = [0.2, -0.5, 0.4, 0.0]
    loss, grad = qru.sample_gradient("oscillation", p1, steps, "mse", target_series=targets)
    assert math.isfinite(loss) and len(grad) == 70
    disc = qru.gradient_check("oscillation", p1, steps, "mse", target_series=targets)
    assert disc < 1e-4, disc

    # Classification losses take integer labels.
    wp = qru.init_params("wdbc", seed=3)
    bce = qru.sample_loss("wdbc", wp, [[0.2], [0.7]], "bce", target_label=1)
    assert bce > 0.0
    disc = qru.gradient_check("wdbc", wp, [[0.2], [0.7]], "bce", target_label=1)
    assert disc < 1e-4, disc

    print("smoke_test: all checks passed")


if __name__ == "__main__":
    main()
