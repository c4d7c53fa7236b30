import numpy as np
import pytest

from entrain.errors import OutOfOrderPoint
from entrain.metrics import SynchronyConfig, convergence, synchrony
from entrain.preprocess import ResampledTrack, TimeGrid
from entrain.streaming import StreamConfig, StreamingEntrainment


def _feed(est, ta, va, tb, vb):
    merged = sorted([(t, "a", v) for t, v in zip(ta, va)]
                    + [(t, "b", v) for t, v in zip(tb, vb)])
    events = []
    for t, s, v in merged:
        events.extend(est.update(t, v, s))
    return events


def _random_session(rng, n_a=80, n_b=75, span=3.0):
    ta = np.cumsum(rng.uniform(0.4, span, n_a))
    tb = np.cumsum(rng.uniform(0.4, span, n_b))
    return ta, rng.normal(size=n_a), tb, rng.normal(size=n_b)


def _batch_on_window(est, cfg, metric="convergence"):
    gt, wa, wb = est.window_contents()
    grid = TimeGrid(gt[0], gt[-1] + 1e-9, cfg.grid_step)
    a = ResampledTrack("a", "f", grid, wa)
    b = ResampledTrack("b", "f", grid, wb)
    if metric == "convergence":
        return convergence(a, b, alpha=cfg.alpha)
    return synchrony(a, b, SynchronyConfig(delta=cfg.delta), alpha=cfg.alpha)


def test_final_window_matches_batch(rng):
    cfg = StreamConfig(window=25.0)
    est = StreamingEntrainment("a", "b", cfg)
    events = _feed(est, *_random_session(rng))
    assert events
    last = events[-1]
    conv = _batch_on_window(est, cfg, "convergence")
    syn = _batch_on_window(est, cfg, "synchrony")
    assert last.convergence_r == pytest.approx(conv.r, abs=1e-9)
    assert last.convergence_p == pytest.approx(conv.p_value, abs=1e-9)
    assert last.synchrony_r == pytest.approx(syn.r, abs=1e-9)
    assert last.synchrony_p == pytest.approx(syn.p_value, abs=1e-9)


def test_every_emission_matches_batch_with_lag(rng):
    cfg = StreamConfig(window=12.0, delta=0.4)
    est = StreamingEntrainment("a", "b", cfg)
    ta, va, tb, vb = _random_session(rng, n_a=50, n_b=50, span=1.5)
    merged = sorted([(t, "a", v) for t, v in zip(ta, va)]
                    + [(t, "b", v) for t, v in zip(tb, vb)])
    checked = 0
    for t, s, v in merged:
        for ev in est.update(t, v, s):
            if ev.convergence_r is None:
                continue
            conv = _batch_on_window(est, cfg, "convergence")
            assert ev.convergence_r == pytest.approx(conv.r, abs=1e-9)
            if ev.synchrony_r is not None:
                syn = _batch_on_window(est, cfg, "synchrony")
                assert ev.synchrony_r == pytest.approx(syn.r, abs=1e-9)
                assert ev.synchrony_p == pytest.approx(syn.p_value, abs=1e-9)
            checked += 1
    assert checked > 100


def test_long_stream_rebasing_stays_accurate(rng):
    # run far past several rebase points (window 10 s, session ~600 s)
    cfg = StreamConfig(window=10.0)
    est = StreamingEntrainment("a", "b", cfg)
    events = _feed(est, *_random_session(rng, n_a=400, n_b=380, span=1.6))
    conv = _batch_on_window(est, cfg, "convergence")
    assert events[-1].convergence_r == pytest.approx(conv.r, abs=1e-9)


def test_single_speaker_unavailable():
    est = StreamingEntrainment("a", "b")
    for t in np.arange(0.5, 30, 0.7):
        assert est.update(float(t), 0.1, "a") == []
    assert est.snapshot() is None


def test_out_of_order_rejected():
    est = StreamingEntrainment("a", "b")
    est.update(1.0, 0.0, "a")
    with pytest.raises(OutOfOrderPoint):
        est.update(0.5, 0.0, "a")
    est.update(1.0, 0.0, "b")  # equal timestamps are fine
    with pytest.raises(ValueError):
        est.update(2.0, 0.0, "c")


def test_converging_stream_trends_positive(rng):
    # gap between speakers closes linearly: late windows show positive r
    cfg = StreamConfig(window=30.0)
    est = StreamingEntrainment("a", "b", cfg)
    ta = np.cumsum(rng.uniform(0.5, 2.0, 120))
    tb = np.cumsum(rng.uniform(0.5, 2.0, 120))
    span = max(ta[-1], tb[-1])
    va = 2.0 * (1 - ta / span) + rng.normal(0, 0.05, 120)
    vb = -2.0 * (1 - tb / span) + rng.normal(0, 0.05, 120)
    events = _feed(est, ta, va, tb, vb)
    late = [e.convergence_r for e in events[-40:] if e.convergence_r is not None]
    assert np.mean(late) > 0.5


def test_stream_emits_on_grid(rng):
    cfg = StreamConfig(grid_step=0.25)
    est = StreamingEntrainment("a", "b", cfg)
    events = _feed(est, *_random_session(rng, n_a=30, n_b=30))
    ts = np.array([e.t for e in events])
    assert np.all(np.abs(ts / 0.25 - np.round(ts / 0.25)) < 1e-9)
    assert np.all(np.diff(ts) > 0)
