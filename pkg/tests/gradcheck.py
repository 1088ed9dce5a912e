"""Central finite-difference oracle for the per-head losses."""
import numpy as np

from spanqa.scorer import HEADS


def max_relative_error(model, feats, head, rng, coords=50, eps=1e-5):
    w = model.weights[head].copy()
    _, (ix, g) = model.head_loss(feats, head, w)
    grad = dict(zip(ix.tolist(), g.tolist()))
    pick = rng.choice(ix, size=min(coords, len(ix)), replace=False)
    worst = 0.0
    for j in pick:
        wp, wm = w.copy(), w.copy()
        wp[j] += eps
        wm[j] -= eps
        fd = (model.head_loss(feats, head, wp)[0] - model.head_loss(feats, head, wm)[0]) / (2 * eps)
        an = grad[int(j)]
        denom = max(abs(fd), abs(an), 1e-8)
        worst = max(worst, abs(fd - an) / denom)
    return worst


def perturbed_model(model, rng, scale=0.3):
    for h in HEADS:
        model.weights[h] = rng.normal(scale=scale, size=model.dim)
    model.fitted = True
    return model
