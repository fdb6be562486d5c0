"""Independent reference implementations the classifier tests check against.

These deliberately avoid the code paths under test: Naive Bayes is verified
with plain probability products (no logs), the decision list with a
brute-force scan over matched entries.
"""

from __future__ import annotations

import math


def smoothed(event: int, condition: int, prior: float, m: float) -> float:
    if condition == 0 and m == 0:
        return 0.0
    return (event + m * prior) / (condition + m)


def nb_posterior_oracle(model, vector) -> tuple[str, bool]:
    """Exhaustive posterior computation: products over active features per
    sense, same prior convention and tie-breaks as the classifier contract.
    Returns (sense, used_fallback)."""
    active = sorted(k for k in vector.keys() if k in model.cond_counts)
    if not active:
        return model.fallback, True
    m = model.smoothing.m
    if model.smoothing.prior_mode == "feature-values":
        prior = 1.0 / max(model.vocab_size, 2)
    else:
        prior = 1.0 / max(len(model.senses), 2)
    best_sense = None
    best_key = None
    for sense in sorted(model.senses):
        posterior = model.priors[sense]
        for key in active:
            posterior *= smoothed(
                model.cond_counts[key].get(sense, 0),
                model.sense_totals[sense],
                prior,
                m,
            )
        log_posterior = math.log(posterior) if posterior > 0.0 else -math.inf
        key_tuple = (log_posterior, model.priors[sense])
        if best_key is None or key_tuple > best_key:
            best_sense, best_key = sense, key_tuple
    return best_sense, False


def dl_scan_oracle(model, vector) -> tuple[str, bool]:
    """Pick the matched entry with the greatest (strength, count, key-asc)
    rank by scanning all entries; fallback when nothing matches."""
    keys = vector.keys()
    matched = [entry for entry in model.entries if entry.key in keys]
    if not matched:
        return model.fallback, True
    best = min(matched, key=lambda e: (-e.strength, -e.count, e.key))
    return best.sense, False
