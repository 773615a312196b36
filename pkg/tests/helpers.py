"""Shared fixtures for the test modules."""

import numpy as np

from densify.cspace import HyperRect, Scenario


def random_boxes(rng, d, k, half=(0.03, 0.15)):
    """k random boxes avoiding the default start/goal corners of the cube."""
    boxes = []
    while len(boxes) < k:
        c = rng.random(d)
        w = rng.uniform(*half, size=d)
        lo, hi = np.clip(c - w, 0, 1), np.clip(c + w, 0, 1)
        box = HyperRect(lo, hi)
        if box.contains((0.1,) * d) or box.contains((0.9,) * d):
            continue
        boxes.append(box)
    return tuple(boxes)


def random_scenario(seed, d=2, k=12):
    rng = np.random.default_rng(seed)
    return Scenario(d, random_boxes(rng, d, k), (0.1,) * d, (0.9,) * d)
