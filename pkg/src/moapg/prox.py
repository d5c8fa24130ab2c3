"""Closed-form proximal operators for nonnegative combinations of terms."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import NonsmoothTerm

__all__ = ["WeightedNonsmooth", "soft_threshold", "prox", "moreau_envelope"]


def soft_threshold(v, level):
    """Componentwise ``sign(v) * max(|v| - level, 0)``."""
    return np.sign(v) * np.maximum(np.abs(v) - level, 0.0)


@dataclass(frozen=True)
class WeightedNonsmooth:
    """``h = sum_j weight_j * term_j`` with nonnegative weights.

    A combination of indicators is the indicator of the intersection of the
    boxes carrying positive weight.
    """

    terms: tuple

    def __post_init__(self):
        terms = tuple((float(w), t) for w, t in self.terms)
        for w, _ in terms:
            if not w >= 0:
                raise ValueError("combination weights must be nonnegative")
        kinds = {t.family for w, t in terms if w > 0} - {"zero"}
        if len(kinds) > 1:
            raise ValueError("cannot combine l1 and box terms in closed form")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def single(cls, term: NonsmoothTerm, weight: float = 1.0) -> "WeightedNonsmooth":
        return cls(((weight, term),))

    @property
    def l1_level(self) -> float:
        return sum(w * t.weight for w, t in self.terms if t.kind == "l1")

    @property
    def box(self):
        boxes = [t for w, t in self.terms if w > 0 and t.kind == "box"]
        if not boxes:
            return None
        return (np.max([t.lower for t in boxes], axis=0),
                np.min([t.upper for t in boxes], axis=0))

    def value(self, x) -> float:
        x = np.asarray(x, dtype=float)
        box = self.box
        if box is not None and (np.any(x < box[0]) or np.any(x > box[1])):
            return np.inf
        return self.l1_level * float(np.abs(x).sum())


def prox(h: WeightedNonsmooth, scale: float, v) -> np.ndarray:
    """``argmin_y scale*h(y) + 0.5*||v - y||^2``."""
    if not scale > 0:
        raise ValueError("scale must be positive")
    v = np.asarray(v, dtype=float)
    box = h.box
    if box is not None:
        return np.clip(v, box[0], box[1])
    level = h.l1_level
    if level > 0:
        return soft_threshold(v, scale * level)
    return v.copy()


def moreau_envelope(h: WeightedNonsmooth, x) -> float:
    x = np.asarray(x, dtype=float)
    p = prox(h, 1.0, x)
    return h.value(p) + 0.5 * float(np.sum((x - p) ** 2))
