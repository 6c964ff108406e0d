"""Möbius transformations of R^3 stored as words of primitive maps.

Every primitive knows its action, its Jacobian and its conformal factor
|T'(p)| = |det DT(p)|^(1/6); a word composes them left to right by the
chain rule, so nothing is ever converted to a matrix group representation.
"""
from dataclasses import dataclass

import numpy as np
from scipy.spatial.transform import Rotation as _Rot

from .curve import KnotError, SampledKnot, evaluate, from_samples

POLE_TOL = 1e-9


class PoleError(KnotError):
    """A point hit the centre of a sphere inversion; the image is not compact."""


@dataclass(frozen=True)
class Translation:
    v: tuple

    def apply(self, p):
        return p + np.asarray(self.v, dtype=float)

    def jacobian(self, p):
        return np.broadcast_to(np.eye(3), p.shape[:-1] + (3, 3))

    def factor(self, p):
        return np.ones(p.shape[:-1])

    def to_json(self):
        return {"type": "translation", "v": list(map(float, self.v))}


@dataclass(frozen=True)
class Rotation:
    """Orthogonal map p -> Q p (det Q = +-1, so reflections are allowed)."""

    matrix: tuple

    def __post_init__(self):
        q = np.asarray(self.matrix, dtype=float)
        if q.shape != (3, 3) or not np.allclose(q @ q.T, np.eye(3), atol=1e-12):
            raise KnotError("rotation matrix must be orthogonal")
        object.__setattr__(self, "matrix", tuple(map(tuple, q)))

    @property
    def q(self):
        return np.asarray(self.matrix)

    def apply(self, p):
        return p @ self.q.T

    def jacobian(self, p):
        return np.broadcast_to(self.q, p.shape[:-1] + (3, 3))

    def factor(self, p):
        return np.ones(p.shape[:-1])

    def to_json(self):
        return {"type": "rotation", "matrix": [list(r) for r in self.matrix]}


@dataclass(frozen=True)
class Homothety:
    k: float

    def __post_init__(self):
        if not self.k > 0:
            raise KnotError("homothety factor must be positive")

    def apply(self, p):
        return self.k * p

    def jacobian(self, p):
        return np.broadcast_to(self.k * np.eye(3), p.shape[:-1] + (3, 3))

    def factor(self, p):
        return np.full(p.shape[:-1], np.sqrt(self.k))

    def to_json(self):
        return {"type": "homothety", "k": float(self.k)}


@dataclass(frozen=True)
class SphereInversion:
    center: tuple
    radius: float = 1.0

    def __post_init__(self):
        if not self.radius > 0:
            raise KnotError("inversion radius must be positive")

    def _offset(self, p):
        d = p - np.asarray(self.center, dtype=float)
        r2 = np.sum(d * d, axis=-1)
        if np.any(r2 <= (POLE_TOL * self.radius) ** 2):
            raise PoleError("image not compact: point at the inversion centre")
        return d, r2

    def apply(self, p):
        d, r2 = self._offset(p)
        return np.asarray(self.center) + self.radius ** 2 * d / r2[..., None]

    def jacobian(self, p):
        d, r2 = self._offset(p)
        n = d / np.sqrt(r2)[..., None]
        refl = np.eye(3) - 2 * n[..., :, None] * n[..., None, :]
        return (self.radius ** 2 / r2)[..., None, None] * refl

    def factor(self, p):
        _, r2 = self._offset(p)
        return self.radius / np.sqrt(r2)

    def to_json(self):
        return {"type": "inversion", "center": list(map(float, self.center)),
                "radius": float(self.radius)}


@dataclass(frozen=True)
class MoebiusTransform:
    word: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "word", tuple(self.word))

    def then(self, other):
        """The composition ``other o self``."""
        return MoebiusTransform(self.word + tuple(other.word))

    def apply(self, p):
        p = np.asarray(p, dtype=float)
        for g in self.word:
            p = g.apply(p)
        return p

    __call__ = apply

    def conformal_factor(self, p):
        p = np.asarray(p, dtype=float)
        out = np.ones(p.shape[:-1])
        for g in self.word:
            out = out * g.factor(p)
            p = g.apply(p)
        return out

    def jacobian(self, p):
        p = np.asarray(p, dtype=float)
        jac = np.broadcast_to(np.eye(3), p.shape[:-1] + (3, 3))
        for g in self.word:
            jac = g.jacobian(p) @ jac
            p = g.apply(p)
        return jac

    def to_json(self):
        return {"word": [g.to_json() for g in self.word]}

    @classmethod
    def from_json(cls, data):
        word = []
        for item in data["word"]:
            kind = item["type"]
            if kind == "translation":
                word.append(Translation(tuple(item["v"])))
            elif kind == "rotation":
                word.append(Rotation(item["matrix"]))
            elif kind == "homothety":
                word.append(Homothety(item["k"]))
            elif kind == "inversion":
                word.append(SphereInversion(tuple(item["center"]), item.get("radius", 1.0)))
            else:
                raise KnotError("unknown primitive type %r" % kind)
        return cls(tuple(word))


IDENTITY = MoebiusTransform(())


def apply(T, p):
    return T.apply(p)


def conformal_factor(T, p):
    return T.conformal_factor(p)


def transform_curve(T, curve):
    """T o f refit on the grid of ``curve`` (same parameter, exact grid values)."""
    return from_samples(T.apply(curve.grid_derivative(0)), check=curve.check)


@dataclass(frozen=True, eq=False)
class PushforwardField:
    base: SampledKnot
    vectors: np.ndarray


def pushforward(T, f, u):
    """T_* u = DT(f(t)) u(t), based at the sampled knot T o f."""
    vec = u.vectors if hasattr(u, "vectors") else np.asarray(u)
    jac = T.jacobian(f.points)
    base = evaluate(transform_curve(T, f.curve))
    return PushforwardField(base, np.einsum("nij,nj->ni", jac, vec))


def verify_distance_identity(T, p, q):
    """| |T(p)-T(q)| - |T'(p)||T'(q)||p-q| |."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    lhs = np.linalg.norm(T.apply(p) - T.apply(q), axis=-1)
    rhs = T.conformal_factor(p) * T.conformal_factor(q) * np.linalg.norm(p - q, axis=-1)
    return np.abs(lhs - rhs)


def verify_speed_identity(T, f):
    """Pointwise | |(T o f)'| - |T'(f)|^2 |f'| | with (T o f)' differentiated spectrally."""
    image = transform_curve(T, f.curve)
    lhs = np.linalg.norm(image.grid_derivative(1), axis=1)
    rhs = T.conformal_factor(f.points) ** 2 * f.speed
    return np.abs(lhs - rhs)


def random_compact_preserving(seed, f, max_length=4):
    """Seeded random word of at most ``max_length`` primitives.

    Inversion centres stay at least two diameters from the current image,
    with radius comparable to that distance so the image keeps its size;
    homothety factors lie in [1/2, 2].
    """
    rng = np.random.default_rng(seed)
    pts = f.points if isinstance(f, SampledKnot) else np.asarray(f)
    length = int(rng.integers(1, max_length + 1))
    kinds = list(rng.choice(["translation", "rotation", "homothety", "inversion"], size=length))
    if "inversion" not in kinds:
        kinds[int(rng.integers(length))] = "inversion"
    word = []
    cur = pts
    for kind in kinds:
        diam = np.max(np.linalg.norm(cur[:, None] - cur[None], axis=-1))
        centroid = cur.mean(axis=0)
        if kind == "translation":
            g = Translation(tuple(rng.normal(scale=diam / 2, size=3)))
        elif kind == "rotation":
            q = _Rot.random(random_state=rng).as_matrix()
            if rng.random() < 0.25:
                q = q @ np.diag([1.0, 1.0, -1.0])
            g = Rotation(q)
        elif kind == "homothety":
            g = Homothety(float(np.exp(rng.uniform(np.log(0.5), np.log(2.0)))))
        else:
            direction = rng.normal(size=3)
            direction /= np.linalg.norm(direction)
            dist = diam * rng.uniform(3.0, 4.5)
            center = centroid + dist * direction
            gap = np.min(np.linalg.norm(cur - center, axis=1))
            g = SphereInversion(tuple(center), float(gap * rng.uniform(0.8, 1.25)))
        word.append(g)
        cur = g.apply(cur)
    return MoebiusTransform(tuple(word))
