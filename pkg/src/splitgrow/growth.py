"""Growth engines for vertex-splitting trees.

Two law-equivalent engines are provided:

* ``OrderedTree`` maintains the full planar tree (cyclically ordered
  adjacency per vertex) and performs the structural split: a chosen vertex
  ``v`` of degree ``i`` is replaced by an adjacent pair ``v', v''`` of
  degrees ``k`` and ``i+2-k``, the incident edges being divided into two
  contiguous arcs of the cyclic order.

* ``UrnState`` tracks only the degree census ``n_k``: a split moves one
  ball out of urn ``i`` and adds one ball each to urns ``k`` and ``i+2-k``.

Driving both engines with the same stream of (degree, child-degree)
decisions produces identical censuses, which is the invariant the
correctness tests pin down; degree statistics do not depend on which
contiguous arc is chosen.

Each step costs O(log n) sampling (Fenwick prefix sums) plus O(deg) tree
surgery.  States are confined to one worker at a time; the weight model is
shared read-only.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .errors import DegeneracyError, InvalidParameterError
from .weights import WeightModel

__all__ = [
    "FenwickSampler",
    "SplitEvent",
    "CensusSnapshot",
    "OrderedTree",
    "UrnState",
    "sample_vertex",
    "sample_split_sizes",
    "apply_split_tree",
    "apply_split_urn",
    "run",
    "write_census_csv",
    "write_census_binary",
    "read_census_binary",
]


class FenwickSampler:
    """Dynamic discrete distribution over indices 0..n-1.

    ``set`` is O(log n); ``sample`` inverts the cumulative sum in O(log n).
    The running total accumulates float rounding of order 1e-16 per update;
    ``recomputed_total`` gives the exact sum for consistency checks.
    """

    def __init__(self, capacity: int = 16):
        n = 1
        while n < capacity:
            n <<= 1
        self._n = n
        self._tree = [0.0] * (n + 1)
        self._w = [0.0] * n
        self._total = 0.0

    def __len__(self):
        return self._n

    @property
    def total(self) -> float:
        return self._total

    def recomputed_total(self) -> float:
        return sum(self._w)

    def weight(self, i: int) -> float:
        return self._w[i]

    def set(self, i: int, w: float) -> None:
        if w < 0:
            raise InvalidParameterError(f"negative weight {w!r}")
        if i >= self._n:
            self._grow(i + 1)
        d = w - self._w[i]
        if d == 0.0:
            return
        self._w[i] = w
        self._total += d
        j = i + 1
        tree = self._tree
        n = self._n
        while j <= n:
            tree[j] += d
            j += j & (-j)

    def _grow(self, need: int) -> None:
        n = self._n
        while n < need:
            n <<= 1
        w = self._w + [0.0] * (n - self._n)
        tree = [0.0] * (n + 1)
        for i, wi in enumerate(w):
            if wi:
                j = i + 1
                while j <= n:
                    tree[j] += wi
                    j += j & (-j)
        self._n, self._w, self._tree = n, w, tree

    def sample(self, rng) -> int:
        """Index drawn with probability weight/total."""
        t = self._total
        if t <= 0.0:
            raise DegeneracyError("total sampling weight is not positive")
        x = rng.random() * t
        pos = 0
        bit = self._n
        tree = self._tree
        while bit:
            nxt = pos + bit
            if nxt <= self._n and tree[nxt] <= x:
                x -= tree[nxt]
                pos = nxt
            bit >>= 1
        pos = min(pos, self._n - 1)
        # float rounding can park x on a range boundary; never return a
        # zero-weight slot
        while pos > 0 and self._w[pos] == 0.0:
            pos -= 1
        return pos


@dataclass(frozen=True)
class SplitEvent:
    """One growth step: a degree-``parent_degree`` vertex split into children
    of ``child_degrees``; ``arrangement`` is the cyclic starting position of
    the first child's arc (-1 for census-only engines)."""

    t: int
    parent_degree: int
    child_degrees: tuple[int, int]
    arrangement: int = -1


@dataclass
class CensusSnapshot:
    t: int
    counts: np.ndarray            # counts[d-1] = number of degree-d vertices
    total_weight: float

    def identity_deviations(self) -> tuple[int, int]:
        """(sum n - t, sum k*n - (2t-2)); both are exactly zero for any
        reachable state."""
        n = self.counts
        ks = np.arange(1, len(n) + 1)
        return int(n.sum()) - self.t, int((ks * n).sum()) - (2 * self.t - 2)


class _CensusMixin:
    """Census bookkeeping shared by both engines."""

    model: WeightModel
    t: int
    total_weight: float

    def _census_init(self, counts: Iterable[int]) -> None:
        self.counts: list[int] = list(counts)
        self.t = int(sum(self.counts))
        self.total_weight = float(sum(n * self.model.w(d + 1)
                                      for d, n in enumerate(self.counts) if n))

    def census(self) -> CensusSnapshot:
        return CensusSnapshot(self.t, np.array(self.counts, dtype=np.int64),
                              self.total_weight)

    def census_deviations(self) -> tuple[int, int, float]:
        """Integer census identities plus the relative drift of the running
        total weight against a fresh recomputation."""
        n = self.counts
        sum_n = sum(n) - self.t
        sum_kn = sum((d + 1) * c for d, c in enumerate(n)) - (2 * self.t - 2)
        exact = sum(c * self.model.w(d + 1) for d, c in enumerate(n) if c)
        drift = abs(self.total_weight - exact) / max(abs(exact), 1.0)
        return sum_n, sum_kn, drift

    def expected_weight(self) -> float:
        """Closed form ``w_2 * t - 2a``, valid for linear splitting weights."""
        return self.model.w2 * self.t - 2.0 * self.model.splitting.a


class OrderedTree(_CensusMixin):
    """Planar tree engine with tombstoned vertex slots and id reuse."""

    def __init__(self, model: WeightModel, adjacency: list[Optional[list[int]]]):
        self.model = model
        self._adj = adjacency
        self._free: list[int] = [v for v, nb in enumerate(adjacency) if nb is None]
        counts: list[int] = []
        for nb in adjacency:
            if nb is None:
                continue
            d = len(nb)
            while len(counts) < d:
                counts.append(0)
            counts[d - 1] += 1
        self._census_init(counts)
        cap = max(len(adjacency), 16)
        self._sampler = FenwickSampler(cap)
        self._members: list[list[int]] = [[] for _ in counts]
        self._pos: dict[int, int] = {}
        for v, nb in enumerate(adjacency):
            if nb is None:
                continue
            self._enter(v, len(nb))
        if model.d_max is not None:
            top = max((len(nb) for nb in adjacency if nb is not None), default=0)
            if top > model.d_max:
                raise InvalidParameterError(
                    f"initial tree has degree {top} > d_max = {model.d_max}")

    # -- construction ------------------------------------------------------

    @classmethod
    def single_edge(cls, model: WeightModel) -> "OrderedTree":
        return cls(model, [[1], [0]])

    @classmethod
    def from_edges(cls, model: WeightModel, edges: Iterable[tuple[int, int]]) -> "OrderedTree":
        """Build from an edge list; cyclic order is edge-insertion order."""
        adj: dict[int, list[int]] = {}
        for u, v in edges:
            adj.setdefault(u, []).append(v)
            adj.setdefault(v, []).append(u)
        n = max(adj) + 1
        return cls(model, [adj.get(v) for v in range(n)])

    # -- bookkeeping ---------------------------------------------------------

    def _enter(self, v: int, d: int) -> None:
        while len(self._members) < d:
            self._members.append([])
        while len(self.counts) < d:
            self.counts.append(0)
        bucket = self._members[d - 1]
        self._pos[v] = len(bucket)
        bucket.append(v)
        self._sampler.set(v, self.model.w(d))

    def _leave(self, v: int, d: int) -> None:
        bucket = self._members[d - 1]
        p = self._pos.pop(v)
        last = bucket.pop()
        if last != v:
            bucket[p] = last
            self._pos[last] = p
        self._sampler.set(v, 0.0)

    def _new_id(self) -> int:
        if self._free:
            return self._free.pop()
        self._adj.append(None)
        return len(self._adj) - 1

    # -- queries ---------------------------------------------------------------

    def degree(self, v: int) -> int:
        nb = self._adj[v]
        if nb is None:
            raise InvalidParameterError(f"vertex {v} is not live")
        return len(nb)

    def neighbours(self, v: int) -> list[int]:
        return list(self._adj[v])

    def vertices(self):
        return (v for v, nb in enumerate(self._adj) if nb is not None)

    def is_tree(self) -> bool:
        """Connectivity and acyclicity check (on demand; O(t))."""
        live = [v for v, nb in enumerate(self._adj) if nb is not None]
        if not live:
            return False
        seen = {live[0]}
        stack = [live[0]]
        nedges = 0
        while stack:
            v = stack.pop()
            nedges += len(self._adj[v])
            for u in self._adj[v]:
                if u not in seen:
                    seen.add(u)
                    stack.append(u)
        return len(seen) == len(live) and nedges == 2 * (len(live) - 1)

    # -- dynamics ------------------------------------------------------------

    def sample_vertex(self, rng) -> int:
        """Vertex drawn with probability w_deg(v) / total weight."""
        return self._sampler.sample(rng)

    def split_vertex(self, v: int, k: int, rng) -> SplitEvent:
        """Replace ``v`` (degree ``i``) by adjacent ``v'``, ``v''`` of degrees
        ``k`` and ``i+2-k``; the first child takes a contiguous arc of
        ``k-1`` edges starting at a uniformly chosen cyclic position."""
        nb = self._adj[v]
        i = len(nb)
        if not 1 <= k <= i + 1:
            raise InvalidParameterError(f"child degree {k} out of range for degree {i}")
        ell = i + 2 - k
        if self.model.d_max is not None:
            assert max(k, ell) <= self.model.d_max, "split exceeds degree bound"
        p = int(rng.integers(i)) if i > 1 else 0
        arc1 = [nb[(p + m) % i] for m in range(k - 1)]
        arc2 = [nb[(p + k - 1 + m) % i] for m in range(i - k + 1)]

        self._leave(v, i)
        self._adj[v] = None
        self._free.append(v)
        v1 = self._new_id()
        v2 = self._new_id()
        self._adj[v1] = arc1 + [v2]
        self._adj[v2] = arc2 + [v1]
        for u in arc1:
            a = self._adj[u]
            a[a.index(v)] = v1
        for u in arc2:
            a = self._adj[u]
            a[a.index(v)] = v2
        self._enter(v1, k)
        self._enter(v2, ell)

        self.counts[i - 1] -= 1
        self.counts[k - 1] += 1
        self.counts[ell - 1] += 1
        self.t += 1
        w = self.model.w
        self.total_weight += w(k) + w(ell) - w(i)
        return SplitEvent(self.t, i, (k, ell), p)

    def step(self, rng) -> SplitEvent:
        v = self.sample_vertex(rng)
        k = self.model.sample_split(len(self._adj[v]), rng)
        return self.split_vertex(v, k, rng)

    def apply_to_degree(self, i: int, k: int, rng) -> SplitEvent:
        """Split a uniformly chosen vertex of degree ``i`` (replay interface;
        the census evolution does not depend on which one)."""
        bucket = self._members[i - 1]
        if not bucket:
            raise InvalidParameterError(f"no live vertex of degree {i}")
        v = bucket[int(rng.integers(len(bucket)))]
        return self.split_vertex(v, k, rng)


class UrnState(_CensusMixin):
    """Census-only engine: one urn per degree, ball weight ``w_d`` each."""

    def __init__(self, model: WeightModel, counts: Iterable[int]):
        self.model = model
        self._census_init(counts)
        if self.t < 1:
            raise InvalidParameterError("initial census is empty")
        if model.d_max is not None and len(self.counts) > model.d_max:
            if any(self.counts[model.d_max:]):
                raise InvalidParameterError("initial census exceeds d_max")
        self._sampler = FenwickSampler(max(len(self.counts), 16))
        for d0, n in enumerate(self.counts):
            if n:
                self._sampler.set(d0, n * model.w(d0 + 1))

    @classmethod
    def single_edge(cls, model: WeightModel) -> "UrnState":
        return cls(model, [2])

    def _bump(self, d: int, delta: int) -> None:
        while len(self.counts) < d:
            self.counts.append(0)
        self.counts[d - 1] += delta
        self._sampler.set(d - 1, self.counts[d - 1] * self.model.w(d))

    def sample_degree(self, rng) -> int:
        """Degree class drawn with probability w_d * n_d / total weight."""
        return self._sampler.sample(rng) + 1

    def apply_split(self, i: int, k: int) -> SplitEvent:
        if self.counts[i - 1] < 1:
            raise InvalidParameterError(f"no ball in urn {i}")
        ell = i + 2 - k
        self._bump(i, -1)
        self._bump(k, +1)
        self._bump(ell, +1)
        self.t += 1
        w = self.model.w
        self.total_weight += w(k) + w(ell) - w(i)
        return SplitEvent(self.t, i, (k, ell))

    def step(self, rng) -> SplitEvent:
        i = self.sample_degree(rng)
        k = self.model.sample_split(i, rng)
        return self.apply_split(i, k)


# -- operation wrappers -------------------------------------------------------


def sample_vertex(state, rng):
    """Tree engine: vertex id; urn engine: degree class."""
    if isinstance(state, OrderedTree):
        return state.sample_vertex(rng)
    return state.sample_degree(rng)


def sample_split_sizes(i: int, model: WeightModel, rng) -> int:
    """First child degree ``k``; the ordered pair ``(k, i+2-k)`` is drawn with
    probability ``(i/2) * w[k, i+2-k] / w_i``."""
    return model.sample_split(i, rng)


def apply_split_tree(tree: OrderedTree, v: int, k: int, rng) -> SplitEvent:
    return tree.split_vertex(v, k, rng)


def apply_split_urn(urn: UrnState, i: int, k: int) -> SplitEvent:
    return urn.apply_split(i, k)


def run(state, t_final: int, rng, thin: Optional[int] = None) -> list[CensusSnapshot]:
    """Grow until ``t_final`` vertices, returning census snapshots.

    ``thin=m`` records every m-th step (plus initial and final states);
    ``thin=None`` records only the final state.  Deterministic given the
    state, the model and the generator state.
    """
    if t_final < state.t:
        raise InvalidParameterError(f"t_final = {t_final} < current t = {state.t}")
    snaps: list[CensusSnapshot] = []
    if thin:
        snaps.append(state.census())
    steps = 0
    while state.t < t_final:
        state.step(rng)
        steps += 1
        if thin and steps % thin == 0 and state.t < t_final:
            snaps.append(state.census())
    snaps.append(state.census())
    return snaps


# -- trajectory serialisation ---------------------------------------------------


def write_census_csv(fh, snapshots: list[CensusSnapshot],
                     replica: Optional[int] = None) -> None:
    """Rows ``t,k,n`` (prefixed by a replica column when given); zero counts
    are omitted."""
    head = "replica,t,k,n" if replica is not None else "t,k,n"
    fh.write(head + "\n")
    prefix = f"{replica}," if replica is not None else ""
    for snap in snapshots:
        for d0, n in enumerate(snap.counts):
            if n:
                fh.write(f"{prefix}{snap.t},{d0 + 1},{n}\n")


_REC_HEAD = struct.Struct("<QI")


def write_census_binary(path, snapshots: list[CensusSnapshot]) -> None:
    """Compact little-endian dump: per snapshot ``u64 t, u32 K`` followed by
    ``K`` u64 counts for degrees 1..K."""
    with open(path, "wb") as fh:
        for snap in snapshots:
            counts = np.asarray(snap.counts, dtype="<u8")
            fh.write(_REC_HEAD.pack(snap.t, len(counts)))
            fh.write(counts.tobytes())


def read_census_binary(path) -> list[CensusSnapshot]:
    out: list[CensusSnapshot] = []
    with open(path, "rb") as fh:
        while True:
            head = fh.read(_REC_HEAD.size)
            if not head:
                break
            t, k = _REC_HEAD.unpack(head)
            counts = np.frombuffer(fh.read(8 * k), dtype="<u8").astype(np.int64)
            out.append(CensusSnapshot(t, counts, float("nan")))
    return out
