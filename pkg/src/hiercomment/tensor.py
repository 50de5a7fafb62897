"""Reverse-mode automatic differentiation over float64 numpy arrays.

A Tensor wraps an ndarray; every op records its parents and a closure
that pushes the output gradient back into them.  backward() walks the
recorded graph in reverse topological order, accumulating gradients with
+=, then frees the graph.  Gradients are exact vector-Jacobian products;
grad_check verifies any scalar-valued builder against central finite
differences.

The GRU step is a single fused node with a hand-written backward pass:
sequence models build one tape node per timestep per layer instead of a
dozen, which keeps desk-scale training fast without leaving numpy.
"""

from __future__ import annotations

import json
import struct
from contextlib import contextmanager

import numpy as np

_GRAD_ENABLED = True

CHECKPOINT_MAGIC = b"HCMCKPT1"
CHECKPOINT_SCHEMA_VERSION = 1


@contextmanager
def no_grad():
    """Disable tape recording inside the context (forward values only)."""
    global _GRAD_ENABLED
    prev = _GRAD_ENABLED
    _GRAD_ENABLED = False
    try:
        yield
    finally:
        _GRAD_ENABLED = prev


class ShapeError(ValueError):
    pass


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_vjp")

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = None
        self.requires_grad = bool(requires_grad)
        self._parents = ()
        self._vjp = None

    @property
    def shape(self):
        return self.data.shape

    def __repr__(self):
        return "Tensor(shape=%r, requires_grad=%r)" % (self.shape, self.requires_grad)

    def item(self) -> float:
        return float(self.data)

    def backward(self) -> None:
        """Backpropagate from a scalar output; frees the graph afterward."""
        if self.data.size != 1:
            raise ShapeError("backward: output must be scalar, got shape %r"
                             % (self.shape,))
        topo = []
        seen = set()
        stack = [(self, False)]
        while stack:
            node, processed = stack.pop()
            if processed:
                topo.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if id(p) not in seen:
                    stack.append((p, False))
        self.grad = np.ones_like(self.data)
        for node in reversed(topo):
            if node._vjp is not None and node.grad is not None:
                node._vjp(node.grad)
        for node in topo:
            if node._vjp is not None:
                node._parents = ()
                node._vjp = None
                if node is not self:
                    node.grad = None

    # operator sugar
    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __mul__(self, other):
        return mul(self, other)

    def __matmul__(self, other):
        return matmul(self, other)


def const(data) -> Tensor:
    return Tensor(data, requires_grad=False)


def parameter(data) -> Tensor:
    return Tensor(np.array(data, dtype=np.float64), requires_grad=True)


def _as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else const(x)


def _make(data, parents, vjp) -> Tensor:
    out = Tensor(data)
    if _GRAD_ENABLED and any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = tuple(parents)
        out._vjp = vjp
    return out


def _accum(t: Tensor, g: np.ndarray) -> None:
    if not (t.requires_grad or t._vjp is not None):
        return
    if t.grad is None:
        t.grad = np.zeros_like(t.data)
    t.grad += g


def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    """Reduce a broadcast gradient back to the operand's shape."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, dim in enumerate(shape):
        if dim == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad.reshape(shape)


def add(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    data = a.data + b.data

    def vjp(g):
        _accum(a, _unbroadcast(g, a.data.shape))
        _accum(b, _unbroadcast(g, b.data.shape))
    return _make(data, (a, b), vjp)


def sub(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    data = a.data - b.data

    def vjp(g):
        _accum(a, _unbroadcast(g, a.data.shape))
        _accum(b, _unbroadcast(-g, b.data.shape))
    return _make(data, (a, b), vjp)


def mul(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    data = a.data * b.data

    def vjp(g):
        _accum(a, _unbroadcast(g * b.data, a.data.shape))
        _accum(b, _unbroadcast(g * a.data, b.data.shape))
    return _make(data, (a, b), vjp)


def matmul(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    if a.data.ndim == 0 or b.data.ndim == 0:
        raise ShapeError("matmul: operands must be at least 1-D")
    try:
        data = a.data @ b.data
    except ValueError:
        raise ShapeError("matmul: incompatible shapes %r x %r"
                         % (a.data.shape, b.data.shape))
    an, bn = a.data.ndim, b.data.ndim

    def vjp(g):
        if an == 2 and bn == 2:
            _accum(a, g @ b.data.T)
            _accum(b, a.data.T @ g)
        elif an == 1 and bn == 2:
            _accum(a, b.data @ g)
            _accum(b, np.outer(a.data, g))
        elif an == 2 and bn == 1:
            _accum(a, np.outer(g, b.data))
            _accum(b, a.data.T @ g)
        elif an == 1 and bn == 1:
            _accum(a, g * b.data)
            _accum(b, g * a.data)
        else:
            raise ShapeError("matmul backward: unsupported ranks %d, %d" % (an, bn))
    return _make(data, (a, b), vjp)


def sigmoid(x: Tensor) -> Tensor:
    x = _as_tensor(x)
    out_data = 1.0 / (1.0 + np.exp(-x.data))

    def vjp(g):
        _accum(x, g * out_data * (1.0 - out_data))
    return _make(out_data, (x,), vjp)


def tanh(x: Tensor) -> Tensor:
    x = _as_tensor(x)
    out_data = np.tanh(x.data)

    def vjp(g):
        _accum(x, g * (1.0 - out_data * out_data))
    return _make(out_data, (x,), vjp)


def relu(x: Tensor) -> Tensor:
    x = _as_tensor(x)
    mask = x.data > 0

    def vjp(g):
        _accum(x, g * mask)
    return _make(x.data * mask, (x,), vjp)


def log(x: Tensor) -> Tensor:
    x = _as_tensor(x)

    def vjp(g):
        _accum(x, g / x.data)
    return _make(np.log(x.data), (x,), vjp)


def clamp_min(x: Tensor, floor: float) -> Tensor:
    x = _as_tensor(x)
    mask = x.data > floor

    def vjp(g):
        _accum(x, g * mask)
    return _make(np.maximum(x.data, floor), (x,), vjp)


def softmax(x: Tensor, axis: int = -1) -> Tensor:
    x = _as_tensor(x)
    shifted = x.data - x.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    out_data = e / e.sum(axis=axis, keepdims=True)

    def vjp(g):
        dot = (g * out_data).sum(axis=axis, keepdims=True)
        _accum(x, out_data * (g - dot))
    return _make(out_data, (x,), vjp)


def concat(tensors, axis: int = 0) -> Tensor:
    tensors = [_as_tensor(t) for t in tensors]
    if not tensors:
        raise ShapeError("concat: need at least one tensor")
    data = np.concatenate([t.data for t in tensors], axis=axis)
    sizes = [t.data.shape[axis] for t in tensors]
    offsets = np.cumsum([0] + sizes)

    def vjp(g):
        for t, lo, hi in zip(tensors, offsets[:-1], offsets[1:]):
            sl = [slice(None)] * g.ndim
            sl[axis] = slice(lo, hi)
            _accum(t, g[tuple(sl)])
    return _make(data, tensors, vjp)


def stack_rows(vectors) -> Tensor:
    """Stack 1-D tensors of equal length into a (T, D) matrix."""
    vectors = [_as_tensor(v) for v in vectors]
    if not vectors:
        raise ShapeError("stack_rows: need at least one vector")
    data = np.stack([v.data for v in vectors], axis=0)

    def vjp(g):
        for i, v in enumerate(vectors):
            _accum(v, g[i])
    return _make(data, vectors, vjp)


def row(x: Tensor, i: int) -> Tensor:
    x = _as_tensor(x)
    data = x.data[i].copy()

    def vjp(g):
        full = np.zeros_like(x.data)
        full[i] = g
        _accum(x, full)
    return _make(data, (x,), vjp)


def vec_slice(x: Tensor, start: int, stop: int) -> Tensor:
    """Contiguous slice [start:stop] of a 1-D tensor."""
    x = _as_tensor(x)
    if x.data.ndim != 1:
        raise ShapeError("vec_slice: expected 1-D tensor, got %r" % (x.shape,))
    if not 0 <= start <= stop <= x.data.shape[0]:
        raise ShapeError("vec_slice: bad range [%d:%d] for length %d"
                         % (start, stop, x.data.shape[0]))
    data = x.data[start:stop].copy()

    def vjp(g):
        full = np.zeros_like(x.data)
        full[start:stop] = g
        _accum(x, full)
    return _make(data, (x,), vjp)


def gather_scalar(vec: Tensor, idx: int) -> Tensor:
    """Pick one element of a 1-D tensor as a 0-d scalar."""
    vec = _as_tensor(vec)
    if vec.data.ndim != 1:
        raise ShapeError("gather_scalar: expected 1-D tensor, got %r" % (vec.shape,))
    data = np.asarray(vec.data[idx])

    def vjp(g):
        full = np.zeros_like(vec.data)
        full[idx] = g
        _accum(vec, full)
    return _make(data, (vec,), vjp)


def embedding_gather(table: Tensor, ids) -> Tensor:
    """Rows of an (V, D) table for an int id sequence -> (T, D)."""
    table = _as_tensor(table)
    ids = np.asarray(ids, dtype=np.int64)
    data = table.data[ids]

    def vjp(g):
        full = np.zeros_like(table.data)
        np.add.at(full, ids, g)
        _accum(table, full)
    return _make(data, (table,), vjp)


def scatter_sum(values: Tensor, index, size: int) -> Tensor:
    """out[j] = sum of values[i] over positions i with index[i] == j."""
    values = _as_tensor(values)
    index = np.asarray(index, dtype=np.int64)
    data = np.zeros(size, dtype=np.float64)
    np.add.at(data, index, values.data)

    def vjp(g):
        _accum(values, g[index])
    return _make(data, (values,), vjp)


def dropout(x: Tensor, p: float, rng: np.random.Generator, train: bool) -> Tensor:
    """Inverted dropout: identity when train is False or p == 0."""
    if not 0.0 <= p < 1.0:
        raise ValueError("dropout rate must be in [0, 1), got %r" % p)
    x = _as_tensor(x)
    if not train or p == 0.0:
        return x
    mask = (rng.random(x.data.shape) >= p) / (1.0 - p)

    def vjp(g):
        _accum(x, g * mask)
    return _make(x.data * mask, (x,), vjp)


def tsum(x: Tensor, axis=None) -> Tensor:
    x = _as_tensor(x)
    data = x.data.sum(axis=axis)

    def vjp(g):
        if axis is None:
            _accum(x, np.broadcast_to(g, x.data.shape).copy())
        else:
            _accum(x, np.broadcast_to(np.expand_dims(g, axis), x.data.shape).copy())
    return _make(data, (x,), vjp)


def tmean(x: Tensor, axis=None) -> Tensor:
    x = _as_tensor(x)
    n = x.data.size if axis is None else x.data.shape[axis]
    return mul(tsum(x, axis=axis), 1.0 / n)


def gru_step(gi: Tensor, h_prev: Tensor, wh: Tensor, bh: Tensor) -> Tensor:
    """One GRU timestep from a precomputed input projection.

    gi is x @ wi + bi laid out as [z | r | n] blocks of the hidden size.
    Gates: z = sigm(gi_z + gh_z), r = sigm(gi_r + gh_r),
    n = tanh(gi_n + r * gh_n) with gh = h_prev @ wh + bh, and
    h_next = z * h_prev + (1 - z) * n, so zero weights give
    h_next = 0.5 * h_prev.

    Fused into a single tape node with a hand-written backward pass.
    """
    gi, h_prev, wh, bh = map(_as_tensor, (gi, h_prev, wh, bh))
    hsize = h_prev.data.shape[-1]
    if gi.data.shape[-1] != 3 * hsize:
        raise ShapeError("gru_step: gi has %r, expected last dim %d"
                         % (gi.data.shape, 3 * hsize))
    gh = h_prev.data @ wh.data + bh.data
    giz, gir, gin = gi.data[:hsize], gi.data[hsize:2 * hsize], gi.data[2 * hsize:]
    ghz, ghr, ghn = gh[:hsize], gh[hsize:2 * hsize], gh[2 * hsize:]
    z = 1.0 / (1.0 + np.exp(-(giz + ghz)))
    r = 1.0 / (1.0 + np.exp(-(gir + ghr)))
    n = np.tanh(gin + r * ghn)
    out_data = z * h_prev.data + (1.0 - z) * n

    def vjp(g):
        dz = g * (h_prev.data - n)
        dn = g * (1.0 - z)
        dan = dn * (1.0 - n * n)
        dgin = dan
        dr = dan * ghn
        dghn = dan * r
        daz = dz * z * (1.0 - z)
        dar = dr * r * (1.0 - r)
        dgh = np.concatenate([daz, dar, dghn])
        _accum(gi, np.concatenate([daz, dar, dgin]))
        _accum(h_prev, dgh @ wh.data.T + g * z)
        _accum(wh, np.outer(h_prev.data, dgh))
        _accum(bh, dgh)
    return _make(out_data, (gi, h_prev, wh, bh), vjp)


def gru_cell(x: Tensor, h_prev: Tensor, weights: dict) -> Tensor:
    """Standard GRU cell: weights maps 'wi','bi','wh','bh' to Tensors."""
    gi = add(matmul(x, weights["wi"]), weights["bi"])
    return gru_step(gi, h_prev, weights["wh"], weights["bh"])


def gru_run(x_seq: Tensor, weights: dict, reverse: bool = False) -> list:
    """Run a GRU over a (T, D) input; returns the list of hidden states
    in sequence order (index t holds the state after reading token t)."""
    T = x_seq.data.shape[0]
    hsize = weights["wh"].data.shape[0]
    gi_all = add(matmul(x_seq, weights["wi"]), weights["bi"])
    h = const(np.zeros(hsize))
    states: list = [None] * T
    steps = range(T - 1, -1, -1) if reverse else range(T)
    for t in steps:
        h = gru_step(row(gi_all, t), h, weights["wh"], weights["bh"])
        states[t] = h
    return states


def bigru_encode(x_seq: Tensor, layer_weights: list, dropout_p: float = 0.0,
                 rng: np.random.Generator | None = None, train: bool = False):
    """Multi-layer bidirectional GRU over a (T, D) input.

    layer_weights is a list of {'f': weights, 'b': weights} dicts.
    Returns (per_step_states (T, 2H), final_states) where final_states
    is one (2H,) tensor per layer, forward final then backward final.
    """
    if x_seq.data.ndim != 2 or x_seq.data.shape[0] == 0:
        raise ShapeError("bigru_encode: need a nonempty (T, D) input, got %r"
                         % (x_seq.shape,))
    cur = x_seq
    finals = []
    for li, lw in enumerate(layer_weights):
        if li > 0 and train and dropout_p > 0.0:
            cur = dropout(cur, dropout_p, rng, train)
        fwd = gru_run(cur, lw["f"], reverse=False)
        bwd = gru_run(cur, lw["b"], reverse=True)
        rows = [concat([f, b]) for f, b in zip(fwd, bwd)]
        cur = stack_rows(rows)
        finals.append(concat([fwd[-1], bwd[0]]))
    return cur, finals


class AdamState:
    """Bias-corrected Adam over a named parameter dict."""

    def __init__(self, params: dict, lr: float = 1e-3, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = {k: np.zeros_like(p.data) for k, p in params.items()}
        self.v = {k: np.zeros_like(p.data) for k, p in params.items()}

    def step(self, params: dict) -> None:
        self.t += 1
        for name in params:
            p = params[name]
            g = p.grad
            if g is None:
                continue
            if not np.all(np.isfinite(g)):
                raise RuntimeError("diverged: non-finite gradient in %r" % name)
            m = self.m[name]
            v = self.v[name]
            m *= self.beta1
            m += (1 - self.beta1) * g
            v *= self.beta2
            v += (1 - self.beta2) * (g * g)
            mhat = m / (1 - self.beta1 ** self.t)
            vhat = v / (1 - self.beta2 ** self.t)
            p.data -= self.lr * mhat / (np.sqrt(vhat) + self.eps)

    def zero_grad(self, params: dict) -> None:
        for p in params.values():
            p.grad = None


def save_checkpoint(path: str, arrays: dict, meta: dict) -> None:
    """Write named f64 arrays: magic, JSON header, then raw payloads."""
    names = list(arrays)
    header = {
        "schema_version": CHECKPOINT_SCHEMA_VERSION,
        "dtype": "<f8",
        "tensors": [{"name": n, "shape": list(np.asarray(arrays[n]).shape)}
                    for n in names],
        "meta": meta,
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(struct.pack("<Q", len(blob)))
        fh.write(blob)
        for n in names:
            arr = np.ascontiguousarray(np.asarray(arrays[n], dtype="<f8"))
            fh.write(arr.tobytes())


def load_checkpoint(path: str):
    """Read a checkpoint; returns (arrays dict, meta dict)."""
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != CHECKPOINT_MAGIC:
            raise ValueError("not a checkpoint file (bad magic %r)" % magic)
        (hlen,) = struct.unpack("<Q", fh.read(8))
        header = json.loads(fh.read(hlen).decode("utf-8"))
        if header.get("schema_version") != CHECKPOINT_SCHEMA_VERSION:
            raise ValueError("unsupported checkpoint schema_version %r"
                             % header.get("schema_version"))
        arrays = {}
        for spec in header["tensors"]:
            shape = tuple(spec["shape"])
            count = int(np.prod(shape)) if shape else 1
            buf = fh.read(count * 8)
            if len(buf) != count * 8:
                raise ValueError("truncated checkpoint payload for %r" % spec["name"])
            arrays[spec["name"]] = np.frombuffer(buf, dtype="<f8").reshape(shape).copy()
    return arrays, header["meta"]


def grad_check(build_loss, params: dict, eps: float = 1e-5,
               max_coords: int | None = None, seed: int = 0) -> float:
    """Max relative error between backward() and central differences.

    build_loss() must rebuild the graph and return a scalar Tensor,
    deterministically.  When max_coords is set, that many coordinates
    per tensor are sampled (seeded) instead of sweeping all of them.
    """
    loss = build_loss()
    loss.backward()
    analytic = {k: (np.array(p.grad) if p.grad is not None else np.zeros_like(p.data))
                for k, p in params.items()}
    for p in params.values():
        p.grad = None

    rng = np.random.default_rng(seed)
    worst = 0.0
    for name, p in params.items():
        flat = p.data.reshape(-1)
        n = flat.size
        coords = (range(n) if max_coords is None or n <= max_coords
                  else sorted(rng.choice(n, size=max_coords, replace=False)))
        for c in coords:
            keep = flat[c]
            flat[c] = keep + eps
            up = float(build_loss().data)
            flat[c] = keep - eps
            down = float(build_loss().data)
            flat[c] = keep
            numeric = (up - down) / (2 * eps)
            a = analytic[name].reshape(-1)[c]
            err = abs(a - numeric) / max(abs(a), abs(numeric), 1e-3)
            if err > worst:
                worst = err
    return worst
