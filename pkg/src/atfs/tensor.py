"""Dense float64 tensors with reverse-mode automatic differentiation.

The graph is built eagerly: each op links its result to its parents with a
closure that scatters the incoming adjoint. ``backward`` topologically sorts
the graph and visits every node exactly once, so gradients through shared
subexpressions accumulate correctly.

Supported broadcasting is deliberately narrow: elementwise ops accept equal
shapes or a python scalar, nothing else. Gradients accumulate into ``.grad``
across repeated backward calls; callers that want fresh gradients must call
``zero_grad`` (the attack loop does this every iteration).
"""

from __future__ import annotations

import numpy as np


class ShapeError(ValueError):
    pass


def _as_array(data) -> np.ndarray:
    arr = np.asarray(data, dtype=np.float64)
    return arr


class Tensor:
    def __init__(self, data, requires_grad: bool = False, _parents=(), _backward=None):
        self.data = _as_array(data)
        self.requires_grad = bool(requires_grad)
        self.grad: np.ndarray | None = None
        self._parents = tuple(_parents)
        self._backward = _backward

    @property
    def shape(self):
        return self.data.shape

    @property
    def size(self):
        return self.data.size

    def __repr__(self):
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"

    def detach(self) -> "Tensor":
        return Tensor(self.data.copy())

    def zero_grad(self):
        self.grad = None

    # -- graph plumbing ----------------------------------------------------

    def _accumulate(self, g: np.ndarray):
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += g

    def backward(self):
        """Populate ``grad`` on every requires_grad tensor reachable from here.

        Only defined for scalar results (shape () or a single element).
        """
        if self.data.size != 1:
            raise ShapeError(
                f"backward requires a scalar loss, got shape {self.shape}")
        topo: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
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
        # transient adjoints; flushed into .grad for requires_grad tensors
        adjoint: dict[int, np.ndarray] = {id(self): np.ones_like(self.data)}
        for node in reversed(topo):
            g = adjoint.pop(id(node), None)
            if g is None:
                continue
            if node.requires_grad:
                node._accumulate(g)
            if node._backward is None:
                continue
            for parent, pg in zip(node._parents, node._backward(g)):
                if pg is None:
                    continue
                if id(parent) in adjoint:
                    adjoint[id(parent)] += pg
                else:
                    adjoint[id(parent)] = pg

    # -- operators ---------------------------------------------------------

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(_lift(other), self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(self, other)

    def __neg__(self):
        return mul(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def reshape(self, *shape):
        return reshape(self, shape)


def _lift(x) -> Tensor:
    if isinstance(x, Tensor):
        return x
    return Tensor(x)


def _check_elementwise(a: Tensor, b: Tensor, opname: str):
    if a.shape == b.shape:
        return
    if a.size == 1 or b.size == 1:
        return
    raise ShapeError(f"{opname}: shapes {a.shape} and {b.shape} do not conform")


def _reduce_to(g: np.ndarray, shape) -> np.ndarray:
    """Sum an adjoint back down to a scalar operand's shape if needed."""
    if g.shape == tuple(shape):
        return g
    return np.sum(g).reshape(shape)


def _node(data, parents, backward) -> Tensor:
    rg = any(p.requires_grad or p._parents for p in parents)
    if not rg:
        return Tensor(data)
    return Tensor(data, _parents=parents, _backward=backward)


# -- elementwise ------------------------------------------------------------

def add(a, b) -> Tensor:
    a, b = _lift(a), _lift(b)
    _check_elementwise(a, b, "add")
    out = a.data + b.data

    def bwd(g):
        return _reduce_to(g, a.shape), _reduce_to(g, b.shape)

    return _node(out, (a, b), bwd)


def sub(a, b) -> Tensor:
    a, b = _lift(a), _lift(b)
    _check_elementwise(a, b, "sub")
    out = a.data - b.data

    def bwd(g):
        return _reduce_to(g, a.shape), _reduce_to(-g, b.shape)

    return _node(out, (a, b), bwd)


def mul(a, b) -> Tensor:
    a, b = _lift(a), _lift(b)
    _check_elementwise(a, b, "mul")
    out = a.data * b.data

    def bwd(g):
        return _reduce_to(g * b.data, a.shape), _reduce_to(g * a.data, b.shape)

    return _node(out, (a, b), bwd)


def relu(a) -> Tensor:
    a = _lift(a)
    mask = a.data > 0
    out = np.where(mask, a.data, 0.0)

    def bwd(g):
        return (g * mask,)

    return _node(out, (a,), bwd)


def leaky_relu(a, slope: float = 0.2) -> Tensor:
    a = _lift(a)
    mask = a.data > 0
    out = np.where(mask, a.data, slope * a.data)

    def bwd(g):
        return (g * np.where(mask, 1.0, slope),)

    return _node(out, (a,), bwd)


# -- shape / reductions ------------------------------------------------------

def reshape(a, shape) -> Tensor:
    a = _lift(a)
    shape = tuple(int(s) for s in (shape if hasattr(shape, "__iter__") else (shape,)))
    if int(np.prod(shape)) != a.size:
        raise ShapeError(f"reshape: cannot view {a.shape} as {shape}")
    out = a.data.reshape(shape)
    old = a.shape

    def bwd(g):
        return (g.reshape(old),)

    return _node(out, (a,), bwd)


def tsum(a) -> Tensor:
    a = _lift(a)
    out = np.sum(a.data)

    def bwd(g):
        return (np.broadcast_to(g, a.shape).copy(),)

    return _node(out, (a,), bwd)


def tmean(a) -> Tensor:
    a = _lift(a)
    n = a.size
    out = np.sum(a.data) / n

    def bwd(g):
        return (np.broadcast_to(g / n, a.shape).copy(),)

    return _node(out, (a,), bwd)


def sq_l2_norm(a) -> Tensor:
    """Sum of squared entries (scalar)."""
    a = _lift(a)
    out = np.sum(a.data * a.data)

    def bwd(g):
        return (g * 2.0 * a.data,)

    return _node(out, (a,), bwd)


def mse(a, b) -> Tensor:
    a, b = _lift(a), _lift(b)
    if a.shape != b.shape:
        raise ShapeError(f"mse: shapes {a.shape} and {b.shape} do not conform")
    diff = a.data - b.data
    n = a.size
    out = np.sum(diff * diff) / n

    def bwd(g):
        d = g * 2.0 * diff / n
        return d, -d

    return _node(out, (a, b), bwd)


# -- linear algebra ----------------------------------------------------------

def matmul(a, b) -> Tensor:
    a, b = _lift(a), _lift(b)
    if a.data.ndim != 2 or b.data.ndim not in (1, 2):
        raise ShapeError(f"matmul: unsupported ranks {a.shape} @ {b.shape}")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul: shapes {a.shape} and {b.shape} do not conform")
    out = a.data @ b.data

    def bwd(g):
        if b.data.ndim == 1:
            ga = np.outer(g, b.data)
            gb = a.data.T @ g
        else:
            ga = g @ b.data.T
            gb = a.data.T @ g
        return ga, gb

    return _node(out, (a, b), bwd)


def conv2d(x, w, stride: int = 1, padding: int = 0) -> Tensor:
    """Cross-correlation of (N,C,H,W) input with (O,C,kh,kw) kernels."""
    x, w = _lift(x), _lift(w)
    if x.data.ndim != 4 or w.data.ndim != 4:
        raise ShapeError(f"conv2d: need 4-D input/kernel, got {x.shape} and {w.shape}")
    n, c, h, wd = x.shape
    o, ci, kh, kw = w.shape
    if ci != c:
        raise ShapeError(f"conv2d: input channels {x.shape} vs kernel {w.shape}")
    s, p = int(stride), int(padding)
    hp, wp = h + 2 * p, wd + 2 * p
    if kh > hp or kw > wp:
        raise ShapeError(f"conv2d: kernel {w.shape} larger than padded input {x.shape}")
    ho = (hp - kh) // s + 1
    wo = (wp - kw) // s + 1

    xp = np.pad(x.data, ((0, 0), (0, 0), (p, p), (p, p))) if p else x.data
    windows = np.lib.stride_tricks.sliding_window_view(xp, (kh, kw), axis=(2, 3))
    windows = windows[:, :, ::s, ::s, :, :]  # (N,C,Ho,Wo,kh,kw)
    out = np.einsum("nchwij,ocij->nohw", windows, w.data, optimize=True)

    def bwd(g):
        gw = np.einsum("nohw,nchwij->ocij", g, windows, optimize=True)
        gxp = np.zeros((n, c, hp, wp))
        for ki in range(kh):
            for kj in range(kw):
                gxp[:, :, ki:ki + s * ho:s, kj:kj + s * wo:s] += np.einsum(
                    "nohw,oc->nchw", g, w.data[:, :, ki, kj], optimize=True)
        gx = gxp[:, :, p:p + h, p:p + wd] if p else gxp
        return gx, gw

    return _node(out, (x, w), bwd)
