"""Atomic array primitives for numba kernels that run with the GIL released.

numba has no CPU atomics, so these lower straight to LLVM ``atomicrmw`` /
``cmpxchg`` on an element pointer. Element types must be byte-sized integers
(use ``uint8`` rather than ``bool_`` for flags).
"""

from llvmlite import ir
from numba import njit, types
from numba.core import cgutils
from numba.extending import intrinsic


def _element_ptr(context, builder, arrty, arr, idx):
    ary = context.make_array(arrty)(context, builder, arr)
    return cgutils.get_item_pointer(context, builder, arrty, ary, [idx])


@intrinsic
def fetch_add(typingctx, arr, idx, val):
    """``old = arr[idx]; arr[idx] += val; return old``, atomically."""
    sig = arr.dtype(arr, types.intp, arr.dtype)

    def codegen(context, builder, sig, args):
        ary, i, v = args
        ptr = _element_ptr(context, builder, sig.args[0], ary, i)
        return builder.atomic_rmw("add", ptr, v, "seq_cst")

    return sig, codegen


@intrinsic
def exchange(typingctx, arr, idx, val):
    """Store ``val`` into ``arr[idx]`` and return the previous value."""
    sig = arr.dtype(arr, types.intp, arr.dtype)

    def codegen(context, builder, sig, args):
        ary, i, v = args
        ptr = _element_ptr(context, builder, sig.args[0], ary, i)
        return builder.atomic_rmw("xchg", ptr, v, "seq_cst")

    return sig, codegen


@intrinsic
def compare_exchange(typingctx, arr, idx, expected, new):
    """Swap in ``new`` if ``arr[idx] == expected``; returns the value seen."""
    sig = arr.dtype(arr, types.intp, arr.dtype, arr.dtype)

    def codegen(context, builder, sig, args):
        ary, i, exp, nv = args
        ptr = _element_ptr(context, builder, sig.args[0], ary, i)
        pair = builder.cmpxchg(ptr, exp, nv, "seq_cst", "seq_cst")
        return builder.extract_value(pair, 0)

    return sig, codegen


@intrinsic
def yield_cpu(typingctx):
    sig = types.int32()

    def codegen(context, builder, sig, args):
        fnty = ir.FunctionType(ir.IntType(32), [])
        fn = cgutils.get_or_insert_function(builder.module, fnty, "sched_yield")
        return builder.call(fn, [])

    return sig, codegen


_SPINS_BEFORE_YIELD = 64


@njit(nogil=True, cache=True, inline="always")
def spin_lock(locks, i):
    spins = 0
    while compare_exchange(locks, i, 0, 1) != 0:
        spins += 1
        # the holder may be descheduled; don't burn the whole quantum
        if spins >= _SPINS_BEFORE_YIELD:
            yield_cpu()
            spins = 0


@njit(nogil=True, cache=True, inline="always")
def spin_unlock(locks, i):
    exchange(locks, i, 0)
