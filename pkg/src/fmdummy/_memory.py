import numpy as np

CACHE_LINE_BYTES = 64


def aligned_zeros(count: int, dtype=np.uint64) -> np.ndarray:
    """Zeroed 1-D array whose data pointer sits on a 64-byte boundary."""
    dtype = np.dtype(dtype)
    pad = CACHE_LINE_BYTES // dtype.itemsize
    buf = np.zeros(count + pad, dtype=dtype)
    skip = (-buf.ctypes.data % CACHE_LINE_BYTES) // dtype.itemsize
    out = buf[skip:skip + count]
    assert out.ctypes.data % CACHE_LINE_BYTES == 0
    return out


def aligned_copy(src: np.ndarray) -> np.ndarray:
    out = aligned_zeros(src.size, src.dtype)
    out[:] = src.ravel()
    return out


def is_aligned(arr: np.ndarray) -> bool:
    return arr.ctypes.data % CACHE_LINE_BYTES == 0


# LOW_MASKS[k] has the k lowest bits set, k = 0..64
LOW_MASKS = np.array([(1 << k) - 1 for k in range(65)], dtype=np.uint64)
