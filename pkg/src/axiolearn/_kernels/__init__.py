"""Hot-loop kernels with a compiled core and a numpy fallback.

The compiled extension (Cython) is selected at import when available;
otherwise the numpy implementations are used.  Both expose the same
functions and produce bit-identical results, so everything above this
package is backend-agnostic.  `BACKEND` reports which one is active.
"""

from concurrent.futures import ThreadPoolExecutor

try:
    from axiolearn._kernels import _native as _impl

    BACKEND = "native"
except ImportError:  # extension not built; numpy fallback
    from axiolearn._kernels import _fallback as _impl

    BACKEND = "python"

minplus_block = _impl.minplus_block
pair_rect = _impl.pair_rect
pair_matrix_block = _impl.pair_matrix_block


def run_symmetric_blocks(kernel, m, jobs, *args):
    """Run a row-blocked symmetric kernel, optionally across threads.

    Cells are computed independently, so the result is bit-identical for
    any jobs value.  kernel is called as kernel(*args_head, i0, i1, out)
    where args = (*args_head, out).
    """
    *head, out = args
    if jobs <= 1 or m < 2 * jobs:
        kernel(*head, 0, m, out)
        return
    bounds = [m * k // jobs for k in range(jobs + 1)]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        futures = [
            pool.submit(kernel, *head, bounds[k], bounds[k + 1], out)
            for k in range(jobs)
            if bounds[k] < bounds[k + 1]
        ]
        for f in futures:
            f.result()
