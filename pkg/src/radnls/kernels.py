"""Backend selection for the stepping kernels.

The compiled Cython core is preferred; the pure-numpy twin is used when the
extension is absent or when RADNLS_FORCE_FALLBACK is set.  Both expose the
same functions: make_cn_factor, cn_steps, strang_steps, phase-exact split
stepping on the symmetrized field.
"""
import os

if os.environ.get("RADNLS_FORCE_FALLBACK"):
    from . import _stepkern_np as _impl
else:
    try:
        from . import _stepkern as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _stepkern_np as _impl

BACKEND = _impl.BACKEND
make_cn_factor = _impl.make_cn_factor
cn_steps = _impl.cn_steps
strang_steps = _impl.strang_steps
if hasattr(_impl, "omega_chunk"):
    omega_chunk = _impl.omega_chunk
