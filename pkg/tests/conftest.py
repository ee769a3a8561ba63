import numpy as np
import pytest

from ompath.systems import make_custom


@pytest.fixture
def rng():
    return np.random.default_rng(20250809)


def diagonal_system(fns, dfns=None, vectorized=True, **kwargs):
    """Custom system with zero drift and a diagonal state-dependent diffusion.

    ``fns`` maps x -> list of d diagonal entries; ``dfns`` optionally gives
    the analytic partials d sigma_ll / d x_k as a (d, d) nested structure.
    """
    d = kwargs.pop("dim")

    def drift(x):
        return np.zeros_like(np.asarray(x, dtype=float))

    def diffusion(x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape[:-1] + (d, d))
        for l, f in enumerate(fns):
            out[..., l, l] = f(x)
        return out

    partials = None
    if dfns is not None:
        def partials(x):
            x = np.asarray(x, dtype=float)
            out = np.zeros(x.shape[:-1] + (d, d, d))
            for l, row in enumerate(dfns):
                for k, df in enumerate(row):
                    if df is not None:
                        out[..., l, l, k] = df(x)
            return out

    return make_custom(d, drift, diffusion, diffusion_partials=partials,
                       vectorized=vectorized, **kwargs)
