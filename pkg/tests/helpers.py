"""Shared test helpers and reference models."""
import math

from rfso.analysis import LinkModel
from rfso.fsohop import FsoGeometryInput, derive_geometry
from rfso.impairment import sel_params_db
from rfso.rfhop import RfHopConfig

# lines collected by the acceptance module, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def db(x):
    return 10.0 ** (x / 10.0)


def table2_geometry(**kw):
    """Reference link: 1 km, 1550 nm, clear air, 3.75 cm jitter, moderate turbulence."""
    return derive_geometry(FsoGeometryInput(**kw))


def make_model(geometry=None, snr_db=30.0, N=5, m=5, rho=0.9, ibo_db=30.0, gbar2_db=None, **kw):
    geometry = geometry or table2_geometry()
    g1 = db(snr_db)
    g2 = db(gbar2_db) if gbar2_db is not None else g1
    return LinkModel(RfHopConfig(N, m, rho, g1), geometry.with_gbar2(g2), sel_params_db(ibo_db), **kw)


def rel(a, b):
    return abs(a - b) / abs(b) if b != 0 else abs(a)


def within_ci(est, target, widen=1.0):
    return abs(est.value - target) <= widen * est.ci99_halfwidth
