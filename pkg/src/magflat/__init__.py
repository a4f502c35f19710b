"""Band structure and flat-spectrum analysis for magnetic Schrodinger operators on periodic graphs."""

from importlib.resources import files

from .bands import BandStructure, KGrid, compute_bands, detect_flat_eigenvalues, first_band_width
from .errors import BudgetError, GraphError, NumericError
from .fiber import FiberOperator, FiberSpectrum, build_fiber, fiber_spectrum, trace_power
from .graph import (
    FundamentalGraph,
    OrientedEdge,
    VertexRecord,
    compute_edge_index,
    cover_is_connected,
    load_graph,
    oriented_edges_from,
)
from .sweep import ExponentialPolynomial, SweepReport, build_f, find_zeros, select_witness, sweep
from .traces import (
    IndexedTraceSeries,
    build_laurent_matrix,
    char_poly_from_traces,
    enumerate_cycles,
    flat_spectrum_verdict,
    parseval_check,
    trace_fourier,
)

BUNDLED = ("ex1", "ex2", "zlattice", "square")


def bundled_graph_path(name: str):
    """Path of a bundled example graph: ex1, ex2, zlattice or square."""
    if name not in BUNDLED:
        raise KeyError(f"no bundled graph {name!r}; choose from {BUNDLED}")
    return files(__package__) / "data" / f"{name}.json"


def bundled_graph(name: str) -> FundamentalGraph:
    return load_graph(str(bundled_graph_path(name)))
