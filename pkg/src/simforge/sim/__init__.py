"""Scene compilation, integration and recorded traces."""
from .compile import DEFAULT_DT, DEFAULT_HORIZON, compile_scene
from .integrate import Integrator
from .model import CompiledModel
from .trace import Trace, build_trace, probe, split_quantity, unit_of


def simulate(model: CompiledModel, stop_after_spike: bool = True) -> Trace:
    """Integrate ``model`` over its horizon and record every quantity."""
    return build_trace(model, Integrator(model).run(stop_after_spike=stop_after_spike))


__all__ = [
    "CompiledModel", "DEFAULT_DT", "DEFAULT_HORIZON", "Trace", "compile_scene", "probe", "simulate",
    "split_quantity", "unit_of",
]
