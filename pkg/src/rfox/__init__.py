"""Statevector workbench for the RFOX protocol on random-field Ising models.

Submodules: ``instances`` (graphs, fields, energies), ``pauli``
(Hamiltonians), ``statevector`` and ``circuits`` (simulation),
``spectral`` (gaps, Magnus check), ``metrics``, ``bench`` and ``plots``.
"""
from .errors import (InvalidParameterError, NumericalError, ResourceLimitError, RfoxError,
                     SchemaError)
from .instances import (Graph, RfimInstance, SpinConfig, assign_fields, classical_energy,
                        gen_erdos_renyi, gen_watts_strogatz, load_instance, save_instance)
from .schedule import Driver, ScheduleParams

__version__ = "0.1.0"

__all__ = [
    "Driver", "Graph", "InvalidParameterError", "NumericalError", "ResourceLimitError",
    "RfimInstance", "RfoxError", "ScheduleParams", "SchemaError", "SpinConfig",
    "assign_fields", "classical_energy", "gen_erdos_renyi", "gen_watts_strogatz",
    "load_instance", "save_instance", "__version__",
]
