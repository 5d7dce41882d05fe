"""Synthetic automotive ECU workloads: statistical generation, task synthesis,
core allocation, fixed-priority schedulability and data-age analysis."""

from .analysis import (analyze_system, data_age_bound, measure_data_age,
                       response_time_analysis, simulate_hyperperiod,
                       validate_requirements)
from .checks import check_model
from .config import GeneratorConfig, SynthesisConfig, parse_config
from .fidelity import fidelity_report
from .generator import generate_system
from .model import (Asil, BswTask, CauseEffectChain, Core, Finding, Label,
                    Runnable, SwComponent, SystemModel, Task, core_utilization,
                    hyperperiod, memory_usage)
from .pipeline import build_system
from .serialize import deserialize_system, serialize_system
from .synthesis import (BswExtensionModel, allocate, apply_bsw_extension,
                        assign_priorities, cluster_into_tasks, synthesize)

__version__ = "0.1.0"
