from .config import RunConfig
from .entropy import structure_entropy, von_neumann_entropy
from .forest import TopicGroupState, TopicState, forest_help
from .heat import HeatSystem, NodeHeatMap
from .pipeline import TopicPipeline, run_pipeline
from .shrink import ShrunkGraph, shrink
from .skeleton import SkeletonTree, extract_skeleton
from .thermo import TemperatureRecord, ThermoConstants, temperature_series
from .topic_graph import PaperNode, TopicSnapshot, build_snapshot
from .topic_io import ingest
