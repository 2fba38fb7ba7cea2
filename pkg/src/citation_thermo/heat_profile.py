import logging
import numpy as np
import pandas as pd
from scipy import stats
from typing import List, Tuple
from .heat import NodeHeatMap
from .skeleton import SkeletonTree
from .topic_graph import TopicSnapshot


logger = logging.getLogger(__name__)


def _values(heat_map):
    # type: (NodeHeatMap) -> np.ndarray
    return heat_map.std if heat_map.scaled is None else heat_map.scaled


def heat_by_age(heat_map, snapshot):
    # type: (NodeHeatMap, TopicSnapshot) -> pd.DataFrame

    """Article count and mean temperature per article age (snapshot year - publication year)."""
    frame = pd.DataFrame({
        'age': snapshot.timestamp - snapshot.years,
        'temperature': _values(heat_map),
    })
    table = frame.groupby('age', sort=True)['temperature'].agg(['count', 'mean']).reset_index()
    table.columns = ['age', 'count', 'mean_temperature']
    return table


def heat_citation_correlation(heat_map, snapshot):
    # type: (NodeHeatMap, TopicSnapshot) -> Tuple[float, float]

    """
    Spearman correlation between temperature and in-topic citation count, pioneer excluded.
    :return: (rho, p-value); both NaN below 3 articles or for constant input.
    """
    keep = np.ones(snapshot.num_nodes, dtype=bool)
    keep[snapshot.pioneer_index] = False
    temperatures = _values(heat_map)[keep]
    counts = snapshot.citation_counts()[keep]
    if len(counts) < 3 or np.ptp(counts) == 0 or np.ptp(temperatures) == 0:
        return float('nan'), float('nan')
    rho, p_value = stats.spearmanr(temperatures, counts)
    return float(rho), float(p_value)


def heat_sources(tree, heat_map):
    # type: (SkeletonTree, NodeHeatMap) -> List[str]

    """
    Non-root tree nodes strictly hotter than their tree parent and every tree child, hottest
    first (ties by id).
    """
    temperature = dict(zip(heat_map.ids, _values(heat_map).tolist()))
    sources = []
    for node, parent in tree.parent_of.items():
        value = temperature[node]
        if value <= temperature[parent]:
            continue
        if all(value > temperature[child] for child in tree.children(node)):
            sources.append(node)
    sources.sort(key=lambda node: (-temperature[node], node))
    return sources
