import logging
import math
import pandas as pd
from typing import Dict, List, Mapping, Optional, Sequence
from .errors import NoHistory
from .thermo import TemperatureRecord


logger = logging.getLogger(__name__)


class TopicState(object):
    """One topic of a group at one timestamp."""

    def __init__(self,
                 name,                   # type: str
                 age,                    # type: float
                 mass,                   # type: float
                 temperature,            # type: float
                 prev_temperature=None   # type: Optional[float]
                 ):
        # type: (...) -> None
        if age < 0:
            raise ValueError('age of {} must be nonnegative, got {}'.format(name, age))
        if not mass > 0:
            raise ValueError('mass of {} must be positive, got {}'.format(name, mass))
        self.name = name
        self.age = age
        self.mass = mass
        self.temperature = temperature
        self.prev_temperature = prev_temperature

    @property
    def rising(self):
        # type: () -> bool
        return self.temperature > self.prev_temperature

    def __repr__(self):
        return 'TopicState({!r}, age={}, n={:.3f}, T={:.3f})'.format(
            self.name, self.age, self.mass, self.temperature)


class TopicGroupState(object):
    """The topics of a declared group at a common timestamp."""

    def __init__(self, topics, c=1.0):
        # type: (Sequence[TopicState], float) -> None
        names = [topic.name for topic in topics]
        if len(set(names)) != len(names):
            raise ValueError('duplicate topic in group: {}'.format(names))
        self.topics = list(topics)
        self.c = float(c)

    def energy(self, temperatures=None):
        # type: (Optional[Mapping[str, float]]) -> float

        """Total c * n * T of the group, optionally for substituted temperatures."""
        return math.fsum(self.c * topic.mass *
                         (topic.temperature if temperatures is None else temperatures[topic.name])
                         for topic in self.topics)


def forest_help(group):
    # type: (TopicGroupState) -> Dict[str, float]

    """
    Rising topics (hotter than at the previous timestamp) hand c * n * T / (1 + sum of ages)
    of their energy to the others, which all warm by the same amount. Total energy is kept.
    :return: topic name -> temperature after helping.
    :raises NoHistory: if a topic has no previous temperature.
    """
    for topic in group.topics:
        if topic.prev_temperature is None:
            raise NoHistory('topic {} has no previous temperature'.format(topic.name))

    adjusted = {topic.name: topic.temperature for topic in group.topics}
    helpers = [topic for topic in group.topics if topic.rising]
    receivers = [topic for topic in group.topics if not topic.rising]
    if not helpers or not receivers:
        return adjusted

    share = 1.0 / (1.0 + sum(topic.age for topic in group.topics))
    donated = 0.0
    for topic in helpers:
        energy = group.c * topic.mass * topic.temperature * share
        adjusted[topic.name] -= energy / (group.c * topic.mass)
        donated += energy

    gain = donated / (group.c * sum(topic.mass for topic in receivers))
    for topic in receivers:
        adjusted[topic.name] += gain

    logger.debug('Forest helping: %d helpers gave %.6g energy to %d receivers (+%.6g each)',
                 len(helpers), donated, len(receivers), gain)
    return adjusted


def forest_series(group_name, series, c=1.0):
    # type: (str, Mapping[str, Sequence[TemperatureRecord]], float) -> pd.DataFrame

    """
    Apply forest helping to a group of temperature series at every common year.

    Each year is helped independently from the unhelped temperatures; the first common year
    has no history and is reported unchanged. Ages count from each topic's first snapshot.
    :return: One row per (year, topic) with columns year, topic, age, n, T, T_forest.
    """
    columns = ['year', 'topic', 'age', 'n', 'T', 'T_forest']
    usable = {name: records for name, records in series.items() if records}
    for name in sorted(set(series) - set(usable)):
        logger.warning('Group %s: topic %s has no temperature series; excluded', group_name, name)
    if not usable:
        return pd.DataFrame(columns=columns)

    by_year = {name: {record.t: record for record in records} for name, records in usable.items()}
    common = sorted(set.intersection(*(set(years) for years in by_year.values())))
    for name, years in sorted(by_year.items()):
        dropped = sorted(set(years) - set(common))
        if dropped:
            logger.warning('Group %s: years %s of topic %s are not shared by the group; skipped',
                           group_name, dropped, name)
    if len(common) < 2:
        logger.warning('Group %s shares %d year(s); no helping possible', group_name, len(common))

    first_year = {name: min(years) for name, years in by_year.items()}
    rows = []  # type: List[Dict[str, object]]
    previous = None  # type: Optional[int]
    for year in common:
        states = []
        for name in sorted(by_year):
            record = by_year[name][year]
            prev_t = None if previous is None else by_year[name][previous].t_total
            states.append(TopicState(name, year - first_year[name], record.mass,
                                     record.t_total, prev_t))
        if previous is None:
            helped = {state.name: state.temperature for state in states}
        else:
            helped = forest_help(TopicGroupState(states, c=c))
        for state in states:
            rows.append({'year': year, 'topic': state.name, 'age': state.age, 'n': state.mass,
                         'T': state.temperature, 'T_forest': helped[state.name]})
        previous = year
    return pd.DataFrame(rows, columns=columns)
