import io
import json
import logging
import math
import os
import pandas as pd
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple
from .entropy import StructureEntropy
from .errors import ValidationError
from .heat import NodeHeatMap
from .skeleton import SkeletonTree
from .thermo import TemperatureRecord
from .topic_graph import PaperNode, TopicSnapshot


logger = logging.getLogger(__name__)


#: File suffixes read as one JSON record per line
LINE_DELIMITED_SUFFIXES = ('.jsonl', '.ndjson')

#: Column headers of the temperature series CSV
SERIES_COLUMNS = ['year', '|V|', '|E|', 'n', 'V', 'UsefulInfo', 'T_growth', 'T_struct', 'T']

#: Blue -> yellow -> red ramp used to bucket temperatures over [0, 2T] in DOT exports
HEAT_RAMP = ('#2c7bb6', '#5d9fc9', '#abd9e9', '#d7eef0', '#ffffbf',
             '#fee090', '#fdae61', '#f46d43', '#d7191c')

#: Fill color of nodes without a scaled temperature
NO_HEAT_COLOR = '#bdbdbd'

Locator = str


def _records_from_document(document):
    # type: (Any) -> Iterator[Tuple[Locator, str, Dict[str, Any]]]
    if not isinstance(document, dict):
        raise ValidationError('topic document must be a JSON object')
    for kind, key in (('node', 'nodes'), ('edge', 'edges')):
        entries = document.get(key, [])
        if not isinstance(entries, list):
            raise ValidationError('"{}" must be a list'.format(key))
        for i, entry in enumerate(entries):
            yield '{}[{}]'.format(key, i), kind, entry


def _records_from_lines(stream):
    # type: (io.BufferedIOBase) -> Iterator[Tuple[Locator, str, Dict[str, Any]]]
    for line_number, raw in enumerate(stream, start=1):
        locator = 'line {}'.format(line_number)
        try:
            line = raw.decode('utf-8').strip()
        except UnicodeDecodeError as e:
            raise ValidationError('invalid UTF-8: {}'.format(e), record=locator)
        if not line:
            continue
        try:
            entry = json.loads(line)
        except ValueError as e:
            raise ValidationError('invalid JSON: {}'.format(e), record=locator)
        kind = entry.get('type') if isinstance(entry, dict) else None
        if kind not in ('node', 'edge'):
            raise ValidationError('record type must be "node" or "edge"', record=locator)
        yield locator, kind, entry


def _field(entry, name, locator):
    # type: (Dict[str, Any], str, Locator) -> Any
    if not isinstance(entry, dict) or name not in entry:
        raise ValidationError('missing field "{}"'.format(name), record=locator)
    return entry[name]


def ingest(path):
    # type: (str) -> TopicSnapshot

    """
    Read a topic file: either one JSON document {"nodes": [...], "edges": [...]} or, for
    .jsonl/.ndjson files, one record per line tagged with "type": "node" | "edge".
    Nodes carry id, year, optional title and pioneer; edges carry citer and cited.
    :raises ValidationError: naming the offending record (list index or line number).
    """
    if path.lower().endswith(LINE_DELIMITED_SUFFIXES):
        with io.open(path, 'rb') as stream:
            records = list(_records_from_lines(stream))
    else:
        with io.open(path, 'r', encoding='utf-8') as stream:
            try:
                document = json.load(stream)
            except ValueError as e:
                raise ValidationError('invalid JSON in {}: {}'.format(path, e))
            records = list(_records_from_document(document))

    nodes = []  # type: List[PaperNode]
    declared = {}  # type: Dict[str, Locator]
    pioneers = []  # type: List[Locator]
    edges = []  # type: List[Tuple[str, str, Locator]]
    for locator, kind, entry in records:
        if kind == 'node':
            node_id = str(_field(entry, 'id', locator))
            if node_id in declared:
                raise ValidationError('duplicate node id {} (first at {})'.format(
                    node_id, declared[node_id]), record=locator)
            try:
                node = PaperNode(node_id, _field(entry, 'year', locator),
                                 is_pioneer=bool(entry.get('pioneer', False)),
                                 title=entry.get('title'))
            except ValidationError as e:
                raise ValidationError(e.message, record=locator)
            declared[node_id] = locator
            if node.is_pioneer:
                pioneers.append(locator)
            nodes.append(node)
        else:
            citer = str(_field(entry, 'citer', locator))
            cited = str(_field(entry, 'cited', locator))
            if citer == cited:
                raise ValidationError('self-citation of {}'.format(citer), record=locator)
            edges.append((cited, citer, locator))

    if len(pioneers) != 1:
        raise ValidationError('expected exactly one pioneer, found {}'.format(len(pioneers)),
                              record=', '.join(pioneers) or None)
    for cited, citer, locator in edges:
        for endpoint in (cited, citer):
            if endpoint not in declared:
                raise ValidationError('undeclared node {}'.format(endpoint), record=locator)

    snapshot = TopicSnapshot(nodes, [(cited, citer) for cited, citer, _ in edges])
    logger.info('Ingested %s from %s: %d articles, %d citations',
                snapshot, path, snapshot.num_nodes, snapshot.num_edges)
    return snapshot


def _ensure_parent(path):
    # type: (str) -> None
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)


def write_json(payload, path):
    # type: (Any, str) -> None
    _ensure_parent(path)
    with io.open(path, 'w', encoding='utf-8') as stream:
        json.dump(payload, stream, sort_keys=True, indent=2, ensure_ascii=False, allow_nan=True)
        stream.write(u'\n')


def write_topic_file(snapshot, path):
    # type: (TopicSnapshot, str) -> None

    """Write a snapshot as a JSON topic document that `ingest` reads back unchanged."""
    nodes = []
    for node in snapshot.nodes:
        entry = {'id': node.id, 'year': node.year}
        if node.is_pioneer:
            entry['pioneer'] = True
        if node.title is not None:
            entry['title'] = node.title
        nodes.append(entry)
    edges = [{'cited': cited, 'citer': citer} for cited, citer in snapshot.edges()]
    write_json({'nodes': nodes, 'edges': edges}, path)


def series_frame(records):
    # type: (Sequence[TemperatureRecord]) -> pd.DataFrame
    rows = [[r.t, r.node_count, r.edge_count, r.mass, r.volume, r.useful_info, r.t_growth,
             r.t_structure, r.t_total] for r in records]
    frame = pd.DataFrame(rows, columns=SERIES_COLUMNS)
    return frame.astype({'year': 'int64', '|V|': 'int64', '|E|': 'int64', 'V': 'int64',
                         'T_struct': 'float64'})


def write_series_csv(records, path):
    # type: (Sequence[TemperatureRecord], str) -> None

    """Temperature series at 3 decimals; T_struct is blank on the first row."""
    _ensure_parent(path)
    series_frame(records).to_csv(path, index=False, float_format='%.3f', na_rep='',
                                 lineterminator='\n')


def write_table_csv(frame, path):
    # type: (pd.DataFrame, str) -> None
    _ensure_parent(path)
    frame.to_csv(path, index=False, float_format='%.3f', lineterminator='\n')


def heat_color(value, topic_temperature):
    # type: (Optional[float], Optional[float]) -> str

    """Bucket a scaled temperature into HEAT_RAMP over [0, 2 * topic temperature]."""
    if value is None or not topic_temperature or topic_temperature <= 0:
        return NO_HEAT_COLOR
    position = value / (2.0 * topic_temperature)
    bucket = int(math.floor(position * len(HEAT_RAMP)))
    return HEAT_RAMP[min(max(bucket, 0), len(HEAT_RAMP) - 1)]


def _node_width(node_id, tree, entropy):
    # type: (str, SkeletonTree, StructureEntropy) -> float
    if node_id in entropy.per_node:
        value = entropy.per_node[node_id]
    else:
        # roots take the size of their largest child entry
        value = max([entropy.per_node.get(child, 0.0) for child in tree.children(node_id)] or [0.0])
    return 0.3 + 2.0 * value


def _quote(text):
    # type: (str) -> str
    return '"{}"'.format(text.replace('\\', '\\\\').replace('"', '\\"'))


def tree_to_dot(tree, entropy, heat_map=None, name='skeleton'):
    # type: (SkeletonTree, StructureEntropy, Optional[NodeHeatMap], str) -> str

    """
    DOT description of a skeleton tree; edges run cited -> citer. Node fill is the heat bucket
    of the scaled temperature, node width grows with structure entropy.
    """
    temperatures = heat_map.scaled_temp() if heat_map is not None and heat_map.scaled is not None \
        else {}
    topic_temperature = heat_map.topic_temperature if heat_map is not None else None

    lines = ['digraph {} {{'.format(_quote(name)),
             '  node [shape=circle, style=filled, label=""];']
    for node_id in tree.preorder():
        attributes = [
            'fillcolor={}'.format(_quote(heat_color(temperatures.get(node_id), topic_temperature))),
            'width={:.3f}'.format(_node_width(node_id, tree, entropy)),
        ]
        if node_id == tree.root:
            attributes.append('shape=doublecircle')
        lines.append('  {} [{}];'.format(_quote(node_id), ', '.join(attributes)))
    for parent, child in tree.edges():
        lines.append('  {} -> {};'.format(_quote(parent), _quote(child)))
    lines.append('}')
    return '\n'.join(lines) + '\n'


def write_tree_dot(tree, entropy, path, heat_map=None, name='skeleton'):
    # type: (SkeletonTree, StructureEntropy, str, Optional[NodeHeatMap], str) -> None
    _ensure_parent(path)
    with io.open(path, 'w', encoding='utf-8') as stream:
        stream.write(tree_to_dot(tree, entropy, heat_map=heat_map, name=name))


def tree_payload(tree, entropy, heat_map=None):
    # type: (SkeletonTree, StructureEntropy, Optional[NodeHeatMap]) -> Dict[str, Any]
    payload = {
        'root': tree.root,
        'parent_of': tree.parent_of,
        'components': tree.components,
        'structure_entropy': {'per_node': entropy.per_node, 'total': entropy.total},
    }
    if heat_map is not None and heat_map.scaled is not None:
        payload['temperature'] = heat_map.scaled_temp()
    return payload


def write_tree_json(tree, entropy, path, heat_map=None):
    # type: (SkeletonTree, StructureEntropy, str, Optional[NodeHeatMap]) -> None
    write_json(tree_payload(tree, entropy, heat_map=heat_map), path)


def write_heat_json(heat_map, path, inactive=(), extra=None):
    # type: (NodeHeatMap, str, Sequence[str], Optional[Dict[str, Any]]) -> None
    payload = {
        'topic_temperature': heat_map.topic_temperature,
        'std': heat_map.std_temp(),
        'scaled': heat_map.scaled_temp() if heat_map.scaled is not None else None,
        'inactive': sorted(inactive),
    }
    payload.update(extra or {})
    write_json(payload, path)
