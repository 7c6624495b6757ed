"""Ownership edge-list ingestion and degree extraction.

Edges run owner -> owned. A node's out-degree (diversification) counts the
distinct companies it holds shares in; its in-degree (integration) counts
the distinct companies holding shares in it.
"""

import os
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import pandas as pd
from pydantic import ValidationError

from ownership_entropy.errors import (
    DegenerateSampleError,
    EdgeListParseError,
    EmptyInputError,
    SupportRangeError,
)
from ownership_entropy.logging_config import get_logger
from ownership_entropy.models import (
    DegreeRecord,
    DegreeSample,
    EdgeList,
    EdgeRow,
    MarginalSamples,
)

logger = get_logger(__name__)

SEPARATORS = {'csv': ',', 'tsv': '\t'}
HEADER_TOKENS = ('owner', 'owned')


def _read_bytes(source) -> bytes:
    if isinstance(source, (bytes, bytearray)):
        return bytes(source)
    if hasattr(source, 'read'):
        data = source.read()
        return data.encode('utf-8') if isinstance(data, str) else data
    with open(source, 'rb') as f:
        return f.read()


def infer_format(path: Union[str, os.PathLike]) -> str:
    """Pick 'tsv' for .tsv/.tab files and 'csv' otherwise."""
    return 'tsv' if str(path).lower().endswith(('.tsv', '.tab')) else 'csv'


def _is_numeric(token: str) -> bool:
    try:
        float(token)
        return True
    except ValueError:
        return False


def _looks_like_header(parts: Sequence[str]) -> bool:
    lowered = [p.lower() for p in parts]
    if len(lowered) >= 2 and tuple(lowered[:2]) == HEADER_TOKENS:
        return True
    return len(parts) == 3 and bool(parts[2]) and not _is_numeric(parts[2])


def _row_error_message(error) -> str:
    # Map the first pydantic error of a row back to a short diagnostic
    field = str(error['loc'][0]).lower() if error['loc'] else ''
    if field in ('owner', 'owned'):
        return f"Invalid {field} token."
    if field == 'weight':
        return "Invalid ownership weight."
    return f"Invalid {field or 'row'}."


def normalize_edges(pairs: Iterable[Tuple[str, str]]) -> EdgeList:
    """Drop self-loops and collapse duplicate (owner, owned) pairs.

    First occurrences keep their input order, so normalizing an already
    normalized list returns the same edges with zero drop counts.
    """
    frame = pd.DataFrame(list(pairs), columns=['owner', 'owned'])
    loops = frame['owner'] == frame['owned']
    self_loops = int(loops.sum())
    frame = frame[~loops]
    before = len(frame)
    frame = frame.drop_duplicates(keep='first')
    duplicates = before - len(frame)

    if self_loops or duplicates:
        logger.info(f"Normalized edge list: {self_loops} self-loop(s), {duplicates} duplicate(s) dropped")

    return EdgeList(
        edges=tuple(zip(frame['owner'].tolist(), frame['owned'].tolist())),
        self_loops_dropped=self_loops,
        duplicates_dropped=duplicates,
    )


def load_edge_list(source, fmt: str = 'csv') -> EdgeList:
    """Parse an ownership edge list `owner,owned[,weight]` into a normalized EdgeList.

    Args:
        source: raw bytes, a binary file object, or a path
        fmt: 'csv' or 'tsv'

    Returns:
        EdgeList: self-loops dropped, duplicates collapsed, drop counts recorded

    Raises:
        EmptyInputError: no edge rows after comments, blanks and header
        EdgeListParseError: one or more malformed rows, with line numbers
    """
    if fmt not in SEPARATORS:
        raise EdgeListParseError([(0, f"Unsupported format '{fmt}' (expected csv or tsv).")])
    try:
        text = _read_bytes(source).decode('utf-8-sig')
    except UnicodeDecodeError as e:
        raise EdgeListParseError([(0, f"Input is not UTF-8 text: {e.reason}.")])

    raw_lines = text.splitlines()
    lines = pd.DataFrame({'line': range(1, len(raw_lines) + 1), 'text': raw_lines})
    lines['text'] = lines['text'].str.strip()
    lines = lines[(lines['text'] != '') & ~lines['text'].str.startswith('#')]
    if lines.empty:
        raise EmptyInputError("Edge list is empty.")

    fields = lines['text'].str.split(SEPARATORS[fmt]).apply(lambda parts: [p.strip() for p in parts])
    if _looks_like_header(fields.iloc[0]):
        lines, fields = lines.iloc[1:], fields.iloc[1:]
    if lines.empty:
        raise EmptyInputError("Edge list has a header but no edges.")

    errors = []  # List of (line_number, error_msg) tuples
    pairs = []
    for line_number, parts in zip(lines['line'], fields):
        if len(parts) not in (2, 3):
            errors.append((int(line_number), f"Expected 2 or 3 columns, found {len(parts)}."))
            continue
        try:
            row = EdgeRow.model_validate(dict(zip(('Owner', 'Owned', 'Weight'), parts)))
        except ValidationError as e:
            # Only report the first error per row for clarity
            errors.append((int(line_number), _row_error_message(e.errors()[0])))
            continue
        # The ownership fraction is validated but the analysis is topology-only
        pairs.append((row.owner, row.owned))

    if errors:
        logger.warning(f"Edge list rejected: {len(errors)} malformed row(s)")
        raise EdgeListParseError(errors)

    edge_list = normalize_edges(pairs)
    logger.info(f"Parsed {len(pairs)} edge row(s) into {len(edge_list.edges)} edge(s)")
    return edge_list


def degree_sequences(el: EdgeList) -> List[DegreeRecord]:
    """One DegreeRecord per node, in order of first appearance in the edge list."""
    frame = pd.DataFrame(list(el.edges), columns=['owner', 'owned'])
    if frame.empty:
        return []

    k_out = frame.groupby('owner', sort=False)['owned'].nunique()
    k_in = frame.groupby('owned', sort=False)['owner'].nunique()
    nodes = pd.unique(frame[['owner', 'owned']].to_numpy().ravel())

    return [
        DegreeRecord(node_id=str(node), k_in=int(k_in.get(node, 0)), k_out=int(k_out.get(node, 0)))
        for node in nodes
    ]


def degree_table(records: Sequence[DegreeRecord]) -> pd.DataFrame:
    """Degree records as a DataFrame with columns node_id, k_in, k_out."""
    return pd.DataFrame(
        [(r.node_id, r.k_in, r.k_out) for r in records],
        columns=['node_id', 'k_in', 'k_out'],
    )


def build_degree_sample(records: Sequence[DegreeRecord], mode: str = 'joint_positive',
                        n_in_max: Optional[int] = None,
                        n_out_max: Optional[int] = None) -> Union[DegreeSample, MarginalSamples]:
    """Filter degree records down to the analysis subset.

    joint_positive keeps (k_in, k_out) pairs of nodes with both degrees >= 1;
    marginal_positive keeps, independently for each degree, its strictly
    positive values. Support bounds default to the observed maxima.
    """
    if not records:
        raise EmptyInputError("No degree records to sample from.")

    if mode == 'marginal_positive':
        k_in = tuple(r.k_in for r in records if r.k_in >= 1)
        k_out = tuple(r.k_out for r in records if r.k_out >= 1)
        if not k_in or not k_out:
            raise DegenerateSampleError("A degree has no strictly positive values.")
        return MarginalSamples(k_in=k_in, k_out=k_out)

    if mode != 'joint_positive':
        raise ValueError(f"Unknown sample mode '{mode}'.")

    pairs = tuple((r.k_in, r.k_out) for r in records if r.k_in >= 1 and r.k_out >= 1)
    if not pairs:
        raise DegenerateSampleError("No node has both in-degree and out-degree positive.")

    observed_in = max(p[0] for p in pairs)
    observed_out = max(p[1] for p in pairs)
    n_in = observed_in if n_in_max is None else n_in_max
    n_out = observed_out if n_out_max is None else n_out_max
    if n_in < observed_in or n_out < observed_out:
        raise SupportRangeError(
            f"Support bounds [{n_in}]x[{n_out}] below observed maxima [{observed_in}]x[{observed_out}]."
        )

    logger.info(f"Joint degree sample: {len(pairs)} node(s) on [1..{n_in}]x[1..{n_out}]")
    return DegreeSample(pairs=pairs, n_in_max=n_in, n_out_max=n_out)
