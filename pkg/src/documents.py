"""
Input documents and certificates
JSON parsing with position-annotated errors, validation against the shipped
schemas, conversion to toolkit objects and canonical serialization
"""

import json
import logging
from pathlib import Path
from typing import Optional, Union

import jsonschema

from src.algebra import EpsilonModel, FieldElem, FieldParams, PolySeries, RamSeries
from src.cache import memoized
from src.config import EXPORT_CONFIG, LIFT_CONFIG
from src.errors import DocumentError
from src.kisin import UTKisinModule, encode_poly
from src.phigamma import TauMatrix, block_diagonal_tau, kernel_solutions

logger = logging.getLogger(__name__)

INPUT_SCHEMA = 'input_document.schema.json'
CERTIFICATE_SCHEMA = 'lift_certificate.schema.json'


@memoized
def load_schema(name: str) -> dict:
    path = Path(EXPORT_CONFIG['schema_dir']) / name
    with open(path, 'r', encoding='utf-8') as f:
        return json.load(f)


def _json_pointer(path) -> str:
    return '/' + '/'.join(str(part) for part in path)


def validate_against(document: dict, schema_name: str) -> dict:
    """
    Raises:
        DocumentError: the first schema violation, located by JSON pointer
    """
    validator = jsonschema.Draft7Validator(load_schema(schema_name))
    error = jsonschema.exceptions.best_match(validator.iter_errors(document))
    if error is not None:
        raise DocumentError(error.message, _json_pointer(error.absolute_path))
    return document


def parse_document(text: str, schema_name: str = INPUT_SCHEMA) -> dict:
    """
    Parse and validate a JSON document

    Args:
        text (str): Document text
        schema_name (str): Schema file under schemas/

    Returns:
        dict: The validated document

    Raises:
        DocumentError: Malformed JSON (line/column) or schema violation (JSON pointer)
    """
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise DocumentError(e.msg, f"line {e.lineno} column {e.colno}")
    if not isinstance(document, dict):
        raise DocumentError("document must be a JSON object", "/")
    return validate_against(document, schema_name)


def load_document(path: Union[str, Path], schema_name: str = INPUT_SCHEMA) -> dict:
    try:
        text = Path(path).read_text(encoding='utf-8')
    except OSError as e:
        logger.error(f"Cannot read {path}: {e}")
        raise DocumentError(f"cannot read {path}: {e.strerror}")
    logger.debug(f"Loaded document {path}")
    return parse_document(text, schema_name)


# ---------------------------------------------------------------------------
# Document -> objects
# ---------------------------------------------------------------------------

def field_params_from(document: dict) -> FieldParams:
    section = document['field_params']
    poly = section.get('defining_poly')
    try:
        return FieldParams(section['p'], section.get('f', 1), tuple(poly) if poly else None)
    except ValueError as e:
        raise DocumentError(str(e), '/field_params')


def _decode_coefficient(params: FieldParams, value, where: str) -> FieldElem:
    try:
        if isinstance(value, list):
            return params.from_coords(value)
        return params.scalar(value)
    except ValueError as e:
        raise DocumentError(str(e), where)


def _decode_series(params: FieldParams, values, where: str) -> list:
    return [_decode_coefficient(params, c, f"{where}/{k}") for k, c in enumerate(values)]


def _square(matrix, where: str) -> int:
    d = len(matrix)
    for i, row in enumerate(matrix):
        if len(row) != d:
            raise DocumentError(f"row has {len(row)} entries, expected {d}", f"{where}/{i}")
    return d


def module_from_document(document: dict) -> UTKisinModule:
    """
    The Kisin module of a document (r defaults to the largest diagonal degree)

    Raises:
        DocumentError: missing module, non-square matrix or inconsistent d
    """
    if 'kisin_module' not in document:
        raise DocumentError("document has no kisin_module", '/kisin_module')
    params = field_params_from(document)
    section = document['kisin_module']
    where = '/kisin_module/A_phi'
    d = _square(section['A_phi'], where)
    if section.get('d', d) != d:
        raise DocumentError(f"d = {section['d']} but A_phi is {d}x{d}", '/kisin_module/d')

    rows = [[PolySeries.from_elems(params, _decode_series(params, entry, f"{where}/{i}/{j}"))
             for j, entry in enumerate(row)] for i, row in enumerate(section['A_phi'])]
    r = section.get('r')
    if r is None:
        r = max(max(rows[i][i].degree, 0) for i in range(d))
    return UTKisinModule(params, d, rows, r)


def epsilon_model_from(document: dict, override: Optional[str] = None) -> EpsilonModel:
    try:
        return EpsilonModel.from_name(override or document.get('epsilon_model'))
    except ValueError as e:
        raise DocumentError(str(e), '/epsilon_model')


def tau_from_document(document: dict, module: UTKisinModule, model: Optional[EpsilonModel] = None,
                      precision: Optional[int] = None) -> Optional[TauMatrix]:
    """
    The tau-matrix of a document: explicit entries or a named construction

    Raises:
        DocumentError: entries of the wrong size, or a construction that does not apply
    """
    section = document.get('tau_matrix')
    if section is None:
        return None
    params = module.params
    N = precision or section.get('N') or document.get('precision')
    construction = section.get('construction')

    if construction == 'rank1_diagonal':
        off_diagonal = [(i, j) for i in range(module.d) for j in range(module.d)
                        if i != j and not module.A_phi[i][j].is_zero()]
        if off_diagonal:
            raise DocumentError("rank1_diagonal needs a diagonal A_phi", '/tau_matrix/construction')
        return block_diagonal_tau(params, module.weights, N, model)
    if construction == 'kernel_sample':
        return kernel_solutions(module, N, count=1, seed=section.get('seed', 0), model=model)[0]

    where = '/tau_matrix/entries'
    d = _square(section['entries'], where)
    if d != module.d:
        raise DocumentError(f"tau_matrix is {d}x{d} but the module has rank {module.d}", where)
    N = section['N']
    entries = [[RamSeries(params, tuple(c.value for c in _decode_series(params, entry, f"{where}/{i}/{j}")),
                          N, exact=False)
                for j, entry in enumerate(row)] for i, row in enumerate(section['entries'])]
    return TauMatrix(d, entries, N)


def weights_from(document: dict) -> tuple:
    if 'weights' in document:
        return tuple(document['weights'])
    return module_from_document(document).weights


# ---------------------------------------------------------------------------
# Objects -> documents
# ---------------------------------------------------------------------------

def module_document(module: UTKisinModule, **extra) -> dict:
    """Canonical input document for a module, plus any extra top-level fields"""
    document = {
        'schema_version': LIFT_CONFIG['schema_version'],
        'field_params': module.params.to_dict(),
        'kisin_module': {
            'd': module.d,
            'r': module.r,
            'A_phi': [[encode_poly(entry) for entry in row] for row in module.A_phi],
        },
    }
    document.update({key: value for key, value in extra.items() if value is not None})
    return document


def canonicalize(document: dict) -> dict:
    """
    Normal form of a validated input document

    Field parameters are made explicit, coefficient lists trimmed and
    coefficients reduced; the other fields pass through.
    """
    canonical = dict(document)
    canonical['field_params'] = field_params_from(document).to_dict()
    if 'kisin_module' in document:
        canonical['kisin_module'] = module_document(module_from_document(document))['kisin_module']
    return canonical


def dumps(document: dict) -> str:
    """Canonical JSON text: sorted keys, two-space indent, trailing newline"""
    return json.dumps(document, sort_keys=True, indent=2) + '\n'


def validate_certificate(document: dict) -> dict:
    return validate_against(document, CERTIFICATE_SCHEMA)
