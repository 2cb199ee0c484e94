import io
import json
import logging

import numpy as np
import pytest
from numpy.testing import assert_allclose

from rnda.errors import ValidationError
from rnda.tools import (load_algebra_matrix_file, load_hermitian_file, parse_hermitian,
                        read_json, timeit, write_json)


def write_doc(path, doc):
    path.write_text(json.dumps(doc))
    return str(path)


def planes_doc(planes, beta):
    planes = np.asarray(planes, dtype=np.float64)
    return {'m': planes.shape[-1], 'beta': beta, 'planes': planes.tolist()}


def test_parse_planes():
    doc = planes_doc([[[2.0, 0.5], [0.5, 1.0]], [[0.0, 0.3], [-0.3, 0.0]]], 2)
    S = parse_hermitian(doc)
    assert int(S.beta) == 2
    assert S.m == 2
    assert_allclose(S.planes, doc['planes'])


@pytest.mark.parametrize('doc, field', [
    ({'m': 2, 'beta': 2, 'planes': [np.eye(2).tolist()]}, 'matrix.planes'),
    ({'m': 2, 'beta': 3, 'planes': [np.eye(2).tolist()]}, 'matrix.beta'),
    ({'beta': 1, 'planes': [np.eye(2).tolist()]}, 'matrix.m'),
    ({'m': 2, 'beta': 1}, 'matrix.planes'),
    ({'m': 0, 'beta': 1, 'planes': [[[1.0]]]}, 'matrix.m'),
    ({'m': 3, 'beta': 1, 'planes': [np.eye(2).tolist()]}, 'matrix.planes'),
    ({'m': 2, 'beta': 1, 'planes': [[[1.0, 0.2], [0.0, 1.0]]]}, 'matrix.planes[0]'),
    ({'m': 2, 'beta': 2, 'planes': [np.eye(2).tolist(), [[0.1, 0.0], [0.0, 0.0]]]},
     'matrix.planes[1]'),
    ({'m': 1, 'beta': 1, 'planes': [[['x']]]}, 'matrix.planes'),
])
def test_parse_errors_name_field(doc, field):
    with pytest.raises(ValidationError) as err:
        parse_hermitian(doc)
    assert err.value.field == field
    assert str(err.value).startswith(field)


def test_parse_checks_expected_shape():
    doc = planes_doc([np.eye(2)], 1)
    with pytest.raises(ValidationError) as err:
        parse_hermitian(doc, beta=2, field='sigma')
    assert err.value.field == 'sigma.beta'
    with pytest.raises(ValidationError) as err:
        parse_hermitian(doc, m=3, field='sigma')
    assert err.value.field == 'sigma.m'


def test_parse_spectrum():
    S = parse_hermitian({'spectrum': [3.0, 2.0], 'logdet': float(np.log(6.0))}, beta=8)
    assert int(S.beta) == 8
    assert_allclose(S.spectrum().values, [3.0, 2.0])
    assert S.logdet() == pytest.approx(np.log(6.0))


@pytest.mark.parametrize('doc, kwargs, field', [
    ({'spectrum': [3.0, 2.0], 'logdet': 0.0}, {'beta': 8}, 'matrix.logdet'),
    ({'spectrum': [3.0, 2.0], 'logdet': 1.0}, {}, 'matrix.spectrum'),
    ({'spectrum': [3.0, 2.0]}, {'beta': 8}, 'matrix.logdet'),
    ({'spectrum': [], 'logdet': 0.0}, {'beta': 8}, 'matrix.spectrum'),
    ({'spectrum': [1.0], 'logdet': 0.0}, {'beta': 8, 'm': 2}, 'matrix.spectrum'),
])
def test_spectrum_errors(doc, kwargs, field):
    with pytest.raises(ValidationError) as err:
        parse_hermitian(doc, **kwargs)
    assert err.value.field == field


def test_read_json_errors(tmp_path):
    with pytest.raises(ValidationError) as err:
        read_json(str(tmp_path / 'missing.json'), field='sigma')
    assert err.value.field == 'sigma'
    bad = tmp_path / 'bad.json'
    bad.write_text('{"m": 1,')
    with pytest.raises(ValidationError) as err:
        read_json(str(bad))
    assert err.value.field == 'file'


def test_load_files(tmp_path):
    fname = write_doc(tmp_path / 'sigma.json', planes_doc([np.eye(3)], 1))
    S = load_hermitian_file(fname, beta=1, m=3, field='sigma')
    assert S.m == 3
    mu = write_doc(tmp_path / 'mu.json', {'beta': 2, 'planes': np.ones((2, 4, 3)).tolist()})
    X = load_algebra_matrix_file(mu, beta=2, field='mu')
    assert X.shape == (4, 3)
    with pytest.raises(ValidationError) as err:
        load_algebra_matrix_file(mu, beta=4, field='mu')
    assert err.value.field == 'mu.beta'


def test_write_json_is_canonical():
    a, b = io.StringIO(), io.StringIO()
    write_json({'value': 1.5, 'dist': 'wishart'}, a)
    write_json({'dist': 'wishart', 'value': 1.5}, b)
    assert a.getvalue() == b.getvalue()
    assert a.getvalue().endswith('\n')
    doc = json.loads(a.getvalue())
    assert doc['schema_version'] == 1
    assert list(doc) == sorted(doc)


def test_timeit_logs(caplog):
    @timeit
    def double(x):
        return 2 * x

    with caplog.at_level(logging.DEBUG, logger='rnda.tools'):
        assert double(4) == 8
    assert 'double took' in caplog.text
