import json
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from relconj.groups import group_from_spec, permutation_group  # noqa: E402

Z2 = {"kind": "finite", "generators": ["s"], "elements": ["e", "s"], "table": [[0, 1], [1, 0]], "generator_map": {"s": 1}}
Z3 = {"kind": "finite", "generators": ["t"], "table": [[0, 1, 2], [1, 2, 0], [2, 0, 1]], "generator_map": {"t": 1}}

SPECS = {
    "z2z3": {"kind": "free_product", "factors": [Z2, Z3]},
    "free_pq": {"kind": "free", "generators": ["p", "q"]},
    "zz_pq": {"kind": "free_product", "factors": [{"kind": "free", "generators": ["p"]}, {"kind": "free", "generators": ["q"]}]},
    "zz_uv": {
        "kind": "free_product",
        "factors": [
            {"kind": "abelian", "generators": ["u"], "rank": 1, "torsion": []},
            {"kind": "abelian", "generators": ["v"], "rank": 1, "torsion": []},
        ],
    },
    "z_z2": {
        "kind": "free_product",
        "factors": [
            {"kind": "abelian", "generators": ["u"], "rank": 1, "torsion": []},
            {"kind": "abelian", "generators": ["v", "w"], "rank": 2, "torsion": []},
        ],
    },
    "z2": {"kind": "abelian", "generators": ["u", "v"], "rank": 2, "torsion": []},
    "z3": Z3,
}


def make(name):
    return group_from_spec(SPECS[name])


@pytest.fixture(scope="session")
def z2z3():
    return make("z2z3")


@pytest.fixture(scope="session")
def free_pq():
    return make("free_pq")


@pytest.fixture(scope="session")
def zz_pq():
    return make("zz_pq")


@pytest.fixture(scope="session")
def zz_uv():
    return make("zz_uv")


@pytest.fixture(scope="session")
def z_z2():
    return make("z_z2")


@pytest.fixture(scope="session")
def s3():
    # a = (0 1), b = (1 2) as image tuples
    return permutation_group({"a": (1, 0, 2), "b": (0, 2, 1)})


@pytest.fixture
def write_json(tmp_path):
    def _write(name, obj):
        path = tmp_path / name
        path.write_text(json.dumps(obj))
        return path

    return _write
