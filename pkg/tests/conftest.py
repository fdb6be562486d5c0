import pytest

from wsdlab import parse_corpus

# The running example used across test modules: a seven-token document with
# two sense-tagged targets (a verb at index 0, a noun at index 6).
TABLE_CORPUS = """#doc t1
mettre\tmettre\tVINF\tVINF\t1.12.7
fin\tfin\tNCFS\tNCOM\t
à\tà\tPREP\tPREP\t
la\tle\tDETDFS\tDET\t
pratique\tpratique\tNCFS\tNCOM\t
des\tde\tDETDPIG\tDET\t
détentions\tdétention\tNCFP\tNCOM\t1
"""


@pytest.fixture
def table_corpus():
    return parse_corpus(TABLE_CORPUS)
