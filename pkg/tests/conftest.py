import pytest

from qtilt.ring import cyclotomic_local, generic_field, integer_local, rational_field
from qtilt.rootsys import root_system


@pytest.fixture(scope="session")
def gf():
    return generic_field()


@pytest.fixture(scope="session")
def qq():
    return rational_field()


@pytest.fixture(scope="session")
def cyc3():
    return cyclotomic_local(3)


@pytest.fixture(scope="session")
def cyc5():
    return cyclotomic_local(5)


@pytest.fixture(scope="session")
def int3():
    return integer_local(3)


@pytest.fixture(scope="session")
def int5():
    return integer_local(5)


@pytest.fixture(scope="session")
def a1():
    return root_system("A1")


@pytest.fixture(scope="session")
def a2():
    return root_system("A2")


@pytest.fixture(scope="session")
def b2():
    return root_system("B2")


@pytest.fixture(scope="session")
def g2():
    return root_system("G2")
