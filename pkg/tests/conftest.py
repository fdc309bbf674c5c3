import sympy
import pytest

from phylolevel import Network, NetworkClass
from phylolevel.graph import ROOTED, UNROOTED

# the four class equations, typed in by hand from the printed forms;
# tests compare them against the package's term lists
Zs, Xs, Ys, Cs = sympy.symbols("z x y C")


def _printed_equations():
    z, x, y, C = Zs, Xs, Ys, Cs
    r = sympy.Rational
    q = 1 - y * C
    G = z + r(1, 2) * C**2 + r(1, 2) * x * y**3 * C**2 / q
    R = z + r(1, 2) * C**2 + x * C**2 * y**3 / q + x * C * r(1, 2) * (C * y**2 / q) ** 2
    U = (
        z + C**2 / 2 + x * y**3 * C**2 / (2 * q) + x * y**6 * C**2 / (2 * q) + r(3, 2) * x * y**6 * C**2
        + 5 * x * y**7 * C**3 / (2 * q) + 5 * x * y**8 * C**4 / (4 * q**2)
        + x * y**7 * C**3 + 3 * x * y**8 * C**4 / q + 3 * x * y**9 * C**5 / q**2 + x * y**10 * C**6 / q**3
        + x * y**8 * C**4 / 4 + x * y**9 * C**5 / q
        + 3 * x * y**10 * C**6 / (2 * q**2) + x * y**11 * C**7 / q**3 + x * y**12 * C**8 / (4 * q**4)
    )
    L = z + C**2 / 2 + x * (
        y**6 * C**2 / 2 + (y**3 + 6 * y**6) * C**2 / q
        + 3 * y**7 * C**3 / (2 * q) + (r(1, 2) * y**4 + r(27, 2) * y**7) * C**3 / q**2
        + r(15, 4) * y**8 * C**4 / q**2 + r(29, 2) * y**8 * C**4 / q**3
        + 5 * y**9 * C**5 / q**3 + r(15, 2) * y**9 * C**5 / q**4 + r(15, 4) * y**10 * C**6 / q**4
        + r(3, 2) * y**10 * C**6 / q**5
        + r(3, 2) * y**11 * C**7 / q**5 + y**6 * C**2 / q**6 + y**12 * C**8 / (4 * q**6)
    )
    return {
        NetworkClass.UNROOTED1: G,
        NetworkClass.ROOTED1: R,
        NetworkClass.UNROOTED2: U,
        NetworkClass.ROOTED2: L,
    }


PRINTED_EQUATIONS = _printed_equations()

# printed univariate phi functions
PRINTED_PHI = {
    NetworkClass.UNROOTED1: 1 / (1 - sympy.Rational(1, 2) * Zs * (1 + 1 / (1 - Zs))),
    NetworkClass.ROOTED1: 1 / (1 - Zs / 2 - Zs / (1 - Zs) - sympy.Rational(1, 2) * (Zs / (1 - Zs)) ** 2),
    NetworkClass.UNROOTED2: 1 / (1 - (3 * Zs**5 - 16 * Zs**4 + 32 * Zs**3 - 30 * Zs**2 + 12 * Zs) / (4 * (1 - Zs) ** 4)),
    NetworkClass.ROOTED2: 1
    / (1 - (36 * Zs - 102 * Zs**2 + 159 * Zs**3 - 148 * Zs**4 + 81 * Zs**5 - 24 * Zs**6 + 3 * Zs**7) / (4 * (1 - Zs) ** 6)),
}

KNOWN_COUNTS = {
    NetworkClass.UNROOTED1: (0, 1, 2, 15, 192, 3450),
    NetworkClass.ROOTED1: (1, 3, 36, 723, 20280, 730755),
    NetworkClass.UNROOTED2: (0, 1, 6, 135, 5052, 264270),
    NetworkClass.ROOTED2: (1, 18, 1143, 120078, 17643570, 3332111850),
}

EXAMPLE_NAMES = ["root", "a", "b", "c", "d", "e", "f", "g", "h", "i", "j", "l1", "l2", "l3", "l4", "l5", "l6"]
EXAMPLE_EDGES = [
    ("root", "a"), ("a", "b"), ("root", "b"), ("b", "c"), ("c", "l3"), ("c", "d"),
    ("d", "l1"), ("d", "l2"), ("a", "e"), ("e", "f"), ("f", "l4"), ("f", "g"),
    ("g", "h"), ("h", "l5"), ("e", "i"), ("i", "g"), ("i", "j"), ("j", "l6"), ("j", "h"),
]


def _example_network(kind, extra=()):
    names = EXAMPLE_NAMES + [a for e in extra for a in e if a not in EXAMPLE_NAMES]
    ids = {n: i for i, n in enumerate(names)}
    labels = {ids[n]: n for n in names if n.startswith("l")}
    if "lroot" in ids:
        labels[ids["lroot"]] = "#"
    return Network.make(kind, [(ids[a], ids[b]) for a, b in EXAMPLE_EDGES + list(extra)], labels)


@pytest.fixture
def example_rooted():
    return _example_network(ROOTED)


@pytest.fixture
def example_unrooted():
    # the right-hand picture: same edges undirected plus the leaf # on the root
    return _example_network(UNROOTED, [("root", "lroot")])


def cherry():
    return Network.make(ROOTED, [(0, 1), (0, 2)], {1: "1", 2: "2"})


# PASS/FAIL lines from test_acceptance.py, echoed at the end of the run
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
